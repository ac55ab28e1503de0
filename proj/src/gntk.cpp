// Copyright 2026 The graphcondense Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "graphcondense/gntk.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <numbers>

#include "graphcondense/coreset.hpp"
#include "graphcondense/io.hpp"
#include "graphcondense/parallel.hpp"

namespace graphcondense::gntk {

std::string to_string(Aggregation a) { return a == Aggregation::Normalized ? "normalized" : "plain-sum"; }

Aggregation parse_aggregation(const std::string &name) {
    if (name == "normalized") { return Aggregation::Normalized; }
    if (name == "plain-sum" || name == "sum") { return Aggregation::PlainSum; }
    throw ConfigError("unknown aggregation '" + name + "' (expected normalized or plain-sum)");
}

std::string to_string(Block b) {
    switch (b) {
        case Block::SS: return "SS";
        case Block::VS: return "VS";
        case Block::VV: return "VV";
        case Block::Other: return "other";
    }
    return "?";
}

void GntkConfig::validate() const {
    if (layers < 1) { throw ConfigError("GNTK layers must be >= 1"); }
    if (fc_per_layer < 1) { throw ConfigError("GNTK fc steps per layer must be >= 1"); }
    if (!(ridge_factor > 0.0) && !(ridge > 0.0)) { throw ConfigError("GNTK ridge must resolve to a positive value"); }
    if (!(relu_scale > 0.0)) { throw ConfigError("ReLU scale must be > 0"); }
    if (val_cap == 0) { throw ConfigError("validation cap must be >= 1"); }
}

DualValue relu_dual(double sigma_uu, double sigma_uv, double sigma_vv, double c) {
    if (sigma_uu < 0.0 || sigma_vv < 0.0) { throw std::domain_error("relu_dual: negative variance"); }
    if (sigma_uu == 0.0 || sigma_vv == 0.0) { return {}; }
    const double norm = std::sqrt(sigma_uu * sigma_vv);
    const double rho = std::clamp(sigma_uv / norm, -1.0, 1.0);
    const double theta = std::acos(rho);
    const double scale = c / (2.0 * std::numbers::pi);
    return {scale * norm * (std::sin(theta) + (std::numbers::pi - theta) * rho), scale * (std::numbers::pi - theta)};
}

SparseMatrix make_aggregator(const graph::GraphDataset &ds, Aggregation mode) {
    if (mode == Aggregation::Normalized) { return graph::normalize_adjacency(ds.edges, ds.num_nodes).matrix; }
    return graph::adjacency_with_self_loops(ds.edges, ds.num_nodes);
}

namespace {

// The products below fix the summation order of every entry so that
// transposing the inputs transposes the result bit for bit.

Matrix gram(const Matrix &a, const Matrix &b) {
    Matrix out(a.rows(), b.rows());
    const Eigen::Index d = a.cols();
    parallel_for(static_cast<std::size_t>(a.rows()), [&](std::size_t r) {
        const auto i = static_cast<Eigen::Index>(r);
        const double *x = a.row(i).data();
        for (Eigen::Index j = 0; j < b.rows(); ++j) {
            const double *y = b.row(j).data();
            double s = 0.0;
            for (Eigen::Index k = 0; k < d; ++k) { s += x[k] * y[k]; }
            out(i, j) = s;
        }
    });
    return out;
}

// (A · M)[u, j] = Σ_v A[u, v] M[v, j], v in stored order.
Matrix left_mul(const SparseMatrix &a, const Matrix &m) {
    Matrix out = Matrix::Zero(a.rows(), m.cols());
    parallel_for(static_cast<std::size_t>(a.rows()), [&](std::size_t r) {
        const auto u = static_cast<Eigen::Index>(r);
        for (SparseMatrix::InnerIterator it(a, u); it; ++it) { out.row(u) += it.value() * m.row(it.col()); }
    });
    return out;
}

// (M · Aᵀ) computed as (A · Mᵀ)ᵀ.
Matrix right_mul_t(const Matrix &m, const SparseMatrix &a) {
    const Matrix mt = m.transpose();
    return left_mul(a, mt).transpose();
}

Matrix aggregate(const SparseMatrix *a1, const Matrix &m, const SparseMatrix *a2) {
    if (a1 == nullptr && a2 == nullptr) { return m; }
    if (a2 == nullptr) { return left_mul(*a1, m); }
    if (a1 == nullptr) { return right_mul_t(m, *a2); }
    // Averaging both association orders keeps K(G1,G2) = K(G2,G1)ᵀ exact.
    const Matrix right_first = left_mul(*a1, right_mul_t(m, *a2));
    const Matrix left_first = right_mul_t(left_mul(*a1, m), *a2);
    return 0.5 * (right_first + left_first);
}

Vector checked_diagonal(const Matrix &sigma) {
    Vector d = sigma.diagonal();
    const double scale = d.size() > 0 ? d.cwiseAbs().maxCoeff() : 0.0;
    for (Eigen::Index i = 0; i < d.size(); ++i) {
        if (d(i) < 0.0) {
            if (d(i) < -1e-12 * scale) {
                throw NumericalError("gntk", "negative variance " + io::format_double(d(i)) + " at node " +
                                                 std::to_string(i));
            }
            d(i) = 0.0;  // rounding
        }
    }
    return d;
}

void check_views(const GraphView &g1, const GraphView &g2) {
    if (g1.features.cols() != g2.features.cols()) {
        throw std::invalid_argument("gntk: feature dimensions differ (" + std::to_string(g1.features.cols()) +
                                    " vs " + std::to_string(g2.features.cols()) + ")");
    }
    for (const GraphView *g : {&g1, &g2}) {
        if (g->aggregator != nullptr && g->aggregator->rows() != g->features.rows()) {
            throw std::invalid_argument("gntk: aggregator size does not match feature rows");
        }
    }
}

}  // namespace

SideStats side_statistics(const GraphView &g, const GntkConfig &cfg) {
    cfg.validate();
    SideStats out;
    Matrix sigma = gram(g.features, g.features);
    for (int l = 0; l < cfg.layers; ++l) {
        sigma = aggregate(g.aggregator, sigma, g.aggregator);
        for (int b = 0; b < cfg.fc_per_layer; ++b) {
            Vector var = checked_diagonal(sigma);
            for (Eigen::Index u = 0; u < sigma.rows(); ++u) {
                for (Eigen::Index v = 0; v < sigma.cols(); ++v) {
                    sigma(u, v) = relu_dual(var(u), sigma(u, v), var(v), cfg.relu_scale).sigma;
                }
            }
            out.variances.push_back(std::move(var));
        }
    }
    return out;
}

KernelMatrix cross_kernel(const GraphView &g1, const SideStats &s1, const GraphView &g2, const SideStats &s2,
                          const GntkConfig &cfg, Block block) {
    cfg.validate();
    check_views(g1, g2);
    const auto steps = static_cast<std::size_t>(cfg.layers * cfg.fc_per_layer);
    if (s1.variances.size() != steps || s2.variances.size() != steps) {
        throw std::invalid_argument("gntk: side statistics do not match the configuration");
    }
    Matrix sigma = gram(g1.features, g2.features);
    Matrix kernel = sigma;
    std::size_t step = 0;
    for (int l = 0; l < cfg.layers; ++l) {
        sigma = aggregate(g1.aggregator, sigma, g2.aggregator);
        kernel = aggregate(g1.aggregator, kernel, g2.aggregator);
        for (int b = 0; b < cfg.fc_per_layer; ++b, ++step) {
            const Vector &v1 = s1.variances[step];
            const Vector &v2 = s2.variances[step];
            for (Eigen::Index u = 0; u < sigma.rows(); ++u) {
                for (Eigen::Index w = 0; w < sigma.cols(); ++w) {
                    const DualValue d = relu_dual(v1(u), sigma(u, w), v2(w), cfg.relu_scale);
                    kernel(u, w) = kernel(u, w) * d.sigma_dot + d.sigma;
                    sigma(u, w) = d.sigma;
                }
            }
        }
    }
    if (!kernel.allFinite()) { throw NumericalError("gntk", "non-finite kernel entry"); }
    return {std::move(kernel), block};
}

KernelMatrix gntk_node_kernel(const GraphView &g1, const GraphView &g2, const GntkConfig &cfg, Block block) {
    check_views(g1, g2);
    return cross_kernel(g1, side_statistics(g1, cfg), g2, side_statistics(g2, cfg), cfg, block);
}

Matrix krr_predict(const Matrix &k_ss, const Matrix &k_vs, const Matrix &targets, double lambda) {
    if (k_ss.rows() != k_ss.cols()) { throw std::invalid_argument("krr_predict: K_SS must be square"); }
    if (k_vs.cols() != k_ss.rows() || targets.rows() != k_ss.rows()) {
        throw std::invalid_argument("krr_predict: shape mismatch");
    }
    if (!(lambda > 0.0)) { throw std::invalid_argument("krr_predict: lambda must be > 0"); }
    Eigen::MatrixXd system = k_ss;
    system.diagonal().array() += lambda;
    const Eigen::LLT<Eigen::MatrixXd> llt(system);
    if (llt.info() != Eigen::Success) {
        throw NumericalError("krr", "Cholesky factorization failed with lambda=" + io::format_double(lambda));
    }
    const Eigen::MatrixXd coef = llt.solve(Eigen::MatrixXd(targets));
    return k_vs * coef;
}

double resolve_ridge(const Matrix &k_ss, const GntkConfig &cfg) {
    if (cfg.ridge > 0.0) { return cfg.ridge; }
    const double mean_diag = k_ss.rows() > 0 ? k_ss.diagonal().mean() : 0.0;
    return mean_diag > 0.0 ? cfg.ridge_factor * mean_diag : cfg.ridge_factor;
}

Matrix one_hot(std::span<const ClassId> labels, std::size_t num_classes) {
    Matrix y = Matrix::Zero(static_cast<Eigen::Index>(labels.size()), static_cast<Eigen::Index>(num_classes));
    for (std::size_t i = 0; i < labels.size(); ++i) { y(static_cast<Eigen::Index>(i), labels[i]) = 1.0; }
    return y;
}

GnfScorer::GnfScorer(const graph::GraphDataset &ds, GntkConfig cfg) : cfg_(cfg) {
    cfg_.validate();
    if (ds.splits.val.empty()) { throw std::invalid_argument("gnf_score: dataset has no validation split"); }
    std::vector<NodeId> ids = ds.splits.val;
    if (ids.size() > cfg_.val_cap) {
        Rng rng(cfg_.seed);
        ids = coreset::random_select(ids, cfg_.val_cap, rng);
        std::sort(ids.begin(), ids.end());
    }
    val_ = graph::induced_subgraph(ds, ids);
    aggregator_ = make_aggregator(val_, cfg_.aggregation);
    val_stats_ = side_statistics(GraphView{val_.features, &aggregator_}, cfg_);
    targets_ = one_hot(val_.labels, ds.num_classes);
}

double GnfScorer::score(const Matrix &features, std::span<const ClassId> labels) const {
    if (features.rows() == 0) { throw std::invalid_argument("gnf_score: empty condensed set"); }
    if (static_cast<std::size_t>(features.rows()) != labels.size()) {
        throw std::invalid_argument("gnf_score: label count != condensed rows");
    }
    const GraphView s{features, nullptr};
    const GraphView v{val_.features, &aggregator_};
    const SideStats s_stats = side_statistics(s, cfg_);
    const Matrix k_ss = cross_kernel(s, s_stats, s, s_stats, cfg_, Block::SS).values;
    const Matrix k_vs = cross_kernel(v, val_stats_, s, s_stats, cfg_, Block::VS).values;
    const Matrix pred = krr_predict(k_ss, k_vs, one_hot(labels, static_cast<std::size_t>(targets_.cols())),
                                    resolve_ridge(k_ss, cfg_));
    return 0.5 * (targets_ - pred).squaredNorm();
}

double gnf_score(const graph::GraphDataset &ds, const Matrix &features, std::span<const ClassId> labels,
                 const GntkConfig &cfg) {
    return GnfScorer(ds, cfg).score(features, labels);
}

void write_kernel(const KernelMatrix &k, const std::filesystem::path &path) {
    std::string bytes(static_cast<std::size_t>(k.values.size()) * sizeof(double), '\0');
    std::memcpy(bytes.data(), k.values.data(), bytes.size());
    io::write_file_atomic(path, bytes);
    std::filesystem::path sidecar = path;
    sidecar += ".json";
    io::write_json(sidecar, {{"rows", k.values.rows()}, {"cols", k.values.cols()}, {"block", to_string(k.block)}});
}

}  // namespace graphcondense::gntk
