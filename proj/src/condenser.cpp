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

#include "graphcondense/condenser.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>
#include <numeric>
#include <sstream>

#include "graphcondense/coreset.hpp"
#include "graphcondense/io.hpp"

namespace graphcondense::condenser {

namespace fs = std::filesystem;

void save_condensed(const CondensedData &cd, const fs::path &dir) {
    fs::create_directories(dir);
    io::write_json(dir / "meta.json", {{"source", cd.source},
                                       {"ratio", cd.ratio},
                                       {"n_prime", cd.size()},
                                       {"d", cd.features.cols()},
                                       {"C", cd.num_classes},
                                       {"step", cd.step}});
    const Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> f = cd.features.cast<float>();
    io::write_file_atomic(dir / "features.bin", io::encode_f32({f.data(), static_cast<std::size_t>(f.size())}));
    io::write_file_atomic(dir / "labels.bin", io::encode_u32(cd.labels));
}

CondensedData load_condensed(const fs::path &dir) {
    if (!fs::is_directory(dir)) { throw FormatError("missing condensed-data directory: " + dir.string()); }
    const auto meta = io::read_json(dir / "meta.json");
    CondensedData cd;
    std::size_t n = 0;
    std::size_t d = 0;
    try {
        cd.source = meta.at("source").get<std::string>();
        cd.ratio = meta.at("ratio").get<double>();
        n = meta.at("n_prime").get<std::size_t>();
        d = meta.at("d").get<std::size_t>();
        cd.num_classes = meta.at("C").get<std::size_t>();
        cd.step = meta.at("step").get<int>();
    } catch (const nlohmann::json::exception &e) {
        throw FormatError("bad condensed meta.json in " + dir.string() + ": " + e.what());
    }
    const auto feats = io::read_f32(dir / "features.bin");
    if (feats.size() != n * d) { throw FormatError("condensed features.bin length mismatch in " + dir.string()); }
    cd.features = Eigen::Map<const Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
                      feats.data(), static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d))
                      .cast<double>();
    cd.labels = io::read_u32(dir / "labels.bin");
    if (cd.labels.size() != n) { throw FormatError("condensed labels.bin length mismatch in " + dir.string()); }
    for (ClassId c : cd.labels) {
        if (c >= cd.num_classes) { throw FormatError("condensed label out of range in " + dir.string()); }
    }
    return cd;
}

std::vector<std::size_t> plan_labels(const graph::GraphDataset &ds, double ratio, bool inductive) {
    if (!(ratio > 0.0)) { throw ConfigError("condensation ratio must be > 0"); }
    const std::vector<std::size_t> freq = graph::train_class_counts(ds);
    const std::size_t n_train = ds.splits.train.size();
    const std::size_t n_ref = inductive ? n_train : ds.num_nodes;
    const auto total = static_cast<std::size_t>(std::llround(ratio * static_cast<double>(n_ref)));
    if (total < ds.num_classes || n_train == 0) {
        throw ConfigError("ratio " + io::format_double(ratio) + " gives " + std::to_string(total) +
                          " condensed nodes, fewer than the " + std::to_string(ds.num_classes) + " classes");
    }
    const std::size_t c_count = ds.num_classes;
    std::vector<double> quota(c_count);
    std::vector<std::size_t> counts(c_count);
    for (std::size_t c = 0; c < c_count; ++c) {
        quota[c] = static_cast<double>(total * freq[c]) / static_cast<double>(n_train);
        counts[c] = std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(quota[c])));
    }
    std::size_t sum = std::accumulate(counts.begin(), counts.end(), std::size_t{0});
    while (sum < total) {
        std::size_t pick = 0;
        for (std::size_t c = 1; c < c_count; ++c) {
            if (quota[c] - static_cast<double>(counts[c]) > quota[pick] - static_cast<double>(counts[pick])) {
                pick = c;
            }
        }
        ++counts[pick];
        ++sum;
    }
    while (sum > total) {
        std::size_t pick = c_count;
        for (std::size_t c = 0; c < c_count; ++c) {
            if (counts[c] <= 1) { continue; }
            if (pick == c_count ||
                quota[c] - static_cast<double>(counts[c]) < quota[pick] - static_cast<double>(counts[pick])) {
                pick = c;
            }
        }
        --counts[pick];
        --sum;
    }
    return counts;
}

CondensedData kcenter_init(const graph::GraphDataset &ds, std::span<const std::size_t> counts, Rng &rng,
                           std::vector<NodeId> *selected) {
    if (counts.size() != ds.num_classes) { throw std::invalid_argument("kcenter_init: one count per class"); }
    const auto by_class = coreset::train_nodes_by_class(ds);
    const Matrix emb = coreset::selection_embedding(ds);
    std::vector<NodeId> picked;
    std::vector<ClassId> labels;
    for (std::size_t c = 0; c < by_class.size(); ++c) {
        const auto &cand = by_class[c];
        std::vector<NodeId> part = coreset::kcenter_select(emb, cand, std::min(counts[c], cand.size()));
        if (counts[c] > cand.size()) {
            std::cerr << "warning: class " << c << " has " << cand.size() << " training nodes but " << counts[c]
                      << " were requested; sampling the remainder with replacement\n";
            std::uniform_int_distribution<std::size_t> pick(0, cand.size() - 1);
            while (part.size() < counts[c]) { part.push_back(cand[pick(rng)]); }
        }
        picked.insert(picked.end(), part.begin(), part.end());
        labels.insert(labels.end(), part.size(), static_cast<ClassId>(c));
    }
    CondensedData cd;
    cd.features.resize(static_cast<Eigen::Index>(picked.size()), static_cast<Eigen::Index>(ds.num_features));
    for (std::size_t k = 0; k < picked.size(); ++k) {
        cd.features.row(static_cast<Eigen::Index>(k)) = ds.features.row(picked[k]);
    }
    cd.labels = std::move(labels);
    cd.num_classes = ds.num_classes;
    cd.source = ds.name;
    cd.ratio = ds.num_nodes > 0 ? static_cast<double>(picked.size()) / static_cast<double>(ds.num_nodes) : 0.0;
    if (selected != nullptr) { *selected = std::move(picked); }
    return cd;
}

namespace {

std::vector<NodeId> all_rows(std::size_t n) {
    std::vector<NodeId> idx(n);
    std::iota(idx.begin(), idx.end(), NodeId{0});
    return idx;
}

int resolve_stride(int stride, int steps) {
    if (stride > 0) { return stride; }
    return std::max(1, static_cast<int>(std::ceil(std::sqrt(static_cast<double>(steps)))));
}

// One plain-GD step of the student; matches gnn::train with the same inputs.
gnn::ParamVector student_step(const gnn::GnnArch &arch, const gnn::PreparedInput &in, std::span<const ClassId> labels,
                              std::span<const NodeId> mask, const gnn::ParamVector &theta, double step_size,
                              int index) {
    const gnn::LossGrad lg = gnn::loss_and_grad(arch, in, labels, mask, theta, 0.0);
    gnn::ParamVector next = theta - step_size * lg.grad;
    if (!std::isfinite(lg.loss) || !next.allFinite()) {
        throw NumericalError("unroll", "non-finite student parameters at step " + std::to_string(index + 1));
    }
    return next;
}

}  // namespace

std::pair<gnn::ParamVector, StudentTape> unroll_student(const gnn::GnnArch &arch, const Matrix &features,
                                                        std::span<const ClassId> labels, const gnn::ParamVector &start,
                                                        int steps, double step_size, int stride) {
    if (static_cast<std::size_t>(start.size()) != arch.param_count()) {
        throw std::invalid_argument("unroll_student: start parameters do not match the architecture");
    }
    if (steps < 0) { throw std::invalid_argument("unroll_student: negative step count"); }
    StudentTape tape;
    tape.steps = steps;
    tape.step_size = step_size;
    tape.stride = resolve_stride(stride, steps);
    const gnn::PreparedInput in = gnn::prepare_input(arch, gnn::Topology::identity(), features);
    const std::vector<NodeId> mask = all_rows(labels.size());

    gnn::ParamVector theta = start;
    for (int k = 0; k < steps; ++k) {
        if (k % tape.stride == 0) { tape.checkpoints.push_back(theta); }
        theta = student_step(arch, in, labels, mask, theta, step_size, k);
    }
    if (steps == 0) { tape.checkpoints.push_back(theta); }
    tape.end = theta;
    return {theta, std::move(tape)};
}

gnn::ParamVector replay(const gnn::GnnArch &arch, const Matrix &features, std::span<const ClassId> labels,
                        const StudentTape &tape) {
    if (tape.checkpoints.empty()) { throw std::invalid_argument("replay: empty tape"); }
    return unroll_student(arch, features, labels, tape.checkpoints.front(), tape.steps, tape.step_size, tape.stride)
        .first;
}

double meta_match_loss(const gnn::ParamVector &student_start, const gnn::ParamVector &student_end,
                       const gnn::ParamVector &expert_target) {
    if (student_start.size() != student_end.size() || student_start.size() != expert_target.size()) {
        throw std::invalid_argument("meta_match_loss: parameter lengths differ");
    }
    const double denom = (student_start - expert_target).squaredNorm();
    if (!(denom > 1e-12)) {
        throw DegenerateSegment("expert segment has no motion (squared distance " + io::format_double(denom) + ")");
    }
    return (student_end - expert_target).squaredNorm() / denom;
}

void MetaMatchConfig::validate() const {
    if (expert_epochs <= 0) { throw ConfigError("p (expert epochs) must be > 0"); }
    if (student_steps <= 0) { throw ConfigError("q (student steps) must be > 0"); }
    if (!(student_lr > 0.0)) { throw ConfigError("student step size must be > 0"); }
    if (!(meta_lr > 0.0)) { throw ConfigError("meta-matching learning rate must be > 0"); }
    if (iterations < 0) { throw ConfigError("iterations must be >= 0"); }
    if (score_every < 1) { throw ConfigError("score_every must be >= 1"); }
    if (batch < 1) { throw ConfigError("segment batch must be >= 1"); }
}

std::pair<gnn::ParamVector, Matrix> student_gradient_vjp(const gnn::GnnArch &arch, const Matrix &x,
                                                         std::span<const ClassId> labels,
                                                         const gnn::ParamVector &params,
                                                         const gnn::ParamVector &cotangent) {
    const auto w1 = gnn::first_weight(arch, params);
    const auto w2 = gnn::second_weight(arch, params);
    const auto v1 = gnn::first_weight(arch, cotangent);
    const auto v2 = gnn::second_weight(arch, cotangent);
    const double inv_n = 1.0 / static_cast<double>(x.rows());

    // Forward through the gradient computation.
    const Matrix pre = x * w1;
    const Matrix mask = arch.uses_relu() ? Matrix((pre.array() > 0.0).cast<double>().matrix())
                                         : Matrix::Ones(pre.rows(), pre.cols());
    const Matrix hidden = pre.cwiseProduct(mask);
    const Matrix prob = gnn::softmax_rows(hidden * w2);
    Matrix dlogits = prob;
    for (std::size_t i = 0; i < labels.size(); ++i) { dlogits(static_cast<Eigen::Index>(i), labels[i]) -= 1.0; }
    dlogits *= inv_n;
    const Matrix dpre = (dlogits * w2.transpose()).cwiseProduct(mask);

    // gW1 = Xᵀ dpre,  gW2 = hiddenᵀ dlogits.
    Matrix x_bar = dpre * v1.transpose();
    const Matrix dpre_bar = (x * v1).cwiseProduct(mask);
    const Matrix dlogits_bar = dpre_bar * w2 + hidden * v2;
    Matrix w2_bar = dpre_bar.transpose() * dlogits;
    Matrix hidden_bar = dlogits * v2.transpose();

    const Matrix prob_bar = dlogits_bar * inv_n;
    const Eigen::VectorXd inner = prob_bar.cwiseProduct(prob).rowwise().sum();
    const Matrix logits_bar = prob.cwiseProduct(prob_bar - inner.replicate(1, prob.cols()));
    hidden_bar += logits_bar * w2.transpose();
    w2_bar += hidden.transpose() * logits_bar;

    const Matrix pre_bar = hidden_bar.cwiseProduct(mask);
    x_bar += pre_bar * w1.transpose();
    const Matrix w1_bar = x.transpose() * pre_bar;
    return {gnn::flatten(w1_bar, w2_bar), std::move(x_bar)};
}

MetaGrad meta_match_grad(const gnn::GnnArch &arch, const Matrix &features, std::span<const ClassId> labels,
                         const trajectory::Segment &segment, const MetaMatchConfig &cfg) {
    const int q = cfg.student_steps;
    const double zeta = cfg.student_lr;
    auto [end, tape] = unroll_student(arch, features, labels, segment.start, q, zeta, cfg.tape_stride);

    MetaGrad out;
    out.loss = meta_match_loss(segment.start, end, segment.target);
    out.grad = Matrix::Zero(features.rows(), features.cols());
    if (q == 0) { return out; }

    const double denom = (segment.start - segment.target).squaredNorm();
    gnn::ParamVector adjoint = 2.0 * (end - segment.target) / denom;

    const gnn::PreparedInput in = gnn::prepare_input(arch, gnn::Topology::identity(), features);
    const std::vector<NodeId> mask = all_rows(labels.size());
    std::vector<gnn::ParamVector> states;
    for (int c = static_cast<int>(tape.checkpoints.size()) - 1; c >= 0; --c) {
        const int first = c * tape.stride;
        const int last = std::min(q, first + tape.stride);
        states.assign(1, tape.checkpoints[static_cast<std::size_t>(c)]);
        for (int k = first; k + 1 < last; ++k) {
            states.push_back(student_step(arch, in, labels, mask, states.back(), zeta, k));
        }
        for (int k = last - 1; k >= first; --k) {
            // θ_{k+1} = θ_k − ζ g(θ_k, X̃)
            const gnn::ParamVector cot = -zeta * adjoint;
            auto [theta_bar, x_bar] =
                student_gradient_vjp(arch, features, labels, states[static_cast<std::size_t>(k - first)], cot);
            out.grad += x_bar;
            adjoint += theta_bar;
        }
    }
    return out;
}

CondenseResult condense(const graph::GraphDataset &ds, const trajectory::TrajectoryBank &bank,
                        const CondenseConfig &cfg) {
    cfg.match.validate();
    if (bank.arch.input_dim != ds.num_features || bank.arch.num_classes != ds.num_classes) {
        throw ConfigError("bank architecture does not match the dataset dimensions");
    }
    const MetaMatchConfig &mc = cfg.match;
    const int max_start = mc.max_start_epoch < 0 ? bank.epochs / 2 : mc.max_start_epoch;

    Rng rng(mc.seed);
    const std::vector<std::size_t> counts = plan_labels(ds, cfg.ratio, cfg.inductive);
    CondensedData current = kcenter_init(ds, counts, rng);
    current.ratio = cfg.ratio;
    current.step = 0;
    const std::vector<ClassId> labels = current.labels;

    const gntk::GnfScorer scorer(ds, cfg.gntk);
    CondenseResult res;
    constexpr double nan = std::numeric_limits<double>::quiet_NaN();
    // Checkpoints are scored as stored, at 32-bit precision.
    auto checkpoint = [&](int step, CondenseLogRow &row) {
        CondensedData snap = current;
        snap.step = step;
        snap.features = current.features.cast<float>().cast<double>();
        row.gnf_score = scorer.score(snap.features, labels);
        if (!std::isfinite(row.gnf_score)) { throw NumericalError("score", "non-finite score at step " + std::to_string(step)); }
        res.checkpoints.push_back(std::move(snap));
        res.checkpoint_scores.push_back(row.gnf_score);
    };

    CondenseLogRow first{0, nan, nan};
    checkpoint(0, first);
    res.log.push_back(first);

    Matrix m1 = Matrix::Zero(current.features.rows(), current.features.cols());
    Matrix m2 = m1;
    constexpr int kMaxAttempts = 100;
    for (int step = 1; step <= mc.iterations; ++step) {
        Matrix grad = Matrix::Zero(current.features.rows(), current.features.cols());
        double loss = 0.0;
        for (int b = 0; b < mc.batch; ++b) {
            bool done = false;
            for (int attempt = 0; attempt < kMaxAttempts && !done; ++attempt) {
                const trajectory::Segment seg = trajectory::sample_segment(bank, rng, mc.expert_epochs, max_start);
                try {
                    MetaGrad mg = meta_match_grad(bank.arch, current.features, labels, seg, mc);
                    grad += mg.grad;
                    loss += mg.loss;
                    done = true;
                } catch (const DegenerateSegment &) {}
            }
            if (!done) { throw NumericalError("condense", "all sampled expert segments are degenerate"); }
        }
        grad /= static_cast<double>(mc.batch);
        loss /= static_cast<double>(mc.batch);

        if (mc.outer_optimizer == gnn::Optimizer::GradientDescent) {
            current.features -= mc.meta_lr * grad;
        } else {
            constexpr double beta1 = 0.9;
            constexpr double beta2 = 0.999;
            constexpr double eps = 1e-8;
            m1 = beta1 * m1 + (1.0 - beta1) * grad;
            m2 = beta2 * m2 + (1.0 - beta2) * grad.cwiseProduct(grad);
            const double c1 = 1.0 - std::pow(beta1, step);
            const double c2 = 1.0 - std::pow(beta2, step);
            current.features.array() -= mc.meta_lr * (m1.array() / c1) / ((m2.array() / c2).sqrt() + eps);
        }
        if (!current.features.allFinite() || !std::isfinite(loss)) {
            throw NumericalError("condense", "non-finite condensed features at step " + std::to_string(step));
        }
        CondenseLogRow row{step, loss, nan};
        if (step % mc.score_every == 0 || step == mc.iterations) { checkpoint(step, row); }
        res.log.push_back(row);
    }

    const auto best = static_cast<std::size_t>(
        std::min_element(res.checkpoint_scores.begin(), res.checkpoint_scores.end()) - res.checkpoint_scores.begin());
    res.best = res.checkpoints[best];
    res.best_step = res.best.step;
    return res;
}

std::string format_condense_log(std::span<const CondenseLogRow> log) {
    std::ostringstream out;
    out << "step,loss,gnf_score\n";
    for (const auto &row : log) {
        out << row.step << ',';
        if (std::isfinite(row.loss)) { out << io::format_double(row.loss); }
        out << ',';
        if (std::isfinite(row.gnf_score)) { out << io::format_double(row.gnf_score); }
        out << '\n';
    }
    return out.str();
}

StructureKind parse_structure(const std::string &name) {
    if (name == "knn") { return StructureKind::Knn; }
    if (name == "cosine") { return StructureKind::Cosine; }
    throw ConfigError("unknown structure variant '" + name + "' (expected knn or cosine)");
}

graph::NormalizedAdj build_structure_variant(const Matrix &x, StructureKind kind, int k) {
    const auto n = static_cast<std::size_t>(x.rows());
    if (kind == StructureKind::Knn) {
        if (k < 1 || static_cast<std::size_t>(k) >= n) {
            throw std::invalid_argument("kNN structure needs 1 <= k < N' (k=" + std::to_string(k) +
                                        ", N'=" + std::to_string(n) + ")");
        }
        std::vector<graph::Edge> edges;
        std::vector<std::pair<double, NodeId>> dist;
        for (std::size_t i = 0; i < n; ++i) {
            dist.clear();
            for (std::size_t j = 0; j < n; ++j) {
                if (j == i) { continue; }
                dist.emplace_back((x.row(static_cast<Eigen::Index>(i)) - x.row(static_cast<Eigen::Index>(j))).squaredNorm(),
                                  static_cast<NodeId>(j));
            }
            std::partial_sort(dist.begin(), dist.begin() + k, dist.end());
            for (int t = 0; t < k; ++t) { edges.push_back({static_cast<NodeId>(i), dist[static_cast<std::size_t>(t)].second}); }
        }
        edges = graph::canonicalize_edges(std::move(edges));
        return graph::normalize_adjacency(edges, n);
    }

    Matrix sim = Matrix::Identity(x.rows(), x.rows());
    const Eigen::VectorXd norms = x.rowwise().norm();
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        for (Eigen::Index j = i + 1; j < x.rows(); ++j) {
            double c = 0.0;
            if (norms(i) > 0.0 && norms(j) > 0.0) { c = x.row(i).dot(x.row(j)) / (norms(i) * norms(j)); }
            c = std::clamp(c, 0.0, 1.0);
            sim(i, j) = c;
            sim(j, i) = c;
        }
    }
    graph::NormalizedAdj out;
    out.degrees.resize(n);
    for (std::size_t i = 0; i < n; ++i) { out.degrees[i] = sim.row(static_cast<Eigen::Index>(i)).sum(); }
    std::vector<Eigen::Triplet<double>> triplets;
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        for (Eigen::Index j = 0; j < x.rows(); ++j) {
            if (sim(i, j) <= 0.0) { continue; }
            triplets.emplace_back(static_cast<int>(i), static_cast<int>(j),
                                  sim(i, j) / std::sqrt(out.degrees[static_cast<std::size_t>(i)] *
                                                        out.degrees[static_cast<std::size_t>(j)]));
        }
    }
    out.matrix.resize(x.rows(), x.rows());
    out.matrix.setFromTriplets(triplets.begin(), triplets.end());
    out.matrix.makeCompressed();
    return out;
}

std::string format_features_csv(const CondensedData &cd) {
    std::ostringstream out;
    out << "class";
    for (Eigen::Index j = 0; j < cd.features.cols(); ++j) { out << ",f" << j; }
    out << '\n';
    for (std::size_t i = 0; i < cd.size(); ++i) {
        out << cd.labels[i];
        for (Eigen::Index j = 0; j < cd.features.cols(); ++j) {
            out << ',' << io::format_double(cd.features(static_cast<Eigen::Index>(i), j));
        }
        out << '\n';
    }
    return out.str();
}

void export_features(const CondensedData &cd, const fs::path &path) {
    io::write_file_atomic(path, format_features_csv(cd));
}

}  // namespace graphcondense::condenser
