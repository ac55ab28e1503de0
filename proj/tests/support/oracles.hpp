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

#pragma once

// Independent reference implementations used only by the tests. None of them
// call into the code under test.

#include <cmath>
#include <cstdint>
#include <functional>
#include <numbers>
#include <random>
#include <stdexcept>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

using Dense = Eigen::MatrixXd;

/// D^{-1/2}(A+I)D^{-1/2} from an edge list, fully dense.
inline Dense normalized_adjacency(const std::vector<std::pair<int, int>> &edges, int n) {
    Dense a = Dense::Identity(n, n);
    for (auto [u, v] : edges) {
        a(u, v) = 1.0;
        a(v, u) = 1.0;
    }
    Eigen::VectorXd deg = a.rowwise().sum();
    Dense out(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) { out(i, j) = a(i, j) / std::sqrt(deg(i) * deg(j)); }
    }
    return out;
}

/// Central differences of a scalar function of a flat vector.
inline Eigen::VectorXd central_difference(const std::function<double(const Eigen::VectorXd &)> &f,
                                          const Eigen::VectorXd &x, double h) {
    Eigen::VectorXd g(x.size());
    Eigen::VectorXd probe = x;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        probe(i) = x(i) + h;
        const double up = f(probe);
        probe(i) = x(i) - h;
        const double down = f(probe);
        probe(i) = x(i);
        g(i) = (up - down) / (2.0 * h);
    }
    return g;
}

inline double relative_error(const Eigen::VectorXd &a, const Eigen::VectorXd &b) {
    const double scale = std::max(b.norm(), 1e-300);
    return (a - b).norm() / scale;
}

/// Gauss-Jordan inverse with partial pivoting.
inline Dense gauss_jordan_inverse(Dense m) {
    const Eigen::Index n = m.rows();
    Dense inv = Dense::Identity(n, n);
    for (Eigen::Index col = 0; col < n; ++col) {
        Eigen::Index pivot = col;
        for (Eigen::Index r = col + 1; r < n; ++r) {
            if (std::abs(m(r, col)) > std::abs(m(pivot, col))) { pivot = r; }
        }
        if (m(pivot, col) == 0.0) { throw std::runtime_error("singular matrix"); }
        m.row(col).swap(m.row(pivot));
        inv.row(col).swap(inv.row(pivot));
        const double p = m(col, col);
        m.row(col) /= p;
        inv.row(col) /= p;
        for (Eigen::Index r = 0; r < n; ++r) {
            if (r == col) { continue; }
            const double f = m(r, col);
            m.row(r) -= f * m.row(col);
            inv.row(r) -= f * inv.row(col);
        }
    }
    return inv;
}

/// c·E[relu(x)relu(y)] and c·E[1(x>0)1(y>0)] for a centred bivariate normal.
struct ReluMoments {
    double sigma = 0.0;
    double sigma_dot = 0.0;
};

inline ReluMoments monte_carlo_relu(double suu, double suv, double svv, std::size_t samples, std::uint64_t seed,
                                    double c = 2.0) {
    const double a = std::sqrt(suu);
    const double rho = suv / std::sqrt(suu * svv);
    const double b1 = std::sqrt(svv) * rho;
    const double b2 = std::sqrt(svv) * std::sqrt(std::max(0.0, 1.0 - rho * rho));
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    double prod = 0.0;
    double both = 0.0;
    for (std::size_t s = 0; s < samples; ++s) {
        const double z1 = normal(rng);
        const double z2 = normal(rng);
        const double x = a * z1;
        const double y = b1 * z1 + b2 * z2;
        if (x > 0.0 && y > 0.0) {
            prod += x * y;
            both += 1.0;
        }
    }
    const auto n = static_cast<double>(samples);
    return {c * prod / n, c * both / n};
}

/// Empirical NTK of f(X) = z2·w3 with
///   z1 = sqrt(2/m)·relu(Â X W1),  z2 = sqrt(2/m)·relu(Â z1 W2),
/// all weights standard normal, averaged over `nets` draws. The kernel is the
/// sum over W1, W2 and w3 of ⟨∂f(u)/∂W, ∂f(v)/∂W⟩.
inline Dense monte_carlo_gcn_ntk(const Dense &x, const Dense &adj, int width, int nets, std::uint64_t seed) {
    const Eigen::Index n = x.rows();
    const Eigen::Index d = x.cols();
    const Eigen::Index m = width;
    const double s = std::sqrt(2.0 / static_cast<double>(m));
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    auto draw = [&](Eigen::Index r, Eigen::Index c) {
        Dense w(r, c);
        for (Eigen::Index i = 0; i < r; ++i) {
            for (Eigen::Index j = 0; j < c; ++j) { w(i, j) = normal(rng); }
        }
        return w;
    };

    const Dense ax = adj * x;  // n x d
    Dense total = Dense::Zero(n, n);
    for (int net = 0; net < nets; ++net) {
        const Dense w1 = draw(d, m);
        const Dense w2 = draw(m, m);
        const Eigen::VectorXd w3 = draw(m, 1).col(0);

        const Dense h1 = ax * w1;
        const Dense r1 = (h1.array() > 0.0).cast<double>();
        const Dense z1 = s * h1.cwiseMax(0.0);
        const Dense az1 = adj * z1;
        const Dense h2 = az1 * w2;
        const Dense r2 = (h2.array() > 0.0).cast<double>();
        const Dense z2 = s * h2.cwiseMax(0.0);

        // ∂f(u)/∂h2[u,k] = s·w3[k]·r2[u,k]
        Dense back2(n, m);
        for (Eigen::Index u = 0; u < n; ++u) { back2.row(u) = s * w3.transpose().cwiseProduct(r2.row(u)); }

        const Dense k_w3 = z2 * z2.transpose();
        const Dense k_w2 = (az1 * az1.transpose()).cwiseProduct(back2 * back2.transpose());

        // ∂f(u)/∂W1 = Σ_t (ÂX)[t]ᵀ ⊗ δ_u[t], δ_u[t,j] = Â[u,t]·(W2 back2[u]ᵀ)[j]·s·r1[t,j]
        std::vector<Dense> g1(static_cast<std::size_t>(n));
        for (Eigen::Index u = 0; u < n; ++u) {
            const Eigen::RowVectorXd via = (w2 * back2.row(u).transpose()).transpose();
            Dense delta(n, m);
            for (Eigen::Index t = 0; t < n; ++t) { delta.row(t) = adj(u, t) * s * via.cwiseProduct(r1.row(t)); }
            g1[static_cast<std::size_t>(u)] = ax.transpose() * delta;  // d x m
        }
        Dense k_w1(n, n);
        for (Eigen::Index u = 0; u < n; ++u) {
            for (Eigen::Index v = 0; v < n; ++v) {
                k_w1(u, v) = g1[static_cast<std::size_t>(u)].cwiseProduct(g1[static_cast<std::size_t>(v)]).sum();
            }
        }
        total += k_w1 + k_w2 + k_w3;
    }
    return total / static_cast<double>(nets);
}

/// Dense two-layer forward pass: P2 · act(P1 · X · W1) · W2.
inline Dense two_layer_forward(const Dense &p1, const Dense &p2, const Dense &x, const Dense &w1, const Dense &w2,
                               bool relu) {
    Dense h = p1 * x * w1;
    if (relu) { h = h.cwiseMax(0.0); }
    return p2 * h * w2;
}

/// Mean softmax cross-entropy over `mask` plus ½·wd·‖θ‖², by direct summation.
inline double cross_entropy(const Dense &logits, const std::vector<std::uint32_t> &labels,
                            const std::vector<std::uint32_t> &mask) {
    double total = 0.0;
    for (std::uint32_t i : mask) {
        const double mx = logits.row(i).maxCoeff();
        double z = 0.0;
        for (Eigen::Index c = 0; c < logits.cols(); ++c) { z += std::exp(logits(i, c) - mx); }
        total += -(logits(i, labels[i]) - mx - std::log(z));
    }
    return total / static_cast<double>(mask.size());
}

}  // namespace oracle
