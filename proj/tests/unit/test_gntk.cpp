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

#include <doctest.h>

#include <numbers>

#include <Eigen/Eigenvalues>
#include <json.hpp>

#include "fixtures.hpp"
#include "graphcondense/gntk.hpp"
#include "graphcondense/synth.hpp"
#include "oracles.hpp"

using namespace graphcondense;
using gntk::GntkConfig;
using gntk::GraphView;

namespace {

Matrix random_matrix(Eigen::Index r, Eigen::Index c, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    Matrix m(r, c);
    for (Eigen::Index i = 0; i < m.size(); ++i) { m.data()[i] = normal(rng); }
    return m;
}

/// Infinite-width NTK of a bias-free ReLU MLP with `depth` hidden layers,
/// written from the arc-cosine formulas.
Eigen::MatrixXd mlp_ntk(const Eigen::MatrixXd &x, const Eigen::MatrixXd &y, int depth) {
    auto arc = [](double kxx, double kxy, double kyy) {
        const double n = std::sqrt(kxx * kyy);
        double cosine = kxy / n;
        cosine = std::min(1.0, std::max(-1.0, cosine));
        const double t = std::acos(cosine);
        return std::pair{n * (std::sin(t) + (std::numbers::pi - t) * std::cos(t)) / std::numbers::pi,
                         (std::numbers::pi - t) / std::numbers::pi};
    };
    Eigen::MatrixXd kxy = x * y.transpose();
    Eigen::VectorXd kx = (x * x.transpose()).diagonal();
    Eigen::VectorXd ky = (y * y.transpose()).diagonal();
    Eigen::MatrixXd ntk = kxy;
    for (int l = 0; l < depth; ++l) {
        Eigen::MatrixXd next(kxy.rows(), kxy.cols());
        for (Eigen::Index i = 0; i < kxy.rows(); ++i) {
            for (Eigen::Index j = 0; j < kxy.cols(); ++j) {
                const auto [s, sd] = arc(kx(i), kxy(i, j), ky(j));
                next(i, j) = s;
                ntk(i, j) = ntk(i, j) * sd + s;
            }
        }
        kxy = next;
        // Diagonal after an arc-cosine step with c = 2 keeps the variance.
    }
    return ntk;
}

graph::GraphDataset small_sbm(std::uint64_t seed, std::size_t n = 60) {
    synth::SbmConfig cfg;
    cfg.num_nodes = n;
    cfg.dim = 5;
    cfg.train_per_class = 5;
    cfg.val_per_class = std::min<std::size_t>(10, n / 3 - 5);
    cfg.seed = seed;
    return synth::make_sbm(cfg);
}

}  // namespace

TEST_CASE("relu dual closed forms") {
    const auto one = gntk::relu_dual(2.0, 2.0, 2.0);
    CHECK(one.sigma == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(one.sigma_dot == doctest::Approx(1.0).epsilon(1e-14));
    const auto zero = gntk::relu_dual(1.0, 0.0, 4.0);
    CHECK(zero.sigma == doctest::Approx(2.0 / std::numbers::pi).epsilon(1e-14));
    CHECK(zero.sigma_dot == doctest::Approx(0.5).epsilon(1e-14));
    const auto anti = gntk::relu_dual(1.0, -1.0, 1.0);
    CHECK(std::abs(anti.sigma) < 1e-15);
    CHECK(std::abs(anti.sigma_dot) < 1e-15);
    const auto c1 = gntk::relu_dual(1.0, 0.0, 1.0, 1.0);
    CHECK(c1.sigma == doctest::Approx(0.5 / std::numbers::pi).epsilon(1e-14));

    const auto empty = gntk::relu_dual(0.0, 0.0, 3.0);
    CHECK(empty.sigma == 0.0);
    CHECK(empty.sigma_dot == 0.0);
    CHECK_THROWS_AS(gntk::relu_dual(-1.0, 0.0, 1.0), std::domain_error);
    // Covariance slightly outside the Cauchy-Schwarz bound is clamped.
    CHECK(gntk::relu_dual(1.0, 1.0 + 1e-15, 1.0).sigma == doctest::Approx(1.0));
}

TEST_CASE("relu dual bounds and Monte Carlo agreement") {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> var(0.5, 2.0);
    std::uniform_real_distribution<double> corr(-0.5, 0.95);
    for (int k = 0; k < 8; ++k) {
        const double a = var(rng);
        const double b = var(rng);
        const double uv = corr(rng) * std::sqrt(a * b);
        const auto d = gntk::relu_dual(a, uv, b);
        CHECK(d.sigma >= 0.0);
        CHECK(d.sigma <= std::sqrt(a * b) + 1e-15);
        CHECK(d.sigma_dot >= 0.0);
        CHECK(d.sigma_dot <= 1.0);
        const auto mc = oracle::monte_carlo_relu(a, uv, b, 1000000, 100 + static_cast<std::uint64_t>(k));
        CHECK(std::abs(mc.sigma - d.sigma) < 0.03 * d.sigma);
        CHECK(std::abs(mc.sigma_dot - d.sigma_dot) < 0.03 * d.sigma_dot);
    }
}

TEST_CASE("one node graph kernel") {
    Matrix x(1, 3);
    x << 1.0, -2.0, 0.5;
    const auto k = gntk::gntk_node_kernel(GraphView{x}, GraphView{x}, GntkConfig{});
    REQUIRE(k.values.rows() == 1);
    // Â = [1] and the diagonal is preserved by c = 2: three contributions of ‖x‖².
    CHECK(k.values(0, 0) == doctest::Approx(3.0 * 5.25).epsilon(1e-12));
}

TEST_CASE("kernel on a graph is symmetric positive semidefinite") {
    const auto ds = small_sbm(1, 30);
    const SparseMatrix agg = gntk::make_aggregator(ds, gntk::Aggregation::Normalized);
    const GraphView g{ds.features, &agg};
    for (int b : {1, 2}) {
        GntkConfig cfg;
        cfg.fc_per_layer = b;
        const Matrix k = gntk::gntk_node_kernel(g, g, cfg).values;
        CHECK((k - k.transpose()).cwiseAbs().maxCoeff() == 0.0);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig{Eigen::MatrixXd(k)};
        CHECK(eig.eigenvalues().minCoeff() >= -1e-9 * eig.eigenvalues().maxCoeff());
    }
}

TEST_CASE("swapping the graphs transposes the kernel exactly") {
    const auto a = small_sbm(2, 30);
    const auto b = small_sbm(3, 21);
    for (auto mode : {gntk::Aggregation::Normalized, gntk::Aggregation::PlainSum}) {
        const SparseMatrix aa = gntk::make_aggregator(a, mode);
        const SparseMatrix ab = gntk::make_aggregator(b, mode);
        GntkConfig cfg;
        cfg.aggregation = mode;
        const Matrix k12 = gntk::gntk_node_kernel(GraphView{a.features, &aa}, GraphView{b.features, &ab}, cfg).values;
        const Matrix k21 = gntk::gntk_node_kernel(GraphView{b.features, &ab}, GraphView{a.features, &aa}, cfg).values;
        CHECK(k12 == Matrix(k21.transpose()));
        const Matrix ks = gntk::gntk_node_kernel(GraphView{a.features, &aa}, GraphView{b.features}, cfg).values;
        const Matrix kt = gntk::gntk_node_kernel(GraphView{b.features}, GraphView{a.features, &aa}, cfg).values;
        CHECK(ks == Matrix(kt.transpose()));
    }
}

TEST_CASE("relabelling nodes permutes the kernel") {
    const auto ds = small_sbm(4, 30);
    std::vector<NodeId> perm(ds.num_nodes);
    std::iota(perm.begin(), perm.end(), 0U);
    std::mt19937_64 rng(5);
    std::shuffle(perm.begin(), perm.end(), rng);
    auto moved = ds;
    std::vector<NodeId> inverse(ds.num_nodes);
    for (std::size_t i = 0; i < perm.size(); ++i) { inverse[perm[i]] = static_cast<NodeId>(i); }
    for (std::size_t i = 0; i < perm.size(); ++i) {
        moved.features.row(static_cast<Eigen::Index>(i)) = ds.features.row(perm[i]);
    }
    moved.edges.clear();
    for (const auto &e : ds.edges) { moved.edges.push_back({inverse[e.u], inverse[e.v]}); }
    moved.edges = graph::canonicalize_edges(moved.edges);

    const SparseMatrix a0 = gntk::make_aggregator(ds, gntk::Aggregation::Normalized);
    const SparseMatrix a1 = gntk::make_aggregator(moved, gntk::Aggregation::Normalized);
    const Matrix k0 = gntk::gntk_node_kernel(GraphView{ds.features, &a0}, GraphView{ds.features, &a0}, {}).values;
    const Matrix k1 =
        gntk::gntk_node_kernel(GraphView{moved.features, &a1}, GraphView{moved.features, &a1}, {}).values;
    double worst = 0.0;
    for (std::size_t i = 0; i < perm.size(); ++i) {
        for (std::size_t j = 0; j < perm.size(); ++j) {
            worst = std::max(worst, std::abs(k1(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) -
                                             k0(perm[i], perm[j])));
        }
    }
    CHECK(worst < 1e-10 * k0.cwiseAbs().maxCoeff());
}

TEST_CASE("identity side reduces to the multilayer perceptron kernel") {
    const Matrix x = random_matrix(6, 4, 8);
    const Matrix y = random_matrix(3, 4, 9);
    for (int layers : {1, 2, 3}) {
        GntkConfig cfg;
        cfg.layers = layers;
        const Matrix k = gntk::gntk_node_kernel(GraphView{x}, GraphView{y}, cfg).values;
        const Eigen::MatrixXd ref = mlp_ntk(x, y, layers);
        CHECK((Eigen::MatrixXd(k) - ref).cwiseAbs().maxCoeff() < 1e-10 * ref.cwiseAbs().maxCoeff());
    }
    GntkConfig two_fc;
    two_fc.fc_per_layer = 2;
    const Matrix k = gntk::gntk_node_kernel(GraphView{x}, GraphView{y}, two_fc).values;
    const Eigen::MatrixXd ref = mlp_ntk(x, y, 4);
    CHECK((Eigen::MatrixXd(k) - ref).cwiseAbs().maxCoeff() < 1e-10 * ref.cwiseAbs().maxCoeff());
}

TEST_CASE("aggregators") {
    const auto ds = fixture::random_dataset(6, 2, 2, 0.5, 3);
    const Eigen::MatrixXd plain = Eigen::MatrixXd(gntk::make_aggregator(ds, gntk::Aggregation::PlainSum));
    Eigen::MatrixXd ref = Eigen::MatrixXd::Identity(6, 6);
    for (const auto &e : ds.edges) {
        ref(e.u, e.v) = 1.0;
        ref(e.v, e.u) = 1.0;
    }
    CHECK(plain == ref);
    CHECK(gntk::parse_aggregation("sum") == gntk::Aggregation::PlainSum);
    CHECK_THROWS_AS(gntk::parse_aggregation("mean"), ConfigError);
}

TEST_CASE("kernel ridge regression") {
    const Matrix feats = random_matrix(5, 3, 11);
    Matrix k = feats * feats.transpose() + Matrix::Identity(5, 5);
    const Matrix y = random_matrix(5, 2, 12);
    const Matrix kvs = random_matrix(4, 5, 13);

    SUBCASE("interpolates the training targets for a tiny ridge") {
        const Matrix pred = gntk::krr_predict(k, k, y, 1e-12);
        CHECK((pred - y).cwiseAbs().maxCoeff() < 1e-9);
    }
    SUBCASE("a large ridge scales as one over lambda") {
        const double lambda = 1e10;
        const Matrix pred = gntk::krr_predict(k, kvs, y, lambda);
        const Matrix limit = kvs * y;
        CHECK(((pred * lambda) - limit).cwiseAbs().maxCoeff() < 1e-6 * limit.cwiseAbs().maxCoeff());
    }
    SUBCASE("agrees with an explicit inverse") {
        const double lambda = 0.3;
        Eigen::MatrixXd sys = k;
        sys.diagonal().array() += lambda;
        const Eigen::MatrixXd ref = Eigen::MatrixXd(kvs) * oracle::gauss_jordan_inverse(sys) * Eigen::MatrixXd(y);
        CHECK((Eigen::MatrixXd(gntk::krr_predict(k, kvs, y, lambda)) - ref).cwiseAbs().maxCoeff() < 1e-10);
    }
    SUBCASE("failures") {
        Matrix indefinite = -Matrix::Identity(3, 3);
        CHECK_THROWS_AS(gntk::krr_predict(indefinite, indefinite, Matrix::Ones(3, 1), 1e-3), NumericalError);
        CHECK_THROWS_AS(gntk::krr_predict(k, kvs, y, 0.0), std::invalid_argument);
        CHECK_THROWS_AS(gntk::krr_predict(k, kvs.transpose(), y, 1.0), std::invalid_argument);
    }
    SUBCASE("ridge resolution") {
        GntkConfig cfg;
        CHECK(gntk::resolve_ridge(k, cfg) == doctest::Approx(1e-6 * k.diagonal().mean()));
        cfg.ridge = 0.5;
        CHECK(gntk::resolve_ridge(k, cfg) == 0.5);
    }
}

TEST_CASE("score of condensed data") {
    SUBCASE("validation nodes scored against themselves") {
        auto ds = fixture::random_dataset(40, 6, 2, 0.0, 14);
        const auto val = graph::induced_subgraph(ds, ds.splits.val);
        std::vector<ClassId> labels(val.labels.begin(), val.labels.end());
        const double g = gntk::gnf_score(ds, val.features, labels, GntkConfig{});
        CHECK(g >= 0.0);
        CHECK(g < 1e-6);
    }
    SUBCASE("order of the condensed nodes does not matter") {
        const auto ds = small_sbm(6);
        const Matrix x = random_matrix(6, 5, 15);
        const std::vector<ClassId> labels{0, 1, 2, 0, 1, 2};
        Matrix xr = x.colwise().reverse();
        std::vector<ClassId> lr(labels.rbegin(), labels.rend());
        const gntk::GnfScorer scorer(ds, GntkConfig{});
        const double a = scorer.score(x, labels);
        CHECK(a > 0.0);
        CHECK(scorer.score(xr, lr) == doctest::Approx(a).epsilon(1e-10));
        CHECK(scorer.validation_size() == ds.splits.val.size());
        CHECK(gntk::gnf_score(ds, x, labels, GntkConfig{}) == a);
        CHECK_THROWS_AS((void)scorer.score(x, std::vector<ClassId>{0, 1}), std::invalid_argument);
    }
    SUBCASE("validation cap") {
        const auto ds = small_sbm(7);
        GntkConfig cfg;
        cfg.val_cap = 5;
        CHECK(gntk::GnfScorer(ds, cfg).validation_size() == 5);
    }
    SUBCASE("configuration errors") {
        GntkConfig cfg;
        cfg.layers = 0;
        CHECK_THROWS_AS(cfg.validate(), ConfigError);
        cfg = GntkConfig{};
        cfg.ridge_factor = 0.0;
        CHECK_THROWS_AS(cfg.validate(), ConfigError);
        cfg.ridge = 1.0;
        CHECK_NOTHROW(cfg.validate());
    }
}

TEST_CASE("kernel dump") {
    fixture::TempDir tmp("kernel");
    gntk::KernelMatrix k{Matrix(2, 3), gntk::Block::VS};
    k.values << 1, 2, 3, 4, 5, 6;
    gntk::write_kernel(k, tmp / "k.bin");
    const std::string bytes = fixture::read_bytes(tmp / "k.bin");
    REQUIRE(bytes.size() == 6 * sizeof(double));
    double third = 0.0;
    std::memcpy(&third, bytes.data() + 2 * sizeof(double), sizeof(double));
    CHECK(third == 3.0);
    const auto meta = nlohmann::json::parse(fixture::read_bytes(tmp / "k.bin.json"));
    CHECK(meta.at("rows") == 2);
    CHECK(meta.at("cols") == 3);
    CHECK(meta.at("block") == "VS");
}
