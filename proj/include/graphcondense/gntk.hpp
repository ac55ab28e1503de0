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

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "graphcondense/common.hpp"
#include "graphcondense/graph.hpp"

namespace graphcondense::gntk {

enum class Aggregation {
    Normalized,  // Σ ← Â Σ Âᵀ
    PlainSum,    // Σ ← (A+I) Σ (A+I)ᵀ
};

std::string to_string(Aggregation a);
Aggregation parse_aggregation(const std::string &name);

struct GntkConfig {
    int layers = 2;        // GNN layers L
    int fc_per_layer = 1;  // fully-connected ReLU steps B per layer
    Aggregation aggregation = Aggregation::Normalized;
    /// λ = ridge_factor · mean(diag K_SS) unless `ridge` is positive.
    double ridge_factor = 1e-6;
    double ridge = 0.0;
    double relu_scale = 2.0;
    std::size_t val_cap = 2000;
    std::uint64_t seed = 0;

    void validate() const;
};

struct DualValue {
    double sigma = 0.0;
    double sigma_dot = 0.0;
};

/// Arc-cosine expectations of a ReLU layer for a bivariate normal with
/// variances σ_uu, σ_vv and covariance σ_uv, scaled by `c`:
///   σ' = c·E[relu(x)relu(y)],  σ̇' = c·E[relu'(x)relu'(y)].
/// A zero variance yields zeros; a negative one throws std::domain_error.
DualValue relu_dual(double sigma_uu, double sigma_uv, double sigma_vv, double c = 2.0);

/// Node features plus the aggregation operator; a null aggregator is the
/// identity (structure-free side). Non-owning.
struct GraphView {
    const Matrix &features;
    const SparseMatrix *aggregator = nullptr;
};

/// Aggregation operator of `ds` for the configured mode.
SparseMatrix make_aggregator(const graph::GraphDataset &ds, Aggregation mode);

/// Variances entering every ReLU step of one graph, (layer, fc) major.
/// They require the full within-graph covariance recursion.
struct SideStats {
    std::vector<Vector> variances;
};

SideStats side_statistics(const GraphView &g, const GntkConfig &cfg);

enum class Block { SS, VS, VV, Other };

std::string to_string(Block b);

struct KernelMatrix {
    Matrix values;
    Block block = Block::Other;
};

/// Node-level GNTK between the nodes of two graphs (n1 x n2).
KernelMatrix gntk_node_kernel(const GraphView &g1, const GraphView &g2, const GntkConfig &cfg,
                              Block block = Block::Other);

/// As gntk_node_kernel, reusing precomputed side statistics.
KernelMatrix cross_kernel(const GraphView &g1, const SideStats &s1, const GraphView &g2, const SideStats &s2,
                          const GntkConfig &cfg, Block block = Block::Other);

/// K_VS (K_SS + λI)^{-1} Y via Cholesky; NumericalError when it fails.
Matrix krr_predict(const Matrix &k_ss, const Matrix &k_vs, const Matrix &targets, double lambda);

double resolve_ridge(const Matrix &k_ss, const GntkConfig &cfg);

Matrix one_hot(std::span<const ClassId> labels, std::size_t num_classes);

/// Scores condensed data against a validation subgraph:
///   γ = ½‖Y_val − K⟨V,S⟩(K⟨S,S⟩ + λI)^{-1} Ỹ‖²_F.
/// Validation-side statistics are computed once at construction.
class GnfScorer {
public:
    GnfScorer(const graph::GraphDataset &ds, GntkConfig cfg);

    [[nodiscard]] double score(const Matrix &features, std::span<const ClassId> labels) const;

    [[nodiscard]] std::size_t validation_size() const { return val_.num_nodes; }
    [[nodiscard]] const GntkConfig &config() const { return cfg_; }

private:
    GntkConfig cfg_;
    graph::GraphDataset val_;
    SparseMatrix aggregator_;
    SideStats val_stats_;
    Matrix targets_;
};

double gnf_score(const graph::GraphDataset &ds, const Matrix &features, std::span<const ClassId> labels,
                 const GntkConfig &cfg);

/// Binary 64-bit row-major dump plus a `<path>.json` sidecar {rows, cols, block}.
void write_kernel(const KernelMatrix &k, const std::filesystem::path &path);

}  // namespace graphcondense::gntk
