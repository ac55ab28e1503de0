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

#include <compare>
#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "graphcondense/common.hpp"

namespace graphcondense::graph {

/// Undirected edge stored once with u < v.
struct Edge {
    NodeId u = 0;
    NodeId v = 0;

    auto operator<=>(const Edge &) const = default;
};

struct Splits {
    std::vector<NodeId> train;
    std::vector<NodeId> val;
    std::vector<NodeId> test;
};

/// A node-classification graph. Features are held in double precision but
/// are stored on disk as 32-bit floats.
struct GraphDataset {
    std::string name;
    std::size_t num_nodes = 0;
    std::size_t num_features = 0;
    std::size_t num_classes = 0;
    Matrix features;             // num_nodes x num_features
    std::vector<ClassId> labels;  // num_nodes
    std::vector<Edge> edges;
    Splits splits;

    /// Throws FormatError on the first violated invariant.
    void validate() const;
};

/// Â = D^{-1/2}(A+I)D^{-1/2} in compressed row form. `degrees` are the
/// degrees of A+I.
struct NormalizedAdj {
    SparseMatrix matrix;
    std::vector<double> degrees;

    [[nodiscard]] std::size_t size() const { return static_cast<std::size_t>(matrix.rows()); }
};

/// Sorts, removes self-loops and duplicates, and orients every pair u < v.
std::vector<Edge> canonicalize_edges(std::vector<Edge> edges);

NormalizedAdj normalize_adjacency(std::span<const Edge> edges, std::size_t num_nodes);

/// A + I with unit weights, used by the plain-sum kernel aggregation.
SparseMatrix adjacency_with_self_loops(std::span<const Edge> edges, std::size_t num_nodes);

/// Applies `adj` `hops` times to `x`.
Matrix propagate(const NormalizedAdj &adj, const Matrix &x, int hops);

GraphDataset induced_subgraph(const GraphDataset &ds, std::span<const NodeId> ids);

Matrix row_normalize_features(Matrix x);

GraphDataset load_dataset(const std::filesystem::path &dir);
void save_dataset(const GraphDataset &ds, const std::filesystem::path &dir);

/// Number of training nodes per class.
std::vector<std::size_t> train_class_counts(const GraphDataset &ds);

}  // namespace graphcondense::graph
