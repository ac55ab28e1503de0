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

#include <span>
#include <string>
#include <vector>

#include "graphcondense/common.hpp"
#include "graphcondense/graph.hpp"

namespace graphcondense::coreset {

enum class Method { Random, Herding, KCenter };

std::string to_string(Method m);
Method parse_method(const std::string &name);

/// Training nodes grouped by class, in train-split order.
std::vector<std::vector<NodeId>> train_nodes_by_class(const graph::GraphDataset &ds);

/// Â²X, the embedding herding and k-center operate in.
Matrix selection_embedding(const graph::GraphDataset &ds);

/// Greedy max-min selection over `candidates` (rows of `emb`). The first
/// center is the candidate nearest the candidates' mean. Ties go to the
/// earlier candidate. Requires count <= candidates.size().
std::vector<NodeId> kcenter_select(const Matrix &emb, std::span<const NodeId> candidates, std::size_t count);

/// Greedily adds the candidate that brings the selected mean closest to the
/// candidates' mean. Requires count <= candidates.size().
std::vector<NodeId> herding_select(const Matrix &emb, std::span<const NodeId> candidates, std::size_t count);

std::vector<NodeId> random_select(std::span<const NodeId> candidates, std::size_t count, Rng &rng);

/// Largest distance from a candidate to its nearest selected row.
double covering_radius(const Matrix &emb, std::span<const NodeId> candidates, std::span<const NodeId> selected);

/// Distance between the mean of `selected` and the mean of `candidates`.
double mean_discrepancy(const Matrix &emb, std::span<const NodeId> candidates, std::span<const NodeId> selected);

/// Per-class selection from the training split; indices grouped by class.
/// Throws ConfigError when a class has fewer training nodes than requested.
std::vector<NodeId> coreset_select(const graph::GraphDataset &ds, Method method, std::span<const std::size_t> counts,
                                   Rng &rng);

}  // namespace graphcondense::coreset
