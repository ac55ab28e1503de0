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

#include "graphcondense/coreset.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace graphcondense::coreset {

std::string to_string(Method m) {
    switch (m) {
        case Method::Random: return "random";
        case Method::Herding: return "herding";
        case Method::KCenter: return "kcenter";
    }
    return "?";
}

Method parse_method(const std::string &name) {
    if (name == "random") { return Method::Random; }
    if (name == "herding") { return Method::Herding; }
    if (name == "kcenter" || name == "k-center") { return Method::KCenter; }
    throw ConfigError("unknown coreset method '" + name + "' (expected random, herding or kcenter)");
}

std::vector<std::vector<NodeId>> train_nodes_by_class(const graph::GraphDataset &ds) {
    std::vector<std::vector<NodeId>> out(ds.num_classes);
    for (NodeId i : ds.splits.train) { out[ds.labels[i]].push_back(i); }
    return out;
}

Matrix selection_embedding(const graph::GraphDataset &ds) {
    const graph::NormalizedAdj adj = graph::normalize_adjacency(ds.edges, ds.num_nodes);
    return graph::propagate(adj, ds.features, 2);
}

namespace {

Eigen::RowVectorXd candidate_mean(const Matrix &emb, std::span<const NodeId> candidates) {
    Eigen::RowVectorXd mean = Eigen::RowVectorXd::Zero(emb.cols());
    for (NodeId i : candidates) { mean += emb.row(i); }
    return mean / static_cast<double>(candidates.size());
}

void check_count(std::span<const NodeId> candidates, std::size_t count) {
    if (count > candidates.size()) {
        throw std::invalid_argument("requested " + std::to_string(count) + " nodes from " +
                                    std::to_string(candidates.size()) + " candidates");
    }
}

}  // namespace

std::vector<NodeId> kcenter_select(const Matrix &emb, std::span<const NodeId> candidates, std::size_t count) {
    check_count(candidates, count);
    std::vector<NodeId> selected;
    if (count == 0) { return selected; }
    const Eigen::RowVectorXd mean = candidate_mean(emb, candidates);

    std::size_t first = 0;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < candidates.size(); ++k) {
        const double d = (emb.row(candidates[k]) - mean).squaredNorm();
        if (d < best) {
            best = d;
            first = k;
        }
    }
    std::vector<double> nearest(candidates.size(), std::numeric_limits<double>::infinity());
    std::vector<char> taken(candidates.size(), 0);
    std::size_t pick = first;
    while (true) {
        selected.push_back(candidates[pick]);
        taken[pick] = 1;
        if (selected.size() == count) { break; }
        double far = -1.0;
        std::size_t next = 0;
        for (std::size_t k = 0; k < candidates.size(); ++k) {
            if (taken[k] != 0) { continue; }
            nearest[k] = std::min(nearest[k], (emb.row(candidates[k]) - emb.row(candidates[pick])).squaredNorm());
            if (nearest[k] > far) {
                far = nearest[k];
                next = k;
            }
        }
        pick = next;
    }
    return selected;
}

std::vector<NodeId> herding_select(const Matrix &emb, std::span<const NodeId> candidates, std::size_t count) {
    check_count(candidates, count);
    const Eigen::RowVectorXd mean = candidate_mean(emb, candidates);
    Eigen::RowVectorXd sum = Eigen::RowVectorXd::Zero(emb.cols());
    std::vector<char> taken(candidates.size(), 0);
    std::vector<NodeId> selected;
    for (std::size_t step = 0; step < count; ++step) {
        const double denom = static_cast<double>(step + 1);
        double best = std::numeric_limits<double>::infinity();
        std::size_t pick = 0;
        for (std::size_t k = 0; k < candidates.size(); ++k) {
            if (taken[k] != 0) { continue; }
            const double d = ((sum + emb.row(candidates[k])) / denom - mean).squaredNorm();
            if (d < best) {
                best = d;
                pick = k;
            }
        }
        taken[pick] = 1;
        sum += emb.row(candidates[pick]);
        selected.push_back(candidates[pick]);
    }
    return selected;
}

std::vector<NodeId> random_select(std::span<const NodeId> candidates, std::size_t count, Rng &rng) {
    check_count(candidates, count);
    std::vector<NodeId> pool(candidates.begin(), candidates.end());
    // Partial Fisher-Yates.
    for (std::size_t k = 0; k < count; ++k) {
        std::uniform_int_distribution<std::size_t> pick(k, pool.size() - 1);
        std::swap(pool[k], pool[pick(rng)]);
    }
    pool.resize(count);
    return pool;
}

double covering_radius(const Matrix &emb, std::span<const NodeId> candidates, std::span<const NodeId> selected) {
    double radius = 0.0;
    for (NodeId c : candidates) {
        double nearest = std::numeric_limits<double>::infinity();
        for (NodeId s : selected) { nearest = std::min(nearest, (emb.row(c) - emb.row(s)).squaredNorm()); }
        radius = std::max(radius, nearest);
    }
    return std::sqrt(radius);
}

double mean_discrepancy(const Matrix &emb, std::span<const NodeId> candidates, std::span<const NodeId> selected) {
    return (candidate_mean(emb, selected) - candidate_mean(emb, candidates)).norm();
}

std::vector<NodeId> coreset_select(const graph::GraphDataset &ds, Method method, std::span<const std::size_t> counts,
                                   Rng &rng) {
    if (counts.size() != ds.num_classes) { throw std::invalid_argument("coreset_select: one count per class"); }
    const auto by_class = train_nodes_by_class(ds);
    for (std::size_t c = 0; c < by_class.size(); ++c) {
        if (counts[c] > by_class[c].size()) {
            throw ConfigError("class " + std::to_string(c) + " has " + std::to_string(by_class[c].size()) +
                              " training nodes, " + std::to_string(counts[c]) + " requested");
        }
    }
    const Matrix emb = method == Method::Random ? Matrix() : selection_embedding(ds);
    std::vector<NodeId> out;
    for (std::size_t c = 0; c < by_class.size(); ++c) {
        std::vector<NodeId> part;
        switch (method) {
            case Method::Random: part = random_select(by_class[c], counts[c], rng); break;
            case Method::Herding: part = herding_select(emb, by_class[c], counts[c]); break;
            case Method::KCenter: part = kcenter_select(emb, by_class[c], counts[c]); break;
        }
        out.insert(out.end(), part.begin(), part.end());
    }
    return out;
}

}  // namespace graphcondense::coreset
