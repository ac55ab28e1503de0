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

#include "graphcondense/synth.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

namespace graphcondense::synth {

void SbmConfig::validate() const {
    if (num_classes < 1 || num_nodes < num_classes) { throw ConfigError("SBM needs at least one node per class"); }
    if (!(p_in >= 0.0 && p_in <= 1.0) || !(p_out >= 0.0 && p_out <= 1.0)) {
        throw ConfigError("SBM edge probabilities must lie in [0, 1]");
    }
    if (dim < 1) { throw ConfigError("SBM feature dimension must be >= 1"); }
    if (!(mean_scale >= 0.0)) { throw ConfigError("SBM mean scale must be >= 0"); }
    if (train_per_class < 1) { throw ConfigError("SBM needs at least one training node per class"); }
    const std::size_t smallest = num_nodes / num_classes;
    if (train_per_class + val_per_class > smallest) {
        throw ConfigError("SBM blocks of " + std::to_string(smallest) + " nodes cannot hold " +
                          std::to_string(train_per_class) + " train + " + std::to_string(val_per_class) +
                          " val nodes");
    }
}

graph::GraphDataset make_sbm(const SbmConfig &cfg) {
    cfg.validate();
    Rng rng(cfg.seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const std::size_t n = cfg.num_nodes;
    const std::size_t c_count = cfg.num_classes;
    const auto d = static_cast<Eigen::Index>(cfg.dim);

    graph::GraphDataset ds;
    ds.name = "sbm";
    ds.num_nodes = n;
    ds.num_features = cfg.dim;
    ds.num_classes = c_count;
    ds.labels.resize(n);
    for (std::size_t i = 0; i < n; ++i) { ds.labels[i] = static_cast<ClassId>(i * c_count / n); }

    Matrix means(static_cast<Eigen::Index>(c_count), d);
    const double mscale = cfg.mean_scale / std::sqrt(static_cast<double>(cfg.dim));
    for (Eigen::Index c = 0; c < means.rows(); ++c) {
        for (Eigen::Index j = 0; j < d; ++j) { means(c, j) = mscale * normal(rng); }
    }

    for (std::size_t u = 0; u < n; ++u) {
        for (std::size_t v = u + 1; v < n; ++v) {
            const double p = ds.labels[u] == ds.labels[v] ? cfg.p_in : cfg.p_out;
            if (unit(rng) < p) { ds.edges.push_back({static_cast<NodeId>(u), static_cast<NodeId>(v)}); }
        }
    }

    ds.features.resize(static_cast<Eigen::Index>(n), d);
    for (std::size_t i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < d; ++j) {
            const double x = means(ds.labels[i], j) + normal(rng);
            ds.features(static_cast<Eigen::Index>(i), j) = static_cast<double>(static_cast<float>(x));
        }
    }

    for (std::size_t c = 0; c < c_count; ++c) {
        std::vector<NodeId> members;
        for (std::size_t i = 0; i < n; ++i) {
            if (ds.labels[i] == c) { members.push_back(static_cast<NodeId>(i)); }
        }
        std::shuffle(members.begin(), members.end(), rng);
        for (std::size_t k = 0; k < members.size(); ++k) {
            if (k < cfg.train_per_class) {
                ds.splits.train.push_back(members[k]);
            } else if (k < cfg.train_per_class + cfg.val_per_class) {
                ds.splits.val.push_back(members[k]);
            } else {
                ds.splits.test.push_back(members[k]);
            }
        }
    }
    std::sort(ds.splits.train.begin(), ds.splits.train.end());
    std::sort(ds.splits.val.begin(), ds.splits.val.end());
    std::sort(ds.splits.test.begin(), ds.splits.test.end());
    ds.validate();
    return ds;
}

}  // namespace graphcondense::synth
