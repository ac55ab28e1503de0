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

#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "graphcondense/graph.hpp"

namespace fixture {

namespace gc = graphcondense;

/// Scratch directory removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string &tag) {
        std::random_device rd;
        path_ = std::filesystem::temp_directory_path() /
                ("graphcondense_" + tag + "_" + std::to_string(rd()) + std::to_string(rd()));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir &) = delete;
    TempDir &operator=(const TempDir &) = delete;

    [[nodiscard]] const std::filesystem::path &path() const { return path_; }
    std::filesystem::path operator/(const std::string &name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

inline std::string read_bytes(const std::filesystem::path &p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

/// Every regular file below `root`, keyed by relative path.
inline std::map<std::string, std::string> snapshot_tree(const std::filesystem::path &root) {
    std::map<std::string, std::string> out;
    for (const auto &e : std::filesystem::recursive_directory_iterator(root)) {
        if (e.is_regular_file()) { out[std::filesystem::relative(e.path(), root).string()] = read_bytes(e.path()); }
    }
    return out;
}

/// Random labelled graph: labels i mod C, Gaussian features, each pair linked
/// with probability p; the first half of the nodes train, next quarter val.
inline gc::graph::GraphDataset random_dataset(std::size_t n, std::size_t d, std::size_t c, double p,
                                              std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    gc::graph::GraphDataset ds;
    ds.name = "random";
    ds.num_nodes = n;
    ds.num_features = d;
    ds.num_classes = c;
    ds.features.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
    for (Eigen::Index i = 0; i < ds.features.rows(); ++i) {
        for (Eigen::Index j = 0; j < ds.features.cols(); ++j) {
            ds.features(i, j) = static_cast<double>(static_cast<float>(normal(rng)));
        }
    }
    for (std::size_t i = 0; i < n; ++i) { ds.labels.push_back(static_cast<gc::ClassId>(i % c)); }
    for (std::size_t u = 0; u < n; ++u) {
        for (std::size_t v = u + 1; v < n; ++v) {
            if (unit(rng) < p) { ds.edges.push_back({static_cast<gc::NodeId>(u), static_cast<gc::NodeId>(v)}); }
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        auto id = static_cast<gc::NodeId>(i);
        if (i < n / 2) {
            ds.splits.train.push_back(id);
        } else if (i < 3 * n / 4) {
            ds.splits.val.push_back(id);
        } else {
            ds.splits.test.push_back(id);
        }
    }
    return ds;
}

inline std::vector<std::pair<int, int>> edge_pairs(const gc::graph::GraphDataset &ds) {
    std::vector<std::pair<int, int>> out;
    for (const auto &e : ds.edges) { out.emplace_back(static_cast<int>(e.u), static_cast<int>(e.v)); }
    return out;
}

}  // namespace fixture
