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

#include "graphcondense/graph.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "graphcondense/io.hpp"

namespace graphcondense::graph {

namespace fs = std::filesystem;

namespace {

void check_indices(const std::vector<NodeId> &idx, std::size_t n, const char *split, std::vector<char> &owner,
                   char tag) {
    for (NodeId i : idx) {
        if (i >= n) {
            throw FormatError(std::string(split) + " index " + std::to_string(i) + " out of range (N=" +
                              std::to_string(n) + ")");
        }
        if (owner[i] != 0) {
            throw FormatError(std::string("node ") + std::to_string(i) + " appears twice across splits (" + split +
                              ")");
        }
        owner[i] = tag;
    }
}

}  // namespace

void GraphDataset::validate() const {
    if (static_cast<std::size_t>(features.rows()) != num_nodes ||
        static_cast<std::size_t>(features.cols()) != num_features) {
        throw FormatError("feature matrix is " + std::to_string(features.rows()) + "x" +
                          std::to_string(features.cols()) + ", expected " + std::to_string(num_nodes) + "x" +
                          std::to_string(num_features));
    }
    if (labels.size() != num_nodes) {
        throw FormatError("label count " + std::to_string(labels.size()) + " != N=" + std::to_string(num_nodes));
    }
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] >= num_classes) {
            throw FormatError("label " + std::to_string(labels[i]) + " of node " + std::to_string(i) +
                              " >= C=" + std::to_string(num_classes));
        }
    }
    std::vector<Edge> sorted = edges;
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        const Edge &e = sorted[i];
        if (e.u >= e.v) {
            throw FormatError("edge (" + std::to_string(e.u) + "," + std::to_string(e.v) + ") is not ordered u<v");
        }
        if (e.v >= num_nodes) { throw FormatError("edge endpoint " + std::to_string(e.v) + " out of range"); }
        if (i > 0 && sorted[i - 1] == e) {
            throw FormatError("duplicate edge (" + std::to_string(e.u) + "," + std::to_string(e.v) + ")");
        }
    }
    std::vector<char> owner(num_nodes, 0);
    check_indices(splits.train, num_nodes, "train", owner, 1);
    check_indices(splits.val, num_nodes, "val", owner, 2);
    check_indices(splits.test, num_nodes, "test", owner, 3);

    std::vector<char> seen(num_classes, 0);
    for (NodeId i : splits.train) { seen[labels[i]] = 1; }
    for (std::size_t c = 0; c < num_classes; ++c) {
        if (seen[c] == 0) { throw FormatError("class " + std::to_string(c) + " has no training node"); }
    }
}

std::vector<Edge> canonicalize_edges(std::vector<Edge> edges) {
    for (Edge &e : edges) {
        if (e.u > e.v) { std::swap(e.u, e.v); }
    }
    std::erase_if(edges, [](const Edge &e) { return e.u == e.v; });
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
    return edges;
}

NormalizedAdj normalize_adjacency(std::span<const Edge> edges, std::size_t num_nodes) {
    std::vector<double> degree(num_nodes, 1.0);
    for (const Edge &e : edges) {
        if (e.u >= num_nodes || e.v >= num_nodes) {
            throw std::out_of_range("edge endpoint out of range: (" + std::to_string(e.u) + "," +
                                    std::to_string(e.v) + ") with N=" + std::to_string(num_nodes));
        }
        if (e.u == e.v) { continue; }
        degree[e.u] += 1.0;
        degree[e.v] += 1.0;
    }
    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(num_nodes + 2 * edges.size());
    for (std::size_t i = 0; i < num_nodes; ++i) {
        triplets.emplace_back(static_cast<int>(i), static_cast<int>(i), 1.0 / degree[i]);
    }
    for (const Edge &e : edges) {
        if (e.u == e.v) { continue; }
        const double w = 1.0 / std::sqrt(degree[e.u] * degree[e.v]);
        triplets.emplace_back(static_cast<int>(e.u), static_cast<int>(e.v), w);
        triplets.emplace_back(static_cast<int>(e.v), static_cast<int>(e.u), w);
    }
    NormalizedAdj out;
    out.matrix.resize(static_cast<int>(num_nodes), static_cast<int>(num_nodes));
    // Duplicated pairs in the input would be summed; canonical edge lists have none.
    out.matrix.setFromTriplets(triplets.begin(), triplets.end());
    out.matrix.makeCompressed();
    out.degrees = std::move(degree);
    return out;
}

SparseMatrix adjacency_with_self_loops(std::span<const Edge> edges, std::size_t num_nodes) {
    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(num_nodes + 2 * edges.size());
    for (std::size_t i = 0; i < num_nodes; ++i) {
        triplets.emplace_back(static_cast<int>(i), static_cast<int>(i), 1.0);
    }
    for (const Edge &e : edges) {
        if (e.u >= num_nodes || e.v >= num_nodes) { throw std::out_of_range("edge endpoint out of range"); }
        if (e.u == e.v) { continue; }
        triplets.emplace_back(static_cast<int>(e.u), static_cast<int>(e.v), 1.0);
        triplets.emplace_back(static_cast<int>(e.v), static_cast<int>(e.u), 1.0);
    }
    SparseMatrix a(static_cast<int>(num_nodes), static_cast<int>(num_nodes));
    a.setFromTriplets(triplets.begin(), triplets.end());
    a.makeCompressed();
    return a;
}

Matrix propagate(const NormalizedAdj &adj, const Matrix &x, int hops) {
    Matrix out = x;
    for (int h = 0; h < hops; ++h) {
        Matrix next = adj.matrix * out;
        out = std::move(next);
    }
    return out;
}

GraphDataset induced_subgraph(const GraphDataset &ds, std::span<const NodeId> ids) {
    std::vector<std::int64_t> remap(ds.num_nodes, -1);
    for (std::size_t k = 0; k < ids.size(); ++k) {
        const NodeId id = ids[k];
        if (id >= ds.num_nodes) { throw std::out_of_range("subgraph id " + std::to_string(id) + " out of range"); }
        if (remap[id] >= 0) { throw std::invalid_argument("duplicate subgraph id " + std::to_string(id)); }
        remap[id] = static_cast<std::int64_t>(k);
    }
    GraphDataset out;
    out.name = ds.name;
    out.num_nodes = ids.size();
    out.num_features = ds.num_features;
    out.num_classes = ds.num_classes;
    out.features.resize(static_cast<Eigen::Index>(ids.size()), static_cast<Eigen::Index>(ds.num_features));
    out.labels.resize(ids.size());
    for (std::size_t k = 0; k < ids.size(); ++k) {
        out.features.row(static_cast<Eigen::Index>(k)) = ds.features.row(ids[k]);
        out.labels[k] = ds.labels[ids[k]];
    }
    for (const Edge &e : ds.edges) {
        const auto a = remap[e.u];
        const auto b = remap[e.v];
        if (a < 0 || b < 0) { continue; }
        out.edges.push_back({static_cast<NodeId>(std::min(a, b)), static_cast<NodeId>(std::max(a, b))});
    }
    std::sort(out.edges.begin(), out.edges.end());
    auto restrict = [&](const std::vector<NodeId> &src) {
        std::vector<NodeId> dst;
        for (NodeId i : src) {
            if (remap[i] >= 0) { dst.push_back(static_cast<NodeId>(remap[i])); }
        }
        return dst;
    };
    out.splits.train = restrict(ds.splits.train);
    out.splits.val = restrict(ds.splits.val);
    out.splits.test = restrict(ds.splits.test);
    return out;
}

Matrix row_normalize_features(Matrix x) {
    for (Eigen::Index r = 0; r < x.rows(); ++r) {
        const double s = x.row(r).sum();
        if (s != 0.0) { x.row(r) /= s; }
    }
    return x;
}

GraphDataset load_dataset(const fs::path &dir) {
    if (!fs::is_directory(dir)) { throw FormatError("missing dataset directory: " + dir.string()); }
    const nlohmann::json meta = io::read_json(dir / "meta.json");
    GraphDataset ds;
    std::size_t num_edges = 0;
    try {
        ds.name = meta.at("name").get<std::string>();
        ds.num_nodes = meta.at("num_nodes").get<std::size_t>();
        ds.num_features = meta.at("num_features").get<std::size_t>();
        ds.num_classes = meta.at("num_classes").get<std::size_t>();
        num_edges = meta.at("num_edges").get<std::size_t>();
    } catch (const nlohmann::json::exception &e) {
        throw FormatError("bad meta.json in " + dir.string() + ": " + e.what());
    }

    const std::vector<float> feats = io::read_f32(dir / "features.bin");
    if (feats.size() != ds.num_nodes * ds.num_features) {
        throw FormatError("features.bin length mismatch: " + std::to_string(feats.size()) + " floats, expected " +
                          std::to_string(ds.num_nodes * ds.num_features));
    }
    ds.features = Eigen::Map<const Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
                      feats.data(), static_cast<Eigen::Index>(ds.num_nodes),
                      static_cast<Eigen::Index>(ds.num_features))
                      .cast<double>();

    ds.labels = io::read_u32(dir / "labels.bin");
    if (ds.labels.size() != ds.num_nodes) {
        throw FormatError("labels.bin length mismatch: " + std::to_string(ds.labels.size()) + " labels, expected " +
                          std::to_string(ds.num_nodes));
    }

    const std::vector<std::uint32_t> raw_edges = io::read_u32(dir / "edges.bin");
    if (raw_edges.size() != 2 * num_edges) {
        throw FormatError("edges.bin length mismatch: " + std::to_string(raw_edges.size() / 2) + " pairs, expected " +
                          std::to_string(num_edges));
    }
    ds.edges.resize(num_edges);
    for (std::size_t i = 0; i < num_edges; ++i) { ds.edges[i] = {raw_edges[2 * i], raw_edges[2 * i + 1]}; }

    const nlohmann::json splits = io::read_json(dir / "splits.json");
    try {
        ds.splits.train = splits.at("train").get<std::vector<NodeId>>();
        ds.splits.val = splits.at("val").get<std::vector<NodeId>>();
        ds.splits.test = splits.at("test").get<std::vector<NodeId>>();
    } catch (const nlohmann::json::exception &e) {
        throw FormatError("bad splits.json in " + dir.string() + ": " + e.what());
    }
    ds.validate();
    return ds;
}

void save_dataset(const GraphDataset &ds, const fs::path &dir) {
    fs::create_directories(dir);
    nlohmann::json meta = {{"name", ds.name},
                           {"num_nodes", ds.num_nodes},
                           {"num_features", ds.num_features},
                           {"num_classes", ds.num_classes},
                           {"num_edges", ds.edges.size()}};
    io::write_json(dir / "meta.json", meta);

    const Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> f = ds.features.cast<float>();
    io::write_file_atomic(dir / "features.bin", io::encode_f32({f.data(), static_cast<std::size_t>(f.size())}));
    io::write_file_atomic(dir / "labels.bin", io::encode_u32(ds.labels));

    std::vector<std::uint32_t> raw;
    raw.reserve(2 * ds.edges.size());
    for (const Edge &e : ds.edges) {
        raw.push_back(e.u);
        raw.push_back(e.v);
    }
    io::write_file_atomic(dir / "edges.bin", io::encode_u32(raw));

    nlohmann::json splits = {{"train", ds.splits.train}, {"val", ds.splits.val}, {"test", ds.splits.test}};
    io::write_file_atomic(dir / "splits.json", splits.dump() + "\n");
}

std::vector<std::size_t> train_class_counts(const GraphDataset &ds) {
    std::vector<std::size_t> counts(ds.num_classes, 0);
    for (NodeId i : ds.splits.train) { ++counts[ds.labels[i]]; }
    return counts;
}

}  // namespace graphcondense::graph
