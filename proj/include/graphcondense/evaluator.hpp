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
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "graphcondense/common.hpp"
#include "graphcondense/condenser.hpp"
#include "graphcondense/coreset.hpp"
#include "graphcondense/gnn.hpp"
#include "graphcondense/graph.hpp"

namespace graphcondense::evaluator {

struct EvalConfig {
    gnn::TrainConfig train;
    int repeats = 10;
    std::uint64_t seed_base = 0;
    std::size_t hidden = 256;
    int sgc_depth = 2;
    /// Coresets only: keep the subgraph induced on the selected nodes.
    bool induced_subgraph = false;
    /// Optional adjacency built over condensed features.
    std::optional<condenser::StructureKind> structure;
    int structure_k = 1;
    /// Record wall time in reports; off keeps the files byte-reproducible.
    bool timing = false;

    void validate() const;
};

/// A small training set: features, labels and adjacency (identity when empty).
struct TrainingSet {
    Matrix features;
    std::vector<ClassId> labels;
    std::optional<graph::NormalizedAdj> adjacency;

    [[nodiscard]] std::size_t size() const { return labels.size(); }
};

TrainingSet from_condensed(const condenser::CondensedData &cd, const EvalConfig &cfg);
TrainingSet from_coreset(const graph::GraphDataset &ds, std::span<const NodeId> ids, const EvalConfig &cfg);

struct EvalReport {
    std::string dataset;
    double ratio = 0.0;
    std::string method;
    std::string arch;
    std::vector<double> accuracies;  // test accuracy in percent, one per kept seed
    std::vector<std::uint64_t> seeds;
    std::vector<std::uint64_t> diverged;  // seeds dropped for a non-finite loss
    double mean = 0.0;
    double stddev = 0.0;  // population
    double seconds = 0.0;
};

/// Population mean and standard deviation.
std::pair<double, double> mean_std(std::span<const double> values);

gnn::GnnArch make_arch(const graph::GraphDataset &ds, gnn::ArchKind kind, const EvalConfig &cfg);

/// Trains `kind` from scratch on `set` once per seed, selects the epoch with
/// the best validation accuracy on the original graph and reports the
/// original-graph test accuracy at that epoch.
EvalReport eval_condensed(const graph::GraphDataset &ds, const TrainingSet &set, gnn::ArchKind kind,
                          const EvalConfig &cfg, const std::string &method = "condensed", double ratio = 0.0);

/// One report per architecture plus an `average` row (mean of the means).
std::vector<EvalReport> cross_arch_eval(const graph::GraphDataset &ds, const TrainingSet &set,
                                        std::span<const gnn::ArchKind> archs, const EvalConfig &cfg,
                                        const std::string &method = "condensed", double ratio = 0.0);

/// Training on the full original graph and its train split.
EvalReport eval_whole(const graph::GraphDataset &ds, gnn::ArchKind kind, const EvalConfig &cfg);

/// Coreset baseline at `ratio`, label counts as for condensation.
EvalReport eval_coreset(const graph::GraphDataset &ds, coreset::Method method, double ratio, gnn::ArchKind kind,
                        const EvalConfig &cfg);

enum class ReportFormat { Csv, Markdown };

ReportFormat parse_format(const std::string &name);

/// Columns `dataset,ratio,method,arch,mean,std,seconds`.
std::string format_report(std::span<const EvalReport> reports, ReportFormat format);
std::vector<EvalReport> parse_report_csv(const std::string &text);
void emit_report(std::span<const EvalReport> reports, const std::filesystem::path &path, ReportFormat format);

/// Per-seed values, for recomputing the summary columns.
nlohmann::json report_to_json(const EvalReport &r);
EvalReport report_from_json(const nlohmann::json &j);

}  // namespace graphcondense::evaluator
