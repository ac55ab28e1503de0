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

#include "graphcondense/evaluator.hpp"

#include <chrono>
#include <cmath>
#include <iomanip>
#include <numeric>
#include <sstream>

#include "graphcondense/io.hpp"
#include "graphcondense/parallel.hpp"

namespace graphcondense::evaluator {

void EvalConfig::validate() const {
    train.validate();
    if (repeats < 1) { throw ConfigError("repeats must be >= 1"); }
    if (hidden < 1) { throw ConfigError("hidden width must be >= 1"); }
    if (sgc_depth < 1) { throw ConfigError("SGC depth must be >= 1"); }
    if (structure && structure_k < 1) { throw ConfigError("structure k must be >= 1"); }
}

TrainingSet from_condensed(const condenser::CondensedData &cd, const EvalConfig &cfg) {
    TrainingSet set{cd.features, cd.labels, std::nullopt};
    if (cfg.structure) { set.adjacency = condenser::build_structure_variant(cd.features, *cfg.structure, cfg.structure_k); }
    return set;
}

TrainingSet from_coreset(const graph::GraphDataset &ds, std::span<const NodeId> ids, const EvalConfig &cfg) {
    TrainingSet set;
    set.features.resize(static_cast<Eigen::Index>(ids.size()), ds.features.cols());
    for (std::size_t k = 0; k < ids.size(); ++k) {
        set.features.row(static_cast<Eigen::Index>(k)) = ds.features.row(ids[k]);
        set.labels.push_back(ds.labels[ids[k]]);
    }
    if (cfg.induced_subgraph) {
        const graph::GraphDataset sub = graph::induced_subgraph(ds, ids);
        set.adjacency = graph::normalize_adjacency(sub.edges, sub.num_nodes);
    }
    return set;
}

std::pair<double, double> mean_std(std::span<const double> values) {
    if (values.empty()) { return {std::nan(""), std::nan("")}; }
    const double n = static_cast<double>(values.size());
    const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
    double ss = 0.0;
    for (double v : values) { ss += (v - mean) * (v - mean); }
    return {mean, std::sqrt(ss / n)};
}

gnn::GnnArch make_arch(const graph::GraphDataset &ds, gnn::ArchKind kind, const EvalConfig &cfg) {
    return {kind, ds.num_features, cfg.hidden, ds.num_classes, cfg.sgc_depth};
}

namespace {

std::vector<NodeId> all_rows(std::size_t n) {
    std::vector<NodeId> idx(n);
    std::iota(idx.begin(), idx.end(), NodeId{0});
    return idx;
}

// Trains once per seed; the task fields not set by `make_task` are shared.
EvalReport run_seeds(const graph::GraphDataset &ds, const gnn::GnnArch &arch, const gnn::PreparedInput &input,
                     std::span<const ClassId> labels, std::span<const NodeId> mask, const EvalConfig &cfg) {
    const auto start = std::chrono::steady_clock::now();
    const graph::NormalizedAdj adj = graph::normalize_adjacency(ds.edges, ds.num_nodes);
    const gnn::PreparedInput eval_input = gnn::prepare_input(arch, gnn::Topology{&adj}, ds.features);

    gnn::TrainTask task;
    task.input = &input;
    task.labels = labels;
    task.mask = mask;
    task.eval_input = &eval_input;
    task.eval_labels = ds.labels;
    task.val_idx = ds.splits.val;
    task.test_idx = ds.splits.test;

    const auto repeats = static_cast<std::size_t>(cfg.repeats);
    std::vector<double> acc(repeats, 0.0);
    std::vector<char> ok(repeats, 1);
    parallel_for(repeats, [&](std::size_t s) {
        gnn::TrainConfig tc = cfg.train;
        tc.seed = cfg.seed_base + s;
        try {
            acc[s] = 100.0 * gnn::train(arch, task, tc).test_acc_at_best;
        } catch (const NumericalError &) {
            ok[s] = 0;
        }
    });

    EvalReport r;
    r.dataset = ds.name;
    r.arch = gnn::to_string(arch.kind);
    for (std::size_t s = 0; s < repeats; ++s) {
        const std::uint64_t seed = cfg.seed_base + s;
        if (ok[s] != 0 && std::isfinite(acc[s])) {
            r.accuracies.push_back(acc[s]);
            r.seeds.push_back(seed);
        } else {
            r.diverged.push_back(seed);
        }
    }
    if (r.accuracies.empty()) { throw NumericalError("eval", "training diverged for every seed"); }
    std::tie(r.mean, r.stddev) = mean_std(r.accuracies);
    if (cfg.timing) {
        r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    }
    return r;
}

}  // namespace

EvalReport eval_condensed(const graph::GraphDataset &ds, const TrainingSet &set, gnn::ArchKind kind,
                          const EvalConfig &cfg, const std::string &method, double ratio) {
    cfg.validate();
    if (static_cast<std::size_t>(set.features.cols()) != ds.num_features) {
        throw ConfigError("training set has " + std::to_string(set.features.cols()) + " features, dataset has " +
                          std::to_string(ds.num_features));
    }
    if (set.size() == 0 || static_cast<std::size_t>(set.features.rows()) != set.size()) {
        throw ConfigError("training set is empty or its labels do not match its rows");
    }
    for (ClassId c : set.labels) {
        if (c >= ds.num_classes) { throw ConfigError("training-set label out of range"); }
    }
    const gnn::GnnArch arch = make_arch(ds, kind, cfg);
    const gnn::Topology topo = set.adjacency ? gnn::Topology{&*set.adjacency} : gnn::Topology::identity();
    const gnn::PreparedInput input = gnn::prepare_input(arch, topo, set.features);
    const std::vector<NodeId> mask = all_rows(set.size());
    EvalReport r = run_seeds(ds, arch, input, set.labels, mask, cfg);
    r.method = method;
    r.ratio = ratio;
    return r;
}

std::vector<EvalReport> cross_arch_eval(const graph::GraphDataset &ds, const TrainingSet &set,
                                        std::span<const gnn::ArchKind> archs, const EvalConfig &cfg,
                                        const std::string &method, double ratio) {
    std::vector<EvalReport> out;
    for (gnn::ArchKind kind : archs) { out.push_back(eval_condensed(ds, set, kind, cfg, method, ratio)); }
    if (out.empty()) { return out; }
    EvalReport avg;
    avg.dataset = ds.name;
    avg.ratio = ratio;
    avg.method = method;
    avg.arch = "average";
    for (const auto &r : out) {
        avg.accuracies.push_back(r.mean);
        avg.seconds += r.seconds;
    }
    std::tie(avg.mean, avg.stddev) = mean_std(avg.accuracies);
    out.push_back(std::move(avg));
    return out;
}

EvalReport eval_whole(const graph::GraphDataset &ds, gnn::ArchKind kind, const EvalConfig &cfg) {
    cfg.validate();
    const gnn::GnnArch arch = make_arch(ds, kind, cfg);
    const graph::NormalizedAdj adj = graph::normalize_adjacency(ds.edges, ds.num_nodes);
    const gnn::PreparedInput input = gnn::prepare_input(arch, gnn::Topology{&adj}, ds.features);
    EvalReport r = run_seeds(ds, arch, input, ds.labels, ds.splits.train, cfg);
    r.method = "whole";
    r.ratio = 1.0;
    return r;
}

EvalReport eval_coreset(const graph::GraphDataset &ds, coreset::Method method, double ratio, gnn::ArchKind kind,
                        const EvalConfig &cfg) {
    const std::vector<std::size_t> counts = condenser::plan_labels(ds, ratio);
    Rng rng(cfg.seed_base);
    const std::vector<NodeId> ids = coreset::coreset_select(ds, method, counts, rng);
    return eval_condensed(ds, from_coreset(ds, ids, cfg), kind, cfg, coreset::to_string(method), ratio);
}

ReportFormat parse_format(const std::string &name) {
    if (name == "csv") { return ReportFormat::Csv; }
    if (name == "markdown" || name == "md") { return ReportFormat::Markdown; }
    throw ConfigError("unknown report format '" + name + "' (expected csv or markdown)");
}

namespace {

std::string fixed(double v, int digits) {
    std::ostringstream out;
    out << std::fixed << std::setprecision(digits) << v;
    return out.str();
}

std::vector<std::string> split_csv_line(const std::string &line) {
    std::vector<std::string> fields;
    std::string cur;
    std::istringstream in(line);
    while (std::getline(in, cur, ',')) { fields.push_back(cur); }
    if (!line.empty() && line.back() == ',') { fields.emplace_back(); }
    return fields;
}

double parse_number(const std::string &s, int line) {
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used != s.size()) { throw std::invalid_argument(s); }
        return v;
    } catch (const std::exception &) {
        throw FormatError("report line " + std::to_string(line) + ": bad number '" + s + "'");
    }
}

constexpr const char *kColumns[] = {"dataset", "ratio", "method", "arch", "mean", "std", "seconds"};

}  // namespace

std::string format_report(std::span<const EvalReport> reports, ReportFormat format) {
    std::ostringstream out;
    if (format == ReportFormat::Csv) {
        out << "dataset,ratio,method,arch,mean,std,seconds\n";
        for (const auto &r : reports) {
            out << r.dataset << ',' << io::format_double(r.ratio) << ',' << r.method << ',' << r.arch << ','
                << fixed(r.mean, 4) << ',' << fixed(r.stddev, 4) << ',' << fixed(r.seconds, 3) << '\n';
        }
        return out.str();
    }
    out << '|';
    for (const char *c : kColumns) { out << ' ' << c << " |"; }
    out << "\n|";
    for (std::size_t i = 0; i < std::size(kColumns); ++i) { out << "---|"; }
    out << '\n';
    for (const auto &r : reports) {
        out << "| " << r.dataset << " | " << io::format_double(r.ratio) << " | " << r.method << " | " << r.arch
            << " | " << fixed(r.mean, 2) << " | " << fixed(r.stddev, 2) << " | " << fixed(r.seconds, 1) << " |\n";
    }
    return out.str();
}

std::vector<EvalReport> parse_report_csv(const std::string &text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line != "dataset,ratio,method,arch,mean,std,seconds") {
        throw FormatError("report CSV header mismatch");
    }
    std::vector<EvalReport> out;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) { continue; }
        const auto f = split_csv_line(line);
        if (f.size() != 7) {
            throw FormatError("report line " + std::to_string(lineno) + ": expected 7 fields, got " +
                              std::to_string(f.size()));
        }
        EvalReport r;
        r.dataset = f[0];
        r.ratio = parse_number(f[1], lineno);
        r.method = f[2];
        r.arch = f[3];
        r.mean = parse_number(f[4], lineno);
        r.stddev = parse_number(f[5], lineno);
        r.seconds = parse_number(f[6], lineno);
        out.push_back(std::move(r));
    }
    return out;
}

void emit_report(std::span<const EvalReport> reports, const std::filesystem::path &path, ReportFormat format) {
    io::write_file_atomic(path, format_report(reports, format));
}

nlohmann::json report_to_json(const EvalReport &r) {
    return {{"dataset", r.dataset},   {"ratio", r.ratio},       {"method", r.method},
            {"arch", r.arch},         {"accuracies", r.accuracies}, {"seeds", r.seeds},
            {"diverged", r.diverged}, {"mean", r.mean},         {"std", r.stddev},
            {"seconds", r.seconds}};
}

EvalReport report_from_json(const nlohmann::json &j) {
    try {
        EvalReport r;
        r.dataset = j.at("dataset").get<std::string>();
        r.ratio = j.at("ratio").get<double>();
        r.method = j.at("method").get<std::string>();
        r.arch = j.at("arch").get<std::string>();
        r.accuracies = j.at("accuracies").get<std::vector<double>>();
        r.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
        r.diverged = j.at("diverged").get<std::vector<std::uint64_t>>();
        r.mean = j.at("mean").get<double>();
        r.stddev = j.at("std").get<double>();
        r.seconds = j.at("seconds").get<double>();
        return r;
    } catch (const nlohmann::json::exception &e) {
        throw FormatError(std::string("bad report JSON: ") + e.what());
    }
}

}  // namespace graphcondense::evaluator
