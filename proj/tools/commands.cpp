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

#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "graphcondense/condenser.hpp"
#include "graphcondense/coreset.hpp"
#include "graphcondense/evaluator.hpp"
#include "graphcondense/gnn.hpp"
#include "graphcondense/gntk.hpp"
#include "graphcondense/graph.hpp"
#include "graphcondense/io.hpp"
#include "graphcondense/synth.hpp"
#include "graphcondense/trajectory.hpp"

namespace graphcondense::cli {

namespace fs = std::filesystem;

namespace {

enum Command : unsigned {
    kSynth = 1U << 0U,
    kExperts = 1U << 1U,
    kCondense = 1U << 2U,
    kScore = 1U << 3U,
    kEval = 1U << 4U,
    kBaseline = 1U << 5U,
    kReport = 1U << 6U,
    kAll = 0x7FU,
};

struct Field {
    std::string section;  // empty: top level
    std::string key;
    std::string flag;
    std::string help;
    unsigned commands = 0;
    std::function<nlohmann::json(const RunConfig &)> get;
    std::function<void(RunConfig &, const nlohmann::json &)> set;
    std::function<CLI::Option *(CLI::App &, RunConfig &)> add;
    std::function<void(RunConfig &, const RunConfig &)> copy;
};

template <class Access>
Field field(std::string section, std::string key, std::string flag, std::string help, unsigned commands,
            Access access) {
    using T = std::remove_reference_t<decltype(access(std::declval<RunConfig &>()))>;
    Field f;
    f.section = std::move(section);
    f.key = std::move(key);
    f.flag = std::move(flag);
    f.help = std::move(help);
    f.commands = commands;
    f.get = [access](const RunConfig &c) { return nlohmann::json(access(const_cast<RunConfig &>(c))); };
    f.set = [access, name = f.section.empty() ? f.key : f.section + "." + f.key](RunConfig &c,
                                                                                const nlohmann::json &j) {
        try {
            access(c) = j.get<T>();
        } catch (const nlohmann::json::exception &e) {
            throw ConfigError("config key '" + name + "': " + e.what());
        }
    };
    f.add = [access, flag = f.flag, help = f.help](CLI::App &app, RunConfig &c) -> CLI::Option * {
        CLI::Option *opt = nullptr;
        if constexpr (std::is_same_v<T, bool>) {
            opt = app.add_flag(flag, access(c), help)->default_str(access(c) ? "true" : "false");
        } else if constexpr (std::is_same_v<T, std::vector<std::string>>) {
            opt = app.add_option(flag, access(c), help)->expected(1, -1);
            std::string joined;
            for (const auto &v : access(c)) { joined += (joined.empty() ? "" : " ") + v; }
            opt->default_str(joined);
        } else {
            opt = app.add_option(flag, access(c), help)->capture_default_str();
        }
        if (opt->get_default_str().empty()) { opt->default_str("\"\""); }
        return opt;
    };
    f.copy = [access](RunConfig &dst, const RunConfig &src) { access(dst) = access(const_cast<RunConfig &>(src)); };
    return f;
}

#define GC_FIELD(section, key, flag, help, commands, member) \
    field(section, key, flag, help, commands, [](RunConfig &c) -> auto & { return c.member; })

const std::vector<Field> &fields() {
    static const std::vector<Field> all = [] {
        constexpr unsigned data_cmds = kExperts | kCondense | kScore | kEval | kBaseline;
        constexpr unsigned train_eval = kEval | kBaseline;
        std::vector<Field> f;
        f.push_back(GC_FIELD("", "dataset", "--dataset", "Dataset directory", data_cmds, dataset));
        f.push_back(GC_FIELD("", "out", "--out", "Output directory", kAll, out));
        f.push_back(GC_FIELD("", "bank", "--bank", "Expert bank file", kCondense, bank));
        f.push_back(GC_FIELD("", "condensed", "--condensed",
                             "Condensed data directory, or a condense output directory", kScore | kEval, condensed));
        f.push_back(GC_FIELD("", "seed", "--seed", "Random seed", kAll & ~kReport, seed));
        f.push_back(GC_FIELD("", "inputs", "--inputs", "Report CSV files to merge", kReport, inputs));

        f.push_back(GC_FIELD("synth", "num_nodes", "--nodes", "Number of nodes", kSynth, synth.num_nodes));
        f.push_back(GC_FIELD("synth", "num_classes", "--classes", "Number of blocks", kSynth, synth.num_classes));
        f.push_back(GC_FIELD("synth", "p_in", "--p-in", "Intra-block edge probability", kSynth, synth.p_in));
        f.push_back(GC_FIELD("synth", "p_out", "--p-out", "Inter-block edge probability", kSynth, synth.p_out));
        f.push_back(GC_FIELD("synth", "dim", "--dim", "Feature dimension", kSynth, synth.dim));
        f.push_back(GC_FIELD("synth", "mean_scale", "--mean-scale", "Class-mean scale", kSynth, synth.mean_scale));
        f.push_back(GC_FIELD("synth", "train_per_class", "--train-per-class", "Training nodes per class", kSynth,
                             synth.train_per_class));
        f.push_back(GC_FIELD("synth", "val_per_class", "--val-per-class", "Validation nodes per class", kSynth,
                             synth.val_per_class));

        f.push_back(GC_FIELD("model", "arch", "--arch", "Expert architecture (GCN, SGC, MLP)", kExperts, model.arch));
        f.push_back(GC_FIELD("model", "hidden", "--hidden", "Expert hidden width", kExperts, model.hidden));
        f.push_back(GC_FIELD("model", "sgc_depth", "--sgc-depth", "Expert SGC propagation depth", kExperts,
                             model.sgc_depth));

        f.push_back(GC_FIELD("experts", "num_experts", "--experts", "Number of expert trajectories", kExperts,
                             experts.num_experts));
        f.push_back(GC_FIELD("experts", "epochs", "--expert-epochs", "Epochs per expert", kExperts, experts.epochs));
        f.push_back(GC_FIELD("experts", "interval", "--interval", "Snapshot interval in epochs", kExperts,
                             experts.interval));
        f.push_back(GC_FIELD("experts", "step_size", "--expert-lr", "Expert gradient-descent step", kExperts,
                             experts.step_size));
        f.push_back(GC_FIELD("experts", "weight_decay", "--expert-wd", "Expert weight decay", kExperts,
                             experts.weight_decay));

        f.push_back(GC_FIELD("condense", "ratio", "--ratio", "Condensation ratio", kCondense | kBaseline,
                             condense.ratio));
        f.push_back(GC_FIELD("condense", "inductive", "--inductive", "Ratio relative to the training nodes",
                             kCondense | kBaseline, condense.inductive));
        f.push_back(GC_FIELD("condense", "expert_epochs", "--p", "Expert epochs matched per segment", kCondense,
                             condense.expert_epochs));
        f.push_back(GC_FIELD("condense", "student_steps", "--q", "Student steps per segment", kCondense,
                             condense.student_steps));
        f.push_back(GC_FIELD("condense", "student_lr", "--student-lr", "Student step size", kCondense,
                             condense.student_lr));
        f.push_back(GC_FIELD("condense", "meta_lr", "--meta-lr", "Feature learning rate", kCondense,
                             condense.meta_lr));
        f.push_back(GC_FIELD("condense", "iterations", "--iterations", "Outer iterations", kCondense,
                             condense.iterations));
        f.push_back(GC_FIELD("condense", "max_start_epoch", "--max-start-epoch",
                             "Latest segment start epoch (negative: half the expert epochs)", kCondense,
                             condense.max_start_epoch));
        f.push_back(GC_FIELD("condense", "score_every", "--score-every", "Checkpoint cadence", kCondense,
                             condense.score_every));
        f.push_back(GC_FIELD("condense", "batch", "--batch", "Segments averaged per outer step", kCondense,
                             condense.batch));
        f.push_back(GC_FIELD("condense", "outer_optimizer", "--outer-optimizer", "Feature optimizer (adam, gd)",
                             kCondense, condense.outer_optimizer));
        f.push_back(GC_FIELD("condense", "tape_stride", "--tape-stride",
                             "Student states kept every n steps (0: sqrt of q)", kCondense, condense.tape_stride));

        constexpr unsigned kernel_cmds = kCondense | kScore;
        f.push_back(GC_FIELD("gntk", "layers", "--gntk-layers", "Kernel layers", kernel_cmds, gntk.layers));
        f.push_back(GC_FIELD("gntk", "fc_per_layer", "--gntk-fc", "ReLU steps per kernel layer", kernel_cmds,
                             gntk.fc_per_layer));
        f.push_back(GC_FIELD("gntk", "aggregation", "--gntk-aggregation", "normalized or plain-sum", kernel_cmds,
                             gntk.aggregation));
        f.push_back(GC_FIELD("gntk", "ridge_factor", "--ridge-factor", "Ridge relative to mean diag K_SS",
                             kernel_cmds, gntk.ridge_factor));
        f.push_back(GC_FIELD("gntk", "ridge", "--ridge", "Absolute ridge (0: use the factor)", kernel_cmds,
                             gntk.ridge));
        f.push_back(GC_FIELD("gntk", "val_cap", "--val-cap", "Largest validation subgraph", kernel_cmds,
                             gntk.val_cap));

        f.push_back(GC_FIELD("eval", "archs", "--archs", "Evaluation architectures", train_eval, eval.archs));
        f.push_back(GC_FIELD("eval", "hidden", "--hidden", "Evaluation hidden width", train_eval, eval.hidden));
        f.push_back(GC_FIELD("eval", "sgc_depth", "--sgc-depth", "Evaluation SGC propagation depth", train_eval,
                             eval.sgc_depth));
        f.push_back(GC_FIELD("eval", "optimizer", "--optimizer", "Evaluation optimizer (adam, gd)", train_eval,
                             eval.optimizer));
        f.push_back(GC_FIELD("eval", "step_size", "--lr", "Evaluation learning rate", train_eval, eval.step_size));
        f.push_back(GC_FIELD("eval", "weight_decay", "--wd", "Evaluation weight decay", train_eval,
                             eval.weight_decay));
        f.push_back(GC_FIELD("eval", "epochs", "--epochs", "Evaluation epochs", train_eval, eval.epochs));
        f.push_back(GC_FIELD("eval", "init_scale", "--init-scale", "Initialisation scale", train_eval,
                             eval.init_scale));
        f.push_back(GC_FIELD("eval", "repeats", "--repeats", "Evaluation seeds", train_eval, eval.repeats));
        f.push_back(GC_FIELD("eval", "induced_subgraph", "--induced-subgraph",
                             "Keep the induced subgraph of coreset nodes", kBaseline, eval.induced_subgraph));
        f.push_back(GC_FIELD("eval", "structure", "--structure", "Condensed structure (none, knn, cosine)", kEval,
                             eval.structure));
        f.push_back(GC_FIELD("eval", "structure_k", "--structure-k", "Neighbours for the knn structure", kEval,
                             eval.structure_k));
        f.push_back(GC_FIELD("eval", "timing", "--timing", "Record wall time in reports", train_eval, eval.timing));
        f.push_back(GC_FIELD("eval", "all_checkpoints", "--all-checkpoints",
                             "Evaluate every checkpoint of a condense run", kEval, eval.all_checkpoints));
        f.push_back(GC_FIELD("eval", "method", "--method", "Baseline (random, herding, kcenter, whole)", kBaseline,
                             eval.method));
        f.push_back(GC_FIELD("eval", "format", "--format", "Report format (csv, markdown)", train_eval | kReport,
                             eval.format));
        return f;
    }();
    return all;
}

#undef GC_FIELD

}  // namespace

nlohmann::json to_json(const RunConfig &cfg) {
    nlohmann::json j = nlohmann::json::object();
    for (const auto &f : fields()) {
        if (f.section.empty()) {
            j[f.key] = f.get(cfg);
        } else {
            j[f.section][f.key] = f.get(cfg);
        }
    }
    return j;
}

void merge_json(RunConfig &cfg, const nlohmann::json &j) {
    if (!j.is_object()) { throw ConfigError("config file must hold a JSON object"); }
    auto find = [](const std::string &section, const std::string &key) -> const Field * {
        for (const auto &f : fields()) {
            if (f.section == section && f.key == key) { return &f; }
        }
        return nullptr;
    };
    for (const auto &[key, value] : j.items()) {
        if (const Field *f = find("", key)) {
            f->set(cfg, value);
            continue;
        }
        const bool is_section = std::any_of(fields().begin(), fields().end(),
                                            [&](const Field &f) { return f.section == key; });
        if (!is_section || !value.is_object()) { throw ConfigError("unknown config key '" + key + "'"); }
        for (const auto &[sub, v] : value.items()) {
            const Field *f = find(key, sub);
            if (f == nullptr) { throw ConfigError("unknown config key '" + key + "." + sub + "'"); }
            f->set(cfg, v);
        }
    }
}

namespace {

struct Context {
    RunConfig cfg;
    std::ostream &out;
    std::ostream &err;
};

fs::path out_dir(const RunConfig &cfg) {
    if (cfg.out.empty()) { throw ConfigError("--out must not be empty"); }
    const fs::path dir(cfg.out);
    fs::create_directories(dir);
    return dir;
}

graph::GraphDataset dataset(const RunConfig &cfg) {
    if (cfg.dataset.empty()) { throw ConfigError("--dataset is required"); }
    return graph::load_dataset(cfg.dataset);
}

gntk::GntkConfig gntk_config(const RunConfig &cfg) {
    gntk::GntkConfig g;
    g.layers = cfg.gntk.layers;
    g.fc_per_layer = cfg.gntk.fc_per_layer;
    g.aggregation = gntk::parse_aggregation(cfg.gntk.aggregation);
    g.ridge_factor = cfg.gntk.ridge_factor;
    g.ridge = cfg.gntk.ridge;
    g.val_cap = cfg.gntk.val_cap;
    g.seed = cfg.seed;
    g.validate();
    return g;
}

evaluator::EvalConfig eval_config(const RunConfig &cfg) {
    evaluator::EvalConfig e;
    e.train.optimizer = gnn::parse_optimizer(cfg.eval.optimizer);
    e.train.step_size = cfg.eval.step_size;
    e.train.weight_decay = cfg.eval.weight_decay;
    e.train.epochs = cfg.eval.epochs;
    e.train.init_scale = cfg.eval.init_scale;
    e.repeats = cfg.eval.repeats;
    e.seed_base = cfg.seed;
    e.hidden = cfg.eval.hidden;
    e.sgc_depth = cfg.eval.sgc_depth;
    e.induced_subgraph = cfg.eval.induced_subgraph;
    if (cfg.eval.structure != "none") { e.structure = condenser::parse_structure(cfg.eval.structure); }
    e.structure_k = cfg.eval.structure_k;
    e.timing = cfg.eval.timing;
    e.validate();
    return e;
}

std::vector<gnn::ArchKind> archs(const RunConfig &cfg) {
    if (cfg.eval.archs.empty()) { throw ConfigError("--archs needs at least one architecture"); }
    std::vector<gnn::ArchKind> out;
    for (const auto &a : cfg.eval.archs) { out.push_back(gnn::parse_arch(a)); }
    return out;
}

void write_resolved(const RunConfig &cfg, const fs::path &dir) { io::write_json(dir / "config.resolved.json", to_json(cfg)); }

std::string report_name(evaluator::ReportFormat f) {
    return f == evaluator::ReportFormat::Csv ? "report.csv" : "report.md";
}

void write_reports(const std::vector<evaluator::EvalReport> &reports, const fs::path &dir,
                   evaluator::ReportFormat format) {
    evaluator::emit_report(reports, dir / report_name(format), format);
    nlohmann::json seeds = nlohmann::json::array();
    for (const auto &r : reports) { seeds.push_back(evaluator::report_to_json(r)); }
    io::write_json(dir / "report.json", seeds);
}

void print_reports(std::ostream &out, const std::vector<evaluator::EvalReport> &reports) {
    for (const auto &r : reports) {
        out << r.method << ' ' << r.arch << ": " << io::format_double(std::round(r.mean * 100.0) / 100.0) << " +- "
            << io::format_double(std::round(r.stddev * 100.0) / 100.0);
        if (!r.diverged.empty()) { out << " (" << r.diverged.size() << " diverged seeds excluded)"; }
        out << '\n';
    }
}

// A condensed data directory, or the checkpoints of a condense output directory.
std::vector<condenser::CondensedData> condensed_inputs(const RunConfig &cfg, bool all_checkpoints) {
    if (cfg.condensed.empty()) { throw ConfigError("--condensed is required"); }
    const fs::path root(cfg.condensed);
    if (!fs::exists(root)) { throw FormatError("missing condensed input: " + root.string()); }
    std::vector<condenser::CondensedData> out;
    if (all_checkpoints) {
        const fs::path ck = root / "checkpoints";
        if (!fs::is_directory(ck)) { throw FormatError("no checkpoints directory in " + root.string()); }
        std::vector<fs::path> dirs;
        for (const auto &e : fs::directory_iterator(ck)) {
            if (e.is_directory()) { dirs.push_back(e.path()); }
        }
        std::sort(dirs.begin(), dirs.end());
        for (const auto &d : dirs) { out.push_back(condenser::load_condensed(d)); }
        if (out.empty()) { throw FormatError("no checkpoints in " + ck.string()); }
        return out;
    }
    if (fs::exists(root / "meta.json")) {
        out.push_back(condenser::load_condensed(root));
    } else {
        out.push_back(condenser::load_condensed(root / "condensed"));
    }
    return out;
}

std::string checkpoint_dir_name(int step) {
    std::string s = std::to_string(step);
    return "step_" + std::string(s.size() < 6 ? 6 - s.size() : 0, '0') + s;
}

int cmd_synth(Context &ctx) {
    const RunConfig &c = ctx.cfg;
    synth::SbmConfig s;
    s.num_nodes = c.synth.num_nodes;
    s.num_classes = c.synth.num_classes;
    s.p_in = c.synth.p_in;
    s.p_out = c.synth.p_out;
    s.dim = c.synth.dim;
    s.mean_scale = c.synth.mean_scale;
    s.train_per_class = c.synth.train_per_class;
    s.val_per_class = c.synth.val_per_class;
    s.seed = c.seed;
    const graph::GraphDataset ds = synth::make_sbm(s);
    const fs::path dir = out_dir(c);
    graph::save_dataset(ds, dir);
    write_resolved(c, dir);
    ctx.out << "wrote " << ds.num_nodes << " nodes, " << ds.edges.size() << " edges to " << dir.string() << '\n';
    return 0;
}

int cmd_experts(Context &ctx) {
    const RunConfig &c = ctx.cfg;
    const graph::GraphDataset ds = dataset(c);
    gnn::GnnArch arch{gnn::parse_arch(c.model.arch), ds.num_features, c.model.hidden, ds.num_classes,
                      c.model.sgc_depth};
    trajectory::ExpertConfig e;
    e.num_experts = c.experts.num_experts;
    e.epochs = c.experts.epochs;
    e.interval = c.experts.interval;
    e.step_size = c.experts.step_size;
    e.weight_decay = c.experts.weight_decay;
    e.seed_base = c.seed;
    e.validate();
    const fs::path dir = out_dir(c);
    write_resolved(c, dir);
    const trajectory::TrajectoryBank bank = trajectory::train_experts(ds, arch, e);
    trajectory::save_bank(bank, dir / "bank.bin");

    std::ostringstream csv;
    csv << "expert,train_acc,val_acc\n";
    for (std::size_t i = 0; i < bank.size(); ++i) {
        csv << i << ',' << io::format_double(bank.trajectories[i].train_acc) << ','
            << io::format_double(bank.trajectories[i].val_acc) << '\n';
    }
    io::write_file_atomic(dir / "experts.csv", csv.str());
    ctx.out << "trained " << bank.size() << " experts, " << bank.snapshot_count() << " snapshots each\n";
    return 0;
}

int cmd_condense(Context &ctx) {
    const RunConfig &c = ctx.cfg;
    const graph::GraphDataset ds = dataset(c);
    if (c.bank.empty()) { throw ConfigError("--bank is required"); }
    condenser::CondenseConfig cc;
    cc.ratio = c.condense.ratio;
    cc.inductive = c.condense.inductive;
    cc.match.expert_epochs = c.condense.expert_epochs;
    cc.match.student_steps = c.condense.student_steps;
    cc.match.student_lr = c.condense.student_lr;
    cc.match.meta_lr = c.condense.meta_lr;
    cc.match.iterations = c.condense.iterations;
    cc.match.max_start_epoch = c.condense.max_start_epoch;
    cc.match.seed = c.seed;
    cc.match.score_every = c.condense.score_every;
    cc.match.batch = c.condense.batch;
    cc.match.outer_optimizer = gnn::parse_optimizer(c.condense.outer_optimizer);
    cc.match.tape_stride = c.condense.tape_stride;
    cc.match.validate();
    cc.gntk = gntk_config(c);
    const trajectory::TrajectoryBank bank = trajectory::load_bank(c.bank);

    const fs::path dir = out_dir(c);
    write_resolved(c, dir);
    const condenser::CondenseResult res = condenser::condense(ds, bank, cc);

    condenser::save_condensed(res.best, dir / "condensed");
    const fs::path ck = dir / "checkpoints";
    fs::remove_all(ck);
    std::ostringstream scores;
    scores << "step,gnf_score\n";
    for (std::size_t i = 0; i < res.checkpoints.size(); ++i) {
        condenser::save_condensed(res.checkpoints[i], ck / checkpoint_dir_name(res.checkpoints[i].step));
        scores << res.checkpoints[i].step << ',' << io::format_double(res.checkpoint_scores[i]) << '\n';
    }
    io::write_file_atomic(dir / "scores.csv", scores.str());
    io::write_file_atomic(dir / "condense_log.csv", condenser::format_condense_log(res.log));
    condenser::export_features(res.best, dir / "features.csv");
    ctx.out << "condensed to " << res.best.size() << " nodes; selected step " << res.best_step << " of "
            << cc.match.iterations << '\n';
    return 0;
}

int cmd_score(Context &ctx) {
    const RunConfig &c = ctx.cfg;
    const graph::GraphDataset ds = dataset(c);
    const fs::path root(c.condensed);
    const bool run_dir = !c.condensed.empty() && fs::is_directory(root / "checkpoints");
    const auto sets = condensed_inputs(c, run_dir);
    const gntk::GnfScorer scorer(ds, gntk_config(c));
    const fs::path dir = out_dir(c);
    write_resolved(c, dir);
    std::ostringstream csv;
    csv << "step,gnf_score\n";
    for (const auto &cd : sets) {
        if (static_cast<std::size_t>(cd.features.cols()) != ds.num_features || cd.num_classes != ds.num_classes) {
            throw ConfigError("condensed data does not match the dataset dimensions");
        }
        csv << cd.step << ',' << io::format_double(scorer.score(cd.features, cd.labels)) << '\n';
    }
    io::write_file_atomic(dir / "scores.csv", csv.str());
    ctx.out << "scored " << sets.size() << " condensed set(s)\n";
    return 0;
}

int cmd_eval(Context &ctx) {
    const RunConfig &c = ctx.cfg;
    const graph::GraphDataset ds = dataset(c);
    const evaluator::EvalConfig ec = eval_config(c);
    const auto kinds = archs(c);
    const auto format = evaluator::parse_format(c.eval.format);
    const auto sets = condensed_inputs(c, c.eval.all_checkpoints);
    const fs::path dir = out_dir(c);
    write_resolved(c, dir);

    auto evaluate = [&](const condenser::CondensedData &cd) {
        const evaluator::TrainingSet set = evaluator::from_condensed(cd, ec);
        if (kinds.size() == 1) { return std::vector{evaluator::eval_condensed(ds, set, kinds[0], ec, "condensed", cd.ratio)}; }
        return evaluator::cross_arch_eval(ds, set, kinds, ec, "condensed", cd.ratio);
    };

    if (!c.eval.all_checkpoints) {
        const auto reports = evaluate(sets.front());
        write_reports(reports, dir, format);
        print_reports(ctx.out, reports);
        return 0;
    }
    std::ostringstream csv;
    csv << "step,arch,mean,std\n";
    std::vector<evaluator::EvalReport> all;
    for (const auto &cd : sets) {
        for (auto &r : evaluate(cd)) {
            csv << cd.step << ',' << r.arch << ',' << io::format_double(r.mean) << ',' << io::format_double(r.stddev)
                << '\n';
            r.method = "condensed@" + std::to_string(cd.step);
            all.push_back(std::move(r));
        }
    }
    io::write_file_atomic(dir / "checkpoints.csv", csv.str());
    write_reports(all, dir, format);
    ctx.out << "evaluated " << sets.size() << " checkpoints\n";
    return 0;
}

int cmd_baseline(Context &ctx) {
    const RunConfig &c = ctx.cfg;
    const graph::GraphDataset ds = dataset(c);
    const evaluator::EvalConfig ec = eval_config(c);
    const auto kinds = archs(c);
    const auto format = evaluator::parse_format(c.eval.format);
    std::optional<coreset::Method> method;
    if (c.eval.method != "whole") { method = coreset::parse_method(c.eval.method); }
    const fs::path dir = out_dir(c);
    write_resolved(c, dir);

    std::vector<evaluator::EvalReport> reports;
    if (!method) {
        for (gnn::ArchKind k : kinds) { reports.push_back(evaluator::eval_whole(ds, k, ec)); }
    } else {
        const auto counts = condenser::plan_labels(ds, c.condense.ratio, c.condense.inductive);
        Rng rng(c.seed);
        const auto ids = coreset::coreset_select(ds, *method, counts, rng);
        const evaluator::TrainingSet set = evaluator::from_coreset(ds, ids, ec);
        const std::string name = coreset::to_string(*method) + (ec.induced_subgraph ? "+graph" : "");
        for (gnn::ArchKind k : kinds) {
            reports.push_back(evaluator::eval_condensed(ds, set, k, ec, name, c.condense.ratio));
        }
    }
    write_reports(reports, dir, format);
    print_reports(ctx.out, reports);
    return 0;
}

int cmd_report(Context &ctx) {
    const RunConfig &c = ctx.cfg;
    if (c.inputs.empty()) { throw ConfigError("--inputs needs at least one report CSV"); }
    const auto format = evaluator::parse_format(c.eval.format);
    std::vector<evaluator::EvalReport> rows;
    for (const auto &p : c.inputs) {
        auto part = evaluator::parse_report_csv(io::read_file(p));
        rows.insert(rows.end(), part.begin(), part.end());
    }
    const fs::path dir = out_dir(c);
    write_resolved(c, dir);
    evaluator::emit_report(rows, dir / report_name(format), format);
    ctx.out << "merged " << rows.size() << " rows\n";
    return 0;
}

struct CommandSpec {
    const char *name;
    const char *help;
    unsigned bit;
    int (*run)(Context &);
};

constexpr CommandSpec kCommands[] = {
    {"synth", "Generate the planted-partition fixture dataset", kSynth, cmd_synth},
    {"experts", "Train the expert trajectory bank", kExperts, cmd_experts},
    {"condense", "Condense a dataset into a structure-free node set", kCondense, cmd_condense},
    {"score", "Score condensed data with the kernel validation loss", kScore, cmd_score},
    {"eval", "Train GNNs on condensed data and report test accuracy", kEval, cmd_eval},
    {"baseline", "Evaluate coreset or whole-graph baselines", kBaseline, cmd_baseline},
    {"report", "Merge report CSV files", kReport, cmd_report},
};

}  // namespace

int run(const std::vector<std::string> &args, std::ostream &out, std::ostream &err) {
    CLI::App app{"Structure-free graph condensation", "graphcondense"};
    app.require_subcommand(1);
    RunConfig flags;
    std::string config_path;

    struct Bound {
        CLI::App *sub;
        const CommandSpec *spec;
        std::vector<std::pair<const Field *, CLI::Option *>> options;
    };
    std::vector<Bound> bound;
    for (const auto &spec : kCommands) {
        Bound b{app.add_subcommand(spec.name, spec.help), &spec, {}};
        b.sub->add_option("--config", config_path, "JSON config file; flags override its values");
        for (const auto &f : fields()) {
            if ((f.commands & spec.bit) != 0U) { b.options.emplace_back(&f, f.add(*b.sub, flags)); }
        }
        bound.push_back(std::move(b));
    }

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError &e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : 2;
    }

    try {
        for (const auto &b : bound) {
            if (!b.sub->parsed()) { continue; }
            Context ctx{RunConfig{}, out, err};
            if (!config_path.empty()) { merge_json(ctx.cfg, io::read_json(config_path)); }
            for (const auto &[f, opt] : b.options) {
                if (opt->count() > 0) { f->copy(ctx.cfg, flags); }
            }
            return b.spec->run(ctx);
        }
    } catch (const ConfigError &e) {
        err << "config error: " << e.what() << '\n';
        return 2;
    } catch (const FormatError &e) {
        err << "input error: " << e.what() << '\n';
        return 3;
    } catch (const NumericalError &e) {
        err << "numerical error [" << e.stage() << "]: " << e.what() << '\n';
        return 4;
    } catch (const std::invalid_argument &e) {
        err << "config error: " << e.what() << '\n';
        return 2;
    } catch (const std::out_of_range &e) {
        err << "config error: " << e.what() << '\n';
        return 2;
    } catch (const nlohmann::json::exception &e) {
        err << "input error: " << e.what() << '\n';
        return 3;
    } catch (const std::exception &e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
    return 2;
}

}  // namespace graphcondense::cli
