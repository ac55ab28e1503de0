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

#include "graphcondense/trajectory.hpp"

#include <cmath>
#include <cstring>
#include <limits>
#include <string>

#include "graphcondense/io.hpp"
#include "graphcondense/parallel.hpp"

namespace graphcondense::trajectory {

namespace {
constexpr int kBankVersion = 1;
}

void ExpertConfig::validate() const {
    if (num_experts < 1) { throw ConfigError("expert count K must be >= 1"); }
    if (epochs < 0) { throw ConfigError("expert epochs T must be >= 0"); }
    if (interval < 1 || epochs % interval != 0) {
        throw ConfigError("snapshot interval " + std::to_string(interval) + " must divide T=" + std::to_string(epochs));
    }
    if (!(step_size > 0.0)) { throw ConfigError("expert step size must be > 0"); }
}

gnn::ParamVector TrajectoryBank::snapshot(std::size_t trajectory, int epoch) const {
    if (trajectory >= trajectories.size() || epoch < 0 || epoch > epochs || epoch % interval != 0) {
        throw std::out_of_range("no snapshot for trajectory " + std::to_string(trajectory) + " at epoch " +
                                std::to_string(epoch));
    }
    return trajectories[trajectory].snapshots[static_cast<std::size_t>(epoch / interval)].cast<double>();
}

TrajectoryBank train_experts(const graph::GraphDataset &ds, const gnn::GnnArch &arch, const ExpertConfig &cfg) {
    cfg.validate();
    const graph::NormalizedAdj adj = graph::normalize_adjacency(ds.edges, ds.num_nodes);
    const gnn::PreparedInput input = gnn::prepare_input(arch, gnn::Topology{&adj}, ds.features);

    TrajectoryBank bank;
    bank.arch = arch;
    bank.epochs = cfg.epochs;
    bank.interval = cfg.interval;
    bank.trajectories.resize(static_cast<std::size_t>(cfg.num_experts));

    parallel_for(bank.trajectories.size(), [&](std::size_t i) {
        gnn::TrainConfig tc;
        tc.optimizer = gnn::Optimizer::GradientDescent;
        tc.step_size = cfg.step_size;
        tc.weight_decay = cfg.weight_decay;
        tc.epochs = cfg.epochs;
        tc.seed = cfg.seed_base + i;

        gnn::TrainTask task;
        task.input = &input;
        task.labels = ds.labels;
        task.mask = ds.splits.train;
        task.val_idx = ds.splits.val;

        Trajectory &traj = bank.trajectories[i];
        traj.snapshots.reserve(static_cast<std::size_t>(cfg.snapshots_per_trajectory()));
        gnn::TrainResult res;
        try {
            res = gnn::train(arch, task, tc, std::nullopt, [&](int epoch, const gnn::ParamVector &theta) {
                if (epoch % cfg.interval == 0) { traj.snapshots.push_back(theta.cast<float>()); }
            });
        } catch (const NumericalError &e) {
            throw NumericalError("experts", "expert " + std::to_string(i) + " diverged (" + e.what() + ")");
        }
        for (const auto &s : traj.snapshots) {
            if (!s.allFinite()) {
                throw NumericalError("experts", "expert " + std::to_string(i) + " has a non-finite snapshot");
            }
        }
        traj.train_acc = res.log.back().train_acc;
        traj.val_acc = res.log.back().val_acc;
    });
    return bank;
}

Segment sample_segment(const TrajectoryBank &bank, Rng &rng, int p, int max_start_epoch) {
    if (bank.trajectories.empty()) { throw std::invalid_argument("sample_segment: empty bank"); }
    if (p <= 0 || p % bank.interval != 0) {
        throw ConfigError("p=" + std::to_string(p) + " must be a positive multiple of the snapshot interval " +
                          std::to_string(bank.interval));
    }
    const int last_start = std::min(max_start_epoch, bank.epochs - p);
    if (last_start < 0) {
        throw ConfigError("no admissible start epoch: p=" + std::to_string(p) + ", T=" + std::to_string(bank.epochs) +
                          ", max start " + std::to_string(max_start_epoch));
    }
    const auto starts = static_cast<std::size_t>(last_start / bank.interval + 1);
    std::uniform_int_distribution<std::size_t> pick(0, bank.trajectories.size() * starts - 1);
    const std::size_t cell = pick(rng);

    Segment seg;
    seg.trajectory = cell / starts;
    seg.start_epoch = static_cast<int>(cell % starts) * bank.interval;
    seg.target_epoch = seg.start_epoch + p;
    seg.start = bank.snapshot(seg.trajectory, seg.start_epoch);
    seg.target = bank.snapshot(seg.trajectory, seg.target_epoch);
    return seg;
}

nlohmann::json arch_to_json(const gnn::GnnArch &arch) {
    return {{"kind", gnn::to_string(arch.kind)},
            {"input_dim", arch.input_dim},
            {"hidden", arch.hidden},
            {"num_classes", arch.num_classes},
            {"sgc_depth", arch.sgc_depth}};
}

gnn::GnnArch arch_from_json(const nlohmann::json &j) {
    gnn::GnnArch a;
    a.kind = gnn::parse_arch(j.at("kind").get<std::string>());
    a.input_dim = j.at("input_dim").get<std::size_t>();
    a.hidden = j.at("hidden").get<std::size_t>();
    a.num_classes = j.at("num_classes").get<std::size_t>();
    a.sgc_depth = j.at("sgc_depth").get<int>();
    return a;
}

std::string encode_bank(const TrajectoryBank &bank) {
    nlohmann::json header = {{"version", kBankVersion},
                             {"arch", arch_to_json(bank.arch)},
                             {"K", bank.trajectories.size()},
                             {"T", bank.epochs},
                             {"interval", bank.interval},
                             {"param_len", bank.param_len()}};
    // Missing accuracies (no validation split) are stored as null.
    auto acc_json = [](double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); };
    nlohmann::json train_acc = nlohmann::json::array();
    nlohmann::json val_acc = nlohmann::json::array();
    for (const auto &t : bank.trajectories) {
        train_acc.push_back(acc_json(t.train_acc));
        val_acc.push_back(acc_json(t.val_acc));
    }
    header["train_acc"] = train_acc;
    header["val_acc"] = val_acc;

    std::string out = header.dump() + "\n";
    const std::size_t payload = bank.trajectories.size() * static_cast<std::size_t>(bank.snapshot_count()) *
                                bank.param_len() * sizeof(float);
    out.reserve(out.size() + payload);
    for (const auto &t : bank.trajectories) {
        if (t.snapshots.size() != static_cast<std::size_t>(bank.snapshot_count())) {
            throw std::invalid_argument("trajectory snapshot count does not match T/interval+1");
        }
        for (const auto &s : t.snapshots) {
            if (static_cast<std::size_t>(s.size()) != bank.param_len()) {
                throw std::invalid_argument("snapshot length does not match the architecture");
            }
            out += io::encode_f32({s.data(), static_cast<std::size_t>(s.size())});
        }
    }
    return out;
}

TrajectoryBank decode_bank(std::string_view bytes, const std::optional<gnn::GnnArch> &expected) {
    const auto eol = bytes.find('\n');
    if (eol == std::string_view::npos) { throw FormatError("bank file has no header line"); }
    TrajectoryBank bank;
    std::size_t k = 0;
    std::size_t param_len = 0;
    std::vector<double> train_acc;
    std::vector<double> val_acc;
    try {
        const auto header = nlohmann::json::parse(bytes.substr(0, eol));
        if (header.at("version").get<int>() != kBankVersion) {
            throw FormatError("unsupported bank version " + header.at("version").dump());
        }
        bank.arch = arch_from_json(header.at("arch"));
        k = header.at("K").get<std::size_t>();
        bank.epochs = header.at("T").get<int>();
        bank.interval = header.at("interval").get<int>();
        param_len = header.at("param_len").get<std::size_t>();
        auto accs = [](const nlohmann::json &arr) {
            std::vector<double> v;
            for (const auto &x : arr) {
                v.push_back(x.is_null() ? std::numeric_limits<double>::quiet_NaN() : x.get<double>());
            }
            return v;
        };
        train_acc = accs(header.at("train_acc"));
        val_acc = accs(header.at("val_acc"));
    } catch (const nlohmann::json::exception &e) {
        throw FormatError(std::string("corrupted bank header: ") + e.what());
    } catch (const ConfigError &e) {
        throw FormatError(std::string("corrupted bank header: ") + e.what());
    }
    if (bank.interval < 1 || bank.epochs < 0 || bank.epochs % bank.interval != 0) {
        throw FormatError("bank header has inconsistent T/interval");
    }
    if (param_len != bank.arch.param_count()) {
        throw FormatError("bank param_len " + std::to_string(param_len) + " does not match its architecture (" +
                          std::to_string(bank.arch.param_count()) + ")");
    }
    if (expected && !(*expected == bank.arch)) {
        throw FormatError("bank architecture " + arch_to_json(bank.arch).dump() + " does not match expected " +
                          arch_to_json(*expected).dump());
    }
    if (train_acc.size() != k || val_acc.size() != k) { throw FormatError("bank accuracy arrays do not match K"); }

    const auto snaps = static_cast<std::size_t>(bank.snapshot_count());
    const std::size_t floats = k * snaps * param_len;
    const std::string_view payload = bytes.substr(eol + 1);
    if (payload.size() != floats * sizeof(float)) {
        throw FormatError("bank payload is " + std::to_string(payload.size()) + " bytes, expected " +
                          std::to_string(floats * sizeof(float)));
    }
    bank.trajectories.resize(k);
    const char *cursor = payload.data();
    for (std::size_t i = 0; i < k; ++i) {
        auto &t = bank.trajectories[i];
        t.train_acc = train_acc[i];
        t.val_acc = val_acc[i];
        t.snapshots.resize(snaps);
        for (auto &s : t.snapshots) {
            s.resize(static_cast<Eigen::Index>(param_len));
            std::memcpy(s.data(), cursor, param_len * sizeof(float));
            cursor += param_len * sizeof(float);
            if (!s.allFinite()) { throw FormatError("bank contains a non-finite snapshot"); }
        }
    }
    return bank;
}

void save_bank(const TrajectoryBank &bank, const std::filesystem::path &path) {
    io::write_file_atomic(path, encode_bank(bank));
}

TrajectoryBank load_bank(const std::filesystem::path &path, const std::optional<gnn::GnnArch> &expected) {
    return decode_bank(io::read_file(path), expected);
}

}  // namespace graphcondense::trajectory
