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

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include <json.hpp>

#include "graphcondense/gnn.hpp"
#include "graphcondense/graph.hpp"

namespace graphcondense::trajectory {

struct ExpertConfig {
    int num_experts = 20;        // K
    int epochs = 2400;           // T
    int interval = 100;          // snapshot every `interval` epochs
    double step_size = 0.1;      // plain full-batch GD
    double weight_decay = 0.0;
    std::uint64_t seed_base = 0;  // expert i uses seed_base + i

    void validate() const;
    [[nodiscard]] int snapshots_per_trajectory() const { return epochs / interval + 1; }
};

struct Trajectory {
    /// Snapshot j holds θ at epoch j·interval, rounded to 32-bit.
    std::vector<Eigen::VectorXf> snapshots;
    double train_acc = 0.0;
    double val_acc = 0.0;
};

struct TrajectoryBank {
    gnn::GnnArch arch;
    int epochs = 0;
    int interval = 1;
    std::vector<Trajectory> trajectories;

    [[nodiscard]] std::size_t size() const { return trajectories.size(); }
    [[nodiscard]] std::size_t param_len() const { return arch.param_count(); }
    [[nodiscard]] int snapshot_count() const { return epochs / interval + 1; }
    gnn::ParamVector snapshot(std::size_t trajectory, int epoch) const;
};

/// A start snapshot and the snapshot `p` epochs later on the same trajectory.
struct Segment {
    std::size_t trajectory = 0;
    int start_epoch = 0;
    int target_epoch = 0;
    gnn::ParamVector start;
    gnn::ParamVector target;
};

/// Trains K experts on `ds` (train mask, full graph). Throws NumericalError
/// naming the expert that diverged.
TrajectoryBank train_experts(const graph::GraphDataset &ds, const gnn::GnnArch &arch, const ExpertConfig &cfg);

/// Uniform over (trajectory, start snapshot) with start epoch ≤ max_start_epoch
/// and start + p ≤ T.
Segment sample_segment(const TrajectoryBank &bank, Rng &rng, int p, int max_start_epoch);

std::string encode_bank(const TrajectoryBank &bank);
TrajectoryBank decode_bank(std::string_view bytes, const std::optional<gnn::GnnArch> &expected = std::nullopt);

void save_bank(const TrajectoryBank &bank, const std::filesystem::path &path);
/// `expected`, when given, must equal the stored architecture.
TrajectoryBank load_bank(const std::filesystem::path &path, const std::optional<gnn::GnnArch> &expected = std::nullopt);

nlohmann::json arch_to_json(const gnn::GnnArch &arch);
gnn::GnnArch arch_from_json(const nlohmann::json &j);

}  // namespace graphcondense::trajectory
