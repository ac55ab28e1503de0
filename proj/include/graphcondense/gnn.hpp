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
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "graphcondense/common.hpp"
#include "graphcondense/graph.hpp"

namespace graphcondense::gnn {

enum class ArchKind { GCN, SGC, MLP };

std::string to_string(ArchKind kind);
/// Accepts "GCN", "SGC", "MLP" in any case; throws ConfigError otherwise.
ArchKind parse_arch(const std::string &name);

/// Two weight matrices (input_dim x hidden, hidden x num_classes), no biases.
///   GCN: Â · ReLU(Â · X · W1) · W2
///   SGC: Â^k · X · W1 · W2, evaluated as Â · (Â^{k-1} X · W1) · W2
///   MLP: ReLU(X · W1) · W2
struct GnnArch {
    ArchKind kind = ArchKind::GCN;
    std::size_t input_dim = 0;
    std::size_t hidden = 256;
    std::size_t num_classes = 0;
    int sgc_depth = 2;

    [[nodiscard]] std::size_t param_count() const { return input_dim * hidden + hidden * num_classes; }
    [[nodiscard]] bool uses_relu() const { return kind != ArchKind::SGC; }
    /// Propagation hops applied to the features before W1.
    [[nodiscard]] int input_hops() const;
    /// Propagation hops applied to the hidden layer before W2.
    [[nodiscard]] int output_hops() const { return kind == ArchKind::MLP ? 0 : 1; }

    bool operator==(const GnnArch &) const = default;
};

/// W1 then W2, each row-major.
using ParamVector = Vector;

using WeightMap = Eigen::Map<const Matrix>;
WeightMap first_weight(const GnnArch &arch, const ParamVector &params);
WeightMap second_weight(const GnnArch &arch, const ParamVector &params);
ParamVector flatten(const Matrix &w1, const Matrix &w2);

/// Propagation operator over the nodes: normalized adjacency, or identity
/// when `adj` is null. Non-owning; the adjacency must outlive it.
struct Topology {
    const graph::NormalizedAdj *adj = nullptr;

    static Topology identity() { return {}; }
    [[nodiscard]] bool is_identity() const { return adj == nullptr; }
    [[nodiscard]] Matrix apply(const Matrix &x, int hops = 1) const;
};

/// Features with the input-side propagation already applied.
struct PreparedInput {
    Topology topology;
    Matrix input;

    [[nodiscard]] std::size_t rows() const { return static_cast<std::size_t>(input.rows()); }
};

PreparedInput prepare_input(const GnnArch &arch, Topology topology, const Matrix &features);

Matrix forward(const GnnArch &arch, const PreparedInput &in, const ParamVector &params);
Matrix forward(const GnnArch &arch, Topology topology, const Matrix &features, const ParamVector &params);

Matrix softmax_rows(const Matrix &logits);

struct LossGrad {
    double loss = 0.0;
    ParamVector grad;
    Matrix logits;
};

/// Mean softmax cross-entropy over `mask` (+ ½·wd·‖θ‖²) and its exact gradient.
LossGrad loss_and_grad(const GnnArch &arch, const PreparedInput &in, std::span<const ClassId> labels,
                       std::span<const NodeId> mask, const ParamVector &params, double weight_decay = 0.0);

/// Fraction of `idx` whose argmax (lowest class on ties) matches the label.
double accuracy(const Matrix &logits, std::span<const ClassId> labels, std::span<const NodeId> idx);

enum class Optimizer { GradientDescent, Adam };

std::string to_string(Optimizer opt);
Optimizer parse_optimizer(const std::string &name);

struct TrainConfig {
    Optimizer optimizer = Optimizer::Adam;
    double step_size = 0.01;
    double weight_decay = 5e-4;
    int epochs = 600;
    std::uint64_t seed = 0;
    /// Multiplier on the Glorot-uniform bound sqrt(6 / (fan_in + fan_out)).
    double init_scale = 1.0;

    void validate() const;
};

ParamVector init_params(const GnnArch &arch, std::uint64_t seed, double init_scale = 1.0);

/// What to fit and, optionally, where to measure validation/test accuracy.
/// When `eval_input` is null the training input is used for evaluation.
struct TrainTask {
    const PreparedInput *input = nullptr;
    std::span<const ClassId> labels;
    std::span<const NodeId> mask;

    const PreparedInput *eval_input = nullptr;
    std::span<const ClassId> eval_labels;
    std::span<const NodeId> val_idx;
    std::span<const NodeId> test_idx;
};

struct EpochLog {
    int epoch = 0;
    double loss = 0.0;
    double train_acc = 0.0;
    double val_acc = 0.0;  // NaN without a validation split
};

struct TrainResult {
    ParamVector final_params;
    /// Parameters with the highest validation accuracy (earliest on ties).
    ParamVector best_params;
    int best_epoch = 0;
    double best_val_acc = 0.0;
    double test_acc_at_best = 0.0;  // NaN without a test split
    std::vector<EpochLog> log;  // epochs 0..E, statistics of θ_e
};

/// Called with θ_e for every e in 0..E.
using EpochCallback = std::function<void(int epoch, const ParamVector &params)>;

/// Full-batch training. Deterministic given the configuration; `initial`
/// overrides the seeded Glorot initialisation.
TrainResult train(const GnnArch &arch, const TrainTask &task, const TrainConfig &cfg,
                  const std::optional<ParamVector> &initial = std::nullopt, const EpochCallback &on_epoch = {});

/// CSV `epoch,loss,train_acc,val_acc`.
std::string format_train_log(std::span<const EpochLog> log);

}  // namespace graphcondense::gnn
