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
#include <span>
#include <string>
#include <vector>

#include "graphcondense/common.hpp"
#include "graphcondense/gnn.hpp"
#include "graphcondense/gntk.hpp"
#include "graphcondense/graph.hpp"
#include "graphcondense/trajectory.hpp"

namespace graphcondense::condenser {

/// Synthetic node set with implicit identity topology.
struct CondensedData {
    Matrix features;              // N' x d
    std::vector<ClassId> labels;  // N'
    std::size_t num_classes = 0;
    std::string source;
    double ratio = 0.0;
    int step = 0;

    [[nodiscard]] std::size_t size() const { return labels.size(); }
};

void save_condensed(const CondensedData &cd, const std::filesystem::path &dir);
CondensedData load_condensed(const std::filesystem::path &dir);

/// Per-class node counts: proportional to the training-label frequencies,
/// at least one per class, largest remainder rounding to round(r·N_ref)
/// where N_ref is N, or the training node count when `inductive`.
std::vector<std::size_t> plan_labels(const graph::GraphDataset &ds, double ratio, bool inductive = false);

/// K-center selection per class on Â²X; returns the raw feature rows of
/// the selected nodes. A class with fewer training nodes than requested is
/// topped up by sampling with replacement (a warning is printed).
CondensedData kcenter_init(const graph::GraphDataset &ds, std::span<const std::size_t> counts, Rng &rng,
                           std::vector<NodeId> *selected = nullptr);

/// Parameters visited by the unrolled student. Only every `stride`-th state
/// is kept; the rest are recomputed on the reverse pass.
struct StudentTape {
    int steps = 0;
    double step_size = 0.0;
    int stride = 1;
    std::vector<gnn::ParamVector> checkpoints;  // θ_{k·stride}
    gnn::ParamVector end;
};

/// q plain-GD steps of `arch` over (X̃, I, Ỹ), full batch, no weight decay.
/// `stride` <= 0 picks ceil(sqrt(q)).
std::pair<gnn::ParamVector, StudentTape> unroll_student(const gnn::GnnArch &arch, const Matrix &features,
                                                        std::span<const ClassId> labels, const gnn::ParamVector &start,
                                                        int steps, double step_size, int stride = 1);

/// Re-runs the tape from its first checkpoint.
gnn::ParamVector replay(const gnn::GnnArch &arch, const Matrix &features, std::span<const ClassId> labels,
                        const StudentTape &tape);

/// The expert segment did not move: ‖θ̃_start − θ*_target‖² <= 1e-12.
class DegenerateSegment : public NumericalError {
public:
    explicit DegenerateSegment(const std::string &what) : NumericalError("meta-match", what) {}
};

/// ‖θ̃_end − θ*_target‖² / ‖θ̃_start − θ*_target‖².
double meta_match_loss(const gnn::ParamVector &student_start, const gnn::ParamVector &student_end,
                       const gnn::ParamVector &expert_target);

struct MetaMatchConfig {
    int expert_epochs = 1200;      // p
    int student_steps = 500;       // q
    double student_lr = 0.5;       // ζ
    double meta_lr = 1e-4;         // outer step on X̃
    int iterations = 1000;         // T0
    int max_start_epoch = -1;      // negative: T/2
    std::uint64_t seed = 0;
    int score_every = 10;
    int batch = 1;                 // segments averaged per outer step
    gnn::Optimizer outer_optimizer = gnn::Optimizer::Adam;
    int tape_stride = 0;           // <= 0: ceil(sqrt(q))

    void validate() const;
};

struct MetaGrad {
    double loss = 0.0;
    Matrix grad;  // dLoss/dX̃
};

/// Loss of one segment and its exact gradient with respect to the condensed
/// features, obtained by reverse-mode differentiation through every
/// unrolled student step (a second-order computation).
MetaGrad meta_match_grad(const gnn::GnnArch &arch, const Matrix &features, std::span<const ClassId> labels,
                         const trajectory::Segment &segment, const MetaMatchConfig &cfg);

/// Vector-Jacobian product of the student's full-batch loss gradient
/// g(θ, X̃): returns (vᵀ∂g/∂θ, vᵀ∂g/∂X̃).
std::pair<gnn::ParamVector, Matrix> student_gradient_vjp(const gnn::GnnArch &arch, const Matrix &features,
                                                         std::span<const ClassId> labels,
                                                         const gnn::ParamVector &params,
                                                         const gnn::ParamVector &cotangent);

struct CondenseConfig {
    double ratio = 0.026;
    bool inductive = false;
    MetaMatchConfig match;
    gntk::GntkConfig gntk;
};

struct CondenseLogRow {
    int step = 0;
    double loss = 0.0;       // NaN at step 0
    double gnf_score = 0.0;  // NaN when the step was not scored
};

struct CondenseResult {
    CondensedData best;
    int best_step = 0;
    std::vector<CondenseLogRow> log;
    std::vector<CondensedData> checkpoints;
    std::vector<double> checkpoint_scores;
};

/// K-center initialisation followed by `iterations` meta-matching updates;
/// checkpoints every `score_every` steps (and at 0 and the last step) are
/// scored and the lowest-scoring one is returned.
CondenseResult condense(const graph::GraphDataset &ds, const trajectory::TrajectoryBank &bank,
                        const CondenseConfig &cfg);

/// CSV `step,loss,gnf_score`; missing values are left empty.
std::string format_condense_log(std::span<const CondenseLogRow> log);

enum class StructureKind { Knn, Cosine };

StructureKind parse_structure(const std::string &name);

/// Adjacency over the condensed nodes: symmetrized Euclidean kNN graph, or
/// cosine similarities clamped to [0,1] with unit diagonal; GCN-normalized.
graph::NormalizedAdj build_structure_variant(const Matrix &features, StructureKind kind, int k = 1);

/// CSV `class,f0,...,f{d-1}`.
std::string format_features_csv(const CondensedData &cd);
void export_features(const CondensedData &cd, const std::filesystem::path &path);

}  // namespace graphcondense::condenser
