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
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

namespace graphcondense::cli {

/// Effective settings of one command. Enumerations are kept as their names
/// and parsed when used.
struct RunConfig {
    std::string dataset;
    std::string out = "out";
    std::string bank;
    std::string condensed;
    std::uint64_t seed = 0;
    std::vector<std::string> inputs;

    struct Synth {
        std::size_t num_nodes = 300;
        std::size_t num_classes = 3;
        double p_in = 0.08;
        double p_out = 0.005;
        std::size_t dim = 32;
        double mean_scale = 1.5;
        std::size_t train_per_class = 20;
        std::size_t val_per_class = 30;
    } synth;

    struct Model {
        std::string arch = "GCN";
        std::size_t hidden = 256;
        int sgc_depth = 2;
    } model;

    struct Experts {
        int num_experts = 20;
        int epochs = 2400;
        int interval = 100;
        double step_size = 0.1;
        double weight_decay = 0.0;
    } experts;

    struct Condense {
        double ratio = 0.026;
        bool inductive = false;
        int expert_epochs = 1200;
        int student_steps = 500;
        double student_lr = 0.5;
        double meta_lr = 1e-4;
        int iterations = 1000;
        int max_start_epoch = -1;
        int score_every = 10;
        int batch = 1;
        std::string outer_optimizer = "adam";
        int tape_stride = 0;
    } condense;

    struct Gntk {
        int layers = 2;
        int fc_per_layer = 1;
        std::string aggregation = "normalized";
        double ridge_factor = 1e-6;
        double ridge = 0.0;
        std::size_t val_cap = 2000;
    } gntk;

    struct Eval {
        std::vector<std::string> archs{"GCN"};
        std::size_t hidden = 256;
        int sgc_depth = 2;
        std::string optimizer = "adam";
        double step_size = 0.01;
        double weight_decay = 5e-4;
        int epochs = 600;
        double init_scale = 1.0;
        int repeats = 10;
        bool induced_subgraph = false;
        std::string structure = "none";
        int structure_k = 1;
        bool timing = false;
        bool all_checkpoints = false;
        std::string method = "random";
        std::string format = "csv";
    } eval;
};

nlohmann::json to_json(const RunConfig &cfg);
/// Overlays the keys present in `j`; unknown keys are a ConfigError.
void merge_json(RunConfig &cfg, const nlohmann::json &j);

/// Parses `args` (without the program name), runs the command and returns
/// the process exit code: 0 ok, 2 bad configuration, 3 missing or malformed
/// input, 4 numerical failure.
int run(const std::vector<std::string> &args, std::ostream &out, std::ostream &err);

}  // namespace graphcondense::cli
