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

#include "graphcondense/graph.hpp"

namespace graphcondense::synth {

/// Planted-partition SBM with Gaussian class-mean features.
struct SbmConfig {
    std::size_t num_nodes = 300;
    std::size_t num_classes = 3;
    double p_in = 0.08;
    double p_out = 0.005;
    std::size_t dim = 32;
    /// Class means are mean_scale · N(0, I/d); node noise is N(0, I).
    double mean_scale = 1.5;
    std::size_t train_per_class = 20;
    std::size_t val_per_class = 30;
    std::uint64_t seed = 0;

    void validate() const;
};

/// Blocks are contiguous: node i belongs to class floor(i·C/N). Features are
/// rounded to 32-bit so a save/load round trip is exact.
graph::GraphDataset make_sbm(const SbmConfig &cfg);

}  // namespace graphcondense::synth
