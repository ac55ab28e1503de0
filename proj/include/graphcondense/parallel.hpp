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
#include <functional>

namespace graphcondense {

/// Worker count: `GRAPHCONDENSE_THREADS` if set and positive, otherwise
/// the hardware concurrency (at least 1).
std::size_t thread_count();

/// Runs `body(i)` for every i in [0, n). Iterations must be independent;
/// results are expected to be written to per-index slots so the outcome does
/// not depend on scheduling. When several iterations throw, the exception of
/// the lowest index is rethrown.
void parallel_for(std::size_t n, const std::function<void(std::size_t)> &body);

}  // namespace graphcondense
