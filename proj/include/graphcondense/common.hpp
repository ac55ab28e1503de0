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
#include <random>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace graphcondense {

// Dense matrices are row-major so that node rows are contiguous.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;
using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor, int>;

using NodeId = std::uint32_t;
using ClassId = std::uint32_t;

using Rng = std::mt19937_64;

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid or inconsistent configuration values.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Missing, truncated or malformed input artifacts.
class FormatError : public Error {
public:
    using Error::Error;
};

/// A numerical failure (divergence, failed factorization). `stage()` names
/// the pipeline stage that failed.
class NumericalError : public Error {
public:
    NumericalError(std::string stage, const std::string &what)
        : Error(stage + ": " + what), stage_(std::move(stage)) {}

    [[nodiscard]] const std::string &stage() const noexcept { return stage_; }

private:
    std::string stage_;
};

}  // namespace graphcondense
