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
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

namespace graphcondense::io {

namespace fs = std::filesystem;

/// Reads a whole file; throws FormatError naming the path when it is missing.
std::string read_file(const fs::path &path);

/// Writes through a temporary sibling and renames it into place.
void write_file_atomic(const fs::path &path, std::string_view bytes);

nlohmann::json read_json(const fs::path &path);
void write_json(const fs::path &path, const nlohmann::json &value);

// Little-endian 32-bit arrays.
std::vector<float> read_f32(const fs::path &path);
std::vector<std::uint32_t> read_u32(const fs::path &path);
std::string encode_f32(std::span<const float> values);
std::string encode_u32(std::span<const std::uint32_t> values);
std::vector<float> decode_f32(std::string_view bytes, const std::string &what);

/// Serialises a double for text outputs with enough digits to round-trip.
std::string format_double(double value);

}  // namespace graphcondense::io
