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

#include "graphcondense/io.hpp"

#include <bit>
#include <charconv>
#include <cstring>
#include <fstream>
#include <sstream>

#include "graphcondense/common.hpp"

namespace graphcondense::io {

static_assert(std::endian::native == std::endian::little, "binary formats assume a little-endian host");

std::string read_file(const fs::path &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) { throw FormatError("missing file: " + path.string()); }
    std::ostringstream buf;
    buf << in.rdbuf();
    return std::move(buf).str();
}

void write_file_atomic(const fs::path &path, std::string_view bytes) {
    if (path.has_parent_path()) { fs::create_directories(path.parent_path()); }
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) { throw FormatError("cannot write " + tmp.string()); }
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        if (!out) { throw FormatError("short write to " + tmp.string()); }
    }
    fs::rename(tmp, path);
}

nlohmann::json read_json(const fs::path &path) {
    const std::string text = read_file(path);
    try {
        return nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error &e) {
        throw FormatError("malformed JSON in " + path.string() + ": " + e.what());
    }
}

void write_json(const fs::path &path, const nlohmann::json &value) {
    write_file_atomic(path, value.dump(2) + "\n");
}

namespace {

template<typename T>
std::vector<T> decode(std::string_view bytes, const std::string &what) {
    if (bytes.size() % sizeof(T) != 0) {
        throw FormatError(what + ": size " + std::to_string(bytes.size()) + " is not a multiple of " +
                          std::to_string(sizeof(T)));
    }
    std::vector<T> out(bytes.size() / sizeof(T));
    if (!out.empty()) { std::memcpy(out.data(), bytes.data(), bytes.size()); }
    return out;
}

template<typename T>
std::string encode(std::span<const T> values) {
    std::string out(values.size_bytes(), '\0');
    if (!values.empty()) { std::memcpy(out.data(), values.data(), values.size_bytes()); }
    return out;
}

}  // namespace

std::vector<float> read_f32(const fs::path &path) { return decode<float>(read_file(path), path.string()); }

std::vector<std::uint32_t> read_u32(const fs::path &path) {
    return decode<std::uint32_t>(read_file(path), path.string());
}

std::string encode_f32(std::span<const float> values) { return encode(values); }
std::string encode_u32(std::span<const std::uint32_t> values) { return encode(values); }

std::vector<float> decode_f32(std::string_view bytes, const std::string &what) { return decode<float>(bytes, what); }

std::string format_double(double value) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), value);
    return {buf, res.ptr};
}

}  // namespace graphcondense::io
