// Copyright 2026 The progbench Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace progbench {

/// Reads one JSON value per non-blank line. Throws Error(ParseError) naming the
/// offending line number.
std::vector<nlohmann::json> read_jsonl(const std::filesystem::path& path);

template <class T>
std::vector<T> read_jsonl_as(const std::filesystem::path& path) {
    std::vector<T> out;
    for (const auto& j : read_jsonl(path)) out.push_back(j.template get<T>());
    return out;
}

/// Writes the file atomically (temp file + rename).
void write_text_file(const std::filesystem::path& path, std::string_view contents);
void write_jsonl(const std::filesystem::path& path, const std::vector<nlohmann::json>& rows);
std::string read_text_file(const std::filesystem::path& path);

std::string sha256_hex(std::string_view data);
std::uint64_t stable_hash64(std::string_view data);
std::string base64_encode(std::string_view bytes);

/// Formats a percent for display: integer when whole, otherwise one decimal.
std::string format_percent(double value);

}  // namespace progbench
