// Copyright 2026 The Logsift Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace logsift {

/// Splits a line at tab characters. Empty fields are preserved.
std::vector<std::string_view> split_tabs(std::string_view line);

/// Splits at most `max_fields` fields; the last element receives the
/// untouched remainder of the line (used for the trailing statement field).
std::vector<std::string_view> split_tabs_limit(std::string_view line, size_t max_fields);

/// Missing-value convention of the log formats: "-" means empty.
inline std::string_view dash_to_empty(std::string_view f) {
  return f == "-" ? std::string_view{} : f;
}

/// Encodes a statement-style field: wrapped in double quotes with ""
/// escaping when it contains a tab or begins with a quote, verbatim
/// otherwise.
std::string quote_field(std::string_view text);

/// Inverse of quote_field. Returns nullopt on malformed quoting (stray
/// content after the closing quote, unterminated quote).
std::optional<std::string> unquote_field(std::string_view field);

/// Strict non-negative integer parse (rejects signs, junk, overflow).
std::optional<std::uint64_t> parse_u64(std::string_view s);

/// Strict non-negative decimal parse.
std::optional<double> parse_nonneg_double(std::string_view s);

/// FNV-1a 64-bit. Used for workspace stage fingerprints; stable across runs.
std::uint64_t fnv1a(std::string_view data, std::uint64_t seed = 14695981039346656037ULL);

/// FNV-1a over a whole file's bytes. Throws std::runtime_error if unreadable.
std::uint64_t fnv1a_file(const std::string& path);

}  // namespace logsift
