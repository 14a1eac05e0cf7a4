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

#include "logsift/tsv.hpp"

#include <cerrno>
#include <cstdio>
#include <cstring>
#include <limits>
#include <stdexcept>

namespace logsift {

std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> out;
  size_t start = 0;
  while (true) {
    size_t tab = line.find('\t', start);
    if (tab == std::string_view::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, tab - start));
    start = tab + 1;
  }
  return out;
}

std::vector<std::string_view> split_tabs_limit(std::string_view line, size_t max_fields) {
  std::vector<std::string_view> out;
  size_t start = 0;
  while (out.size() + 1 < max_fields) {
    size_t tab = line.find('\t', start);
    if (tab == std::string_view::npos) break;
    out.push_back(line.substr(start, tab - start));
    start = tab + 1;
  }
  out.push_back(line.substr(start));
  return out;
}

std::string quote_field(std::string_view text) {
  bool needs = !text.empty() && (text.front() == '"' || text.find('\t') != std::string_view::npos);
  if (!needs) return std::string(text);
  std::string out;
  out.reserve(text.size() + 2);
  out.push_back('"');
  for (char c : text) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

std::optional<std::string> unquote_field(std::string_view field) {
  if (field.empty() || field.front() != '"') return std::string(field);
  std::string out;
  out.reserve(field.size());
  size_t i = 1;
  while (i < field.size()) {
    char c = field[i];
    if (c == '"') {
      if (i + 1 < field.size() && field[i + 1] == '"') {
        out.push_back('"');
        i += 2;
        continue;
      }
      // closing quote must end the field
      return (i + 1 == field.size()) ? std::optional<std::string>(out) : std::nullopt;
    }
    out.push_back(c);
    ++i;
  }
  return std::nullopt;  // unterminated
}

std::optional<std::uint64_t> parse_u64(std::string_view s) {
  if (s.empty()) return std::nullopt;
  std::uint64_t v = 0;
  for (char c : s) {
    if (c < '0' || c > '9') return std::nullopt;
    if (v > (std::numeric_limits<std::uint64_t>::max() - (c - '0')) / 10) return std::nullopt;
    v = v * 10 + static_cast<std::uint64_t>(c - '0');
  }
  return v;
}

std::optional<double> parse_nonneg_double(std::string_view s) {
  if (s.empty() || s.front() == '-' || s.front() == '+') return std::nullopt;
  char buf[64];
  if (s.size() >= sizeof(buf)) return std::nullopt;
  std::memcpy(buf, s.data(), s.size());
  buf[s.size()] = '\0';
  char* end = nullptr;
  errno = 0;
  double v = std::strtod(buf, &end);
  if (errno != 0 || end != buf + s.size() || v < 0.0) return std::nullopt;
  return v;
}

std::uint64_t fnv1a(std::string_view data, std::uint64_t seed) {
  std::uint64_t h = seed;
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::uint64_t fnv1a_file(const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "rb");
  if (!f) throw std::runtime_error("cannot open file for hashing: " + path);
  std::uint64_t h = 14695981039346656037ULL;
  char buf[1 << 16];
  size_t n;
  while ((n = std::fread(buf, 1, sizeof(buf), f)) > 0)
    h = fnv1a(std::string_view(buf, n), h);
  bool bad = std::ferror(f);
  std::fclose(f);
  if (bad) throw std::runtime_error("read error while hashing: " + path);
  return h;
}

}  // namespace logsift
