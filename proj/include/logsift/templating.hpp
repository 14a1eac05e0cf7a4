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
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "logsift/exec.hpp"
#include "logsift/records.hpp"

namespace logsift {

/// A request stem: the URL left of "?", with the final path segment
/// (extension stripped, lowercased) as the command verb.
struct CommandStem {
  std::uint64_t stem_id = 0;
  std::string stem;
  std::string verb;
  std::uint64_t count = 0;
};

/// A SQL statement fingerprint: numeric literals masked to "#", whitespace
/// collapsed, keywords uppercased, identifiers lowercased.
struct SqlTemplate {
  std::uint64_t template_id = 0;
  std::string template_text;
  std::uint64_t count = 0;
  std::uint64_t syntax_ok_count = 0;
  std::uint64_t returned_rows_count = 0;  // instances with rows_returned >= 1
  std::optional<std::uint64_t> example_query_id;  // first syntactically correct instance
};

/// Splits a stem into (stem, verb). The stem passes through unchanged.
std::pair<std::string, std::string> extract_stem(std::string_view uri_stem);

/// Just the verb part of extract_stem.
std::string stem_verb(std::string_view uri_stem);

/// Masks every numeric-literal token to "#" and normalizes case and
/// whitespace. Idempotent; digits inside identifiers survive. Numbers
/// inside string literals are string content and stay.
std::string sql_template(std::string_view statement);

/// The simplified token stream of a template: parentheses dropped, AS
/// aliases removed and resolved, dotted prefixes stripped to the final
/// name, strings -> STR, comparison ops -> CMP, arithmetic -> ARITH,
/// logical -> LOGIC, bitwise -> BITOP, multi-word keywords merged
/// (GROUP_BY, LEFT_OUTER_JOIN, ...).
std::vector<std::string> simplify_template(std::string_view template_text);

/// Fingerprint tables plus per-record annotations for one pass over the
/// corpus. Ids are first-seen order; the result is independent of the
/// execution policy and worker count.
struct Corpora {
  std::vector<CommandStem> stems;          // index == stem_id
  std::vector<SqlTemplate> templates;      // index == template_id
  std::vector<std::uint64_t> hit_stem_ids;        // parallel to hits
  std::vector<std::uint64_t> query_template_ids;  // parallel to queries
};

Corpora build_corpora(std::span<const HttpHit> hits, std::span<const SqlRequest> queries,
                      Exec exec = Exec::parallel);

}  // namespace logsift
