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
#include <iosfwd>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "logsift/exec.hpp"
#include "logsift/records.hpp"

namespace logsift {

/// One ordered match rule: case-insensitive substring `pattern` maps the
/// agent string to `name`.
struct AgentMarker {
  std::string pattern;
  std::string name;
};

/// Ordered agent classification rules. Categories are checked in the fixed
/// order admin -> spider -> program -> browser; within a category the first
/// matching marker wins.
struct AgentRules {
  std::vector<AgentMarker> admin;
  std::vector<AgentMarker> spider;
  std::vector<AgentMarker> program;
  std::vector<AgentMarker> browser;
};

/// Built-in rule set covering the agents the analysis cares about
/// (monitoring probes, the big crawlers, script clients, mainstream
/// browsers). Replace via a config file for other corpora.
AgentRules default_agent_rules();

/// Loads rules from a `category \t pattern \t canonical_name` file.
/// Throws std::runtime_error on unreadable file or bad category.
AgentRules load_agent_rules(const std::string& path);

/// Classifies an agent string. Total and deterministic; unmatched strings
/// get {name="unknown", category=unknown}.
AgentInfo classify_agent(std::string_view raw, const AgentRules& rules);

/// Default noise suffix set (lowercased, no dot).
std::set<std::string> default_noise_suffixes();

/// Suffix of the last path segment: text after its last ".", lowercased.
/// No dot -> empty (never a noise type).
std::string suffix_of(std::string_view uri_stem);

/// Last path segment of a stem ("x_sql.asp" from "/en/tools/x_sql.asp").
std::string_view last_segment(std::string_view uri_stem);

/// The page-view filter: delivered-answer hits only. True iff the method is
/// GET/HEAD/PUT/POST, the status is 2xx, the stem suffix is not a noise
/// type, and the agent is not administrative.
bool is_page_view(const HttpHit& hit, const AgentInfo& agent,
                  const std::set<std::string>& noise_suffixes);

struct ParseError {
  std::uint64_t line_no = 0;  // 1-based within the input file
  std::string reason;
};

using HttpParseResult = std::variant<HttpHit, ParseError>;
using SqlParseResult = std::variant<SqlRequest, ParseError>;

/// Parses one line of the normalized HTTP log format:
///   timestamp \t client_ip \t method \t uri_stem \t uri_query \t status \t agent \t referrer
/// "-" fields map to empty. hit_id and is_page_view are left for the caller.
HttpParseResult parse_http_line(std::string_view line, std::uint64_t line_no);

/// Parses one line of the normalized SQL log format:
///   timestamp \t client_ip \t rows \t elapsed_s \t cpu_s \t syntax_ok \t error_text \t source_tag \t statement
/// The statement field may be double-quoted with "" escaping when it
/// contains tabs.
SqlParseResult parse_sql_line(std::string_view line, std::uint64_t line_no);

/// Batch results of ingesting one or more log files. Record ids are
/// assigned in input order (file list order, then line order) and are
/// strictly increasing; parse errors are collected, not fatal.
struct HttpIngest {
  std::vector<HttpHit> hits;
  std::vector<AgentInfo> agents;  // parallel to hits
  std::vector<ParseError> errors;
  std::uint64_t lines = 0;
};

struct SqlIngest {
  std::vector<SqlRequest> queries;
  std::vector<ParseError> errors;
  std::uint64_t lines = 0;
};

/// Parses a whole HTTP log stream, classifying agents and flagging page
/// views. `first_id` seeds hit_id assignment so multiple files chain.
HttpIngest ingest_http(std::istream& in, const AgentRules& rules,
                       const std::set<std::string>& noise_suffixes,
                       std::uint64_t first_id = 0, Exec exec = Exec::parallel);

SqlIngest ingest_sql(std::istream& in, std::uint64_t first_id = 0, Exec exec = Exec::parallel);

/// Chunk-level workers behind the stream functions; `first_line_no` keeps
/// parse-error line numbers absolute when a file is processed in slices.
HttpIngest ingest_http_lines(std::span<const std::string> lines, std::uint64_t first_line_no,
                             std::uint64_t first_id, const AgentRules& rules,
                             const std::set<std::string>& noise_suffixes, Exec exec);

SqlIngest ingest_sql_lines(std::span<const std::string> lines, std::uint64_t first_line_no,
                           std::uint64_t first_id, Exec exec);

}  // namespace logsift
