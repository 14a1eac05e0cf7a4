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
#include <string>

#include "logsift/time_util.hpp"

namespace logsift {

/// One HTTP request-reply pair from the web log.
struct HttpHit {
  std::uint64_t hit_id = 0;  // first-seen order, strictly increasing
  UnixTime timestamp = 0;
  std::string client_ip;  // normalized; empty when the log had none
  std::string method;     // canonical uppercase verb token
  std::string uri_stem;   // left of "?", never contains "?"
  std::string uri_query;  // right of "?", may be empty
  int status = 0;         // 100..599
  std::string agent_raw;
  std::string referrer;
  bool is_page_view = false;
};

/// One SQL request from the query log.
struct SqlRequest {
  std::uint64_t query_id = 0;
  UnixTime timestamp = 0;
  std::string client_ip;
  std::string statement;
  std::uint64_t rows_returned = 0;  // forced 0 when !is_syntax_ok
  double elapsed_s = 0.0;
  double cpu_s = 0.0;  // may exceed elapsed_s on multi-core servers
  bool is_syntax_ok = false;
  std::string error_text;  // empty iff is_syntax_ok
  std::string source_tag;
};

enum class AgentCategory { browser, spider, program, admin, unknown };

const char* to_string(AgentCategory c);
AgentCategory agent_category_from_string(std::string_view s);

/// Parsed user-agent string: canonical name plus coarse category.
/// Deterministic function of the raw string (plus the rule set).
struct AgentInfo {
  std::string raw;
  std::string name = "unknown";
  AgentCategory category = AgentCategory::unknown;
};

enum class SessionClass { unclassified, admin, spider, bot, mortal, other };

const char* to_string(SessionClass c);
SessionClass session_class_from_string(std::string_view s);

}  // namespace logsift
