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
#include <set>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "logsift/exec.hpp"
#include "logsift/records.hpp"
#include "logsift/session.hpp"

namespace logsift {

/// Everything we ever learned about one client address; ORs over all of its
/// hits in the corpus.
struct IpProfile {
  std::string client_ip;
  bool ever_spider_agent = false;
  bool fetched_robots_txt = false;
  bool ever_admin_agent = false;
};

using IpProfileTable = std::unordered_map<std::string, IpProfile>;

/// Builds one profile per client address. `admin_ips` marks configured
/// administrative addresses on top of agent evidence.
IpProfileTable build_ip_profiles(std::span<const HttpHit> hits, std::span<const AgentInfo> agents,
                                 const std::set<std::string>& admin_ips = {},
                                 Exec exec = Exec::parallel);

/// Folds one hit's evidence into the table (streaming variant of
/// build_ip_profiles).
void accumulate_ip_profile(IpProfileTable& table, const std::string& client_ip,
                           AgentCategory category, std::string_view uri_stem);

/// Session-label thresholds; defaults are the heuristics of the study.
struct ClassifyParams {
  double reuse_threshold = 4.0;       // bot: sql_count >= threshold * distinct_templates
  std::uint64_t min_events = 4;       // mortal: at least this many requests
  std::int64_t min_duration_s = 60;   // mortal: one minute ...
  std::int64_t max_duration_s = 28800;  // ... to eight hours
};

/// Labels one session. Precedence: admin, then spider (agent evidence or a
/// robots.txt fetch taints every session of the IP), then bot (template
/// reuse), then mortal (duration and size window), else other.
SessionClass classify_session(const Session& session, const IpProfile& profile,
                              const ClassifyParams& params = {});

/// Labels every session in place using the profile table (missing profile ==
/// all-false profile, e.g. SQL-only addresses).
void classify_sessions(std::span<Session> sessions, const IpProfileTable& profiles,
                       const ClassifyParams& params = {}, Exec exec = Exec::parallel);

/// A valid query parsed and returned at least one row.
bool is_valid_query(const SqlRequest& q);

/// Mortal-query sessions: distinct templates at least 20% of the SQL count
/// and under eight hours.
bool is_mortal_query_session(const Session& session);

}  // namespace logsift
