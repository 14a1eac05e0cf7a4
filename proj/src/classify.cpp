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

#include "logsift/classify.hpp"

#include "logsift/ingest.hpp"

#if defined(_OPENMP)
#include <omp.h>
#endif

namespace logsift {

void accumulate_ip_profile(IpProfileTable& table, const std::string& client_ip,
                           AgentCategory category, std::string_view uri_stem) {
  IpProfile& p = table.try_emplace(client_ip).first->second;
  if (p.client_ip.empty()) p.client_ip = client_ip;
  if (category == AgentCategory::spider) p.ever_spider_agent = true;
  if (category == AgentCategory::admin) p.ever_admin_agent = true;
  if (last_segment(uri_stem) == "robots.txt") p.fetched_robots_txt = true;
}

IpProfileTable build_ip_profiles(std::span<const HttpHit> hits, std::span<const AgentInfo> agents,
                                 const std::set<std::string>& admin_ips, Exec exec) {
  const std::int64_t n = static_cast<std::int64_t>(hits.size());

  auto accumulate = [&](IpProfileTable& table, std::int64_t i) {
    accumulate_ip_profile(table, hits[i].client_ip, agents[i].category, hits[i].uri_stem);
  };

  IpProfileTable table;
  if (exec == Exec::parallel) {
    const int workers = worker_count();
    std::vector<IpProfileTable> partial(workers);
#pragma omp parallel num_threads(workers)
    {
#if defined(_OPENMP)
      IpProfileTable& local = partial[omp_get_thread_num()];
#else
      IpProfileTable& local = partial[0];
#endif
#pragma omp for schedule(static)
      for (std::int64_t i = 0; i < n; ++i) accumulate(local, i);
    }
    // boolean ORs: merge order cannot matter
    for (auto& part : partial) {
      for (auto& [ip, p] : part) {
        IpProfile& dst = table.try_emplace(ip).first->second;
        if (dst.client_ip.empty()) dst.client_ip = ip;
        dst.ever_spider_agent |= p.ever_spider_agent;
        dst.ever_admin_agent |= p.ever_admin_agent;
        dst.fetched_robots_txt |= p.fetched_robots_txt;
      }
    }
  } else {
    for (std::int64_t i = 0; i < n; ++i) accumulate(table, i);
  }

  for (const std::string& ip : admin_ips) {
    auto it = table.find(ip);
    if (it != table.end()) it->second.ever_admin_agent = true;
  }
  return table;
}

SessionClass classify_session(const Session& s, const IpProfile& profile,
                              const ClassifyParams& params) {
  if (profile.ever_admin_agent) return SessionClass::admin;
  if (profile.ever_spider_agent || profile.fetched_robots_txt) return SessionClass::spider;
  if (s.sql_count > 0 &&
      static_cast<double>(s.sql_count) >=
          params.reuse_threshold * static_cast<double>(s.distinct_templates))
    return SessionClass::bot;
  if (s.duration_s >= params.min_duration_s && s.duration_s <= params.max_duration_s &&
      s.request_count() >= params.min_events)
    return SessionClass::mortal;
  return SessionClass::other;
}

void classify_sessions(std::span<Session> sessions, const IpProfileTable& profiles,
                       const ClassifyParams& params, Exec exec) {
  static const IpProfile kEmpty;
  const std::int64_t n = static_cast<std::int64_t>(sessions.size());
  auto label = [&](std::int64_t i) {
    auto it = profiles.find(sessions[i].client_ip);
    sessions[i].classification =
        classify_session(sessions[i], it == profiles.end() ? kEmpty : it->second, params);
  };
  if (exec == Exec::parallel) {
#pragma omp parallel for schedule(static) num_threads(worker_count())
    for (std::int64_t i = 0; i < n; ++i) label(i);
  } else {
    for (std::int64_t i = 0; i < n; ++i) label(i);
  }
}

bool is_valid_query(const SqlRequest& q) { return q.is_syntax_ok && q.rows_returned >= 1; }

bool is_mortal_query_session(const Session& s) {
  return s.sql_count > 0 &&
         static_cast<double>(s.distinct_templates) >= 0.2 * static_cast<double>(s.sql_count) &&
         s.duration_s < 28800;
}

}  // namespace logsift
