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

#include "logsift/session.hpp"

#include <algorithm>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

namespace logsift {

namespace {

// Per-IP index lists in first-appearance order; grouping is stable so the
// downstream sort key (start_ts, ip) fully determines the output.
std::vector<std::vector<std::uint32_t>> group_by_ip(std::span<const SessionEvent> events) {
  std::vector<std::vector<std::uint32_t>> groups;
  std::unordered_map<std::string_view, std::uint32_t> ip_to_group;
  ip_to_group.reserve(events.size() / 8 + 16);
  for (std::uint32_t i = 0; i < events.size(); ++i) {
    auto [it, inserted] = ip_to_group.try_emplace(events[i].client_ip,
                                                  static_cast<std::uint32_t>(groups.size()));
    if (inserted) groups.emplace_back();
    groups[it->second].push_back(i);
  }
  return groups;
}

struct RawSession {
  std::uint32_t first = 0;  // index range into the group's event list
  std::uint32_t last = 0;   // inclusive
};

}  // namespace

bool event_order_lt(const SessionEvent& a, const SessionEvent& b) {
  if (a.timestamp != b.timestamp) return a.timestamp < b.timestamp;
  if (a.kind != b.kind) return a.kind == EventKind::web;
  return a.record_id < b.record_id;
}

SessionizeResult build_sessions(std::span<const SessionEvent> events, std::int64_t gap_s,
                                Exec exec) {
  auto groups = group_by_ip(events);
  const std::int64_t ngroups = static_cast<std::int64_t>(groups.size());

  // per-IP session boundaries plus stats, computed independently per group
  struct GroupOut {
    std::vector<RawSession> spans;
    std::vector<Session> stats;
  };
  std::vector<GroupOut> per_group(groups.size());

  auto process_group = [&](std::int64_t g) {
    const auto& idx = groups[g];
    GroupOut& out = per_group[g];
    for (size_t j = 1; j < idx.size(); ++j) {
      if (events[idx[j]].timestamp < events[idx[j - 1]].timestamp)
        throw std::invalid_argument("events for IP " + events[idx[j]].client_ip +
                                    " are not time-sorted");
    }
    size_t start = 0;
    for (size_t j = 1; j <= idx.size(); ++j) {
      bool split = j == idx.size() ||
                   events[idx[j]].timestamp - events[idx[j - 1]].timestamp > gap_s;
      if (!split) continue;
      RawSession rs{static_cast<std::uint32_t>(start), static_cast<std::uint32_t>(j - 1)};
      Session s;
      s.client_ip = events[idx[start]].client_ip;
      s.start_ts = events[idx[start]].timestamp;
      s.end_ts = events[idx[j - 1]].timestamp;
      s.duration_s = s.end_ts - s.start_ts;
      std::unordered_set<std::uint64_t> stems, templates;
      for (size_t k = start; k < j; ++k) {
        const SessionEvent& e = events[idx[k]];
        if (e.kind == EventKind::web) {
          s.page_views++;
          stems.insert(e.fingerprint_id);
        } else {
          s.sql_count++;
          templates.insert(e.fingerprint_id);
        }
      }
      s.distinct_stems = stems.size();
      s.distinct_templates = templates.size();
      s.diversity = static_cast<double>(s.request_count()) /
                    static_cast<double>(s.distinct_stems + s.distinct_templates);
      out.spans.push_back(rs);
      out.stats.push_back(std::move(s));
      start = j;
    }
  };

  if (exec == Exec::parallel) {
    // exceptions (unsorted input) must escape the parallel region intact
    std::exception_ptr err;
#pragma omp parallel for schedule(dynamic, 64) num_threads(worker_count())
    for (std::int64_t g = 0; g < ngroups; ++g) {
      try {
        process_group(g);
      } catch (...) {
#pragma omp critical
        if (!err) err = std::current_exception();
      }
    }
    if (err) std::rethrow_exception(err);
  } else {
    for (std::int64_t g = 0; g < ngroups; ++g) process_group(g);
  }

  // global id assignment: order sessions by (start_ts, client_ip)
  struct Ref {
    std::uint32_t group;
    std::uint32_t pos;
  };
  std::vector<Ref> order;
  for (std::uint32_t g = 0; g < per_group.size(); ++g)
    for (std::uint32_t p = 0; p < per_group[g].stats.size(); ++p) order.push_back({g, p});
  std::sort(order.begin(), order.end(), [&](const Ref& a, const Ref& b) {
    const Session& sa = per_group[a.group].stats[a.pos];
    const Session& sb = per_group[b.group].stats[b.pos];
    if (sa.start_ts != sb.start_ts) return sa.start_ts < sb.start_ts;
    return sa.client_ip < sb.client_ip;
  });

  SessionizeResult result;
  result.sessions.reserve(order.size());
  result.entries.reserve(events.size());
  for (const Ref& r : order) {
    Session s = std::move(per_group[r.group].stats[r.pos]);
    s.session_id = result.sessions.size();
    const RawSession& span = per_group[r.group].spans[r.pos];
    const auto& idx = groups[r.group];
    std::uint32_t rank = 1;
    for (std::uint32_t k = span.first; k <= span.last; ++k, ++rank) {
      const SessionEvent& e = events[idx[k]];
      result.entries.push_back(
          {s.session_id, rank, e.kind, e.record_id, e.fingerprint_id, e.timestamp});
    }
    result.sessions.push_back(std::move(s));
  }
  return result;
}

BucketedHistogram think_time_histogram(std::span<const SessionEvent> events, Exec exec) {
  auto groups = group_by_ip(events);
  const std::int64_t ngroups = static_cast<std::int64_t>(groups.size());

  auto group_hist = [&](std::int64_t g) {
    BucketedHistogram h;
    const auto& idx = groups[g];
    for (size_t j = 1; j < idx.size(); ++j) {
      std::int64_t gap = events[idx[j]].timestamp - events[idx[j - 1]].timestamp;
      if (gap < 0)
        throw std::invalid_argument("events for IP " + events[idx[j]].client_ip +
                                    " are not time-sorted");
      h.add(static_cast<double>(gap));
    }
    return h;
  };

  BucketedHistogram total;
  if (exec == Exec::parallel) {
    std::exception_ptr err;
#pragma omp parallel num_threads(worker_count())
    {
      BucketedHistogram local;
#pragma omp for schedule(dynamic, 64) nowait
      for (std::int64_t g = 0; g < ngroups; ++g) {
        try {
          local.merge(group_hist(g));
        } catch (...) {
#pragma omp critical
          if (!err) err = std::current_exception();
        }
      }
#pragma omp critical
      total.merge(local);
    }
    if (err) std::rethrow_exception(err);
  } else {
    for (std::int64_t g = 0; g < ngroups; ++g) total.merge(group_hist(g));
  }
  return total;
}

std::pair<BucketedHistogram, BucketedHistogram> session_size_histograms(
    std::span<const Session> sessions, Exec exec) {
  BucketedHistogram requests, duration;
  const std::int64_t n = static_cast<std::int64_t>(sessions.size());
  if (exec == Exec::parallel) {
#pragma omp parallel num_threads(worker_count())
    {
      BucketedHistogram lr, ld;
#pragma omp for schedule(static) nowait
      for (std::int64_t i = 0; i < n; ++i) {
        lr.add(static_cast<double>(sessions[i].request_count()));
        ld.add(static_cast<double>(sessions[i].duration_s));
      }
#pragma omp critical
      {
        requests.merge(lr);
        duration.merge(ld);
      }
    }
  } else {
    for (std::int64_t i = 0; i < n; ++i) {
      requests.add(static_cast<double>(sessions[i].request_count()));
      duration.add(static_cast<double>(sessions[i].duration_s));
    }
  }
  return {requests, duration};
}

}  // namespace logsift
