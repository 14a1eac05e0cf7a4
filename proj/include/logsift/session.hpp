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
#include <span>
#include <string>
#include <vector>

#include "logsift/exec.hpp"
#include "logsift/histogram.hpp"
#include "logsift/records.hpp"

namespace logsift {

enum class EventKind { web, sql };

/// One sessionizable event: a page-view hit or a SQL request. Non-page-view
/// hits never become events.
struct SessionEvent {
  std::string client_ip;
  UnixTime timestamp = 0;
  EventKind kind = EventKind::web;
  std::uint64_t record_id = 0;       // hit_id or query_id
  std::uint64_t fingerprint_id = 0;  // stem_id or template_id
};

/// Canonical event order: (timestamp, web before sql, record_id).
/// build_sessions requires each IP's events in this order.
bool event_order_lt(const SessionEvent& a, const SessionEvent& b);

struct Session {
  std::uint64_t session_id = 0;
  std::string client_ip;
  UnixTime start_ts = 0;
  UnixTime end_ts = 0;
  std::uint64_t page_views = 0;
  std::uint64_t sql_count = 0;
  std::uint64_t distinct_stems = 0;
  std::uint64_t distinct_templates = 0;
  double diversity = 0.0;  // (page_views+sql_count)/(distinct_stems+distinct_templates)
  std::int64_t duration_s = 0;
  SessionClass classification = SessionClass::unclassified;

  std::uint64_t request_count() const { return page_views + sql_count; }
};

struct SessionEntry {
  std::uint64_t session_id = 0;
  std::uint32_t rank_in_session = 0;  // 1-based
  EventKind kind = EventKind::web;
  std::uint64_t record_id = 0;
  std::uint64_t fingerprint_id = 0;
  UnixTime timestamp = 0;
};

struct SessionizeResult {
  std::vector<Session> sessions;  // index == session_id
  std::vector<SessionEntry> entries;  // grouped by session_id, rank order
};

/// Splits per-IP event streams into sessions wherever the think time
/// exceeds gap_s (a gap of exactly gap_s keeps the session). Events from
/// different IPs never share a session. Session ids are assigned by
/// (start_ts, client_ip), so serial and parallel runs agree bit for bit.
/// Throws std::invalid_argument if any IP's events are out of order.
SessionizeResult build_sessions(std::span<const SessionEvent> events, std::int64_t gap_s = 1800,
                                Exec exec = Exec::parallel);

/// Think-time distribution: every consecutive same-IP inter-arrival gap
/// (within and across session boundaries), log2-bucketed.
BucketedHistogram think_time_histogram(std::span<const SessionEvent> events,
                                       Exec exec = Exec::parallel);

/// Log2-bucketed session size (requests) and duration (seconds) histograms.
std::pair<BucketedHistogram, BucketedHistogram> session_size_histograms(
    std::span<const Session> sessions, Exec exec = Exec::parallel);

}  // namespace logsift
