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

#include <algorithm>
#include <map>
#include <random>
#include <stdexcept>
#include <set>

#include "doctest.h"
#include "logsift/analytics.hpp"
#include "logsift/session.hpp"
#include "logsift/synth.hpp"
#include "session_oracle.hpp"

using namespace logsift;

namespace {

SessionEvent ev(const std::string& ip, std::int64_t ts, EventKind kind = EventKind::web,
                std::uint64_t id = 0, std::uint64_t fp = 0) {
  return {ip, ts, kind, id, fp};
}

std::vector<SessionEvent> sorted_events(std::vector<SessionEvent> events) {
  std::sort(events.begin(), events.end(), event_order_lt);
  return events;
}

// random corpus with gaps straddling the boundary
std::vector<SessionEvent> random_corpus(std::mt19937_64& rng, size_t max_events, int max_ips) {
  size_t n = 2 + rng() % max_events;
  int ips = 1 + static_cast<int>(rng() % max_ips);
  std::vector<std::int64_t> clocks(ips, 1141200000);
  std::vector<SessionEvent> events;
  events.reserve(n);
  static const std::int64_t gaps[] = {0, 1, 10, 600, 1799, 1800, 1801, 2000, 4000, 100000};
  for (size_t i = 0; i < n; ++i) {
    int ip = static_cast<int>(rng() % ips);
    clocks[ip] += gaps[rng() % 10];
    events.push_back(ev("10.9." + std::to_string(ip / 200) + "." + std::to_string(ip % 200 + 1),
                        clocks[ip], rng() % 3 ? EventKind::web : EventKind::sql, i, rng() % 7));
  }
  return sorted_events(std::move(events));
}

// canonical view of a partition for exact comparison
std::multiset<std::vector<std::pair<int, std::uint64_t>>> partition_of(
    const std::vector<testing::OracleSession>& sessions) {
  std::multiset<std::vector<std::pair<int, std::uint64_t>>> out;
  for (const auto& s : sessions) {
    std::vector<std::pair<int, std::uint64_t>> key;
    for (auto [k, id] : s.records) key.emplace_back(static_cast<int>(k), id);
    out.insert(key);
  }
  return out;
}

std::multiset<std::vector<std::pair<int, std::uint64_t>>> partition_of(
    const SessionizeResult& r) {
  std::map<std::uint64_t, std::vector<std::pair<int, std::uint64_t>>> by_session;
  for (const auto& e : r.entries)
    by_session[e.session_id].emplace_back(static_cast<int>(e.kind), e.record_id);
  std::multiset<std::vector<std::pair<int, std::uint64_t>>> out;
  for (auto& [id, v] : by_session) out.insert(v);
  return out;
}

}  // namespace

TEST_CASE("session boundary semantics: 1800 keeps, 1801 splits") {
  auto one = build_sessions(sorted_events({ev("10.0.0.1", 1000, EventKind::web, 0),
                                           ev("10.0.0.1", 2799, EventKind::web, 1)}));
  CHECK(one.sessions.size() == 1);
  CHECK(one.sessions[0].request_count() == 2);

  auto boundary = build_sessions(sorted_events({ev("10.0.0.1", 1000, EventKind::web, 0),
                                                ev("10.0.0.1", 2800, EventKind::web, 1)}));
  CHECK(boundary.sessions.size() == 1);  // gap == 1800 keeps the session

  auto split = build_sessions(sorted_events({ev("10.0.0.1", 1000, EventKind::web, 0),
                                             ev("10.0.0.1", 2801, EventKind::web, 1)}));
  CHECK(split.sessions.size() == 2);
}

TEST_CASE("single event session has duration zero") {
  std::vector<SessionEvent> one = {ev("10.0.0.1", 1000, EventKind::sql, 5, 2)};
  auto r = build_sessions(one);
  REQUIRE(r.sessions.size() == 1);
  CHECK(r.sessions[0].duration_s == 0);
  CHECK(r.sessions[0].sql_count == 1);
  CHECK(r.sessions[0].page_views == 0);
  CHECK(r.sessions[0].diversity == 1.0);
  REQUIRE(r.entries.size() == 1);
  CHECK(r.entries[0].rank_in_session == 1);
}

TEST_CASE("different IPs never merge") {
  auto r = build_sessions(sorted_events({ev("10.0.0.1", 1000, EventKind::web, 0),
                                         ev("10.0.0.2", 1001, EventKind::web, 1)}));
  CHECK(r.sessions.size() == 2);
}

TEST_CASE("unsorted input for an IP is a contract violation") {
  std::vector<SessionEvent> bad = {ev("10.0.0.1", 2000, EventKind::web, 0),
                                   ev("10.0.0.1", 1000, EventKind::web, 1)};
  CHECK_THROWS_AS(build_sessions(bad), std::invalid_argument);
  CHECK_THROWS_AS(build_sessions(bad, 1800, Exec::serial), std::invalid_argument);
}

TEST_CASE("session stats and diversity") {
  auto r = build_sessions(sorted_events({
      ev("10.0.0.1", 1000, EventKind::web, 0, 100),
      ev("10.0.0.1", 1010, EventKind::web, 1, 100),
      ev("10.0.0.1", 1020, EventKind::web, 2, 101),
      ev("10.0.0.1", 1030, EventKind::sql, 0, 900),
      ev("10.0.0.1", 1040, EventKind::sql, 1, 900),
  }));
  REQUIRE(r.sessions.size() == 1);
  const Session& s = r.sessions[0];
  CHECK(s.page_views == 3);
  CHECK(s.sql_count == 2);
  CHECK(s.distinct_stems == 2);
  CHECK(s.distinct_templates == 1);
  CHECK(s.diversity == doctest::Approx(5.0 / 3.0));
  CHECK(s.duration_s == 40);
  // entries dense rank, ordered
  for (size_t i = 0; i < r.entries.size(); ++i)
    CHECK(r.entries[i].rank_in_session == i + 1);
}

TEST_CASE("diversity is 1 exactly when every fingerprint is distinct") {
  auto distinct = build_sessions(sorted_events({ev("10.0.0.1", 0, EventKind::web, 0, 1),
                                                ev("10.0.0.1", 1, EventKind::web, 1, 2),
                                                ev("10.0.0.1", 2, EventKind::sql, 0, 1)}));
  CHECK(distinct.sessions[0].diversity == 1.0);
  auto repeated = build_sessions(sorted_events({ev("10.0.0.1", 0, EventKind::web, 0, 1),
                                                ev("10.0.0.1", 1, EventKind::web, 1, 1)}));
  CHECK(repeated.sessions[0].diversity > 1.0);
}

TEST_CASE("oracle equivalence on random corpora") {
  std::mt19937_64 rng(101);
  for (int trial = 0; trial < 60; ++trial) {
    auto events = random_corpus(rng, 2000, 20);
    auto got = build_sessions(events);
    auto want = testing::oracle_sessions(events, 1800);
    REQUIRE(got.sessions.size() == want.size());
    CHECK(partition_of(got) == partition_of(want));

    // serial matches parallel exactly
    auto serial = build_sessions(events, 1800, Exec::serial);
    REQUIRE(serial.sessions.size() == got.sessions.size());
    for (size_t i = 0; i < serial.sessions.size(); ++i) {
      CHECK(serial.sessions[i].session_id == got.sessions[i].session_id);
      CHECK(serial.sessions[i].client_ip == got.sessions[i].client_ip);
      CHECK(serial.sessions[i].start_ts == got.sessions[i].start_ts);
      CHECK(serial.sessions[i].diversity == got.sessions[i].diversity);
    }
    for (size_t i = 0; i < serial.entries.size(); ++i) {
      CHECK(serial.entries[i].session_id == got.entries[i].session_id);
      CHECK(serial.entries[i].record_id == got.entries[i].record_id);
    }
  }
}

TEST_CASE("session count is monotone in the gap parameter") {
  std::mt19937_64 rng(103);
  auto events = random_corpus(rng, 3000, 10);
  size_t prev = SIZE_MAX;
  for (std::int64_t gap : {1, 100, 1800, 5000, 1000000}) {
    auto r = build_sessions(events, gap);
    CHECK(r.sessions.size() <= prev);
    prev = r.sessions.size();
  }
}

TEST_CASE("per-session totals reconcile with the corpus") {
  std::mt19937_64 rng(107);
  auto events = random_corpus(rng, 4000, 25);
  std::uint64_t want_web = 0, want_sql = 0;
  for (const auto& e : events) (e.kind == EventKind::web ? want_web : want_sql)++;
  auto r = build_sessions(events);
  std::uint64_t got_web = 0, got_sql = 0;
  for (const auto& s : r.sessions) {
    got_web += s.page_views;
    got_sql += s.sql_count;
    CHECK(s.request_count() >= 1);
    CHECK(s.duration_s >= 0);
    CHECK(s.distinct_stems <= s.page_views);
    CHECK(s.distinct_templates <= s.sql_count);
    CHECK(s.diversity >= 1.0);
  }
  CHECK(got_web == want_web);
  CHECK(got_sql == want_sql);
  // every event appears in exactly one entry
  CHECK(r.entries.size() == events.size());
  // session ids ordered by (start, ip)
  for (size_t i = 1; i < r.sessions.size(); ++i) {
    CHECK(r.sessions[i].session_id == i);
    bool ordered = r.sessions[i - 1].start_ts < r.sessions[i].start_ts ||
                   (r.sessions[i - 1].start_ts == r.sessions[i].start_ts &&
                    r.sessions[i - 1].client_ip < r.sessions[i].client_ip);
    CHECK(ordered);
  }
}

TEST_CASE("think time histogram buckets gaps at floor(log2)") {
  // gaps 1, 2, 3, 4 -> buckets {0:1, 1:2, 2:1}
  std::vector<SessionEvent> events = {
      ev("10.0.0.1", 1000, EventKind::web, 0), ev("10.0.0.1", 1001, EventKind::web, 1),
      ev("10.0.0.1", 1003, EventKind::web, 2), ev("10.0.0.1", 1006, EventKind::web, 3),
      ev("10.0.0.1", 1010, EventKind::web, 4),
  };
  BucketedHistogram h = think_time_histogram(events);
  CHECK(h.total == 4);
  CHECK(h.count_at(0) == 1);
  CHECK(h.count_at(1) == 2);
  CHECK(h.count_at(2) == 1);

  std::vector<SessionEvent> none;
  CHECK(think_time_histogram(none).empty());

  // gap 0 lands in bucket 0
  std::vector<SessionEvent> simultaneous = {ev("10.0.0.1", 5, EventKind::web, 0),
                                            ev("10.0.0.1", 5, EventKind::sql, 0)};
  BucketedHistogram zero = think_time_histogram(simultaneous);
  CHECK(zero.count_at(0) == 1);
}

TEST_CASE("think time histogram of heavy-tailed gaps fits the known slope") {
  // oracle: Pareto(shape 1) inter-arrival sampler; bucket counts of such
  // gaps fall one octave per bucket
  auto gaps = pareto_samples(1000000, 1.0, 41);
  std::vector<SessionEvent> events;
  events.reserve(gaps.size() + 1);
  std::int64_t t = 0;
  events.push_back(ev("10.0.0.1", t, EventKind::web, 0));
  for (size_t i = 0; i < gaps.size(); ++i) {
    t += static_cast<std::int64_t>(gaps[i]);
    events.push_back(ev("10.0.0.1", t, EventKind::web, i + 1));
  }
  BucketedHistogram h = think_time_histogram(events);
  int kmax = 0;
  for (const auto& [k, c] : h.buckets)
    if (c >= 30) kmax = k;
  FitResult fit = fit_power_law(h, 0, kmax);
  CHECK(std::abs(fit.slope - (-1.0)) < 0.1);

  BucketedHistogram serial = think_time_histogram(events, Exec::serial);
  CHECK(serial.buckets == h.buckets);
  CHECK(serial.total == h.total);
}

TEST_CASE("session size histogram of power-law sessions fits the known slope") {
  // sessions whose request counts follow a power law with bucket slope -1.4
  auto sizes = pareto_samples(500000, 1.4, 43);
  std::vector<Session> sessions(sizes.size());
  for (size_t i = 0; i < sizes.size(); ++i)
    sessions[i].page_views = static_cast<std::uint64_t>(sizes[i]);
  auto [requests, duration] = session_size_histograms(sessions);
  int kmax = 0;
  for (const auto& [k, c] : requests.buckets)
    if (c >= 30) kmax = k;
  FitResult fit = fit_power_law(requests, 0, kmax);
  CHECK(std::abs(fit.slope - (-1.4)) < 0.1);
}

TEST_CASE("session size histograms bucket requests and duration") {
  std::vector<Session> sessions(2);
  sessions[0].page_views = 9;  // floor(log2 9) = 3
  sessions[0].duration_s = 0;  // clamps to bucket 0
  sessions[1].sql_count = 2;
  sessions[1].duration_s = 1500;  // floor(log2 1500) = 10
  auto [req, dur] = session_size_histograms(sessions);
  CHECK(req.count_at(3) == 1);
  CHECK(req.count_at(1) == 1);
  CHECK(dur.count_at(0) == 1);
  CHECK(dur.count_at(10) == 1);
}
