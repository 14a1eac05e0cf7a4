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

// Kernel benchmark: serial reference vs OpenMP implementation of each
// data-parallel stage, on an in-memory synthetic corpus.
//
//   logsift_bench [lines] [repeats]

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <sstream>
#include <string>
#include <vector>

#include "logsift/classify.hpp"
#include "logsift/ingest.hpp"
#include "logsift/session.hpp"
#include "logsift/suggest.hpp"
#include "logsift/synth.hpp"
#include "logsift/templating.hpp"

using namespace logsift;

namespace {

using Clock = std::chrono::steady_clock;

template <typename Fn>
double time_best_of(int repeats, Fn&& fn) {
  double best = 1e100;
  for (int r = 0; r < repeats; ++r) {
    auto t0 = Clock::now();
    fn();
    auto t1 = Clock::now();
    best = std::min(best, std::chrono::duration<double>(t1 - t0).count());
  }
  return best;
}

void row(const char* name, std::uint64_t items, double serial_s, double parallel_s) {
  std::printf("%-22s %12llu %10.3fs %10.3fs %8.2fx %12.0f/s\n", name,
              static_cast<unsigned long long>(items), serial_s, parallel_s,
              serial_s / parallel_s, static_cast<double>(items) / parallel_s);
}

}  // namespace

int main(int argc, char** argv) {
  std::uint64_t lines = argc > 1 ? std::strtoull(argv[1], nullptr, 10) : 2000000;
  int repeats = argc > 2 ? std::atoi(argv[2]) : 3;

  std::printf("generating %llu synthetic lines...\n", static_cast<unsigned long long>(lines));
  std::ostringstream http_ss, sql_ss;
  synth_bulk(lines, 42, http_ss, sql_ss);
  std::string http_corpus = http_ss.str();
  std::string sql_corpus = sql_ss.str();

  std::printf("%-22s %12s %11s %11s %9s %13s\n", "kernel", "items", "serial", "parallel",
              "speedup", "throughput");

  // http parse + agent classification + page-view flag
  AgentRules rules = default_agent_rules();
  auto noise = default_noise_suffixes();
  HttpIngest http;
  {
    auto run = [&](Exec exec) {
      std::istringstream in(http_corpus);
      http = ingest_http(in, rules, noise, 0, exec);
    };
    double s = time_best_of(repeats, [&] { run(Exec::serial); });
    double p = time_best_of(repeats, [&] { run(Exec::parallel); });
    row("http ingest", http.lines, s, p);
  }

  SqlIngest sql;
  {
    auto run = [&](Exec exec) {
      std::istringstream in(sql_corpus);
      sql = ingest_sql(in, 0, exec);
    };
    double s = time_best_of(repeats, [&] { run(Exec::serial); });
    double p = time_best_of(repeats, [&] { run(Exec::parallel); });
    row("sql ingest", sql.lines, s, p);
  }

  Corpora corpora;
  {
    double s = time_best_of(repeats,
                            [&] { corpora = build_corpora(http.hits, sql.queries, Exec::serial); });
    double p = time_best_of(
        repeats, [&] { corpora = build_corpora(http.hits, sql.queries, Exec::parallel); });
    row("fingerprint corpus", http.hits.size() + sql.queries.size(), s, p);
  }

  std::vector<SessionEvent> events;
  for (size_t i = 0; i < http.hits.size(); ++i) {
    const HttpHit& h = http.hits[i];
    if (!h.is_page_view || h.client_ip.empty()) continue;
    events.push_back({h.client_ip, h.timestamp, EventKind::web, h.hit_id,
                      corpora.hit_stem_ids[i]});
  }
  for (size_t i = 0; i < sql.queries.size(); ++i) {
    const SqlRequest& q = sql.queries[i];
    if (q.client_ip.empty()) continue;
    events.push_back({q.client_ip, q.timestamp, EventKind::sql, q.query_id,
                      corpora.query_template_ids[i]});
  }
  std::sort(events.begin(), events.end(), event_order_lt);

  SessionizeResult sessions;
  {
    double s =
        time_best_of(repeats, [&] { sessions = build_sessions(events, 1800, Exec::serial); });
    double p =
        time_best_of(repeats, [&] { sessions = build_sessions(events, 1800, Exec::parallel); });
    row("sessionize", events.size(), s, p);
  }

  {
    IpProfileTable profiles = build_ip_profiles(http.hits, http.agents);
    auto run = [&](Exec exec) {
      std::vector<Session> copy(sessions.sessions);
      classify_sessions(copy, profiles, {}, exec);
    };
    double s = time_best_of(repeats, [&] { run(Exec::serial); });
    double p = time_best_of(repeats, [&] { run(Exec::parallel); });
    row("classify", sessions.sessions.size(), s, p);
  }

  {
    // a wide synthetic template corpus; the bulk corpus is too repetitive
    // to exercise the inverted index
    static const char* cols[] = {"ra", "dec", "z", "objid", "run", "rerun", "camcol", "field",
                                 "petror90_r", "modelmag_g", "u", "g"};
    std::vector<SqlTemplate> wide;
    for (int i = 0; i < 20000; ++i) {
      std::string stmt = std::string("select ") + cols[i % 12] + ", " + cols[(i / 12) % 12] +
                         " from table_" + std::to_string(i % 4000) + " where " +
                         cols[(i / 7) % 12] + " > " + std::to_string(i);
      SqlTemplate t;
      t.template_id = i;
      t.template_text = sql_template(stmt);
      t.count = 1;
      t.syntax_ok_count = 1;
      wide.push_back(std::move(t));
    }
    NGramIndex index = NGramIndex::build(wide, {}, 3);
    std::string probe = "select ra, petror90_r from table_277 where camcol > 3";
    std::vector<Suggestion> out;
    int query_reps = std::max(repeats * 20, 50);
    double brute =
        time_best_of(query_reps, [&] { out = index.suggest_brute_force(probe, 3); });
    double pruned = time_best_of(query_reps, [&] { out = index.suggest(probe, 3); });
    std::printf("%-22s %12zu %10.6fs %10.6fs %8.2fx   (brute vs inverted index)\n",
                "suggest scoring", index.size(), brute, pruned, brute / pruned);
  }

  std::printf("sessions: %zu, stems: %zu, templates: %zu\n", sessions.sessions.size(),
              corpora.stems.size(), corpora.templates.size());
  return 0;
}
