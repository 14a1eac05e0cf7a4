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

// Acceptance suite: one pass/fail line per criterion. Criterion 11 is a
// soft performance target and prints WARN instead of FAIL.
//
// Env knobs for development loops only (defaults are the binding values):
//   LOGSIFT_ACCEPT_LINES   throughput corpus size (default 10,000,000)

#include <unistd.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "logsift/analytics.hpp"
#include "logsift/classify.hpp"
#include "logsift/ingest.hpp"
#include "logsift/session.hpp"
#include "logsift/suggest.hpp"
#include "logsift/synth.hpp"
#include "logsift/templating.hpp"
#include "logsift/workspace.hpp"
#include "../unit/session_oracle.hpp"

using namespace logsift;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

int g_failures = 0;

void report(int criterion, bool pass, const std::string& what, const std::string& detail) {
  std::printf("%s  %2d  %s%s%s\n", pass ? "PASS" : "FAIL", criterion, what.c_str(),
              detail.empty() ? "" : " -- ", detail.c_str());
  std::fflush(stdout);
  if (!pass) ++g_failures;
}

void report_soft(int criterion, bool pass, const std::string& what, const std::string& detail) {
  std::printf("%s  %2d  %s%s%s\n", pass ? "PASS" : "WARN", criterion, what.c_str(),
              detail.empty() ? "" : " -- ", detail.c_str());
  std::fflush(stdout);
}

std::string fixture_path(const std::string& name) {
  return std::string(FIXTURES_DIR) + "/" + name;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("missing fixture/file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> read_lines_of(const std::string& path) {
  std::ifstream in(path);
  std::vector<std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) out.push_back(line);
  }
  return out;
}

struct TempTree {
  fs::path path;
  explicit TempTree(const std::string& tag) {
    path = fs::temp_directory_path() / ("logsift_accept_" + tag + "_" + std::to_string(::getpid()));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempTree() { fs::remove_all(path); }
};

void write_lines(const fs::path& p, const std::vector<std::string>& lines) {
  std::ofstream out(p);
  for (const auto& l : lines) out << l << "\n";
}

// ---------------------------------------------------------------------------

bool criterion1_sessionizer_oracle(std::string& detail) {
  auto t0 = Clock::now();
  std::mt19937_64 rng(20060701);
  static const std::int64_t gaps[] = {0,    1,    30,   300,  1799, 1800,
                                      1801, 1802, 3600, 86400};
  int corpora = 0, mismatches = 0;
  for (int trial = 0; trial < 200; ++trial) {
    size_t n = 50 + rng() % 9950;  // <= 10,000 events
    int ips = 1 + static_cast<int>(rng() % 100);
    std::vector<std::int64_t> clocks(ips, 1141200000);
    std::vector<SessionEvent> events;
    events.reserve(n);
    for (size_t i = 0; i < n; ++i) {
      int ip = static_cast<int>(rng() % ips);
      // force boundary gaps to appear in every corpus
      std::int64_t gap = (i == 1) ? 1800 : (i == 2) ? 1801 : gaps[rng() % 10];
      clocks[ip] += gap;
      events.push_back({"10.8." + std::to_string(ip / 250) + "." + std::to_string(ip % 250 + 1),
                        clocks[ip], rng() % 3 ? EventKind::web : EventKind::sql, i, rng() % 9});
    }
    std::sort(events.begin(), events.end(), event_order_lt);

    auto got = build_sessions(events, 1800);
    auto want = testing::oracle_sessions(events, 1800);
    ++corpora;

    // exact partition + rank-order comparison
    std::multiset<std::vector<std::pair<int, std::uint64_t>>> got_part, want_part;
    {
      std::map<std::uint64_t, std::vector<std::pair<int, std::uint64_t>>> by_id;
      for (const auto& e : got.entries)
        by_id[e.session_id].emplace_back(static_cast<int>(e.kind), e.record_id);
      for (auto& [id, v] : by_id) got_part.insert(v);
      for (const auto& s : want) {
        std::vector<std::pair<int, std::uint64_t>> key;
        for (auto [k, id] : s.records) key.emplace_back(static_cast<int>(k), id);
        want_part.insert(key);
      }
    }
    if (got.sessions.size() != want.size() || got_part != want_part) ++mismatches;
  }
  double secs = std::chrono::duration<double>(Clock::now() - t0).count();
  char buf[160];
  std::snprintf(buf, sizeof(buf), "%d corpora, %d mismatches, %.1fs (budget 60s)", corpora,
                mismatches, secs);
  detail = buf;
  return mismatches == 0 && secs < 60.0;
}

std::string random_sqlish(std::mt19937_64& rng) {
  static const char* pieces[] = {
      "select",   "from",   "where",  "p.ra",  "s.[dec]",  "BESTDR2..PhotoObjAll",
      "'it''s'",  "0x1F",   "1.5e-3", "#tmp",  "count(*)", "between 10 and 20",
      "group by", "order by", "as x", ">=",    "<>",       "(",
      ")",        ",",      "@v",     "42",    ".5",       "mytable_61",
      "str(p.g - p.r,11,8)", "isnull(s.bestObjID,0)",      "top 50",
      "left outer join",     "'unterminated",              "[quoted name]"};
  std::string s;
  int n = 1 + static_cast<int>(rng() % 30);
  for (int i = 0; i < n; ++i) {
    s += pieces[rng() % (sizeof(pieces) / sizeof(pieces[0]))];
    s += ' ';
  }
  return s;
}

bool criterion2_template_idempotence(std::string& detail) {
  std::mt19937_64 rng(138000);
  int checked = 0, violations = 0;

  auto check_statement = [&](const std::string& s) {
    std::string once = sql_template(s);
    if (sql_template(once) != once) ++violations;
    ++checked;
  };

  for (int i = 0; i < 10000; ++i) check_statement(random_sqlish(rng));

  // checked-in corpus of quoted queries
  std::vector<std::string> corpus_files = {"spatial_count_template.sql", "broken_query.sql",
                                           "multiway_join.sql", "candidate_queries.sql"};
  for (const auto& f : corpus_files) check_statement(slurp(fixture_path(f)));
  for (const auto& line : read_lines_of(fixture_path("candidate_queries.sql")))
    check_statement(line);

  // constant-varied copies collapse to one template
  int collapse_failures = 0;
  for (int i = 0; i < 500; ++i) {
    long a = static_cast<long>(rng() % 100000), b = static_cast<long>(rng() % 100000);
    std::string s1 = "select count(*) from photoprimary where (htmID >= " + std::to_string(a) +
                     " and htmID <= " + std::to_string(b) + ")";
    std::string s2 = "SELECT COUNT(*) FROM PhotoPrimary WHERE (htmid >= " +
                     std::to_string(a + 17) + "  and  htmID <= " + std::to_string(b * 3 + 1) +
                     ")";
    if (sql_template(s1) != sql_template(s2)) ++collapse_failures;
  }

  // the spatial-count query must mask to exactly the known form
  std::string expected = "SELECT COUNT ( * ) FROM photoprimary WHERE ( htmid >= # AND htmid <= # )";
  std::string masked_fixture = sql_template(slurp(fixture_path("spatial_count_template.sql")));
  std::string masked_instance =
      sql_template("select count(*)\nfrom photoprimary\nwhere (htmID >= 12 and htmID <= 9000)");
  bool exact = masked_fixture == expected && masked_instance == expected;

  char buf[160];
  std::snprintf(buf, sizeof(buf),
                "%d statements idempotent (%d violations), %d collapse failures, exact mask %s",
                checked, violations, collapse_failures, exact ? "yes" : "NO");
  detail = buf;
  return violations == 0 && collapse_failures == 0 && exact;
}

bool criterion3_page_view_filter(std::string& detail) {
  // suffix mix modeled on the high-traffic page types
  static const char* noise[] = {"gif", "jpg", "js", "ico", "swf", "css", "png", "txt"};
  static const char* content[] = {"asp", "aspx", "htm", "asmx"};
  AgentRules rules = default_agent_rules();
  auto noise_set = default_noise_suffixes();

  int checked = 0, wrong = 0;
  auto flag_of = [&](const std::string& stem, int status, const std::string& agent) {
    std::string line = "2006-03-01T12:00:00Z\t10.0.0.1\tGET\t" + stem + "\t\t" +
                       std::to_string(status) + "\t" + agent + "\t-";
    auto r = parse_http_line(line, 1);
    const HttpHit& h = std::get<HttpHit>(r);
    return is_page_view(h, classify_agent(h.agent_raw, rules), noise_set);
  };

  for (const char* sfx : noise) {
    for (int status : {200, 204, 299}) {
      if (flag_of(std::string("/img/x.") + sfx, status, "MSIE 6.0")) ++wrong;
      ++checked;
    }
  }
  for (const char* sfx : content) {
    for (int status : {200, 204, 299}) {
      if (!flag_of(std::string("/en/x.") + sfx, status, "MSIE 6.0")) ++wrong;
      if (!flag_of(std::string("/en/x.") + sfx, status, "Googlebot/2.1")) ++wrong;  // non-admin
      checked += 2;
    }
    // redirects and errors never page views
    if (flag_of(std::string("/en/x.") + sfx, 302, "MSIE 6.0")) ++wrong;
    if (flag_of(std::string("/en/x.") + sfx, 404, "MSIE 6.0")) ++wrong;
    // administrative agents never page views
    if (flag_of(std::string("/en/x.") + sfx, 200, "BigBrother Network Monitor")) ++wrong;
    checked += 3;
  }
  char buf[96];
  std::snprintf(buf, sizeof(buf), "%d hits checked, %d misflagged", checked, wrong);
  detail = buf;
  return wrong == 0;
}

bool criterion4_classifier_faithfulness(std::string& detail) {
  TempTree tree("classifier");
  SynthConfig sc;
  sc.seed = 424242;
  sc.admins = 2;
  sc.spiders = 6;
  sc.bots = 3;
  sc.bot_queries = 13000;  // one template reissued 13K times
  sc.mortals = 12;         // six-query, thirty-minute sessions
  sc.others = 6;
  SynthCorpus corpus = synth_corpus(sc);
  write_lines(tree.path / "http.log", corpus.http_lines);
  write_lines(tree.path / "sql.log", corpus.sql_lines);

  PipelineConfig cfg;
  cfg.http_logs = {(tree.path / "http.log").string()};
  cfg.sql_logs = {(tree.path / "sql.log").string()};
  Workspace ws = Workspace::init(tree.path / "ws");
  ws.run({Stage::ingest, Stage::fingerprint, Stage::sessionize, Stage::classify}, cfg);

  std::map<std::string, std::string> truth(corpus.truth.begin(), corpus.truth.end());
  auto sessions = ws.load_sessions();
  int total = 0, correct = 0;
  for (const auto& s : sessions) {
    ++total;
    auto it = truth.find(s.client_ip);
    if (it != truth.end() && to_string(s.classification) == it->second) ++correct;
  }
  char buf[96];
  std::snprintf(buf, sizeof(buf), "%d/%d sessions labeled per planted truth", correct, total);
  detail = buf;
  return total > 0 && correct == total;
}

bool criterion5_power_law(std::string& detail) {
  auto t0 = Clock::now();
  bool ok = true;
  std::ostringstream msg;

  // exact geometric buckets recover the slope to machine precision
  BucketedHistogram geo;
  geo.buckets = {{0, 4096}, {1, 1024}, {2, 256}, {3, 64}, {4, 16}, {5, 4}, {6, 1}};
  FitResult exact = fit_power_law(geo, 0, 6);
  if (std::abs(exact.slope - (-2.0)) > 1e-9 || std::abs(exact.r_squared - 1.0) > 1e-9) ok = false;

  for (double alpha : {1.4, 2.0, 2.4}) {
    auto xs = pareto_samples(1000000, alpha - 1.0, 8086);
    BucketedHistogram h;
    for (double x : xs) h.add(x);
    // the fit range is a required parameter: it ends at the last bucket
    // with enough mass for stable log-scale least squares
    int kmax = 0;
    for (const auto& [k, c] : h.buckets)
      if (c >= 30) kmax = k;
    FitResult r = fit_power_law(h, 0, kmax);
    double err = r.implied_alpha - alpha;
    msg << "alpha " << alpha << ": implied " << r.implied_alpha << " (err " << err << ", r2 "
        << r.r_squared << "); ";
    if (std::abs(err) > 0.05 || r.r_squared < 0.98) ok = false;
  }
  double secs = std::chrono::duration<double>(Clock::now() - t0).count();
  msg << secs << "s (budget 30s)";
  if (secs >= 30.0) ok = false;
  detail = msg.str();
  return ok;
}

bool criterion6_exponential_growth(std::string& detail) {
  // noiseless doubling series
  std::vector<std::pair<int, double>> doubling;
  for (int m = 0; m < 60; ++m) doubling.emplace_back(m, 2000.0 * std::pow(2.0, m / 12.0));
  FitResult clean = fit_exponential_growth(doubling);
  bool clean_ok = std::abs(clean.slope - 2.0) < 1e-9;

  // 2.05x yearly with 5% multiplicative noise
  auto noisy = growth_series(62, 1500.0, 2.05, 0.05, 20060701);
  FitResult fit = fit_exponential_growth(noisy);
  bool noisy_ok = std::abs(fit.slope - 2.05) < 0.05;

  char buf[128];
  std::snprintf(buf, sizeof(buf), "noiseless 2.0 -> %.12f, noisy 2.05 -> %.4f", clean.slope,
                fit.slope);
  detail = buf;
  return clean_ok && noisy_ok;
}

bool criterion7_suggestion_ordering(std::string& detail) {
  // corpus: exactly the three known-correct matching queries; the 66% and
  // 60% candidates differ only in whitespace, so the normalized corpus
  // holds two templates and the pair's relative order is vacuous
  std::vector<std::string> candidates = read_lines_of(fixture_path("candidate_queries.sql"));
  if (candidates.size() != 3) {
    detail = "fixture must hold 3 candidate queries";
    return false;
  }
  std::vector<SqlRequest> queries(candidates.size());
  for (size_t i = 0; i < candidates.size(); ++i) {
    queries[i].query_id = i;
    queries[i].statement = candidates[i];
    queries[i].is_syntax_ok = true;
    queries[i].rows_returned = 50;
  }
  Corpora corpora = build_corpora({}, queries);
  std::unordered_map<std::uint64_t, std::string> examples;
  for (const auto& t : corpora.templates)
    if (t.example_query_id) examples[t.template_id] = queries[*t.example_query_id].statement;

  NGramIndex index = NGramIndex::build(corpora.templates, examples, 3);
  std::string broken = slurp(fixture_path("broken_query.sql"));
  auto got = index.suggest(broken, 3);

  std::uint64_t top_template = corpora.query_template_ids[0];     // the 74% candidate
  std::uint64_t second_template = corpora.query_template_ids[1];  // the 66%/60% pair

  bool ok = corpora.templates.size() == 2 && got.size() == 2;
  if (ok) {
    ok = got[0].template_id == top_template && got[1].template_id == second_template &&
         got[0].similarity > got[1].similarity &&  // top candidate strictly highest
         got[0].similarity > 0.0 && got[0].similarity < 1.0 && got[1].similarity > 0.0 &&
         got[1].similarity < 1.0 && got[0].example_statement == candidates[0] &&
         got[1].example_statement == candidates[1];
  }
  std::ostringstream msg;
  msg << "templates " << corpora.templates.size() << " (candidates 2 and 3 are "
      << "whitespace-identical); similarities";
  for (const auto& s : got) msg << " " << s.similarity;
  detail = msg.str();
  return ok;
}

bool criterion8_jaccard_metric(std::string& detail) {
  std::mt19937_64 rng(1717);
  auto random_set = [&]() {
    std::set<std::vector<std::string>> s;
    size_t n = rng() % 16;
    for (size_t i = 0; i < n; ++i)
      s.insert({std::string(1, 'a' + static_cast<char>(rng() % 8)),
                std::string(1, 'a' + static_cast<char>(rng() % 8))});
    return s;
  };
  int violations = 0;
  for (int i = 0; i < 10000; ++i) {
    auto a = random_set(), b = random_set(), c = random_set();
    double jab = jaccard_similarity(a, b);
    if (jab != jaccard_similarity(b, a)) ++violations;             // symmetry
    if (jaccard_similarity(a, a) != 1.0) ++violations;             // identity
    if (jab < 0.0 || jab > 1.0) ++violations;                      // range
    double dab = 1.0 - jab;
    double dbc = 1.0 - jaccard_similarity(b, c);
    double dac = 1.0 - jaccard_similarity(a, c);
    if (dac > dab + dbc + 1e-12) ++violations;                     // triangle
  }
  char buf[64];
  std::snprintf(buf, sizeof(buf), "10000 triples, %d violations", violations);
  detail = buf;
  return violations == 0;
}

bool criterion9_self_retrieval(std::string& detail) {
  static const char* cols[] = {"ra", "dec", "z", "objid", "run", "rerun", "camcol", "field",
                               "petror90_r", "modelmag_g"};
  std::vector<SqlTemplate> templates;
  std::mt19937_64 rng(909);
  for (int i = 0; i < 1000; ++i) {
    std::string stmt = "select ";
    stmt += cols[i % 10];
    stmt += ", ";
    stmt += cols[(i / 10) % 10];
    stmt += " from table_" + std::to_string(i);
    if (i % 3) stmt += " where " + std::string(cols[i % 10]) + " > " + std::to_string(i);
    if (i % 4 == 0) stmt += " order by " + std::string(cols[(i / 10) % 10]);
    SqlTemplate t;
    t.template_id = i;
    t.template_text = sql_template(stmt);
    t.count = 1 + rng() % 20;
    t.syntax_ok_count = 1;
    templates.push_back(std::move(t));
  }
  NGramIndex index = NGramIndex::build(templates, {}, 3);

  int self_failures = 0, equivalence_failures = 0;
  for (const auto& t : templates) {
    auto fast = index.suggest(t.template_text, 3);
    if (fast.empty() || fast[0].template_id != t.template_id || fast[0].similarity != 1.0)
      ++self_failures;
    auto slow = index.suggest_brute_force(t.template_text, 3);
    if (fast.size() != slow.size()) {
      ++equivalence_failures;
      continue;
    }
    for (size_t i = 0; i < fast.size(); ++i)
      if (fast[i].template_id != slow[i].template_id || fast[i].similarity != slow[i].similarity)
        ++equivalence_failures;
  }
  char buf[128];
  std::snprintf(buf, sizeof(buf),
                "1000 templates; %d self-retrieval failures, %d pruned/brute divergences",
                self_failures, equivalence_failures);
  detail = buf;
  return self_failures == 0 && equivalence_failures == 0;
}

bool criterion10_determinism(std::string& detail) {
  TempTree tree("determinism");
  SynthConfig sc;
  sc.seed = 1010;
  sc.bots = 2;
  sc.bot_queries = 500;
  SynthCorpus corpus = synth_corpus(sc);
  write_lines(tree.path / "http.log", corpus.http_lines);
  write_lines(tree.path / "sql.log", corpus.sql_lines);

  PipelineConfig cfg;
  cfg.http_logs = {(tree.path / "http.log").string()};
  cfg.sql_logs = {(tree.path / "sql.log").string()};
  const std::set<Stage> all = {Stage::ingest, Stage::fingerprint, Stage::sessionize,
                               Stage::classify, Stage::report};

  Workspace a = Workspace::init(tree.path / "a");
  a.run(all, cfg);
  Workspace b = Workspace::init(tree.path / "b");
  b.run(all, cfg);

  int compared = 0, differing = 0;
  for (const auto& entry : fs::directory_iterator(a.tables_dir())) {
    ++compared;
    fs::path other = b.tables_dir() / entry.path().filename();
    if (!fs::exists(other) || slurp(entry.path().string()) != slurp(other.string())) ++differing;
  }
  if (slurp((tree.path / "a" / "manifest.json").string()) !=
      slurp((tree.path / "b" / "manifest.json").string()))
    ++differing;
  char buf[96];
  std::snprintf(buf, sizeof(buf), "%d derived tables compared, %d differ", compared, differing);
  detail = buf;
  return compared > 0 && differing == 0;
}

bool criterion11_throughput(std::string& detail) {
  std::uint64_t lines = 10000000;
  if (const char* env = std::getenv("LOGSIFT_ACCEPT_LINES"))
    lines = std::strtoull(env, nullptr, 10);

  TempTree tree("throughput");
  {
    std::ofstream http(tree.path / "http.log");
    std::ofstream sql(tree.path / "sql.log");
    synth_bulk(lines, 7, http, sql);
  }
  PipelineConfig cfg;
  cfg.http_logs = {(tree.path / "http.log").string()};
  cfg.sql_logs = {(tree.path / "sql.log").string()};
  Workspace ws = Workspace::init(tree.path / "ws");

  auto t0 = Clock::now();
  ws.run({Stage::ingest, Stage::fingerprint}, cfg);
  double secs = std::chrono::duration<double>(Clock::now() - t0).count();
  double rate = static_cast<double>(lines) / secs;
  char buf[128];
  std::snprintf(buf, sizeof(buf), "%llu lines ingested+fingerprinted in %.1fs = %.0f lines/s "
                "(target 100000/s)",
                static_cast<unsigned long long>(lines), secs, rate);
  detail = buf;
  return rate >= 100000.0;
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* what;
    bool (*fn)(std::string&);
    bool soft;
  };
  const Criterion criteria[] = {
      {1, "sessionizer matches the brute-force oracle", criterion1_sessionizer_oracle, false},
      {2, "template idempotence and soundness", criterion2_template_idempotence, false},
      {3, "page-view filter on the suffix mix", criterion3_page_view_filter, false},
      {4, "classifier 100% on planted ground truth", criterion4_classifier_faithfulness, false},
      {5, "power-law exponent recovery", criterion5_power_law, false},
      {6, "exponential growth recovery", criterion6_exponential_growth, false},
      {7, "suggestion ordering on the known-correct corpus", criterion7_suggestion_ordering,
       false},
      {8, "jaccard metric axioms", criterion8_jaccard_metric, false},
      {9, "self-retrieval and pruned/brute equivalence", criterion9_self_retrieval, false},
      {10, "end-to-end pipeline determinism", criterion10_determinism, false},
      {11, "ingest+fingerprint throughput (soft)", criterion11_throughput, true},
  };

  for (const auto& c : criteria) {
    std::string detail;
    bool pass = false;
    try {
      pass = c.fn(detail);
    } catch (const std::exception& e) {
      detail = std::string("exception: ") + e.what();
      pass = false;
    }
    if (c.soft) report_soft(c.id, pass, c.what, detail);
    else report(c.id, pass, c.what, detail);
  }

  if (g_failures) {
    std::printf("acceptance: %d criterion(s) failed\n", g_failures);
    return 1;
  }
  std::printf("acceptance: all hard criteria passed\n");
  return 0;
}
