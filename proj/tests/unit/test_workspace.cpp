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

#include <unistd.h>

#include <fstream>
#include <map>
#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "logsift/synth.hpp"
#include "logsift/tsv.hpp"
#include "logsift/workspace.hpp"

using namespace logsift;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& tag) {
    path = fs::temp_directory_path() / ("logsift_test_" + tag + "_" + std::to_string(::getpid()));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

void write_lines(const fs::path& p, const std::vector<std::string>& lines) {
  std::ofstream out(p);
  for (const auto& l : lines) out << l << "\n";
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::uint64_t row_count(const fs::path& p) {
  std::ifstream in(p);
  std::string line;
  std::uint64_t n = 0;
  while (std::getline(in, line)) ++n;
  return n == 0 ? 0 : n - 1;  // minus header
}

PipelineConfig fixture_config(const TempDir& dir) {
  SynthConfig sc;
  sc.seed = 99;
  sc.bots = 2;
  sc.bot_queries = 200;
  sc.mortals = 6;
  sc.spiders = 3;
  sc.others = 3;
  SynthCorpus corpus = synth_corpus(sc);
  write_lines(dir.path / "http.log", corpus.http_lines);
  write_lines(dir.path / "sql.log", corpus.sql_lines);

  PipelineConfig cfg;
  cfg.http_logs = {(dir.path / "http.log").string()};
  cfg.sql_logs = {(dir.path / "sql.log").string()};
  return cfg;
}

const std::set<Stage> kAllStages = {Stage::ingest, Stage::fingerprint, Stage::sessionize,
                                    Stage::classify, Stage::report};

}  // namespace

TEST_CASE("config file parsing with overrides and comments") {
  TempDir dir("config");
  write_lines(dir.path / "config.txt",
              {"# comment", "", "gap_seconds = 900", "bot_reuse = 5.0",
               "http_log = /a.log", "http_log = /b.log", "noise_suffixes = gif, png",
               "admin_ips = 10.0.0.1"});
  PipelineConfig cfg = load_config_file(dir.path / "config.txt");
  CHECK(cfg.gap_seconds == 900);
  CHECK(cfg.bot_reuse == 5.0);
  CHECK(cfg.http_logs == std::vector<std::string>{"/a.log", "/b.log"});
  CHECK(cfg.noise() == std::set<std::string>{"gif", "png"});
  CHECK(cfg.admin_ips == std::vector<std::string>{"10.0.0.1"});

  write_lines(dir.path / "langs.txt", {"languages = en=/en/, fr=/fr/"});
  PipelineConfig lcfg = load_config_file(dir.path / "langs.txt");
  REQUIRE(lcfg.languages.size() == 2);
  CHECK(lcfg.languages[0] == std::pair<std::string, std::string>{"/en/", "en"});
  CHECK(lcfg.languages[1] == std::pair<std::string, std::string>{"/fr/", "fr"});

  write_lines(dir.path / "bad.txt", {"no equals sign"});
  CHECK_THROWS(load_config_file(dir.path / "bad.txt"));
  write_lines(dir.path / "bad2.txt", {"mystery_key = 1"});
  CHECK_THROWS(load_config_file(dir.path / "bad2.txt"));
}

TEST_CASE("pipeline end to end on the planted fixture") {
  TempDir dir("pipeline");
  PipelineConfig cfg = fixture_config(dir);
  Workspace ws = Workspace::init(dir.path / "ws");
  ws.run(kAllStages, cfg);

  // all tables present with manifest row counts matching the files
  nlohmann::json manifest;
  {
    std::ifstream in(dir.path / "ws" / "manifest.json");
    in >> manifest;
  }
  auto rows = manifest["stages"]["ingest"]["rows"];
  CHECK(rows["weblog"].get<std::uint64_t>() == row_count(ws.tables_dir() / "weblog.tsv"));
  CHECK(rows["sqllog"].get<std::uint64_t>() == row_count(ws.tables_dir() / "sqllog.tsv"));
  CHECK(rows["parse_errors"].get<std::uint64_t>() ==
        row_count(ws.tables_dir() / "parse_errors.tsv"));
  CHECK(manifest["stages"]["sessionize"]["rows"]["session"].get<std::uint64_t>() ==
        row_count(ws.tables_dir() / "session.tsv"));

  // sessions classified per the planted truth
  auto sessions = ws.load_sessions();
  REQUIRE(!sessions.empty());
  SynthConfig sc;
  sc.seed = 99;
  sc.bots = 2;
  sc.bot_queries = 200;
  sc.mortals = 6;
  sc.spiders = 3;
  sc.others = 3;
  SynthCorpus corpus = synth_corpus(sc);
  std::map<std::string, std::string> truth(corpus.truth.begin(), corpus.truth.end());
  for (const auto& s : sessions) {
    REQUIRE(truth.count(s.client_ip) == 1);
    CHECK(to_string(s.classification) == truth.at(s.client_ip));
  }

  // reports emitted
  CHECK(fs::exists(ws.reports_dir() / "traffic_month.tsv"));
  CHECK(fs::exists(ws.reports_dir() / "traffic_suffix.tsv"));
  CHECK(fs::exists(ws.reports_dir() / "sessions.tsv"));
  CHECK(fs::exists(ws.reports_dir() / "terms_per_template.tsv"));
  CHECK(fs::exists(ws.reports_dir() / "histogram_think_time.tsv"));

  // round trip: loaders reproduce what ingest saw
  auto hits = ws.load_weblog();
  auto queries = ws.load_sqllog();
  CHECK(hits.size() == corpus.http_lines.size());
  CHECK(queries.size() == corpus.sql_lines.size());
  CHECK(ws.load_hit_stem_ids().size() == hits.size());

  // suggestion index over the workspace corpus works end to end
  NGramIndex index = ws.build_suggest_index(cfg);
  CHECK(index.size() > 0);
  auto got = index.suggest("select count(*) from photoprimary where (htmID >= 1 and htmID <= 2)",
                           3);
  REQUIRE(!got.empty());
  CHECK(got[0].similarity == 1.0);  // the bot template is in the corpus
}

TEST_CASE("streaming fingerprint stage matches the in-memory corpus builder") {
  TempDir dir("stream_vs_mem");
  PipelineConfig cfg = fixture_config(dir);
  Workspace ws = Workspace::init(dir.path / "ws");
  ws.run({Stage::ingest, Stage::fingerprint}, cfg);

  auto hits = ws.load_weblog();
  auto queries = ws.load_sqllog();
  Corpora mem = build_corpora(hits, queries);

  auto stems = ws.load_stems();
  auto templates = ws.load_templates();
  REQUIRE(stems.size() == mem.stems.size());
  REQUIRE(templates.size() == mem.templates.size());
  for (size_t i = 0; i < stems.size(); ++i) {
    CHECK(stems[i].stem == mem.stems[i].stem);
    CHECK(stems[i].verb == mem.stems[i].verb);
    CHECK(stems[i].count == mem.stems[i].count);
  }
  for (size_t i = 0; i < templates.size(); ++i) {
    CHECK(templates[i].template_text == mem.templates[i].template_text);
    CHECK(templates[i].count == mem.templates[i].count);
    CHECK(templates[i].syntax_ok_count == mem.templates[i].syntax_ok_count);
    CHECK(templates[i].returned_rows_count == mem.templates[i].returned_rows_count);
    CHECK(templates[i].example_query_id == mem.templates[i].example_query_id);
  }
  CHECK(ws.load_hit_stem_ids() == mem.hit_stem_ids);
  CHECK(ws.load_query_template_ids() == mem.query_template_ids);
}

TEST_CASE("rerunning an identical pipeline is byte-identical") {
  TempDir dir("determinism");
  PipelineConfig cfg = fixture_config(dir);

  Workspace a = Workspace::init(dir.path / "a");
  a.run(kAllStages, cfg);
  Workspace b = Workspace::init(dir.path / "b");
  b.run(kAllStages, cfg);

  for (const auto& entry : fs::directory_iterator(a.tables_dir())) {
    fs::path other = b.tables_dir() / entry.path().filename();
    REQUIRE(fs::exists(other));
    CHECK_MESSAGE(slurp(entry.path()) == slurp(other), entry.path().string());
  }
  CHECK(slurp(dir.path / "a" / "manifest.json") == slurp(dir.path / "b" / "manifest.json"));

  // serial run matches the parallel one too
  PipelineConfig serial_cfg = cfg;
  serial_cfg.threads = 1;
  Workspace c = Workspace::init(dir.path / "c");
  c.run(kAllStages, serial_cfg);
  for (const auto& entry : fs::directory_iterator(a.tables_dir())) {
    fs::path other = c.tables_dir() / entry.path().filename();
    CHECK_MESSAGE(slurp(entry.path()) == slurp(other), entry.path().string());
  }
}

TEST_CASE("config changes invalidate exactly the dependent stages") {
  TempDir dir("invalidate");
  PipelineConfig cfg = fixture_config(dir);
  {
    // one IP with a 20-minute think time: gap 900 splits it, 1800 keeps it
    std::ofstream extra(dir.path / "http.log", std::ios::app);
    extra << "2006-03-01T00:00:00Z\t10.7.7.7\tGET\t/en/a.asp\t\t200\tMSIE\t-\n"
             "2006-03-01T00:20:00Z\t10.7.7.7\tGET\t/en/b.asp\t\t200\tMSIE\t-\n";
  }
  Workspace ws = Workspace::init(dir.path / "ws");
  ws.run(kAllStages, cfg);

  std::string weblog_before = slurp(ws.tables_dir() / "weblog.tsv");
  std::string sessions_before = slurp(ws.tables_dir() / "session.tsv");
  nlohmann::json m1;
  {
    std::ifstream in(dir.path / "ws" / "manifest.json");
    in >> m1;
  }

  // two calendar months of traffic: the growth-fit report path runs
  fs::path fit = ws.report_fit("monthly_hits", 0, 0, cfg);
  CHECK(fs::exists(fit));
  CHECK(slurp(fit).find("exponential_growth") != std::string::npos);

  PipelineConfig cfg2 = cfg;
  cfg2.gap_seconds = 900;
  CHECK(ws.stage_fresh(Stage::ingest, cfg2));
  CHECK(ws.stage_fresh(Stage::fingerprint, cfg2));
  CHECK(!ws.stage_fresh(Stage::sessionize, cfg2));
  ws.run(kAllStages, cfg2);

  nlohmann::json m2;
  {
    std::ifstream in(dir.path / "ws" / "manifest.json");
    in >> m2;
  }
  // ingest untouched: same fingerprint and same bytes
  CHECK(m1["stages"]["ingest"]["fingerprint"] == m2["stages"]["ingest"]["fingerprint"]);
  CHECK(m1["stages"]["sessionize"]["fingerprint"] != m2["stages"]["sessionize"]["fingerprint"]);
  CHECK(slurp(ws.tables_dir() / "weblog.tsv") == weblog_before);
  CHECK(slurp(ws.tables_dir() / "session.tsv") != sessions_before);

  // requesting a downstream stage with a stale, unrequested upstream refuses
  PipelineConfig cfg3 = cfg2;
  cfg3.gap_seconds = 600;
  CHECK_THROWS_WITH_AS(ws.run({Stage::classify}, cfg3),
                       doctest::Contains("upstream stage 'sessionize'"), std::runtime_error);
  // the refusal left prior outputs alone
  CHECK(ws.stage_fresh(Stage::classify, cfg2));
}

TEST_CASE("report subcommand errors name the missing stage") {
  TempDir dir("missing");
  PipelineConfig cfg = fixture_config(dir);
  Workspace ws = Workspace::init(dir.path / "ws");
  ws.run({Stage::ingest}, cfg);
  CHECK_THROWS_WITH_AS(ws.require_stage(Stage::classify, cfg), doctest::Contains("classify"),
                       std::runtime_error);
  CHECK_NOTHROW(ws.require_stage(Stage::ingest, cfg));
}

TEST_CASE("workspace lock excludes concurrent runs") {
  TempDir dir("lock");
  fs::create_directories(dir.path / "ws");
  WorkspaceLock lock(dir.path / "ws");
  CHECK_THROWS_AS(WorkspaceLock(dir.path / "ws"), std::runtime_error);
}

TEST_CASE("partial failure leaves prior stage outputs intact") {
  TempDir dir("partial");
  PipelineConfig cfg = fixture_config(dir);
  Workspace ws = Workspace::init(dir.path / "ws");
  ws.run({Stage::ingest}, cfg);
  std::string weblog_before = slurp(ws.tables_dir() / "weblog.tsv");

  // poison the input list; the ingest rerun must fail before clobbering
  PipelineConfig broken = cfg;
  broken.http_logs.push_back((dir.path / "missing.log").string());
  CHECK_THROWS(ws.run(kAllStages, broken));
  CHECK(slurp(ws.tables_dir() / "weblog.tsv") == weblog_before);
}
