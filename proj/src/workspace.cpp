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

#include "logsift/workspace.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <map>
#include <stdexcept>

#include "json.hpp"
#include "logsift/tsv.hpp"

namespace logsift {

namespace fs = std::filesystem;
using nlohmann::json;

// ---------------------------------------------------------------------------
// config

namespace {

std::string trim(std::string_view s) {
  size_t a = s.find_first_not_of(" \t");
  if (a == std::string_view::npos) return {};
  size_t b = s.find_last_not_of(" \t");
  return std::string(s.substr(a, b - a + 1));
}

std::vector<std::string> split_list(std::string_view v) {
  std::vector<std::string> out;
  size_t start = 0;
  while (start <= v.size()) {
    size_t comma = v.find(',', start);
    std::string item = trim(v.substr(start, comma == std::string_view::npos
                                                ? std::string_view::npos
                                                : comma - start));
    if (!item.empty()) out.push_back(std::move(item));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

std::string join_list(std::span<const std::string> items) {
  std::string out;
  for (size_t i = 0; i < items.size(); ++i) {
    if (i) out += ",";
    out += items[i];
  }
  return out;
}

}  // namespace

std::set<std::string> PipelineConfig::noise() const {
  if (noise_suffixes.empty()) return default_noise_suffixes();
  return {noise_suffixes.begin(), noise_suffixes.end()};
}

AgentRules PipelineConfig::agents() const {
  if (agent_rules_path.empty()) return default_agent_rules();
  return load_agent_rules(agent_rules_path);
}

ClassifyParams PipelineConfig::classify_params() const {
  ClassifyParams p;
  p.reuse_threshold = bot_reuse;
  p.min_events = min_events;
  p.min_duration_s = min_duration;
  p.max_duration_s = max_duration;
  return p;
}

PipelineConfig load_config_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path.string());
  PipelineConfig cfg;
  std::string line;
  std::uint64_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    size_t eq = t.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error("config line " + std::to_string(line_no) + ": expected key = value");
    std::string key = trim(t.substr(0, eq));
    std::string value = trim(t.substr(eq + 1));
    try {
      if (key == "http_log") {
        if (!value.empty()) cfg.http_logs.push_back(value);
      } else if (key == "sql_log") {
        if (!value.empty()) cfg.sql_logs.push_back(value);
      } else if (key == "agent_rules") cfg.agent_rules_path = value;
      else if (key == "admin_ips") cfg.admin_ips = split_list(value);
      else if (key == "noise_suffixes") cfg.noise_suffixes = split_list(value);
      else if (key == "gap_seconds") cfg.gap_seconds = std::stoll(value);
      else if (key == "bot_reuse") cfg.bot_reuse = std::stod(value);
      else if (key == "min_events") cfg.min_events = std::stoull(value);
      else if (key == "min_duration") cfg.min_duration = std::stoll(value);
      else if (key == "max_duration") cfg.max_duration = std::stoll(value);
      else if (key == "ngram") cfg.ngram = std::stoi(value);
      else if (key == "threads") cfg.threads = std::stoi(value);
      else if (key == "schema") cfg.schema_path = value;
      else if (key == "ip_map") cfg.ip_map_path = value;
      else if (key == "languages") {
        cfg.languages.clear();
        for (const std::string& item : split_list(value)) {
          size_t colon = item.find('=');
          if (colon == std::string::npos) throw std::runtime_error("want lang=/prefix/ pairs");
          cfg.languages.emplace_back(trim(item.substr(colon + 1)), trim(item.substr(0, colon)));
        }
      } else
        throw std::runtime_error("unknown key");
    } catch (const std::exception& e) {
      throw std::runtime_error("config line " + std::to_string(line_no) + " (" + key +
                               "): " + e.what());
    }
  }
  return cfg;
}

void write_default_config(const fs::path& path) {
  std::ofstream out(path);
  out << "# logsift workspace configuration\n"
         "# input logs (repeat the key for several files)\n"
         "# http_log = /path/to/http.log\n"
         "# sql_log = /path/to/sql.log\n"
         "\n"
         "# agent_rules = /path/to/agents.conf   (category \\t pattern \\t name)\n"
         "# admin_ips =\n"
         "# noise_suffixes = gif, jpg, jpeg, png, txt, css, ico, js, swf\n"
         "gap_seconds = 1800\n"
         "bot_reuse = 4.0\n"
         "min_events = 4\n"
         "min_duration = 60\n"
         "max_duration = 28800\n"
         "ngram = 3\n"
         "threads = 0\n"
         "# schema = /path/to/schema.tsv         (table|column|function \\t name)\n"
         "# ip_map = /path/to/ipmap.tsv          (cidr \\t organization)\n";
}

// ---------------------------------------------------------------------------
// stage bookkeeping

const char* to_string(Stage s) {
  switch (s) {
    case Stage::ingest: return "ingest";
    case Stage::fingerprint: return "fingerprint";
    case Stage::sessionize: return "sessionize";
    case Stage::classify: return "classify";
    case Stage::report: return "report";
  }
  return "?";
}

Stage stage_from_string(std::string_view s) {
  if (s == "ingest") return Stage::ingest;
  if (s == "fingerprint") return Stage::fingerprint;
  if (s == "sessionize") return Stage::sessionize;
  if (s == "classify") return Stage::classify;
  if (s == "report") return Stage::report;
  throw std::invalid_argument("unknown stage: " + std::string(s));
}

namespace {

constexpr Stage kStageOrder[] = {Stage::ingest, Stage::fingerprint, Stage::sessionize,
                                 Stage::classify, Stage::report};

std::optional<Stage> upstream_of(Stage s) {
  switch (s) {
    case Stage::ingest: return std::nullopt;
    case Stage::fingerprint: return Stage::ingest;
    case Stage::sessionize: return Stage::fingerprint;
    case Stage::classify: return Stage::sessionize;
    case Stage::report: return Stage::classify;
  }
  return std::nullopt;
}

std::vector<std::string> stage_outputs(Stage s) {
  switch (s) {
    case Stage::ingest:
      return {"weblog.tsv", "sqllog.tsv", "webagent.tsv", "parse_errors.tsv"};
    case Stage::fingerprint:
      return {"webcommandstem.tsv", "sqltemplate.tsv", "template_examples.tsv", "weblog_stem.tsv",
              "sqllog_template.tsv"};
    case Stage::sessionize:
      return {"session.tsv", "sessionlog.tsv"};
    case Stage::classify:
      return {"session.tsv", "ipprofile.tsv"};
    case Stage::report:
      return {};
  }
  return {};
}

std::string hex64(std::uint64_t v) {
  char buf[24];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

// Stage freshness checks re-derive the fingerprint chain, which would hash
// the same input files once per stage; memoize on (size, mtime).
std::uint64_t cached_file_hash(const std::string& path) {
  struct Entry {
    std::uintmax_t size;
    fs::file_time_type mtime;
    std::uint64_t hash;
  };
  static std::map<std::string, Entry> cache;
  std::uintmax_t size = fs::file_size(path);
  fs::file_time_type mtime = fs::last_write_time(path);
  auto it = cache.find(path);
  if (it != cache.end() && it->second.size == size && it->second.mtime == mtime)
    return it->second.hash;
  std::uint64_t h = fnv1a_file(path);
  cache[path] = {size, mtime, h};
  return h;
}

// Atomic table writer: content lands under the final name only when
// complete, so a failed stage leaves the previous file intact.
class AtomicFile {
 public:
  explicit AtomicFile(const fs::path& path) : final_(path), tmp_(path.string() + ".tmp") {
    out_.open(tmp_, std::ios::binary | std::ios::trunc);
    if (!out_) throw std::runtime_error("cannot write " + tmp_.string());
  }
  std::ostream& stream() { return out_; }
  void commit() {
    out_.flush();
    if (!out_) throw std::runtime_error("write failed: " + tmp_.string());
    out_.close();
    fs::rename(tmp_, final_);
  }
  ~AtomicFile() {
    if (out_.is_open()) {
      out_.close();
      std::error_code ec;
      fs::remove(tmp_, ec);
    }
  }

 private:
  fs::path final_, tmp_;
  std::ofstream out_;
};

// Streams the rows of a headered TSV file.
template <typename Fn>
void for_each_row(const fs::path& path, size_t min_fields, Fn&& fn) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("missing table: " + path.string());
  std::string line;
  if (!std::getline(in, line)) return;  // header
  std::uint64_t row = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    auto fields = split_tabs_limit(line, min_fields);
    if (fields.size() < min_fields)
      throw std::runtime_error("corrupt table row " + std::to_string(row + 2) + " in " +
                               path.string());
    fn(fields);
    ++row;
  }
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

std::string format_fixed(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

json load_manifest(const fs::path& root) {
  std::ifstream in(root / "manifest.json");
  if (!in) return json{{"format", 1}, {"stages", json::object()}};
  json m = json::parse(in, nullptr, false);
  if (m.is_discarded()) throw std::runtime_error("corrupt manifest.json");
  return m;
}

void save_manifest(const fs::path& root, const json& m) {
  AtomicFile f(root / "manifest.json");
  f.stream() << m.dump(2) << "\n";
  f.commit();
}

void append_run_log(const fs::path& root, const std::string& msg) {
  std::ofstream out(root / "runs.log", std::ios::app);
  std::time_t now = std::time(nullptr);
  char when[32];
  std::strftime(when, sizeof(when), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
  out << when << "\t" << msg << "\n";
}

}  // namespace

// ---------------------------------------------------------------------------
// lock

WorkspaceLock::WorkspaceLock(const fs::path& root) : path_(root / "lock") {
  int fd = ::open(path_.c_str(), O_CREAT | O_EXCL | O_WRONLY, 0644);
  if (fd < 0)
    throw std::runtime_error("workspace is locked (" + path_.string() +
                             " exists); remove it if no other run is active");
  ::close(fd);
}

WorkspaceLock::~WorkspaceLock() {
  std::error_code ec;
  fs::remove(path_, ec);
}

// ---------------------------------------------------------------------------
// workspace

Workspace Workspace::init(const fs::path& root) {
  fs::create_directories(root / "tables");
  fs::create_directories(root / "reports");
  if (!fs::exists(root / "config.txt")) write_default_config(root / "config.txt");
  return Workspace(root);
}

Workspace Workspace::open(const fs::path& root) {
  if (!fs::is_directory(root / "tables"))
    throw std::runtime_error("not a workspace (missing tables/): " + root.string());
  return Workspace(root);
}

std::string Workspace::stage_fingerprint(Stage s, const PipelineConfig& cfg) const {
  std::string acc = std::string(to_string(s)) + "|v1";
  switch (s) {
    case Stage::ingest: {
      for (const auto& p : cfg.http_logs) acc += "|http:" + p + ":" + hex64(cached_file_hash(p));
      for (const auto& p : cfg.sql_logs) acc += "|sql:" + p + ":" + hex64(cached_file_hash(p));
      if (!cfg.agent_rules_path.empty())
        acc += "|rules:" + hex64(cached_file_hash(cfg.agent_rules_path));
      else
        acc += "|rules:builtin";
      auto noise = cfg.noise();
      acc += "|noise:";
      for (const auto& sfx : noise) acc += sfx + ",";
      break;
    }
    case Stage::fingerprint:
      acc += "|" + stage_fingerprint(Stage::ingest, cfg);
      break;
    case Stage::sessionize:
      acc += "|" + stage_fingerprint(Stage::fingerprint, cfg);
      acc += "|gap=" + std::to_string(cfg.gap_seconds);
      break;
    case Stage::classify:
      acc += "|" + stage_fingerprint(Stage::sessionize, cfg);
      acc += "|reuse=" + format_double(cfg.bot_reuse) + "|minev=" + std::to_string(cfg.min_events) +
             "|mindur=" + std::to_string(cfg.min_duration) +
             "|maxdur=" + std::to_string(cfg.max_duration) +
             "|adminips=" + join_list(cfg.admin_ips);
      break;
    case Stage::report:
      acc += "|" + stage_fingerprint(Stage::classify, cfg);
      if (!cfg.schema_path.empty()) acc += "|schema:" + hex64(cached_file_hash(cfg.schema_path));
      if (!cfg.ip_map_path.empty()) acc += "|ipmap:" + hex64(cached_file_hash(cfg.ip_map_path));
      acc += "|langs:";
      for (const auto& [prefix, lang] : cfg.languages) acc += prefix + "=" + lang + ",";
      break;
  }
  return hex64(fnv1a(acc));
}

bool Workspace::stage_fresh(Stage s, const PipelineConfig& cfg) const {
  json manifest = load_manifest(root_);
  const auto& stages = manifest["stages"];
  auto it = stages.find(to_string(s));
  if (it == stages.end()) return false;
  if ((*it).value("fingerprint", "") != stage_fingerprint(s, cfg)) return false;
  for (const auto& name : stage_outputs(s))
    if (!fs::exists(tables_dir() / name)) return false;
  if (s == Stage::report && !fs::exists(reports_dir() / "traffic_month.tsv")) return false;
  return true;
}

void Workspace::require_stage(Stage s, const PipelineConfig& cfg) const {
  if (!stage_fresh(s, cfg))
    throw std::runtime_error(std::string("stage '") + to_string(s) +
                             "' is missing or stale for the current config; run it first");
}

void Workspace::run(const std::set<Stage>& stages, const PipelineConfig& cfg, bool force) {
  WorkspaceLock lock(root_);
  set_worker_count(cfg.threads);
  for (Stage s : kStageOrder) {
    if (!stages.count(s)) continue;
    if (stage_fresh(s, cfg) && !force) {
      append_run_log(root_, std::string("skip ") + to_string(s) + " (fresh)");
      continue;
    }
    auto up = upstream_of(s);
    if (up && !stage_fresh(*up, cfg)) {
      // an upstream listed in this run would already have been rebuilt
      throw std::runtime_error(std::string("cannot run '") + to_string(s) + "': upstream stage '" +
                               to_string(*up) +
                               "' is missing or stale for the current config; include it in "
                               "--stages or rerun it");
    }
    switch (s) {
      case Stage::ingest: run_ingest(cfg); break;
      case Stage::fingerprint: run_fingerprint(cfg); break;
      case Stage::sessionize: run_sessionize(cfg); break;
      case Stage::classify: run_classify(cfg); break;
      case Stage::report: run_report(cfg); break;
    }
    append_run_log(root_, std::string("ran ") + to_string(s));
  }
}

// ---------------------------------------------------------------------------
// ingest stage

namespace {
constexpr size_t kChunkLines = 1 << 20;

// reads up to kChunkLines; returns false at EOF with no lines
bool read_chunk(std::istream& in, std::vector<std::string>& lines) {
  lines.clear();
  std::string line;
  while (lines.size() < kChunkLines && std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(std::move(line));
  }
  return !lines.empty();
}
}  // namespace

void Workspace::run_ingest(const PipelineConfig& cfg) {
  if (cfg.http_logs.empty() && cfg.sql_logs.empty())
    throw std::runtime_error("ingest: no input logs configured (http_log / sql_log)");
  for (const auto& p : cfg.http_logs)
    if (!fs::exists(p)) throw std::runtime_error("ingest: missing input file " + p);
  for (const auto& p : cfg.sql_logs)
    if (!fs::exists(p)) throw std::runtime_error("ingest: missing input file " + p);

  const AgentRules rules = cfg.agents();
  const auto noise = cfg.noise();
  const Exec exec = cfg.exec();

  AtomicFile weblog(tables_dir() / "weblog.tsv");
  AtomicFile sqllog(tables_dir() / "sqllog.tsv");
  AtomicFile agents_file(tables_dir() / "webagent.tsv");
  AtomicFile errors_file(tables_dir() / "parse_errors.tsv");
  weblog.stream() << "hit_id\ttimestamp\tclient_ip\tmethod\turi_stem\turi_query\tstatus\tagent\t"
                     "referrer\tis_page_view\n";
  sqllog.stream() << "query_id\ttimestamp\tclient_ip\trows_returned\telapsed_s\tcpu_s\tsyntax_ok\t"
                     "error_text\tsource_tag\tstatement\n";
  errors_file.stream() << "file\tline\treason\n";

  std::map<std::string, AgentInfo> agent_table;  // raw -> info, sorted
  std::uint64_t hit_rows = 0, sql_rows = 0, error_rows = 0;
  std::uint64_t next_hit_id = 0, next_query_id = 0;

  std::vector<std::string> lines;
  for (const auto& path : cfg.http_logs) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("ingest: cannot open " + path);
    std::uint64_t line_base = 0;
    while (read_chunk(in, lines)) {
      HttpIngest chunk = ingest_http_lines(lines, line_base + 1, next_hit_id, rules, noise, exec);
      next_hit_id += chunk.hits.size();
      line_base += lines.size();
      for (size_t i = 0; i < chunk.hits.size(); ++i) {
        const HttpHit& h = chunk.hits[i];
        weblog.stream() << h.hit_id << '\t' << format_iso8601(h.timestamp) << '\t' << h.client_ip
                        << '\t' << h.method << '\t' << h.uri_stem << '\t' << h.uri_query << '\t'
                        << h.status << '\t' << h.agent_raw << '\t' << h.referrer << '\t'
                        << (h.is_page_view ? 1 : 0) << '\n';
        agent_table.emplace(h.agent_raw, chunk.agents[i]);
      }
      hit_rows += chunk.hits.size();
      for (const ParseError& e : chunk.errors) {
        errors_file.stream() << path << '\t' << e.line_no << '\t' << e.reason << '\n';
        ++error_rows;
      }
    }
  }
  for (const auto& path : cfg.sql_logs) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("ingest: cannot open " + path);
    std::uint64_t line_base = 0;
    while (read_chunk(in, lines)) {
      SqlIngest chunk = ingest_sql_lines(lines, line_base + 1, next_query_id, exec);
      next_query_id += chunk.queries.size();
      line_base += lines.size();
      for (const SqlRequest& q : chunk.queries) {
        sqllog.stream() << q.query_id << '\t' << format_iso8601(q.timestamp) << '\t' << q.client_ip
                        << '\t' << q.rows_returned << '\t' << format_double(q.elapsed_s) << '\t'
                        << format_double(q.cpu_s) << '\t' << (q.is_syntax_ok ? 1 : 0) << '\t'
                        << q.error_text << '\t' << q.source_tag << '\t'
                        << quote_field(q.statement) << '\n';
      }
      sql_rows += chunk.queries.size();
      for (const ParseError& e : chunk.errors) {
        errors_file.stream() << path << '\t' << e.line_no << '\t' << e.reason << '\n';
        ++error_rows;
      }
    }
  }

  agents_file.stream() << "name\tcategory\tagent_raw\n";
  for (const auto& [raw, info] : agent_table)
    agents_file.stream() << info.name << '\t' << to_string(info.category) << '\t' << raw << '\n';

  weblog.commit();
  sqllog.commit();
  agents_file.commit();
  errors_file.commit();

  json manifest = load_manifest(root_);
  manifest["stages"]["ingest"] = {
      {"fingerprint", stage_fingerprint(Stage::ingest, cfg)},
      {"rows",
       {{"weblog", hit_rows},
        {"sqllog", sql_rows},
        {"webagent", agent_table.size()},
        {"parse_errors", error_rows}}},
      {"config",
       {{"http_logs", cfg.http_logs},
        {"sql_logs", cfg.sql_logs},
        {"noise_suffixes", join_list(cfg.noise_suffixes)}}}};
  save_manifest(root_, manifest);
}

// ---------------------------------------------------------------------------
// fingerprint stage (streams the ingest tables)

void Workspace::run_fingerprint(const PipelineConfig& cfg) {
  const Exec exec = cfg.exec();

  AtomicFile stem_annot(tables_dir() / "weblog_stem.tsv");
  stem_annot.stream() << "hit_id\tstem_id\n";
  std::unordered_map<std::string, std::uint64_t> stem_ids;
  std::vector<CommandStem> stems;
  for_each_row(tables_dir() / "weblog.tsv", 10, [&](std::span<std::string_view> f) {
    std::string stem(f[4]);
    auto [it, inserted] = stem_ids.try_emplace(stem, stems.size());
    if (inserted) {
      CommandStem cs;
      cs.stem_id = it->second;
      cs.stem = stem;
      cs.verb = stem_verb(stem);
      stems.push_back(std::move(cs));
    }
    stems[it->second].count++;
    stem_annot.stream() << f[0] << '\t' << it->second << '\n';
  });

  AtomicFile tmpl_annot(tables_dir() / "sqllog_template.tsv");
  tmpl_annot.stream() << "query_id\ttemplate_id\n";
  std::unordered_map<std::string, std::uint64_t> template_ids;
  std::vector<SqlTemplate> templates;
  std::vector<std::string> examples;  // parallel to templates; statement text

  // chunked: lex/mask in parallel, dedupe serially in stream order
  struct PendingQuery {
    std::uint64_t query_id;
    bool syntax_ok;
    bool returned_rows;
    std::string statement;
  };
  std::vector<PendingQuery> pending;
  auto flush = [&]() {
    std::vector<std::string> texts(pending.size());
    const std::int64_t n = static_cast<std::int64_t>(pending.size());
    if (exec == Exec::parallel) {
#pragma omp parallel for schedule(dynamic, 1024) num_threads(worker_count())
      for (std::int64_t i = 0; i < n; ++i) texts[i] = sql_template(pending[i].statement);
    } else {
      for (std::int64_t i = 0; i < n; ++i) texts[i] = sql_template(pending[i].statement);
    }
    for (std::int64_t i = 0; i < n; ++i) {
      auto [it, inserted] = template_ids.try_emplace(texts[i], templates.size());
      if (inserted) {
        SqlTemplate t;
        t.template_id = it->second;
        t.template_text = texts[i];
        templates.push_back(std::move(t));
        examples.emplace_back();
      }
      SqlTemplate& t = templates[it->second];
      t.count++;
      if (pending[i].syntax_ok) {
        t.syntax_ok_count++;
        if (!t.example_query_id) {
          t.example_query_id = pending[i].query_id;
          examples[it->second] = pending[i].statement;
        }
      }
      if (pending[i].returned_rows) t.returned_rows_count++;
      tmpl_annot.stream() << pending[i].query_id << '\t' << it->second << '\n';
    }
    pending.clear();
  };

  for_each_row(tables_dir() / "sqllog.tsv", 10, [&](std::span<std::string_view> f) {
    auto qid = parse_u64(f[0]);
    auto rows = parse_u64(f[3]);
    auto stmt = unquote_field(f[9]);
    if (!qid || !rows || !stmt) throw std::runtime_error("corrupt sqllog.tsv row");
    pending.push_back({*qid, f[6] == "1", *rows >= 1, std::move(*stmt)});
    if (pending.size() >= kChunkLines) flush();
  });
  flush();

  AtomicFile stems_file(tables_dir() / "webcommandstem.tsv");
  stems_file.stream() << "stem_id\tcount\tstem\tverb\n";
  for (const CommandStem& s : stems)
    stems_file.stream() << s.stem_id << '\t' << s.count << '\t' << s.stem << '\t' << s.verb << '\n';

  AtomicFile tmpl_file(tables_dir() / "sqltemplate.tsv");
  tmpl_file.stream()
      << "template_id\tcount\tsyntax_ok_count\treturned_rows_count\texample_query_id\t"
         "template_text\n";
  for (const SqlTemplate& t : templates) {
    tmpl_file.stream() << t.template_id << '\t' << t.count << '\t' << t.syntax_ok_count << '\t'
                       << t.returned_rows_count << '\t'
                       << (t.example_query_id ? std::to_string(*t.example_query_id) : "-") << '\t'
                       << quote_field(t.template_text) << '\n';
  }

  AtomicFile examples_file(tables_dir() / "template_examples.tsv");
  examples_file.stream() << "template_id\tstatement\n";
  std::uint64_t example_rows = 0;
  for (size_t i = 0; i < templates.size(); ++i) {
    if (!templates[i].example_query_id) continue;
    examples_file.stream() << templates[i].template_id << '\t' << quote_field(examples[i]) << '\n';
    ++example_rows;
  }

  stem_annot.commit();
  tmpl_annot.commit();
  stems_file.commit();
  tmpl_file.commit();
  examples_file.commit();

  json manifest = load_manifest(root_);
  manifest["stages"]["fingerprint"] = {
      {"fingerprint", stage_fingerprint(Stage::fingerprint, cfg)},
      {"rows",
       {{"webcommandstem", stems.size()},
        {"sqltemplate", templates.size()},
        {"template_examples", example_rows}}}};
  save_manifest(root_, manifest);
}

// ---------------------------------------------------------------------------
// sessionize stage

std::vector<SessionEvent> Workspace::load_events() const {
  std::vector<std::uint64_t> hit_stems = load_hit_stem_ids();
  std::vector<std::uint64_t> query_templates = load_query_template_ids();

  std::vector<SessionEvent> events;
  for_each_row(tables_dir() / "weblog.tsv", 10, [&](std::span<std::string_view> f) {
    if (f[9] != "1" || f[2].empty()) return;  // page views with a client address only
    auto id = parse_u64(f[0]);
    auto ts = parse_iso8601(f[1]);
    if (!id || !ts) throw std::runtime_error("corrupt weblog.tsv row");
    if (*id >= hit_stems.size()) throw std::runtime_error("weblog_stem.tsv out of sync");
    events.push_back({std::string(f[2]), *ts, EventKind::web, *id, hit_stems[*id]});
  });
  for_each_row(tables_dir() / "sqllog.tsv", 10, [&](std::span<std::string_view> f) {
    if (f[2].empty()) return;
    auto id = parse_u64(f[0]);
    auto ts = parse_iso8601(f[1]);
    if (!id || !ts) throw std::runtime_error("corrupt sqllog.tsv row");
    if (*id >= query_templates.size()) throw std::runtime_error("sqllog_template.tsv out of sync");
    events.push_back({std::string(f[2]), *ts, EventKind::sql, *id, query_templates[*id]});
  });
  std::sort(events.begin(), events.end(),
            [](const SessionEvent& a, const SessionEvent& b) { return event_order_lt(a, b); });
  return events;
}

namespace {

void write_session_table(const fs::path& path, std::span<const Session> sessions) {
  AtomicFile f(path);
  f.stream() << "session_id\tclient_ip\tstart_ts\tend_ts\tpage_views\tsql_count\tdistinct_stems\t"
                "distinct_templates\tdiversity\tduration_s\tclassification\n";
  for (const Session& s : sessions) {
    f.stream() << s.session_id << '\t' << s.client_ip << '\t' << format_iso8601(s.start_ts) << '\t'
               << format_iso8601(s.end_ts) << '\t' << s.page_views << '\t' << s.sql_count << '\t'
               << s.distinct_stems << '\t' << s.distinct_templates << '\t'
               << format_fixed(s.diversity) << '\t' << s.duration_s << '\t'
               << to_string(s.classification) << '\n';
  }
  f.commit();
}

}  // namespace

void Workspace::run_sessionize(const PipelineConfig& cfg) {
  std::vector<SessionEvent> events = load_events();
  SessionizeResult r = build_sessions(events, cfg.gap_seconds, cfg.exec());

  write_session_table(tables_dir() / "session.tsv", r.sessions);

  AtomicFile entries(tables_dir() / "sessionlog.tsv");
  entries.stream()
      << "session_id\trank_in_session\tkind\trecord_id\tfingerprint_id\ttimestamp\n";
  for (const SessionEntry& e : r.entries) {
    entries.stream() << e.session_id << '\t' << e.rank_in_session << '\t'
                     << (e.kind == EventKind::web ? "web" : "sql") << '\t' << e.record_id << '\t'
                     << e.fingerprint_id << '\t' << format_iso8601(e.timestamp) << '\n';
  }
  entries.commit();

  json manifest = load_manifest(root_);
  manifest["stages"]["sessionize"] = {
      {"fingerprint", stage_fingerprint(Stage::sessionize, cfg)},
      {"rows", {{"session", r.sessions.size()}, {"sessionlog", r.entries.size()}}},
      {"config", {{"gap_seconds", cfg.gap_seconds}}}};
  save_manifest(root_, manifest);
}

// ---------------------------------------------------------------------------
// classify stage

void Workspace::run_classify(const PipelineConfig& cfg) {
  // agent category per raw string, then profiles streamed over the web log
  std::unordered_map<std::string, AgentCategory> agent_cat;
  for (auto& [raw, info] : load_webagent()) agent_cat.emplace(raw, info.category);

  IpProfileTable profiles;
  for_each_row(tables_dir() / "weblog.tsv", 10, [&](std::span<std::string_view> f) {
    if (f[2].empty()) return;
    auto it = agent_cat.find(std::string(f[7]));
    AgentCategory cat = it == agent_cat.end() ? AgentCategory::unknown : it->second;
    accumulate_ip_profile(profiles, std::string(f[2]), cat, f[4]);
  });
  for (const std::string& ip : cfg.admin_ips) {
    auto it = profiles.find(ip);
    if (it != profiles.end()) it->second.ever_admin_agent = true;
  }

  std::vector<Session> sessions = load_sessions();
  classify_sessions(sessions, profiles, cfg.classify_params(), cfg.exec());
  write_session_table(tables_dir() / "session.tsv", sessions);

  AtomicFile prof(tables_dir() / "ipprofile.tsv");
  prof.stream() << "client_ip\tever_spider_agent\tfetched_robots_txt\tever_admin_agent\n";
  std::vector<const IpProfile*> ordered;
  ordered.reserve(profiles.size());
  for (const auto& [ip, p] : profiles) ordered.push_back(&p);
  std::sort(ordered.begin(), ordered.end(),
            [](const IpProfile* a, const IpProfile* b) { return a->client_ip < b->client_ip; });
  for (const IpProfile* p : ordered)
    prof.stream() << p->client_ip << '\t' << (p->ever_spider_agent ? 1 : 0) << '\t'
                  << (p->fetched_robots_txt ? 1 : 0) << '\t' << (p->ever_admin_agent ? 1 : 0)
                  << '\n';
  prof.commit();

  json manifest = load_manifest(root_);
  manifest["stages"]["classify"] = {
      {"fingerprint", stage_fingerprint(Stage::classify, cfg)},
      {"rows", {{"session", sessions.size()}, {"ipprofile", profiles.size()}}},
      {"config",
       {{"bot_reuse", cfg.bot_reuse},
        {"min_events", cfg.min_events},
        {"min_duration", cfg.min_duration},
        {"max_duration", cfg.max_duration}}}};
  save_manifest(root_, manifest);
}

// ---------------------------------------------------------------------------
// loaders

std::vector<HttpHit> Workspace::load_weblog() const {
  std::vector<HttpHit> hits;
  for_each_row(tables_dir() / "weblog.tsv", 10, [&](std::span<std::string_view> f) {
    HttpHit h;
    auto id = parse_u64(f[0]);
    auto ts = parse_iso8601(f[1]);
    auto status = parse_u64(f[6]);
    if (!id || !ts || !status) throw std::runtime_error("corrupt weblog.tsv row");
    h.hit_id = *id;
    h.timestamp = *ts;
    h.client_ip = std::string(f[2]);
    h.method = std::string(f[3]);
    h.uri_stem = std::string(f[4]);
    h.uri_query = std::string(f[5]);
    h.status = static_cast<int>(*status);
    h.agent_raw = std::string(f[7]);
    h.referrer = std::string(f[8]);
    h.is_page_view = f[9] == "1";
    hits.push_back(std::move(h));
  });
  return hits;
}

std::vector<SqlRequest> Workspace::load_sqllog() const {
  std::vector<SqlRequest> queries;
  for_each_row(tables_dir() / "sqllog.tsv", 10, [&](std::span<std::string_view> f) {
    SqlRequest q;
    auto id = parse_u64(f[0]);
    auto ts = parse_iso8601(f[1]);
    auto rows = parse_u64(f[3]);
    auto elapsed = parse_nonneg_double(f[4]);
    auto cpu = parse_nonneg_double(f[5]);
    auto stmt = unquote_field(f[9]);
    if (!id || !ts || !rows || !elapsed || !cpu || !stmt)
      throw std::runtime_error("corrupt sqllog.tsv row");
    q.query_id = *id;
    q.timestamp = *ts;
    q.client_ip = std::string(f[2]);
    q.rows_returned = *rows;
    q.elapsed_s = *elapsed;
    q.cpu_s = *cpu;
    q.is_syntax_ok = f[6] == "1";
    q.error_text = std::string(f[7]);
    q.source_tag = std::string(f[8]);
    q.statement = std::move(*stmt);
    queries.push_back(std::move(q));
  });
  return queries;
}

std::vector<std::pair<std::string, AgentInfo>> Workspace::load_webagent() const {
  std::vector<std::pair<std::string, AgentInfo>> out;
  for_each_row(tables_dir() / "webagent.tsv", 3, [&](std::span<std::string_view> f) {
    AgentInfo info;
    info.name = std::string(f[0]);
    info.category = agent_category_from_string(f[1]);
    info.raw = std::string(f[2]);
    out.emplace_back(info.raw, std::move(info));
  });
  return out;
}

std::vector<CommandStem> Workspace::load_stems() const {
  std::vector<CommandStem> out;
  for_each_row(tables_dir() / "webcommandstem.tsv", 4, [&](std::span<std::string_view> f) {
    CommandStem s;
    auto id = parse_u64(f[0]);
    auto count = parse_u64(f[1]);
    if (!id || !count) throw std::runtime_error("corrupt webcommandstem.tsv row");
    s.stem_id = *id;
    s.count = *count;
    s.stem = std::string(f[2]);
    s.verb = std::string(f[3]);
    out.push_back(std::move(s));
  });
  return out;
}

std::vector<SqlTemplate> Workspace::load_templates() const {
  std::vector<SqlTemplate> out;
  for_each_row(tables_dir() / "sqltemplate.tsv", 6, [&](std::span<std::string_view> f) {
    SqlTemplate t;
    auto id = parse_u64(f[0]);
    auto count = parse_u64(f[1]);
    auto ok = parse_u64(f[2]);
    auto rows = parse_u64(f[3]);
    auto text = unquote_field(f[5]);
    if (!id || !count || !ok || !rows || !text)
      throw std::runtime_error("corrupt sqltemplate.tsv row");
    t.template_id = *id;
    t.count = *count;
    t.syntax_ok_count = *ok;
    t.returned_rows_count = *rows;
    if (f[4] != "-") {
      auto ex = parse_u64(f[4]);
      if (!ex) throw std::runtime_error("corrupt sqltemplate.tsv row");
      t.example_query_id = *ex;
    }
    t.template_text = std::move(*text);
    out.push_back(std::move(t));
  });
  return out;
}

std::unordered_map<std::uint64_t, std::string> Workspace::load_template_examples() const {
  std::unordered_map<std::uint64_t, std::string> out;
  for_each_row(tables_dir() / "template_examples.tsv", 2, [&](std::span<std::string_view> f) {
    auto id = parse_u64(f[0]);
    auto stmt = unquote_field(f[1]);
    if (!id || !stmt) throw std::runtime_error("corrupt template_examples.tsv row");
    out.emplace(*id, std::move(*stmt));
  });
  return out;
}

std::vector<std::uint64_t> Workspace::load_hit_stem_ids() const {
  std::vector<std::uint64_t> out;
  for_each_row(tables_dir() / "weblog_stem.tsv", 2, [&](std::span<std::string_view> f) {
    auto hit = parse_u64(f[0]);
    auto stem = parse_u64(f[1]);
    if (!hit || !stem) throw std::runtime_error("corrupt weblog_stem.tsv row");
    if (*hit >= out.size()) out.resize(*hit + 1, 0);
    out[*hit] = *stem;
  });
  return out;
}

std::vector<std::uint64_t> Workspace::load_query_template_ids() const {
  std::vector<std::uint64_t> out;
  for_each_row(tables_dir() / "sqllog_template.tsv", 2, [&](std::span<std::string_view> f) {
    auto q = parse_u64(f[0]);
    auto t = parse_u64(f[1]);
    if (!q || !t) throw std::runtime_error("corrupt sqllog_template.tsv row");
    if (*q >= out.size()) out.resize(*q + 1, 0);
    out[*q] = *t;
  });
  return out;
}

std::vector<Session> Workspace::load_sessions() const {
  std::vector<Session> out;
  for_each_row(tables_dir() / "session.tsv", 11, [&](std::span<std::string_view> f) {
    Session s;
    auto id = parse_u64(f[0]);
    auto start = parse_iso8601(f[2]);
    auto end = parse_iso8601(f[3]);
    auto pv = parse_u64(f[4]);
    auto sql = parse_u64(f[5]);
    auto ds = parse_u64(f[6]);
    auto dt = parse_u64(f[7]);
    auto div = parse_nonneg_double(f[8]);
    if (!id || !start || !end || !pv || !sql || !ds || !dt || !div)
      throw std::runtime_error("corrupt session.tsv row");
    s.session_id = *id;
    s.client_ip = std::string(f[1]);
    s.start_ts = *start;
    s.end_ts = *end;
    s.page_views = *pv;
    s.sql_count = *sql;
    s.distinct_stems = *ds;
    s.distinct_templates = *dt;
    s.diversity = *div;
    s.duration_s = s.end_ts - s.start_ts;
    s.classification = session_class_from_string(f[10]);
    out.push_back(std::move(s));
  });
  return out;
}

std::vector<SessionEntry> Workspace::load_session_entries() const {
  std::vector<SessionEntry> out;
  for_each_row(tables_dir() / "sessionlog.tsv", 6, [&](std::span<std::string_view> f) {
    SessionEntry e;
    auto sid = parse_u64(f[0]);
    auto rank = parse_u64(f[1]);
    auto rid = parse_u64(f[3]);
    auto fid = parse_u64(f[4]);
    auto ts = parse_iso8601(f[5]);
    if (!sid || !rank || !rid || !fid || !ts)
      throw std::runtime_error("corrupt sessionlog.tsv row");
    e.session_id = *sid;
    e.rank_in_session = static_cast<std::uint32_t>(*rank);
    e.kind = f[2] == "sql" ? EventKind::sql : EventKind::web;
    e.record_id = *rid;
    e.fingerprint_id = *fid;
    e.timestamp = *ts;
    out.push_back(e);
  });
  return out;
}

// ---------------------------------------------------------------------------
// reports

namespace {

void write_traffic_rows(AtomicFile& f, const std::string& key_name,
                        std::span<const TrafficRow> rows) {
  f.stream() << key_name << "\thits\tpage_views\tsql_count\n";
  for (const TrafficRow& r : rows)
    f.stream() << r.key << '\t' << r.hits << '\t' << r.page_views << '\t' << r.sql_count << '\n';
}

}  // namespace

fs::path Workspace::report_traffic(GroupKey key, const PipelineConfig& cfg, int smooth) {
  auto hits = load_weblog();
  auto queries = load_sqllog();
  auto rows = traffic_report(hits, queries, key, cfg.languages, cfg.exec());

  fs::path out = reports_dir() / (std::string("traffic_") + to_string(key) + ".tsv");
  AtomicFile f(out);
  write_traffic_rows(f, to_string(key), rows);
  f.commit();

  if (key == GroupKey::month) {
    // plot companion: numeric month axis, optionally smoothed
    std::vector<double> pv(rows.size()), hit_counts(rows.size()), sql(rows.size());
    for (size_t i = 0; i < rows.size(); ++i) {
      pv[i] = static_cast<double>(rows[i].page_views);
      hit_counts[i] = static_cast<double>(rows[i].hits);
      sql[i] = static_cast<double>(rows[i].sql_count);
    }
    std::vector<double> spv = pv, shits = hit_counts, ssql = sql;
    if (smooth > 1) {
      spv = smooth_series(pv, smooth);
      shits = smooth_series(hit_counts, smooth);
      ssql = smooth_series(sql, smooth);
    }
    AtomicFile plot(reports_dir() / "traffic_month_plot.tsv");
    plot.stream() << "month\tmonth_index\thits\tpage_views\tsql_count\thits_smoothed\t"
                     "page_views_smoothed\tsql_smoothed\n";
    for (size_t i = 0; i < rows.size(); ++i) {
      plot.stream() << rows[i].key << '\t' << i << '\t' << format_double(hit_counts[i]) << '\t'
                    << format_double(pv[i]) << '\t' << format_double(sql[i]) << '\t'
                    << format_double(shits[i]) << '\t' << format_double(spv[i]) << '\t'
                    << format_double(ssql[i]) << '\n';
    }
    plot.commit();
  }
  return out;
}

fs::path Workspace::report_sessions(const PipelineConfig&) {
  auto sessions = load_sessions();
  fs::path out = reports_dir() / "sessions.tsv";
  write_session_table(out, sessions);
  return out;
}

fs::path Workspace::report_terms(TermWeight weight, const PipelineConfig& cfg) {
  auto templates = load_templates();
  SqlSchema schema;
  if (!cfg.schema_path.empty()) schema = SqlSchema::load(cfg.schema_path);
  auto rows = term_frequency(templates, weight, schema, cfg.exec());

  const char* w = weight == TermWeight::per_template ? "per_template" : "per_query";
  fs::path out = reports_dir() / (std::string("terms_") + w + ".tsv");
  AtomicFile f(out);
  f.stream() << "token\tclass\tcount\trank\n";
  for (const auto& r : rows)
    f.stream() << r.token << '\t' << to_string(r.token_class) << '\t' << r.count << '\t' << r.rank
               << '\n';
  f.commit();

  AtomicFile plot(reports_dir() / (std::string("terms_") + w + "_plot.tsv"));
  plot.stream() << "rank\tcount\n";
  for (const auto& r : rows) plot.stream() << r.rank << '\t' << r.count << '\n';
  plot.commit();

  if (!cfg.schema_path.empty()) {
    struct NamedSet {
      const char* label;
      const std::set<std::string>* names;
    };
    for (const NamedSet& ns : {NamedSet{"tables", &schema.tables},
                               NamedSet{"columns", &schema.columns},
                               NamedSet{"functions", &schema.functions}}) {
      AtomicFile un(reports_dir() / (std::string("unmentioned_") + ns.label + ".tsv"));
      un.stream() << "name\n";
      for (const auto& name : unmentioned_names(*ns.names, rows)) un.stream() << name << '\n';
      un.commit();
    }
  }
  return out;
}

namespace {

BucketedHistogram histogram_for(const std::string& source, const Workspace& ws, Exec exec) {
  if (source == "think_time") return think_time_histogram(ws.load_events(), exec);
  auto sessions = ws.load_sessions();
  auto [requests, duration] = session_size_histograms(sessions, exec);
  if (source == "session_requests") return requests;
  if (source == "session_duration") return duration;
  throw std::invalid_argument("unknown histogram source: " + source +
                              " (want think_time|session_requests|session_duration)");
}

}  // namespace

fs::path Workspace::report_histogram(const std::string& source, const PipelineConfig& cfg) {
  BucketedHistogram h = histogram_for(source, *this, cfg.exec());
  fs::path out = reports_dir() / ("histogram_" + source + ".tsv");
  AtomicFile f(out);
  f.stream() << "bucket\tlow\thigh\tcount\n";
  for (const auto& [k, c] : h.buckets)
    f.stream() << k << '\t' << (1LL << k) << '\t' << (1LL << (k + 1)) << '\t' << c << '\n';
  f.commit();
  return out;
}

fs::path Workspace::report_fit(const std::string& source, int min_bucket, int max_bucket,
                               const PipelineConfig& cfg) {
  fs::path out = reports_dir() / ("fit_" + source + ".txt");
  AtomicFile f(out);
  if (source.rfind("monthly_", 0) == 0) {
    auto rows = traffic_report(load_weblog(), load_sqllog(), GroupKey::month, cfg.languages,
                               cfg.exec());
    // time axis from the calendar, so empty months do not compress it
    auto month_of = [](const std::string& key) {
      return std::stoi(key.substr(0, 4)) * 12 + std::stoi(key.substr(5, 2)) - 1;
    };
    std::vector<std::pair<int, double>> series;
    for (const auto& r : rows) {
      double y = source == "monthly_hits"         ? static_cast<double>(r.hits)
                 : source == "monthly_page_views" ? static_cast<double>(r.page_views)
                 : source == "monthly_sql"        ? static_cast<double>(r.sql_count)
                                                  : -1.0;
      if (y < 0.0)
        throw std::invalid_argument(
            "unknown fit source (want monthly_hits|monthly_page_views|monthly_sql|think_time|"
            "session_requests|session_duration)");
      series.emplace_back(month_of(r.key), y);
    }
    FitResult r = fit_exponential_growth(series);
    f.stream() << "source\t" << source << "\nkind\texponential_growth\nyearly_multiplier\t"
               << format_double(r.slope) << "\nmonthly_ln_slope\t"
               << format_double(r.monthly_ln_slope) << "\nintercept_ln\t"
               << format_double(r.intercept) << "\nr_squared\t" << format_double(r.r_squared)
               << "\nn_points\t" << r.n_points
               << "\nconvention\tyearly_multiplier = exp(12 * monthly_ln_slope); 2.0 means the "
                  "series doubles every year\n";
  } else {
    BucketedHistogram h = histogram_for(source, *this, cfg.exec());
    FitResult r = fit_power_law(h, min_bucket, max_bucket);
    f.stream() << "source\t" << source << "\nkind\tpower_law\nslope\t" << format_double(r.slope)
               << "\nimplied_alpha\t" << format_double(r.implied_alpha) << "\nintercept\t"
               << format_double(r.intercept) << "\nr_squared\t" << format_double(r.r_squared)
               << "\nn_points\t" << r.n_points << "\nrange\t[" << r.range_min << ", "
               << r.range_max
               << "]\nconvention\tlog2 bucket counts of a density with exponent alpha fall with "
                  "slope -(alpha-1); implied_alpha = 1 - slope\n";
  }
  f.commit();
  return out;
}

fs::path Workspace::report_institutions(const PipelineConfig& cfg) {
  if (cfg.ip_map_path.empty())
    throw std::runtime_error("institutions report needs an ip_map (cidr \\t organization)");
  IpOrgMap map = IpOrgMap::load(cfg.ip_map_path);
  auto rules = default_org_category_rules();
  auto rows = traffic_by_institution(load_weblog(), load_sqllog(), map, rules, cfg.exec());
  fs::path out = reports_dir() / "institutions.tsv";
  AtomicFile f(out);
  f.stream() << "organization\tpage_views\tsql_count\tcategory\n";
  for (const auto& r : rows)
    f.stream() << r.organization << '\t' << r.page_views << '\t' << r.sql_count << '\t'
               << r.category << '\n';
  f.commit();
  return out;
}

void Workspace::run_report(const PipelineConfig& cfg) {
  for (GroupKey key : {GroupKey::month, GroupKey::verb, GroupKey::suffix, GroupKey::tree,
                       GroupKey::language, GroupKey::source_tag})
    report_traffic(key, cfg, 3);
  report_sessions(cfg);
  report_terms(TermWeight::per_template, cfg);
  for (const char* source : {"think_time", "session_requests", "session_duration"})
    report_histogram(source, cfg);
  if (!cfg.ip_map_path.empty()) report_institutions(cfg);

  json manifest = load_manifest(root_);
  manifest["stages"]["report"] = {{"fingerprint", stage_fingerprint(Stage::report, cfg)}};
  save_manifest(root_, manifest);
}

NGramIndex Workspace::build_suggest_index(const PipelineConfig& cfg) const {
  return NGramIndex::build(load_templates(), load_template_examples(), cfg.ngram, cfg.exec());
}

}  // namespace logsift
