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

// Command-line front end for the log-analytics pipeline:
//   init     create a workspace
//   ingest   parse raw logs into the normalized tables
//   run      execute pipeline stages (ingest -> fingerprint -> sessionize ->
//            classify -> report) with manifest-driven staleness checks
//   report   emit a single report kind on demand
//   suggest  top-k similar correct statements for a (broken) query
//   synth    generate synthetic corpora with planted ground truth

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "logsift/synth.hpp"
#include "logsift/workspace.hpp"

namespace fs = std::filesystem;
using namespace logsift;

namespace {

std::string env_workspace() {
  const char* v = std::getenv("LOGSIFT_WORKSPACE");
  return v ? v : "";
}

// Flags set on the command line override the workspace config file.
struct ConfigFlags {
  std::vector<std::string> http_logs, sql_logs;
  std::string agent_rules, schema, ip_map;
  std::string admin_ips, noise_suffixes, languages;  // comma lists
  std::int64_t gap_seconds = 1800;
  double bot_reuse = 4.0;
  std::uint64_t min_events = 4;
  std::int64_t min_duration = 60;
  std::int64_t max_duration = 28800;
  int ngram = 3;
  int threads = 0;

  void add_to(CLI::App* cmd) {
    cmd->add_option("--http", http_logs, "HTTP log file(s) to ingest");
    cmd->add_option("--sql", sql_logs, "SQL log file(s) to ingest");
    cmd->add_option("--agent-rules", agent_rules, "agent marker file (category\\tpattern\\tname)");
    cmd->add_option("--admin-ips", admin_ips, "comma list of administrative addresses");
    cmd->add_option("--noise-suffixes", noise_suffixes, "comma list of noise suffixes");
    cmd->add_option("--gap-seconds", gap_seconds, "session think-time cutoff");
    cmd->add_option("--bot-reuse", bot_reuse, "bot template-reuse factor");
    cmd->add_option("--min-events", min_events, "mortal session minimum requests");
    cmd->add_option("--min-duration", min_duration, "mortal session minimum seconds");
    cmd->add_option("--max-duration", max_duration, "mortal session maximum seconds");
    cmd->add_option("--ngram", ngram, "suggestion gram length");
    cmd->add_option("--threads", threads, "worker threads (0 = all cores, 1 = serial)");
    cmd->add_option("--schema", schema, "schema name file for term classification");
    cmd->add_option("--ip-map", ip_map, "cidr\\torganization file for institution reports");
    cmd->add_option("--languages", languages, "language sub-sites as lang=/prefix/ pairs");
  }

  static std::vector<std::string> csv(const std::string& v) {
    std::vector<std::string> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
      size_t a = item.find_first_not_of(" \t");
      if (a == std::string::npos) continue;
      size_t b = item.find_last_not_of(" \t");
      out.push_back(item.substr(a, b - a + 1));
    }
    return out;
  }

  PipelineConfig apply(const CLI::App* cmd, PipelineConfig cfg) const {
    if (cmd->count("--http")) cfg.http_logs = http_logs;
    if (cmd->count("--sql")) cfg.sql_logs = sql_logs;
    if (cmd->count("--agent-rules")) cfg.agent_rules_path = agent_rules;
    if (cmd->count("--admin-ips")) cfg.admin_ips = csv(admin_ips);
    if (cmd->count("--noise-suffixes")) cfg.noise_suffixes = csv(noise_suffixes);
    if (cmd->count("--gap-seconds")) cfg.gap_seconds = gap_seconds;
    if (cmd->count("--bot-reuse")) cfg.bot_reuse = bot_reuse;
    if (cmd->count("--min-events")) cfg.min_events = min_events;
    if (cmd->count("--min-duration")) cfg.min_duration = min_duration;
    if (cmd->count("--max-duration")) cfg.max_duration = max_duration;
    if (cmd->count("--ngram")) cfg.ngram = ngram;
    if (cmd->count("--threads")) cfg.threads = threads;
    if (cmd->count("--schema")) cfg.schema_path = schema;
    if (cmd->count("--ip-map")) cfg.ip_map_path = ip_map;
    if (cmd->count("--languages")) {
      cfg.languages.clear();
      for (const std::string& item : csv(languages)) {
        size_t eq = item.find('=');
        if (eq == std::string::npos)
          throw std::runtime_error("--languages wants lang=/prefix/ pairs");
        cfg.languages.emplace_back(item.substr(eq + 1), item.substr(0, eq));
      }
    }
    return cfg;
  }
};

PipelineConfig base_config(const fs::path& ws_root) {
  fs::path cfg_path = ws_root / "config.txt";
  if (fs::exists(cfg_path)) return load_config_file(cfg_path);
  return PipelineConfig{};
}

// Persist the effective config so later runs agree with this one.
void persist_config(const fs::path& ws_root, const PipelineConfig& cfg) {
  std::ofstream out(ws_root / "config.txt", std::ios::trunc);
  out << "# logsift workspace configuration (written by the last run)\n";
  for (const auto& p : cfg.http_logs) out << "http_log = " << p << "\n";
  for (const auto& p : cfg.sql_logs) out << "sql_log = " << p << "\n";
  if (!cfg.agent_rules_path.empty()) out << "agent_rules = " << cfg.agent_rules_path << "\n";
  if (!cfg.admin_ips.empty()) {
    out << "admin_ips = ";
    for (size_t i = 0; i < cfg.admin_ips.size(); ++i)
      out << (i ? ", " : "") << cfg.admin_ips[i];
    out << "\n";
  }
  if (!cfg.noise_suffixes.empty()) {
    out << "noise_suffixes = ";
    for (size_t i = 0; i < cfg.noise_suffixes.size(); ++i)
      out << (i ? ", " : "") << cfg.noise_suffixes[i];
    out << "\n";
  }
  out << "gap_seconds = " << cfg.gap_seconds << "\n"
      << "bot_reuse = " << cfg.bot_reuse << "\n"
      << "min_events = " << cfg.min_events << "\n"
      << "min_duration = " << cfg.min_duration << "\n"
      << "max_duration = " << cfg.max_duration << "\n"
      << "ngram = " << cfg.ngram << "\n"
      << "threads = " << cfg.threads << "\n";
  if (!cfg.schema_path.empty()) out << "schema = " << cfg.schema_path << "\n";
  if (!cfg.ip_map_path.empty()) out << "ip_map = " << cfg.ip_map_path << "\n";
  out << "languages = ";
  for (size_t i = 0; i < cfg.languages.size(); ++i)
    out << (i ? ", " : "") << cfg.languages[i].second << "=" << cfg.languages[i].first;
  out << "\n";
}

std::set<Stage> parse_stages(const std::string& csv) {
  std::set<Stage> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.insert(stage_from_string(item));
  }
  if (out.empty()) throw std::invalid_argument("no stages given");
  return out;
}

void write_file_lines(const fs::path& p, const std::vector<std::string>& lines) {
  std::ofstream out(p, std::ios::trunc);
  for (const auto& l : lines) out << l << "\n";
  if (!out) throw std::runtime_error("cannot write " + p.string());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"logsift - web/SQL log sessionization, classification and query suggestion"};
  app.require_subcommand(1);

  std::string workspace = env_workspace();

  // init
  auto* init = app.add_subcommand("init", "create a workspace directory");
  init->add_option("--workspace", workspace, "workspace root")->required(env_workspace().empty());

  // ingest
  auto* ingest = app.add_subcommand("ingest", "parse raw logs into normalized tables");
  ingest->add_option("--workspace", workspace, "workspace root");
  ConfigFlags ingest_flags;
  ingest_flags.add_to(ingest);
  bool ingest_force = false;
  ingest->add_flag("--force", ingest_force, "rebuild even if fresh");

  // run
  auto* run = app.add_subcommand("run", "run pipeline stages in dependency order");
  run->add_option("--workspace", workspace, "workspace root");
  std::string stages_csv = "ingest,fingerprint,sessionize,classify,report";
  run->add_option("--stages", stages_csv, "comma list of stages to run");
  bool run_force = false;
  run->add_flag("--force", run_force, "rebuild requested stages even if fresh");
  ConfigFlags run_flags;
  run_flags.add_to(run);

  // report
  auto* report = app.add_subcommand("report", "emit one report kind");
  report->add_option("--workspace", workspace, "workspace root");
  std::string report_kind;
  report->add_option("kind", report_kind, "traffic|sessions|terms|fits|institutions")->required();
  std::string group_key = "month";
  report->add_option("--group-key", group_key, "traffic grouping key");
  std::string weight = "per_template";
  report->add_option("--weight", weight, "terms weighting: per_template|per_query");
  std::string fit_source;
  report->add_option("--source", fit_source,
                     "fit source: think_time|session_requests|session_duration|monthly_hits|"
                     "monthly_page_views|monthly_sql");
  int min_bucket = 0, max_bucket = 0, smooth = 0;
  report->add_option("--min-bucket", min_bucket, "power-law fit range start (required for fits)");
  report->add_option("--max-bucket", max_bucket, "power-law fit range end (required for fits)");
  report->add_option("--smooth", smooth, "centered moving-average window for monthly plot data");
  ConfigFlags report_flags;
  report_flags.add_to(report);

  // suggest
  auto* suggest = app.add_subcommand("suggest", "suggest correct statements for a broken query");
  std::string corpus_dir;
  suggest->add_option("--corpus", corpus_dir, "workspace holding the template corpus");
  suggest->add_option("--workspace", workspace, "workspace root (alias of --corpus)");
  int ngram = 3, top_k = 3;
  suggest->add_option("--ngram", ngram, "gram length");
  suggest->add_option("--top-k", top_k, "number of suggestions");
  std::string query_file;
  suggest->add_option("--file", query_file, "file holding the statement");
  bool from_stdin = false;
  suggest->add_flag("--stdin", from_stdin, "read the statement from stdin");

  // synth
  auto* synth = app.add_subcommand("synth", "generate a synthetic corpus with planted truth");
  std::string synth_out;
  synth->add_option("--out", synth_out, "output directory")->required();
  SynthConfig sc;
  synth->add_option("--seed", sc.seed, "random seed");
  synth->add_option("--admins", sc.admins, "administrative clients");
  synth->add_option("--spiders", sc.spiders, "crawler clients");
  synth->add_option("--bots", sc.bots, "template-replaying clients");
  synth->add_option("--mortals", sc.mortals, "human-like clients");
  synth->add_option("--others", sc.others, "short bounce clients");
  synth->add_option("--bot-queries", sc.bot_queries, "queries per bot session");
  std::uint64_t bulk_lines = 0;
  synth->add_option("--lines", bulk_lines, "bulk mode: total lines (no planted truth)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;  // usage errors exit 1, --help exits 0
  }

  try {
    if (init->parsed()) {
      Workspace ws = Workspace::init(workspace);
      std::printf("initialized workspace %s\n", ws.root().c_str());
      return 0;
    }

    if (synth->parsed()) {
      fs::create_directories(synth_out);
      if (bulk_lines > 0) {
        std::ofstream http(fs::path(synth_out) / "http.log", std::ios::trunc);
        std::ofstream sql(fs::path(synth_out) / "sql.log", std::ios::trunc);
        synth_bulk(bulk_lines, sc.seed, http, sql);
        std::printf("wrote %llu bulk lines under %s\n",
                    static_cast<unsigned long long>(bulk_lines), synth_out.c_str());
      } else {
        SynthCorpus corpus = synth_corpus(sc);
        write_file_lines(fs::path(synth_out) / "http.log", corpus.http_lines);
        write_file_lines(fs::path(synth_out) / "sql.log", corpus.sql_lines);
        std::ofstream truth(fs::path(synth_out) / "truth.tsv", std::ios::trunc);
        truth << "client_ip\texpected_label\n";
        for (const auto& [ip, label] : corpus.truth) truth << ip << '\t' << label << '\n';
        std::printf("wrote %zu http + %zu sql lines (%zu planted clients) under %s\n",
                    corpus.http_lines.size(), corpus.sql_lines.size(), corpus.truth.size(),
                    synth_out.c_str());
      }
      return 0;
    }

    if (workspace.empty() && corpus_dir.empty())
      throw std::runtime_error("no workspace given (--workspace or LOGSIFT_WORKSPACE)");

    if (ingest->parsed()) {
      Workspace ws = Workspace::open(workspace);
      PipelineConfig cfg = ingest_flags.apply(ingest, base_config(workspace));
      ws.run({Stage::ingest}, cfg, ingest_force);
      persist_config(workspace, cfg);
      std::printf("ingest complete; tables under %s\n", ws.tables_dir().c_str());
      return 0;
    }

    if (run->parsed()) {
      Workspace ws = Workspace::open(workspace);
      PipelineConfig cfg = run_flags.apply(run, base_config(workspace));
      ws.run(parse_stages(stages_csv), cfg, run_force);
      persist_config(workspace, cfg);
      std::printf("pipeline complete; workspace %s\n", ws.root().c_str());
      return 0;
    }

    if (report->parsed()) {
      Workspace ws = Workspace::open(workspace);
      PipelineConfig cfg = report_flags.apply(report, base_config(workspace));
      std::vector<fs::path> written;
      if (report_kind == "traffic") {
        ws.require_stage(Stage::ingest, cfg);
        written.push_back(ws.report_traffic(group_key_from_string(group_key), cfg, smooth));
      } else if (report_kind == "sessions") {
        ws.require_stage(Stage::classify, cfg);
        written.push_back(ws.report_sessions(cfg));
      } else if (report_kind == "terms") {
        ws.require_stage(Stage::fingerprint, cfg);
        written.push_back(ws.report_terms(
            weight == "per_query" ? TermWeight::per_query : TermWeight::per_template, cfg));
      } else if (report_kind == "fits") {
        if (fit_source.empty()) throw std::runtime_error("fits report needs --source");
        if (fit_source.rfind("monthly_", 0) == 0) {
          ws.require_stage(Stage::ingest, cfg);
        } else {
          ws.require_stage(Stage::sessionize, cfg);
          if (!report->count("--min-bucket") || !report->count("--max-bucket"))
            throw std::runtime_error("power-law fits need --min-bucket and --max-bucket");
          written.push_back(ws.report_histogram(fit_source, cfg));  // plot-data companion
        }
        written.push_back(ws.report_fit(fit_source, min_bucket, max_bucket, cfg));
      } else if (report_kind == "institutions") {
        ws.require_stage(Stage::ingest, cfg);
        written.push_back(ws.report_institutions(cfg));
      } else {
        throw std::runtime_error("unknown report kind: " + report_kind);
      }
      for (const auto& p : written)
        if (!p.empty()) std::printf("%s\n", p.c_str());
      return 0;
    }

    if (suggest->parsed()) {
      std::string root = !corpus_dir.empty() ? corpus_dir : workspace;
      Workspace ws = Workspace::open(root);
      PipelineConfig cfg = base_config(root);
      if (suggest->count("--ngram")) cfg.ngram = ngram;
      ws.require_stage(Stage::fingerprint, cfg);

      std::string statement;
      if (!query_file.empty()) {
        std::ifstream in(query_file);
        if (!in) throw std::runtime_error("cannot open " + query_file);
        std::ostringstream ss;
        ss << in.rdbuf();
        statement = ss.str();
      } else if (from_stdin) {
        std::ostringstream ss;
        ss << std::cin.rdbuf();
        statement = ss.str();
      } else {
        throw std::runtime_error("suggest needs --file or --stdin");
      }

      NGramIndex index = ws.build_suggest_index(cfg);
      auto suggestions = index.suggest(statement, top_k);
      std::printf("rank\tsimilarity\ttemplate_id\texample_statement\n");
      for (size_t i = 0; i < suggestions.size(); ++i)
        std::printf("%zu\t%.4f\t%llu\t%s\n", i + 1, suggestions[i].similarity,
                    static_cast<unsigned long long>(suggestions[i].template_id),
                    suggestions[i].example_statement.c_str());
      return 0;
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
