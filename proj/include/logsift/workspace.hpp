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
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "logsift/analytics.hpp"
#include "logsift/classify.hpp"
#include "logsift/ingest.hpp"
#include "logsift/records.hpp"
#include "logsift/session.hpp"
#include "logsift/suggest.hpp"
#include "logsift/templating.hpp"

namespace logsift {

/// Everything a pipeline run is parameterized by. Loaded from the
/// workspace's config.txt (flat `key = value`, "#" comments); every CLI
/// flag overrides its config key.
struct PipelineConfig {
  std::vector<std::string> http_logs;
  std::vector<std::string> sql_logs;
  std::string agent_rules_path;  // empty: built-in defaults
  std::vector<std::string> admin_ips;
  std::vector<std::string> noise_suffixes;  // empty: built-in defaults
  std::int64_t gap_seconds = 1800;
  double bot_reuse = 4.0;
  std::uint64_t min_events = 4;
  std::int64_t min_duration = 60;
  std::int64_t max_duration = 28800;
  int ngram = 3;
  int threads = 0;  // 0 = all cores; 1 = serial reference path
  std::string schema_path;
  std::string ip_map_path;
  LanguageMap languages = default_language_map();

  std::set<std::string> noise() const;
  AgentRules agents() const;
  ClassifyParams classify_params() const;
  Exec exec() const { return threads == 1 ? Exec::serial : Exec::parallel; }
};

PipelineConfig load_config_file(const std::filesystem::path& path);
void write_default_config(const std::filesystem::path& path);

enum class Stage { ingest, fingerprint, sessionize, classify, report };
const char* to_string(Stage s);
Stage stage_from_string(std::string_view s);

/// A directory of derived tables plus a manifest recording, per stage, a
/// fingerprint of its inputs and config and the row counts it produced.
/// Stage outputs are plain TSV files written atomically (tmp + rename);
/// the manifest carries no timestamps, so identical inputs yield
/// byte-identical workspaces (run timing goes to runs.log).
class Workspace {
 public:
  static Workspace init(const std::filesystem::path& root);
  static Workspace open(const std::filesystem::path& root);

  const std::filesystem::path& root() const { return root_; }
  std::filesystem::path tables_dir() const { return root_ / "tables"; }
  std::filesystem::path reports_dir() const { return root_ / "reports"; }
  std::filesystem::path config_path() const { return root_ / "config.txt"; }

  /// Runs the requested stages in dependency order. A stage whose
  /// fingerprint matches the manifest is skipped unless `force`. A
  /// requested stage whose upstream is stale and not requested is refused
  /// with an explanation naming the stage.
  void run(const std::set<Stage>& stages, const PipelineConfig& cfg, bool force = false);

  /// True when the stage's manifest fingerprint matches the config and its
  /// outputs exist.
  bool stage_fresh(Stage s, const PipelineConfig& cfg) const;

  /// Throws std::runtime_error naming the stage when it is missing/stale.
  void require_stage(Stage s, const PipelineConfig& cfg) const;

  // table loaders
  std::vector<HttpHit> load_weblog() const;
  std::vector<SqlRequest> load_sqllog() const;
  std::vector<std::pair<std::string, AgentInfo>> load_webagent() const;  // raw -> info
  std::vector<CommandStem> load_stems() const;
  std::vector<SqlTemplate> load_templates() const;
  std::unordered_map<std::uint64_t, std::string> load_template_examples() const;
  std::vector<std::uint64_t> load_hit_stem_ids() const;        // indexed by hit_id
  std::vector<std::uint64_t> load_query_template_ids() const;  // indexed by query_id
  std::vector<Session> load_sessions() const;
  std::vector<SessionEntry> load_session_entries() const;

  /// Sessionizable events reconstructed from the tables (page views plus
  /// all SQL requests with a client address), in canonical order.
  std::vector<SessionEvent> load_events() const;

  // report emitters; files land in reports/ and the path is returned
  std::filesystem::path report_traffic(GroupKey key, const PipelineConfig& cfg, int smooth = 0);
  std::filesystem::path report_sessions(const PipelineConfig& cfg);
  std::filesystem::path report_terms(TermWeight weight, const PipelineConfig& cfg);
  std::filesystem::path report_histogram(const std::string& source, const PipelineConfig& cfg);
  std::filesystem::path report_fit(const std::string& source, int min_bucket, int max_bucket,
                                   const PipelineConfig& cfg);
  std::filesystem::path report_institutions(const PipelineConfig& cfg);

  /// Suggestion index over the workspace's correct templates.
  NGramIndex build_suggest_index(const PipelineConfig& cfg) const;

 private:
  explicit Workspace(std::filesystem::path root) : root_(std::move(root)) {}

  std::string stage_fingerprint(Stage s, const PipelineConfig& cfg) const;
  void run_ingest(const PipelineConfig& cfg);
  void run_fingerprint(const PipelineConfig& cfg);
  void run_sessionize(const PipelineConfig& cfg);
  void run_classify(const PipelineConfig& cfg);
  void run_report(const PipelineConfig& cfg);

  std::filesystem::path root_;
};

/// Exclusive workspace lock (lock file, O_EXCL). Throws if already held.
class WorkspaceLock {
 public:
  explicit WorkspaceLock(const std::filesystem::path& root);
  ~WorkspaceLock();
  WorkspaceLock(const WorkspaceLock&) = delete;
  WorkspaceLock& operator=(const WorkspaceLock&) = delete;

 private:
  std::filesystem::path path_;
};

}  // namespace logsift
