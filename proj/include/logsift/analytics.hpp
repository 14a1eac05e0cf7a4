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
#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "logsift/exec.hpp"
#include "logsift/histogram.hpp"
#include "logsift/records.hpp"
#include "logsift/templating.hpp"

namespace logsift {

/// Least-squares fit over a log-log or log-linear view of the data.
///
/// Conventions (also emitted in report metadata): a power-law fit works on
/// points (k, log2 count_k) of a log2-bucketed histogram; tail-aggregated
/// bucket counts of a density with exponent alpha fall with slope -(alpha-1),
/// so implied_alpha = 1 - slope. An exponential-growth fit regresses ln(count)
/// on month index; the `slope` field then carries the per-year multiplier
/// e^(12 * monthly ln-slope).
struct FitResult {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  int n_points = 0;
  int range_min = 0;
  int range_max = 0;
  double implied_alpha = 0.0;       // power-law fits only
  double monthly_ln_slope = 0.0;    // growth fits only
};

/// OLS on (k, log2 count) over the non-empty buckets within
/// [min_bucket, max_bucket]. Throws std::invalid_argument with fewer than
/// two usable points.
FitResult fit_power_law(const BucketedHistogram& h, int min_bucket, int max_bucket);

/// OLS on (log2 x, log2 y) pairs; used for rank/frequency plots.
/// Points with x <= 0 or y <= 0 are rejected (throws).
FitResult fit_loglog(std::span<const std::pair<double, double>> points);

/// OLS on (month, ln count) of a monthly series; slope reported as a
/// per-year multiplier. Zero-count months are skipped; fewer than two
/// positive points throws.
FitResult fit_exponential_growth(std::span<const std::pair<int, double>> series);

enum class GroupKey { month, verb, suffix, tree, language, source_tag };

GroupKey group_key_from_string(std::string_view s);
const char* to_string(GroupKey k);

struct TrafficRow {
  std::string key;
  std::uint64_t hits = 0;
  std::uint64_t page_views = 0;
  std::uint64_t sql_count = 0;
};

/// Maps path prefixes to language keys (defaults follow the six site
/// languages); unmatched stems report as "other".
using LanguageMap = std::vector<std::pair<std::string, std::string>>;
LanguageMap default_language_map();

/// Aggregates hit/page-view/SQL counts by the chosen key. URL-derived keys
/// (verb, suffix, tree, language) leave sql_count at zero; month and
/// source_tag aggregate SQL requests too. Month rows sort chronologically,
/// the rest by traffic descending then key.
std::vector<TrafficRow> traffic_report(std::span<const HttpHit> hits,
                                       std::span<const SqlRequest> queries, GroupKey key,
                                       const LanguageMap& languages = default_language_map(),
                                       Exec exec = Exec::parallel);

/// Longest-prefix IP-to-organization map loaded from `cidr \t organization`
/// lines. Malformed CIDR entries raise at load time.
class IpOrgMap {
 public:
  static IpOrgMap load(const std::string& path);
  static IpOrgMap from_lines(std::span<const std::string> lines);

  /// Organization owning the address, or "Unknown".
  const std::string& lookup(const std::string& ip) const;

  size_t size() const { return entries_; }

 private:
  struct LengthTier {
    int prefix_len;
    std::map<std::vector<unsigned char>, std::string> nets;  // masked address -> org
  };
  std::vector<LengthTier> tiers_v4_;  // descending prefix length
  std::vector<LengthTier> tiers_v6_;
  size_t entries_ = 0;
};

/// Institution category rule: `contains` or `endswith` match against the
/// organization name, case-insensitive, first rule wins.
struct OrgCategoryRule {
  enum class Kind { contains, endswith } kind;
  std::string pattern;
  std::string category;
};

std::vector<OrgCategoryRule> default_org_category_rules();

std::string categorize_org(const std::string& org, std::span<const OrgCategoryRule> rules);

struct InstitutionRow {
  std::string organization;
  std::uint64_t page_views = 0;
  std::uint64_t sql_count = 0;
  std::string category;
};

/// Per-organization page-view and SQL counts through the IP map; sorted by
/// traffic descending then name.
std::vector<InstitutionRow> traffic_by_institution(
    std::span<const HttpHit> hits, std::span<const SqlRequest> queries, const IpOrgMap& ip_map,
    std::span<const OrgCategoryRule> rules, Exec exec = Exec::parallel);

enum class TokenClass { keyword, table, column, function, placeholder, other };
const char* to_string(TokenClass c);

/// Table/column/function name sets for token classification; corpus-specific
/// and therefore an input file (`table|column|function \t name` lines).
struct SqlSchema {
  std::set<std::string> tables;
  std::set<std::string> columns;
  std::set<std::string> functions;

  static SqlSchema load(const std::string& path);
};

struct TermFrequencyRow {
  std::string token;
  TokenClass token_class = TokenClass::other;
  std::uint64_t count = 0;
  std::uint32_t rank = 0;  // dense, by descending count, ties lexicographic
};

enum class TermWeight { per_template, per_query };

/// Term frequencies over simplified template token streams. per_template
/// counts each template once; per_query weights by instance count.
std::vector<TermFrequencyRow> term_frequency(std::span<const SqlTemplate> templates,
                                             TermWeight weight, const SqlSchema& schema,
                                             Exec exec = Exec::parallel);

/// Schema names that never appear in any simplified template ("unmentioned
/// columns" style reports). Returns sorted names from the given set.
std::vector<std::string> unmentioned_names(const std::set<std::string>& schema_names,
                                           std::span<const TermFrequencyRow> observed);

/// Centered moving average of width `window` (odd); shorter edges use the
/// available neighbors. Used by the monthly report's smoothing option.
std::vector<double> smooth_series(std::span<const double> values, int window);

}  // namespace logsift
