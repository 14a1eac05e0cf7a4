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

#include "logsift/analytics.hpp"

#include <arpa/inet.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <stdexcept>
#include <unordered_map>

#include "logsift/ingest.hpp"
#include "logsift/tokenize.hpp"
#include "logsift/tsv.hpp"

#if defined(_OPENMP)
#include <omp.h>
#endif

namespace logsift {

namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

struct Ols {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 1.0;
};

Ols ols_fit(std::span<const std::pair<double, double>> pts) {
  const double n = static_cast<double>(pts.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (const auto& [x, y] : pts) {
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  double denom = n * sxx - sx * sx;
  if (denom == 0.0) throw std::invalid_argument("degenerate fit: all x equal");
  Ols fit;
  fit.slope = (n * sxy - sx * sy) / denom;
  fit.intercept = (sy - fit.slope * sx) / n;
  double mean_y = sy / n;
  double ss_tot = 0, ss_res = 0;
  for (const auto& [x, y] : pts) {
    double e = y - (fit.intercept + fit.slope * x);
    ss_res += e * e;
    double d = y - mean_y;
    ss_tot += d * d;
  }
  // all-equal y fits perfectly with slope 0
  fit.r_squared = ss_tot == 0.0 ? 1.0 : 1.0 - ss_res / ss_tot;
  if (fit.r_squared < 0.0) fit.r_squared = 0.0;
  return fit;
}

}  // namespace

FitResult fit_power_law(const BucketedHistogram& h, int min_bucket, int max_bucket) {
  std::vector<std::pair<double, double>> pts;
  for (const auto& [k, c] : h.buckets) {
    if (k < min_bucket || k > max_bucket || c == 0) continue;
    pts.emplace_back(static_cast<double>(k), std::log2(static_cast<double>(c)));
  }
  if (pts.size() < 2)
    throw std::invalid_argument("fit_power_law: need at least 2 non-empty buckets in range");
  Ols fit = ols_fit(pts);
  FitResult r;
  r.slope = fit.slope;
  r.intercept = fit.intercept;
  r.r_squared = fit.r_squared;
  r.n_points = static_cast<int>(pts.size());
  r.range_min = static_cast<int>(pts.front().first);
  r.range_max = static_cast<int>(pts.back().first);
  r.implied_alpha = 1.0 - fit.slope;
  return r;
}

FitResult fit_loglog(std::span<const std::pair<double, double>> points) {
  std::vector<std::pair<double, double>> pts;
  pts.reserve(points.size());
  for (const auto& [x, y] : points) {
    if (x <= 0.0 || y <= 0.0) throw std::invalid_argument("fit_loglog: nonpositive point");
    pts.emplace_back(std::log2(x), std::log2(y));
  }
  if (pts.size() < 2) throw std::invalid_argument("fit_loglog: need at least 2 points");
  Ols fit = ols_fit(pts);
  FitResult r;
  r.slope = fit.slope;
  r.intercept = fit.intercept;
  r.r_squared = fit.r_squared;
  r.n_points = static_cast<int>(pts.size());
  r.implied_alpha = 1.0 - fit.slope;
  return r;
}

FitResult fit_exponential_growth(std::span<const std::pair<int, double>> series) {
  std::vector<std::pair<double, double>> pts;
  for (const auto& [t, c] : series)
    if (c > 0.0) pts.emplace_back(static_cast<double>(t), std::log(c));
  if (pts.size() < 2)
    throw std::invalid_argument("fit_exponential_growth: need at least 2 positive months");
  Ols fit = ols_fit(pts);
  FitResult r;
  r.monthly_ln_slope = fit.slope;
  r.slope = std::exp(12.0 * fit.slope);  // per-year multiplier
  r.intercept = fit.intercept;
  r.r_squared = fit.r_squared;
  r.n_points = static_cast<int>(pts.size());
  r.range_min = static_cast<int>(pts.front().first);
  r.range_max = static_cast<int>(pts.back().first);
  return r;
}

GroupKey group_key_from_string(std::string_view s) {
  if (s == "month") return GroupKey::month;
  if (s == "verb") return GroupKey::verb;
  if (s == "suffix") return GroupKey::suffix;
  if (s == "tree") return GroupKey::tree;
  if (s == "language") return GroupKey::language;
  if (s == "source_tag") return GroupKey::source_tag;
  throw std::invalid_argument("unknown group key: " + std::string(s));
}

const char* to_string(GroupKey k) {
  switch (k) {
    case GroupKey::month: return "month";
    case GroupKey::verb: return "verb";
    case GroupKey::suffix: return "suffix";
    case GroupKey::tree: return "tree";
    case GroupKey::language: return "language";
    case GroupKey::source_tag: return "source_tag";
  }
  return "?";
}

LanguageMap default_language_map() {
  return {{"/en/", "en"}, {"/de/", "de"}, {"/hu/", "hu"},
          {"/jp/", "jp"}, {"/pt/", "pt"}, {"/sp/", "sp"}};
}

namespace {

std::string tree_key(std::string_view stem) {
  size_t start = stem.find_first_not_of('/');
  if (start == std::string_view::npos) return "";
  size_t end = stem.find('/', start);
  return lower(stem.substr(start, end == std::string_view::npos ? std::string_view::npos
                                                                : end - start));
}

std::string language_key(std::string_view stem, const LanguageMap& languages) {
  for (const auto& [prefix, lang] : languages)
    if (stem.size() >= prefix.size() && stem.substr(0, prefix.size()) == prefix) return lang;
  return "other";
}

std::string http_key(const HttpHit& h, GroupKey key, const LanguageMap& languages) {
  switch (key) {
    case GroupKey::month: return month_key(h.timestamp);
    case GroupKey::verb: return stem_verb(h.uri_stem);
    case GroupKey::suffix: return suffix_of(h.uri_stem);
    case GroupKey::tree: return tree_key(h.uri_stem);
    case GroupKey::language: return language_key(h.uri_stem, languages);
    case GroupKey::source_tag: return "";
  }
  return "";
}

struct Cell {
  std::uint64_t hits = 0;
  std::uint64_t page_views = 0;
  std::uint64_t sql = 0;
};
using CellMap = std::unordered_map<std::string, Cell>;

void merge_cells(CellMap& dst, const CellMap& src) {
  for (const auto& [k, v] : src) {
    Cell& c = dst[k];
    c.hits += v.hits;
    c.page_views += v.page_views;
    c.sql += v.sql;
  }
}

}  // namespace

std::vector<TrafficRow> traffic_report(std::span<const HttpHit> hits,
                                       std::span<const SqlRequest> queries, GroupKey key,
                                       const LanguageMap& languages, Exec exec) {
  const bool sql_applies = key == GroupKey::month || key == GroupKey::source_tag;
  const std::int64_t nh = static_cast<std::int64_t>(hits.size());
  const std::int64_t nq = static_cast<std::int64_t>(queries.size());

  auto add_hit = [&](CellMap& m, std::int64_t i) {
    Cell& c = m[http_key(hits[i], key, languages)];
    c.hits++;
    if (hits[i].is_page_view) c.page_views++;
  };
  auto add_query = [&](CellMap& m, std::int64_t i) {
    m[key == GroupKey::month ? month_key(queries[i].timestamp) : queries[i].source_tag].sql++;
  };

  CellMap cells;
  if (exec == Exec::parallel) {
#pragma omp parallel num_threads(worker_count())
    {
      CellMap local;
#pragma omp for schedule(static) nowait
      for (std::int64_t i = 0; i < nh; ++i) add_hit(local, i);
      if (sql_applies) {
#pragma omp for schedule(static) nowait
        for (std::int64_t i = 0; i < nq; ++i) add_query(local, i);
      }
#pragma omp critical
      merge_cells(cells, local);
    }
  } else {
    for (std::int64_t i = 0; i < nh; ++i) add_hit(cells, i);
    if (sql_applies)
      for (std::int64_t i = 0; i < nq; ++i) add_query(cells, i);
  }

  std::vector<TrafficRow> rows;
  rows.reserve(cells.size());
  for (auto& [k, c] : cells) rows.push_back({k, c.hits, c.page_views, c.sql});
  if (key == GroupKey::month) {
    std::sort(rows.begin(), rows.end(),
              [](const TrafficRow& a, const TrafficRow& b) { return a.key < b.key; });
  } else {
    std::sort(rows.begin(), rows.end(), [](const TrafficRow& a, const TrafficRow& b) {
      std::uint64_t ta = a.hits + a.sql_count, tb = b.hits + b.sql_count;
      if (ta != tb) return ta > tb;
      return a.key < b.key;
    });
  }
  return rows;
}

// ---------------------------------------------------------------------------
// IP -> organization

namespace {

struct ParsedCidr {
  bool v6 = false;
  std::vector<unsigned char> addr;
  int prefix_len = 0;
};

ParsedCidr parse_cidr(std::string_view text) {
  size_t slash = text.find('/');
  std::string addr_part(text.substr(0, slash));
  ParsedCidr out;
  unsigned char buf[16];
  if (inet_pton(AF_INET, addr_part.c_str(), buf) == 1) {
    out.v6 = false;
    out.addr.assign(buf, buf + 4);
    out.prefix_len = 32;
  } else if (inet_pton(AF_INET6, addr_part.c_str(), buf) == 1) {
    out.v6 = true;
    out.addr.assign(buf, buf + 16);
    out.prefix_len = 128;
  } else {
    throw std::runtime_error("malformed CIDR address: " + std::string(text));
  }
  if (slash != std::string_view::npos) {
    auto len = parse_u64(text.substr(slash + 1));
    if (!len || *len > static_cast<std::uint64_t>(out.prefix_len))
      throw std::runtime_error("malformed CIDR prefix length: " + std::string(text));
    out.prefix_len = static_cast<int>(*len);
  }
  return out;
}

void mask_bits(std::vector<unsigned char>& addr, int prefix_len) {
  int full = prefix_len / 8;
  int rem = prefix_len % 8;
  for (size_t i = static_cast<size_t>(full); i < addr.size(); ++i) {
    if (static_cast<int>(i) == full && rem > 0)
      addr[i] &= static_cast<unsigned char>(0xFF << (8 - rem));
    else
      addr[i] = 0;
  }
}

}  // namespace

IpOrgMap IpOrgMap::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open ip map: " + path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  return from_lines(lines);
}

IpOrgMap IpOrgMap::from_lines(std::span<const std::string> lines) {
  IpOrgMap map;
  auto tier_for = [](std::vector<LengthTier>& tiers, int len) -> LengthTier& {
    for (auto& t : tiers)
      if (t.prefix_len == len) return t;
    tiers.push_back({len, {}});
    std::sort(tiers.begin(), tiers.end(),
              [](const LengthTier& a, const LengthTier& b) { return a.prefix_len > b.prefix_len; });
    for (auto& t : tiers)
      if (t.prefix_len == len) return t;
    throw std::logic_error("unreachable");
  };
  std::uint64_t line_no = 0;
  for (const std::string& line : lines) {
    ++line_no;
    if (line.empty() || line.front() == '#') continue;
    auto fields = split_tabs(line);
    if (fields.size() != 2)
      throw std::runtime_error("ip map line " + std::to_string(line_no) + ": want 2 fields");
    ParsedCidr cidr = parse_cidr(fields[0]);
    mask_bits(cidr.addr, cidr.prefix_len);
    LengthTier& tier = tier_for(cidr.v6 ? map.tiers_v6_ : map.tiers_v4_, cidr.prefix_len);
    tier.nets[cidr.addr] = std::string(fields[1]);
    map.entries_++;
  }
  return map;
}

const std::string& IpOrgMap::lookup(const std::string& ip) const {
  static const std::string kUnknown = "Unknown";
  unsigned char buf[16];
  const std::vector<LengthTier>* tiers = nullptr;
  std::vector<unsigned char> addr;
  if (inet_pton(AF_INET, ip.c_str(), buf) == 1) {
    addr.assign(buf, buf + 4);
    tiers = &tiers_v4_;
  } else if (inet_pton(AF_INET6, ip.c_str(), buf) == 1) {
    addr.assign(buf, buf + 16);
    tiers = &tiers_v6_;
  } else {
    return kUnknown;
  }
  for (const LengthTier& tier : *tiers) {
    std::vector<unsigned char> masked = addr;
    mask_bits(masked, tier.prefix_len);
    auto it = tier.nets.find(masked);
    if (it != tier.nets.end()) return it->second;
  }
  return kUnknown;
}

std::vector<OrgCategoryRule> default_org_category_rules() {
  using K = OrgCategoryRule::Kind;
  return {{K::contains, "university", "University"},
          {K::contains, "college", "College"},
          {K::contains, "school", "School"},
          {K::contains, "district", "School"},
          {K::endswith, ".edu", "Other .edu"},
          {K::endswith, ".gov", ".gov"}};
}

std::string categorize_org(const std::string& org, std::span<const OrgCategoryRule> rules) {
  std::string low = lower(org);
  for (const auto& rule : rules) {
    std::string pat = lower(rule.pattern);
    if (rule.kind == OrgCategoryRule::Kind::contains) {
      if (low.find(pat) != std::string::npos) return rule.category;
    } else {
      if (low.size() >= pat.size() && low.compare(low.size() - pat.size(), pat.size(), pat) == 0)
        return rule.category;
    }
  }
  return "Other";
}

std::vector<InstitutionRow> traffic_by_institution(std::span<const HttpHit> hits,
                                                   std::span<const SqlRequest> queries,
                                                   const IpOrgMap& ip_map,
                                                   std::span<const OrgCategoryRule> rules,
                                                   Exec exec) {
  struct Counts {
    std::uint64_t pv = 0;
    std::uint64_t sql = 0;
  };
  using OrgMap = std::unordered_map<std::string, Counts>;

  const std::int64_t nh = static_cast<std::int64_t>(hits.size());
  const std::int64_t nq = static_cast<std::int64_t>(queries.size());
  auto add_hit = [&](OrgMap& m, std::int64_t i) {
    if (hits[i].is_page_view) m[ip_map.lookup(hits[i].client_ip)].pv++;
  };
  auto add_query = [&](OrgMap& m, std::int64_t i) { m[ip_map.lookup(queries[i].client_ip)].sql++; };

  OrgMap orgs;
  if (exec == Exec::parallel) {
#pragma omp parallel num_threads(worker_count())
    {
      OrgMap local;
#pragma omp for schedule(static) nowait
      for (std::int64_t i = 0; i < nh; ++i) add_hit(local, i);
#pragma omp for schedule(static) nowait
      for (std::int64_t i = 0; i < nq; ++i) add_query(local, i);
#pragma omp critical
      for (const auto& [org, c] : local) {
        orgs[org].pv += c.pv;
        orgs[org].sql += c.sql;
      }
    }
  } else {
    for (std::int64_t i = 0; i < nh; ++i) add_hit(orgs, i);
    for (std::int64_t i = 0; i < nq; ++i) add_query(orgs, i);
  }

  std::vector<InstitutionRow> rows;
  rows.reserve(orgs.size());
  for (const auto& [org, c] : orgs)
    rows.push_back({org, c.pv, c.sql, categorize_org(org, rules)});
  std::sort(rows.begin(), rows.end(), [](const InstitutionRow& a, const InstitutionRow& b) {
    std::uint64_t ta = a.page_views + a.sql_count, tb = b.page_views + b.sql_count;
    if (ta != tb) return ta > tb;
    return a.organization < b.organization;
  });
  return rows;
}

// ---------------------------------------------------------------------------
// term frequency

const char* to_string(TokenClass c) {
  switch (c) {
    case TokenClass::keyword: return "keyword";
    case TokenClass::table: return "table";
    case TokenClass::column: return "column";
    case TokenClass::function: return "function";
    case TokenClass::placeholder: return "placeholder";
    case TokenClass::other: return "other";
  }
  return "other";
}

SqlSchema SqlSchema::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open schema file: " + path);
  SqlSchema schema;
  std::string line;
  std::uint64_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    auto fields = split_tabs(line);
    if (fields.size() != 2)
      throw std::runtime_error("schema line " + std::to_string(line_no) + ": want 2 fields");
    std::string name = lower(fields[1]);
    if (fields[0] == "table") schema.tables.insert(std::move(name));
    else if (fields[0] == "column") schema.columns.insert(std::move(name));
    else if (fields[0] == "function") schema.functions.insert(std::move(name));
    else
      throw std::runtime_error("schema line " + std::to_string(line_no) + ": unknown kind " +
                               std::string(fields[0]));
  }
  return schema;
}

namespace {

bool is_placeholder_token(const std::string& t) {
  return t == "#" || t == "STR" || t == "CMP" || t == "ARITH" || t == "LOGIC" || t == "BITOP";
}

// Keywords arrive uppercased from the simplifier; merged multi-word
// keywords (GROUP_BY) classify as keywords when every part is one.
bool is_keyword_token(const std::string& t) {
  if (is_sql_keyword(t)) return true;
  if (t.find('_') == std::string::npos) return false;
  size_t start = 0;
  while (true) {
    size_t us = t.find('_', start);
    std::string_view part(t.data() + start, (us == std::string::npos ? t.size() : us) - start);
    if (part.empty() || !is_sql_keyword(part)) return false;
    if (us == std::string::npos) return true;
    start = us + 1;
  }
}

TokenClass classify_token(const std::string& t, const SqlSchema& schema) {
  if (is_placeholder_token(t)) return TokenClass::placeholder;
  if (is_keyword_token(t)) return TokenClass::keyword;
  if (schema.tables.count(t)) return TokenClass::table;
  if (schema.columns.count(t)) return TokenClass::column;
  if (schema.functions.count(t)) return TokenClass::function;
  return TokenClass::other;
}

}  // namespace

std::vector<TermFrequencyRow> term_frequency(std::span<const SqlTemplate> templates,
                                             TermWeight weight, const SqlSchema& schema,
                                             Exec exec) {
  using CountMap = std::unordered_map<std::string, std::uint64_t>;
  const std::int64_t n = static_cast<std::int64_t>(templates.size());

  auto add_template = [&](CountMap& m, std::int64_t i) {
    std::uint64_t w = weight == TermWeight::per_query ? templates[i].count : 1;
    for (std::string& tok : simplify_template(templates[i].template_text)) m[std::move(tok)] += w;
  };

  CountMap counts;
  if (exec == Exec::parallel) {
#pragma omp parallel num_threads(worker_count())
    {
      CountMap local;
#pragma omp for schedule(dynamic, 256) nowait
      for (std::int64_t i = 0; i < n; ++i) add_template(local, i);
#pragma omp critical
      for (const auto& [tok, c] : local) counts[tok] += c;
    }
  } else {
    for (std::int64_t i = 0; i < n; ++i) add_template(counts, i);
  }

  std::vector<TermFrequencyRow> rows;
  rows.reserve(counts.size());
  for (const auto& [tok, c] : counts) rows.push_back({tok, classify_token(tok, schema), c, 0});
  std::sort(rows.begin(), rows.end(), [](const TermFrequencyRow& a, const TermFrequencyRow& b) {
    if (a.count != b.count) return a.count > b.count;
    return a.token < b.token;
  });
  for (std::uint32_t i = 0; i < rows.size(); ++i) rows[i].rank = i + 1;
  return rows;
}

std::vector<std::string> unmentioned_names(const std::set<std::string>& schema_names,
                                           std::span<const TermFrequencyRow> observed) {
  std::set<std::string> seen;
  for (const auto& row : observed) seen.insert(row.token);
  std::vector<std::string> out;
  for (const auto& name : schema_names)
    if (!seen.count(name)) out.push_back(name);
  return out;
}

std::vector<double> smooth_series(std::span<const double> values, int window) {
  if (window < 1 || window % 2 == 0)
    throw std::invalid_argument("smoothing window must be odd and positive");
  std::vector<double> out(values.size());
  int half = window / 2;
  for (int i = 0; i < static_cast<int>(values.size()); ++i) {
    int lo = std::max(0, i - half);
    int hi = std::min(static_cast<int>(values.size()) - 1, i + half);
    double sum = 0;
    for (int j = lo; j <= hi; ++j) sum += values[j];
    out[i] = sum / (hi - lo + 1);
  }
  return out;
}

}  // namespace logsift
