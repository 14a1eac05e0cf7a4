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

#include "logsift/ingest.hpp"

#include <arpa/inet.h>

#include <algorithm>
#include <cctype>
#include <fstream>
#include <istream>
#include <stdexcept>

#include "logsift/tsv.hpp"

#if defined(_OPENMP)
#include <omp.h>
#endif

namespace logsift {

namespace {

std::string to_lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::string to_upper(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
  return out;
}

bool contains_ci(std::string_view haystack, std::string_view needle) {
  if (needle.empty()) return false;
  auto it = std::search(haystack.begin(), haystack.end(), needle.begin(), needle.end(),
                        [](char a, char b) {
                          return std::tolower(static_cast<unsigned char>(a)) ==
                                 std::tolower(static_cast<unsigned char>(b));
                        });
  return it != haystack.end();
}

// Normalizes an address so equal addresses compare equal as strings.
// Returns empty optional when the text is not a valid IPv4/IPv6 address.
std::optional<std::string> normalize_ip(std::string_view text) {
  char buf[64];
  if (text.size() >= sizeof(buf)) return std::nullopt;
  std::copy(text.begin(), text.end(), buf);
  buf[text.size()] = '\0';
  unsigned char addr[16];
  char out[INET6_ADDRSTRLEN];
  if (inet_pton(AF_INET, buf, addr) == 1) {
    if (!inet_ntop(AF_INET, addr, out, sizeof(out))) return std::nullopt;
    return std::string(out);
  }
  if (inet_pton(AF_INET6, buf, addr) == 1) {
    if (!inet_ntop(AF_INET6, addr, out, sizeof(out))) return std::nullopt;
    return std::string(out);
  }
  return std::nullopt;
}

std::vector<std::string> read_lines(std::istream& in) {
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(std::move(line));
  }
  return lines;
}

}  // namespace

AgentRules default_agent_rules() {
  AgentRules r;
  r.admin = {{"bigbrother", "BigBrother"}, {"vo-registry", "VORegistry"}, {"voregistry", "VORegistry"}};
  r.spider = {{"googlebot", "Googlebot"}, {"slurp", "Slurp"},      {"msnbot", "MSNBot"},
              {"bingbot", "Bingbot"},     {"yandex", "Yandex"},    {"baiduspider", "Baidu"},
              {"ia_archiver", "Alexa"},   {"teoma", "Teoma"},      {"nutch", "Nutch"},
              {"heritrix", "Heritrix"},   {"crawler", "Crawler"},  {"spider", "Spider"},
              {"scooter", "Scooter"},     {"robot", "Robot"}};
  r.program = {{"libwww-perl", "Perl"}, {"lwp::", "Perl"},     {"perl", "Perl"},
               {"python", "Python"},    {"java", "Java"},      {"wget", "Wget"},
               {"curl", "Curl"},        {"httpclient", "HttpClient"}, {"php", "PHP"},
               {"soap", "SOAP"},        {".net clr", "DotNet"}};
  r.browser = {{"msie", "MSIE"},         {"firefox", "Firefox"},   {"seamonkey", "SeaMonkey"},
               {"konqueror", "Konqueror"}, {"opera", "Opera"},     {"safari", "Safari"},
               {"netscape", "Netscape"}, {"lynx", "Lynx"},         {"galeon", "Galeon"},
               {"camino", "Camino"},     {"mozilla", "Mozilla"}};
  return r;
}

AgentRules load_agent_rules(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open agent rules file: " + path);
  AgentRules r;
  std::string line;
  std::uint64_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    auto fields = split_tabs(line);
    if (fields.size() != 3)
      throw std::runtime_error("agent rules line " + std::to_string(line_no) + ": want 3 fields");
    AgentMarker m{std::string(fields[1]), std::string(fields[2])};
    if (fields[0] == "admin") r.admin.push_back(std::move(m));
    else if (fields[0] == "spider") r.spider.push_back(std::move(m));
    else if (fields[0] == "program") r.program.push_back(std::move(m));
    else if (fields[0] == "browser") r.browser.push_back(std::move(m));
    else
      throw std::runtime_error("agent rules line " + std::to_string(line_no) +
                               ": unknown category " + std::string(fields[0]));
  }
  return r;
}

AgentInfo classify_agent(std::string_view raw, const AgentRules& rules) {
  AgentInfo info;
  info.raw = std::string(raw);
  struct CatList {
    const std::vector<AgentMarker>* markers;
    AgentCategory cat;
  };
  const CatList order[] = {{&rules.admin, AgentCategory::admin},
                           {&rules.spider, AgentCategory::spider},
                           {&rules.program, AgentCategory::program},
                           {&rules.browser, AgentCategory::browser}};
  for (const auto& [markers, cat] : order) {
    for (const auto& m : *markers) {
      if (contains_ci(raw, m.pattern)) {
        info.name = m.name;
        info.category = cat;
        return info;
      }
    }
  }
  return info;
}

std::set<std::string> default_noise_suffixes() {
  return {"gif", "jpg", "jpeg", "png", "txt", "css", "ico", "js", "swf"};
}

std::string_view last_segment(std::string_view uri_stem) {
  size_t slash = uri_stem.rfind('/');
  return slash == std::string_view::npos ? uri_stem : uri_stem.substr(slash + 1);
}

std::string suffix_of(std::string_view uri_stem) {
  std::string_view seg = last_segment(uri_stem);
  size_t dot = seg.rfind('.');
  if (dot == std::string_view::npos) return {};
  return to_lower(seg.substr(dot + 1));
}

bool is_page_view(const HttpHit& hit, const AgentInfo& agent,
                  const std::set<std::string>& noise_suffixes) {
  if (hit.method != "GET" && hit.method != "HEAD" && hit.method != "PUT" && hit.method != "POST")
    return false;
  if (hit.status < 200 || hit.status > 299) return false;
  if (noise_suffixes.count(suffix_of(hit.uri_stem))) return false;
  if (agent.category == AgentCategory::admin) return false;
  return true;
}

HttpParseResult parse_http_line(std::string_view line, std::uint64_t line_no) {
  auto fields = split_tabs(line);
  if (fields.size() != 8)
    return ParseError{line_no, "wrong field count (" + std::to_string(fields.size()) + ", want 8)"};

  HttpHit hit;
  auto ts = parse_iso8601(fields[0]);
  if (!ts) return ParseError{line_no, "malformed timestamp"};
  hit.timestamp = *ts;

  std::string_view ip = dash_to_empty(fields[1]);
  if (!ip.empty()) {
    auto norm = normalize_ip(ip);
    if (!norm) return ParseError{line_no, "malformed client ip"};
    hit.client_ip = *norm;
  }

  hit.method = to_upper(dash_to_empty(fields[2]));

  std::string_view stem = dash_to_empty(fields[3]);
  std::string_view query = dash_to_empty(fields[4]);
  // Sloppy adapters may leave the query attached to the stem; keep the
  // "stem contains no ?" invariant by splitting here.
  size_t qmark = stem.find('?');
  if (qmark != std::string_view::npos) {
    std::string_view rest = stem.substr(qmark + 1);
    hit.uri_stem = std::string(stem.substr(0, qmark));
    hit.uri_query = std::string(rest);
    if (!query.empty()) {
      if (!rest.empty()) hit.uri_query += '&';
      hit.uri_query += std::string(query);
    }
  } else {
    hit.uri_stem = std::string(stem);
    hit.uri_query = std::string(query);
  }

  auto status = parse_u64(fields[5]);
  if (!status || *status < 100 || *status > 599)
    return ParseError{line_no, "unparseable status"};
  hit.status = static_cast<int>(*status);

  hit.agent_raw = std::string(dash_to_empty(fields[6]));
  hit.referrer = std::string(dash_to_empty(fields[7]));
  return hit;
}

SqlParseResult parse_sql_line(std::string_view line, std::uint64_t line_no) {
  auto fields = split_tabs_limit(line, 9);
  if (fields.size() != 9)
    return ParseError{line_no, "wrong field count (" + std::to_string(fields.size()) + ", want 9)"};

  SqlRequest q;
  auto ts = parse_iso8601(fields[0]);
  if (!ts) return ParseError{line_no, "malformed timestamp"};
  q.timestamp = *ts;

  std::string_view ip = dash_to_empty(fields[1]);
  if (!ip.empty()) {
    auto norm = normalize_ip(ip);
    if (!norm) return ParseError{line_no, "malformed client ip"};
    q.client_ip = *norm;
  }

  auto rows = parse_u64(fields[2]);
  if (!rows) return ParseError{line_no, "unparseable rows_returned"};
  auto elapsed = parse_nonneg_double(fields[3]);
  if (!elapsed) return ParseError{line_no, "unparseable elapsed_s"};
  auto cpu = parse_nonneg_double(fields[4]);
  if (!cpu) return ParseError{line_no, "unparseable cpu_s"};
  q.elapsed_s = *elapsed;
  q.cpu_s = *cpu;

  if (fields[5] == "1") q.is_syntax_ok = true;
  else if (fields[5] == "0") q.is_syntax_ok = false;
  else return ParseError{line_no, "unparseable syntax_ok flag"};

  q.error_text = std::string(dash_to_empty(fields[6]));
  q.source_tag = std::string(dash_to_empty(fields[7]));

  std::string_view stmt_field = fields[8];
  if (!stmt_field.empty() && stmt_field.front() == '"') {
    auto unq = unquote_field(stmt_field);
    if (!unq) return ParseError{line_no, "malformed quoted statement"};
    q.statement = *unq;
  } else {
    if (stmt_field.find('\t') != std::string_view::npos)
      return ParseError{line_no, "unquoted tab in statement"};
    q.statement = std::string(dash_to_empty(stmt_field));
  }

  // Record invariants: rows = 0 and a non-empty error text when the
  // statement failed; no error text when it parsed.
  if (q.is_syntax_ok) {
    q.rows_returned = *rows;
    q.error_text.clear();
  } else {
    q.rows_returned = 0;
    if (q.error_text.empty()) q.error_text = "syntax error";
  }
  return q;
}

HttpIngest ingest_http_lines(std::span<const std::string> lines, std::uint64_t first_line_no,
                             std::uint64_t first_id, const AgentRules& rules,
                             const std::set<std::string>& noise_suffixes, Exec exec) {
  std::vector<HttpParseResult> parsed(lines.size(), ParseError{});
  const std::int64_t n = static_cast<std::int64_t>(lines.size());
  if (exec == Exec::parallel) {
#pragma omp parallel for schedule(static) num_threads(worker_count())
    for (std::int64_t i = 0; i < n; ++i)
      parsed[i] = parse_http_line(lines[i], first_line_no + static_cast<std::uint64_t>(i));
  } else {
    for (std::int64_t i = 0; i < n; ++i)
      parsed[i] = parse_http_line(lines[i], first_line_no + static_cast<std::uint64_t>(i));
  }

  HttpIngest out;
  out.lines = lines.size();
  out.hits.reserve(lines.size());
  out.agents.reserve(lines.size());
  // id assignment stays serialized in input order
  std::uint64_t next_id = first_id;
  for (auto& r : parsed) {
    if (std::holds_alternative<ParseError>(r)) {
      out.errors.push_back(std::get<ParseError>(std::move(r)));
      continue;
    }
    HttpHit hit = std::get<HttpHit>(std::move(r));
    hit.hit_id = next_id++;
    AgentInfo agent = classify_agent(hit.agent_raw, rules);
    hit.is_page_view = is_page_view(hit, agent, noise_suffixes);
    out.hits.push_back(std::move(hit));
    out.agents.push_back(std::move(agent));
  }
  return out;
}

SqlIngest ingest_sql_lines(std::span<const std::string> lines, std::uint64_t first_line_no,
                           std::uint64_t first_id, Exec exec) {
  std::vector<SqlParseResult> parsed(lines.size(), ParseError{});
  const std::int64_t n = static_cast<std::int64_t>(lines.size());
  if (exec == Exec::parallel) {
#pragma omp parallel for schedule(static) num_threads(worker_count())
    for (std::int64_t i = 0; i < n; ++i)
      parsed[i] = parse_sql_line(lines[i], first_line_no + static_cast<std::uint64_t>(i));
  } else {
    for (std::int64_t i = 0; i < n; ++i)
      parsed[i] = parse_sql_line(lines[i], first_line_no + static_cast<std::uint64_t>(i));
  }

  SqlIngest out;
  out.lines = lines.size();
  out.queries.reserve(lines.size());
  std::uint64_t next_id = first_id;
  for (auto& r : parsed) {
    if (std::holds_alternative<ParseError>(r)) {
      out.errors.push_back(std::get<ParseError>(std::move(r)));
      continue;
    }
    SqlRequest q = std::get<SqlRequest>(std::move(r));
    q.query_id = next_id++;
    out.queries.push_back(std::move(q));
  }
  return out;
}

HttpIngest ingest_http(std::istream& in, const AgentRules& rules,
                       const std::set<std::string>& noise_suffixes, std::uint64_t first_id,
                       Exec exec) {
  std::vector<std::string> lines = read_lines(in);
  return ingest_http_lines(lines, 1, first_id, rules, noise_suffixes, exec);
}

SqlIngest ingest_sql(std::istream& in, std::uint64_t first_id, Exec exec) {
  std::vector<std::string> lines = read_lines(in);
  return ingest_sql_lines(lines, 1, first_id, exec);
}

}  // namespace logsift
