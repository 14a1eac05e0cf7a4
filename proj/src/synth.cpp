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

#include "logsift/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <random>

namespace logsift {

namespace {

// uniform in [0, 1), independent of libstdc++ distribution internals
double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * (1.0 / 9007199254740992.0);
}

std::uint64_t uniform_below(std::mt19937_64& rng, std::uint64_t n) { return rng() % n; }

struct TimedLine {
  UnixTime ts;
  std::uint64_t seq;
  bool sql;
  std::string line;
};

class CorpusBuilder {
 public:
  explicit CorpusBuilder(std::uint64_t seed) : rng_(seed) {}

  void http(UnixTime ts, const std::string& ip, const std::string& method,
            const std::string& stem, const std::string& query, int status,
            const std::string& agent) {
    char buf[512];
    std::snprintf(buf, sizeof(buf), "%s\t%s\t%s\t%s\t%s\t%d\t%s\t-",
                  format_iso8601(ts).c_str(), ip.c_str(), method.c_str(), stem.c_str(),
                  query.empty() ? "-" : query.c_str(), status, agent.c_str());
    lines_.push_back({ts, seq_++, false, buf});
  }

  void sql(UnixTime ts, const std::string& ip, std::uint64_t rows, bool ok,
           const std::string& tag, const std::string& statement) {
    std::string line = format_iso8601(ts);
    line += '\t';
    line += ip;
    line += '\t';
    line += std::to_string(ok ? rows : 0);
    char nums[64];
    std::snprintf(nums, sizeof(nums), "\t%.3f\t%.3f\t%d\t", 0.5 + uniform01(rng_) * 10.0,
                  uniform01(rng_) * 2.0, ok ? 1 : 0);
    line += nums;
    line += ok ? "-" : "Incorrect syntax near '?'";
    line += '\t';
    line += tag;
    line += '\t';
    line += statement;  // planted statements carry no tabs
    lines_.push_back({ts, seq_++, true, std::move(line)});
  }

  std::mt19937_64& rng() { return rng_; }

  void finish(SynthCorpus& out) {
    std::stable_sort(lines_.begin(), lines_.end(), [](const TimedLine& a, const TimedLine& b) {
      if (a.ts != b.ts) return a.ts < b.ts;
      return a.seq < b.seq;
    });
    for (auto& l : lines_)
      (l.sql ? out.sql_lines : out.http_lines).push_back(std::move(l.line));
  }

 private:
  std::mt19937_64 rng_;
  std::vector<TimedLine> lines_;
  std::uint64_t seq_ = 0;
};

std::string make_ip(int group, int i) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "10.%d.%d.%d", group, (i / 250) % 250, i % 250 + 1);
  return buf;
}

const char* kPages[] = {"/en/default.asp",       "/en/tools/chart/navi.asp",
                        "/en/tools/search/sql.asp", "/en/help/docs/realquery.asp",
                        "/en/proj/basic/color/index.asp", "/en/proj/advanced/hubble/index.asp",
                        "/en/survey/release/index.asp", "/en/sky/stars/stars.asp",
                        "/en/get/specById.asp",  "/en/tools/explore/obj.asp"};

const char* kMortalStatements[] = {
    "select top 10 ra, dec from photoprimary where htmid >= 12 and htmid <= 9000",
    "select count(*) from specobj where z > 0.1 and z < 0.2",
    "select p.objid, p.ra, p.[dec] from photoobjall as p where p.type = 3",
    "select g.run, g.rerun from photoobjall as g where g.camcol = 4 order by g.run",
    "select s.bestobjid from specobjall s inner join phototag as b on s.bestobjid = b.objid",
    "select u, g, r, i, z from star where r < 17.5 and g - r between 0.3 and 0.8",
    "select count_big(distinct objid) from phototag where field = 255",
    "select top 50 plate, mjd, fiberid from specobj order by z desc"};

}  // namespace

std::vector<double> pareto_samples(size_t n, double shape, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<double> out(n);
  for (size_t i = 0; i < n; ++i) {
    double u = 1.0 - uniform01(rng);  // (0, 1]
    out[i] = std::pow(u, -1.0 / shape);
  }
  return out;
}

std::vector<int> zipf_ranks(size_t n, int vocab, double s, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<double> cdf(vocab);
  double acc = 0.0;
  for (int r = 1; r <= vocab; ++r) {
    acc += std::pow(static_cast<double>(r), -s);
    cdf[r - 1] = acc;
  }
  for (double& c : cdf) c /= acc;
  std::vector<int> out(n);
  for (size_t i = 0; i < n; ++i) {
    double u = uniform01(rng);
    out[i] = static_cast<int>(std::lower_bound(cdf.begin(), cdf.end(), u) - cdf.begin()) + 1;
  }
  return out;
}

std::vector<std::pair<int, double>> growth_series(int months, double start,
                                                  double yearly_multiplier, double noise_frac,
                                                  std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<std::pair<int, double>> out;
  out.reserve(months);
  for (int m = 0; m < months; ++m) {
    double clean = start * std::pow(yearly_multiplier, static_cast<double>(m) / 12.0);
    double noise = 1.0 + noise_frac * (2.0 * uniform01(rng) - 1.0);
    out.emplace_back(m, clean * noise);
  }
  return out;
}

SynthCorpus synth_corpus(const SynthConfig& cfg) {
  SynthCorpus out;
  CorpusBuilder b(cfg.seed);
  auto& rng = b.rng();
  // spread session starts over a few weeks so ids exercise the global sort
  auto session_start = [&](int i) {
    return cfg.base_ts + static_cast<UnixTime>(i) * 7200 + static_cast<UnixTime>(uniform_below(rng, 3600));
  };
  int ip_counter = 0;

  for (int a = 0; a < cfg.admins; ++a) {
    std::string ip = make_ip(9, a + 1);
    out.truth.emplace_back(ip, "admin");
    UnixTime t = session_start(ip_counter++);
    // monitoring probes (not page views) plus a short status-query burst
    for (int i = 0; i < 20; ++i)
      b.http(t + i * 180, ip, "GET", "/en/status/ping.asp", "", 200, "BigBrother Network Monitor");
    for (int i = 0; i < 5; ++i) {
      char stmt[128];
      std::snprintf(stmt, sizeof(stmt), "select status_%d from sitehealth where probe = %d", i,
                    i * 7);
      b.sql(t + i * 60, ip, 1, true, "ADMIN", stmt);
    }
  }

  for (int s = 0; s < cfg.spiders; ++s) {
    std::string ip = make_ip(1, s + 1);
    out.truth.emplace_back(ip, "spider");
    UnixTime t = session_start(ip_counter++);
    // half declare themselves, half masquerade as MSIE but hit robots.txt
    std::string agent = (s % 2 == 0) ? "Mozilla/5.0 (compatible; Googlebot/2.1)"
                                     : "Mozilla/4.0 (compatible; MSIE 6.0; Windows NT 5.1)";
    b.http(t, ip, "GET", "/robots.txt", "", 200, agent);
    int pages = 20 + static_cast<int>(uniform_below(rng, 20));
    for (int i = 0; i < pages; ++i) {
      char stem[64];
      std::snprintf(stem, sizeof(stem), "/en/crawl/page%03d.htm", i);
      b.http(t + 5 + i * 7, ip, "GET", stem, "", 200, agent);
    }
  }

  for (int bot = 0; bot < cfg.bots; ++bot) {
    std::string ip = make_ip(2, bot + 1);
    out.truth.emplace_back(ip, "bot");
    UnixTime t = session_start(ip_counter++);
    b.http(t, ip, "GET", "/en/tools/x_sql.asp", "", 200, "Python-urllib/2.4");
    for (int i = 0; i < cfg.bot_queries; ++i) {
      long lo = 1000L + i * 64L, hi = 1000L + i * 64L + 63L;
      char stmt[160];
      std::snprintf(stmt, sizeof(stmt),
                    "select count(*) from photoprimary where (htmID >= %ld and htmID <= %ld)", lo,
                    hi);
      b.sql(t + 1 + i, ip, uniform_below(rng, 50), true, "DR4", stmt);
    }
  }

  for (int m = 0; m < cfg.mortals; ++m) {
    std::string ip = make_ip(3, m + 1);
    out.truth.emplace_back(ip, "mortal");
    UnixTime t = session_start(ip_counter++);
    const char* agent = (m % 3 == 0) ? "Mozilla/5.0 (Windows; U) Firefox/1.5"
                                     : "Mozilla/4.0 (compatible; MSIE 6.0; Windows NT 5.1)";
    // ~30 minute session: 10 distinct pages and (for two thirds of them)
    // 6 distinct-template queries
    for (int i = 0; i < 10; ++i) b.http(t + i * 185, ip, "GET", kPages[i], "", 200, agent);
    if (m % 3 != 2) {
      for (int q = 0; q < 6; ++q)
        b.sql(t + 60 + q * 290, ip, 1 + uniform_below(rng, 3500), true, "DR4",
              kMortalStatements[(m + q) % 8]);
    }
  }

  for (int o = 0; o < cfg.others; ++o) {
    std::string ip = make_ip(4, o + 1);
    out.truth.emplace_back(ip, "other");
    UnixTime t = session_start(ip_counter++);
    b.http(t, ip, "GET", "/en/default.asp", "", 200, "Mozilla/4.0 (compatible; MSIE 6.0)");
    b.http(t + 10, ip, "GET", "/en/survey/index.asp", "", 200, "Mozilla/4.0 (compatible; MSIE 6.0)");
  }

  b.finish(out);
  return out;
}

void synth_bulk(std::uint64_t total_lines, std::uint64_t seed, std::ostream& http_out,
                std::ostream& sql_out) {
  std::mt19937_64 rng(seed);
  UnixTime t = 1138752000;
  char buf[640];
  const int kAgents = 6;
  const char* agents[kAgents] = {"Mozilla/4.0 (compatible; MSIE 6.0; Windows NT 5.1)",
                                 "Mozilla/5.0 (Windows; U) Firefox/1.5",
                                 "Mozilla/5.0 (compatible; Googlebot/2.1)",
                                 "Python-urllib/2.4",
                                 "Java/1.5.0_06",
                                 "Opera/8.5"};
  // statement skeletons with two varying numbers each; column pools add
  // template diversity on top
  const char* skeletons[] = {
      "select ra, dec from photoprimary where htmid between %ld and %ld",
      "select count(*) from photoprimary where (htmID >= %ld and htmID <= %ld)",
      "select top 50 %s, %s from specobj where z > 0.%ld and plate = %ld",
      "select p.objid, p.%s from photoobjall as p where p.run = %ld and p.camcol = %ld",
      "select s.bestobjid from specobjall s inner join phototag as b on s.bestobjid = b.objid "
      "where b.field = %ld and b.%s < %ld",
      "select %s, count_big(*) from star where r < 1%ld.5 group by %s order by %s",
      "exec fGetNearbyObjEq %ld, %ld, 0.5",
      "select u, g, r, i, z from galaxy where g - r between 0.%ld and 0.%ld"};
  const char* cols[] = {"ra", "dec", "run", "rerun", "camcol", "field", "obj", "type"};

  for (std::uint64_t i = 0; i < total_lines; ++i) {
    t += static_cast<UnixTime>(rng() % 2);
    std::string ts = format_iso8601(t);
    std::uint64_t ip_a = rng() % 200, ip_b = rng() % 250;
    if (i % 5 == 4) {
      long a = static_cast<long>(rng() % 1000000), b = static_cast<long>(rng() % 1000);
      const char* c1 = cols[rng() % 8];
      const char* c2 = cols[rng() % 8];
      char stmt[384];
      switch (rng() % 8) {
        case 0: std::snprintf(stmt, sizeof(stmt), skeletons[0], a, a + 64); break;
        case 1: std::snprintf(stmt, sizeof(stmt), skeletons[1], a, a + 63); break;
        case 2: std::snprintf(stmt, sizeof(stmt), skeletons[2], c1, c2, b % 10, a); break;
        case 3: std::snprintf(stmt, sizeof(stmt), skeletons[3], c1, b % 7, b % 6 + 1); break;
        case 4: std::snprintf(stmt, sizeof(stmt), skeletons[4], a, c1, b); break;
        case 5: std::snprintf(stmt, sizeof(stmt), skeletons[5], c1, b % 9, c1, c1); break;
        case 6: std::snprintf(stmt, sizeof(stmt), skeletons[6], a % 360, b % 90); break;
        default: std::snprintf(stmt, sizeof(stmt), skeletons[7], b % 10, b % 10 + 5); break;
      }
      bool ok = rng() % 20 != 0;
      std::snprintf(buf, sizeof(buf), "%s\t172.%llu.%llu.%llu\t%llu\t%.3f\t%.3f\t%d\t%s\tDR%llu\t%s",
                    ts.c_str(), static_cast<unsigned long long>(ip_a % 32),
                    static_cast<unsigned long long>(ip_b),
                    static_cast<unsigned long long>(rng() % 250 + 1),
                    static_cast<unsigned long long>(ok ? rng() % 5000 : 0),
                    uniform01(rng) * 30.0, uniform01(rng) * 3.0, ok ? 1 : 0,
                    ok ? "-" : "Incorrect syntax near 'btween'",
                    static_cast<unsigned long long>(rng() % 5), stmt);
      sql_out << buf << '\n';
    } else {
      int page = static_cast<int>(rng() % 10);
      int status = (rng() % 25 == 0) ? 404 : (rng() % 25 == 1) ? 302 : 200;
      std::snprintf(buf, sizeof(buf), "%s\t10.%llu.%llu.%llu\tGET\t%s\tid=%llu\t%d\t%s\t-",
                    ts.c_str(), static_cast<unsigned long long>(ip_a),
                    static_cast<unsigned long long>(ip_b),
                    static_cast<unsigned long long>(rng() % 250 + 1), kPages[page],
                    static_cast<unsigned long long>(rng() % 100000), status,
                    agents[rng() % kAgents]);
      http_out << buf << '\n';
    }
  }
}

}  // namespace logsift
