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
#include <iosfwd>
#include <string>
#include <vector>

#include "logsift/time_util.hpp"

namespace logsift {

/// Deterministic samplers used as test oracles: the generating parameter is
/// known exactly, so recovering it exercises the fitting/aggregation path.

/// Pareto samples via inverse CDF, x = u^(-1/shape), x >= 1. The log2
/// histogram of these falls with slope -shape; the density exponent is
/// shape + 1.
std::vector<double> pareto_samples(size_t n, double shape, std::uint64_t seed);

/// Zipf-distributed ranks in [1, vocab] with exponent s (frequency of rank
/// r proportional to r^-s).
std::vector<int> zipf_ranks(size_t n, int vocab, double s, std::uint64_t seed);

/// Monthly series following count(m) = start * multiplier^(m/12) with
/// multiplicative noise of amplitude noise_frac (0.05 = +/-5%).
std::vector<std::pair<int, double>> growth_series(int months, double start,
                                                  double yearly_multiplier, double noise_frac,
                                                  std::uint64_t seed);

/// Corpus with planted per-IP ground truth: admins run the monitoring
/// probe, spiders fetch robots.txt, bots replay one SQL template, mortals
/// hold short diverse sessions, "others" bounce off two pages.
struct SynthConfig {
  std::uint64_t seed = 42;
  int admins = 1;
  int spiders = 4;
  int bots = 3;
  int mortals = 12;
  int others = 6;
  int bot_queries = 13000;
  UnixTime base_ts = 1138752000;  // 2006-02-01T00:00:00Z
};

struct SynthCorpus {
  std::vector<std::string> http_lines;
  std::vector<std::string> sql_lines;
  std::vector<std::pair<std::string, std::string>> truth;  // client_ip -> expected label
};

SynthCorpus synth_corpus(const SynthConfig& cfg);

/// Streams a large mixed corpus (~4:1 web:SQL) for throughput and scale
/// runs; lines are time-ordered and parse cleanly.
void synth_bulk(std::uint64_t total_lines, std::uint64_t seed, std::ostream& http_out,
                std::ostream& sql_out);

}  // namespace logsift
