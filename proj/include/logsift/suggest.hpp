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
#include <set>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "logsift/exec.hpp"
#include "logsift/templating.hpp"

namespace logsift {

/// Contiguous token windows of length n as a set (n-grams). Streams shorter
/// than n yield their whole content as the single gram; the empty stream
/// yields the empty set. Throws std::invalid_argument for n < 1.
std::set<std::vector<std::string>> ngrams(std::span<const std::string> tokens, int n);

/// Intersection over union of the gram sets; 1.0 when both are empty.
double jaccard_similarity(const std::set<std::vector<std::string>>& a,
                          const std::set<std::vector<std::string>>& b);

struct Suggestion {
  std::uint64_t template_id = 0;
  double similarity = 0.0;
  std::string example_statement;
};

/// Immutable n-gram index over the known-correct templates. Only templates
/// with at least one syntactically correct instance are indexed; each entry
/// keeps one correct example statement to show the user.
class NGramIndex {
 public:
  /// `examples` maps template_id -> example statement text (entries without
  /// one fall back to the template text itself).
  static NGramIndex build(std::span<const SqlTemplate> templates,
                          const std::unordered_map<std::uint64_t, std::string>& examples,
                          int n = 3, Exec exec = Exec::parallel);

  /// Top-k most similar templates for an arbitrary (possibly broken)
  /// statement: tokenize, mask, simplify, n-gram, score. Ties break by
  /// higher template count, then lower template_id. Scores against every
  /// profile via the inverted index; identical to brute force.
  std::vector<Suggestion> suggest(std::string_view statement, int k = 3,
                                  Exec exec = Exec::parallel) const;

  /// Reference scorer: exhaustive scan, no inverted index. Kept for the
  /// equivalence tests and the benchmark.
  std::vector<Suggestion> suggest_brute_force(std::string_view statement, int k = 3) const;

  size_t size() const { return profiles_.size(); }
  int gram_length() const { return n_; }

 private:
  struct Profile {
    std::uint64_t template_id;
    std::uint64_t count;  // instance popularity, for tie-breaks
    std::vector<std::uint32_t> gram_ids;  // sorted, unique
    std::string example;
  };

  struct Scored {
    std::uint32_t profile;
    std::uint64_t inter;
    std::uint64_t uni;
  };

  std::vector<std::uint32_t> query_gram_ids(std::string_view statement, size_t* total_grams) const;
  std::vector<Suggestion> finish(std::vector<Scored> scored, int k) const;
  bool scored_lt(const Scored& a, const Scored& b) const;

  int n_ = 3;
  std::vector<Profile> profiles_;
  std::unordered_map<std::string, std::uint32_t> gram_interner_;
  std::vector<std::vector<std::uint32_t>> postings_;  // gram id -> profile indexes
};

}  // namespace logsift
