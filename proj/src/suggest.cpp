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

#include "logsift/suggest.hpp"

#include <algorithm>
#include <stdexcept>

namespace logsift {

namespace {

// Flattened gram key: tokens joined with an unlikely separator byte.
std::string gram_key(std::span<const std::string> tokens, size_t begin, size_t len) {
  std::string key;
  for (size_t i = 0; i < len; ++i) {
    if (i) key.push_back('\x1f');
    key += tokens[begin + i];
  }
  return key;
}

std::vector<std::string> gram_keys_of(std::span<const std::string> tokens, int n) {
  std::vector<std::string> keys;
  if (tokens.empty()) return keys;
  if (tokens.size() < static_cast<size_t>(n)) {
    keys.push_back(gram_key(tokens, 0, tokens.size()));
    return keys;
  }
  keys.reserve(tokens.size() - n + 1);
  for (size_t i = 0; i + n <= tokens.size(); ++i) keys.push_back(gram_key(tokens, i, n));
  std::sort(keys.begin(), keys.end());
  keys.erase(std::unique(keys.begin(), keys.end()), keys.end());
  return keys;
}

std::vector<std::string> simplified_stream(std::string_view statement) {
  return simplify_template(sql_template(statement));
}

}  // namespace

std::set<std::vector<std::string>> ngrams(std::span<const std::string> tokens, int n) {
  if (n < 1) throw std::invalid_argument("ngrams: n must be >= 1");
  std::set<std::vector<std::string>> out;
  if (tokens.empty()) return out;
  if (tokens.size() < static_cast<size_t>(n)) {
    out.emplace(tokens.begin(), tokens.end());
    return out;
  }
  for (size_t i = 0; i + n <= tokens.size(); ++i)
    out.emplace(tokens.begin() + i, tokens.begin() + i + n);
  return out;
}

double jaccard_similarity(const std::set<std::vector<std::string>>& a,
                          const std::set<std::vector<std::string>>& b) {
  if (a.empty() && b.empty()) return 1.0;
  size_t inter = 0;
  for (const auto& g : a) inter += b.count(g);
  size_t uni = a.size() + b.size() - inter;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

NGramIndex NGramIndex::build(std::span<const SqlTemplate> templates,
                             const std::unordered_map<std::uint64_t, std::string>& examples,
                             int n, Exec exec) {
  if (n < 1) throw std::invalid_argument("NGramIndex: n must be >= 1");
  NGramIndex index;
  index.n_ = n;

  std::vector<std::uint32_t> eligible;
  for (std::uint32_t i = 0; i < templates.size(); ++i)
    if (templates[i].syntax_ok_count >= 1) eligible.push_back(i);

  // gram computation is the heavy part; interning stays serial for
  // first-seen-deterministic ids
  std::vector<std::vector<std::string>> keys(eligible.size());
  const std::int64_t m = static_cast<std::int64_t>(eligible.size());
  if (exec == Exec::parallel) {
#pragma omp parallel for schedule(dynamic, 64) num_threads(worker_count())
    for (std::int64_t i = 0; i < m; ++i)
      keys[i] = gram_keys_of(simplified_stream(templates[eligible[i]].template_text), n);
  } else {
    for (std::int64_t i = 0; i < m; ++i)
      keys[i] = gram_keys_of(simplified_stream(templates[eligible[i]].template_text), n);
  }

  index.profiles_.reserve(eligible.size());
  for (size_t i = 0; i < eligible.size(); ++i) {
    const SqlTemplate& t = templates[eligible[i]];
    Profile p;
    p.template_id = t.template_id;
    p.count = t.count;
    auto ex = examples.find(t.template_id);
    p.example = ex != examples.end() ? ex->second : t.template_text;
    p.gram_ids.reserve(keys[i].size());
    for (const std::string& key : keys[i]) {
      auto [it, inserted] =
          index.gram_interner_.try_emplace(key, static_cast<std::uint32_t>(index.postings_.size()));
      if (inserted) index.postings_.emplace_back();
      p.gram_ids.push_back(it->second);
      index.postings_[it->second].push_back(static_cast<std::uint32_t>(index.profiles_.size()));
    }
    std::sort(p.gram_ids.begin(), p.gram_ids.end());
    index.profiles_.push_back(std::move(p));
  }
  return index;
}

std::vector<std::uint32_t> NGramIndex::query_gram_ids(std::string_view statement,
                                                      size_t* total_grams) const {
  std::vector<std::string> keys = gram_keys_of(simplified_stream(statement), n_);
  *total_grams = keys.size();
  std::vector<std::uint32_t> ids;
  ids.reserve(keys.size());
  for (const std::string& key : keys) {
    auto it = gram_interner_.find(key);
    if (it != gram_interner_.end()) ids.push_back(it->second);
  }
  std::sort(ids.begin(), ids.end());
  return ids;
}

bool NGramIndex::scored_lt(const Scored& a, const Scored& b) const {
  // higher similarity first; exact fraction compare, no FP ties.
  // uni == 0 is the empty-vs-empty convention (similarity 1), compared as 1/1.
  const std::uint64_t ia = a.uni == 0 ? 1 : a.inter, ua = a.uni == 0 ? 1 : a.uni;
  const std::uint64_t ib = b.uni == 0 ? 1 : b.inter, ub = b.uni == 0 ? 1 : b.uni;
  const unsigned __int128 lhs = static_cast<unsigned __int128>(ia) * ub;
  const unsigned __int128 rhs = static_cast<unsigned __int128>(ib) * ua;
  if (lhs != rhs) return lhs > rhs;
  const Profile& pa = profiles_[a.profile];
  const Profile& pb = profiles_[b.profile];
  if (pa.count != pb.count) return pa.count > pb.count;
  return pa.template_id < pb.template_id;
}

std::vector<Suggestion> NGramIndex::finish(std::vector<Scored> scored, int k) const {
  auto cmp = [this](const Scored& a, const Scored& b) { return scored_lt(a, b); };
  if (scored.size() > static_cast<size_t>(k)) {
    // comparator is a total order (ids are unique), so partial sort picks
    // the same top-k as a full sort
    std::partial_sort(scored.begin(), scored.begin() + k, scored.end(), cmp);
    scored.resize(k);
  } else {
    std::sort(scored.begin(), scored.end(), cmp);
  }
  std::vector<Suggestion> out;
  out.reserve(scored.size());
  for (const Scored& s : scored) {
    const Profile& p = profiles_[s.profile];
    double sim = s.uni == 0 ? 1.0
                            : static_cast<double>(s.inter) / static_cast<double>(s.uni);
    out.push_back({p.template_id, sim, p.example});
  }
  return out;
}

std::vector<Suggestion> NGramIndex::suggest_brute_force(std::string_view statement, int k) const {
  if (k < 1 || profiles_.empty()) return {};
  size_t total_grams = 0;
  std::vector<std::uint32_t> q = query_gram_ids(statement, &total_grams);

  std::vector<Scored> scored(profiles_.size());
  for (std::uint32_t i = 0; i < profiles_.size(); ++i) {
    const auto& g = profiles_[i].gram_ids;
    std::uint64_t inter = 0;
    auto a = q.begin();
    auto b = g.begin();
    while (a != q.end() && b != g.end()) {
      if (*a < *b) ++a;
      else if (*b < *a) ++b;
      else {
        ++inter;
        ++a;
        ++b;
      }
    }
    std::uint64_t uni = total_grams + g.size() - inter;
    scored[i] = {i, inter, uni};
  }
  return finish(std::move(scored), k);
}

std::vector<Suggestion> NGramIndex::suggest(std::string_view statement, int k, Exec exec) const {
  if (k < 1 || profiles_.empty()) return {};
  size_t total_grams = 0;
  std::vector<std::uint32_t> q = query_gram_ids(statement, &total_grams);

  // posting-list accumulation counts each shared gram exactly once
  std::vector<std::uint64_t> inter(profiles_.size(), 0);
  if (exec == Exec::parallel && q.size() > 1) {
    const std::int64_t nq = static_cast<std::int64_t>(q.size());
#pragma omp parallel num_threads(worker_count())
    {
      std::vector<std::uint64_t> local(profiles_.size(), 0);
#pragma omp for schedule(static) nowait
      for (std::int64_t i = 0; i < nq; ++i)
        for (std::uint32_t prof : postings_[q[i]]) local[prof]++;
#pragma omp critical
      for (size_t p = 0; p < local.size(); ++p) inter[p] += local[p];
    }
  } else {
    for (std::uint32_t id : q)
      for (std::uint32_t prof : postings_[id]) inter[prof]++;
  }

  std::vector<Scored> scored(profiles_.size());
  for (std::uint32_t i = 0; i < profiles_.size(); ++i) {
    std::uint64_t uni = total_grams + profiles_[i].gram_ids.size() - inter[i];
    scored[i] = {i, inter[i], uni};
  }
  return finish(std::move(scored), k);
}

}  // namespace logsift
