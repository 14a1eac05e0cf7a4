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

#include <cmath>
#include <cstdint>
#include <map>

namespace logsift {

/// Power-of-two bucket index: floor(log2(max(value, 1))).
inline int log2_bucket(double value) {
  if (value < 1.0) return 0;
  return std::ilogb(value);
}

/// Counts bucketed in powers of two. Bucket k holds values in
/// [2^k, 2^(k+1)); values below 1 clamp to bucket 0.
struct BucketedHistogram {
  std::map<int, std::uint64_t> buckets;
  std::uint64_t total = 0;

  void add(double value, std::uint64_t weight = 1) {
    buckets[log2_bucket(value)] += weight;
    total += weight;
  }

  void merge(const BucketedHistogram& other) {
    for (const auto& [k, c] : other.buckets) buckets[k] += c;
    total += other.total;
  }

  std::uint64_t count_at(int bucket) const {
    auto it = buckets.find(bucket);
    return it == buckets.end() ? 0 : it->second;
  }

  bool empty() const { return buckets.empty(); }
};

}  // namespace logsift
