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

namespace logsift {

/// Execution policy for the data-parallel kernels. Every kernel has a plain
/// serial path and an OpenMP path; both must produce bit-identical results.
/// The serial path is kept as the reference the tests and the benchmark
/// compare against.
enum class Exec { serial, parallel };

/// Number of OpenMP threads a kernel will use under Exec::parallel.
int worker_count();

/// Set the global worker count (0 = library default / OMP settings).
void set_worker_count(int n);

}  // namespace logsift
