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
#include <optional>
#include <string>
#include <string_view>

namespace logsift {

/// Seconds since the Unix epoch, UTC. All log timestamps are reduced to this.
using UnixTime = std::int64_t;

/// Parses an ISO-8601 timestamp ("2006-03-01T12:00:00Z", space separator and
/// "+hh:mm"/"+hhmm" offsets accepted, fractional seconds ignored). Timestamps
/// without a zone designator are taken as UTC. Returns nullopt on malformed
/// input.
std::optional<UnixTime> parse_iso8601(std::string_view text);

/// Renders a UnixTime as "YYYY-MM-DDTHH:MM:SSZ".
std::string format_iso8601(UnixTime t);

/// Calendar month key "YYYY-MM" (UTC) for monthly aggregation.
std::string month_key(UnixTime t);

/// Months elapsed since year 0 (UTC calendar), for regression time axes.
int month_index(UnixTime t);

}  // namespace logsift
