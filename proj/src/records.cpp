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

#include "logsift/records.hpp"

#include <string_view>

namespace logsift {

const char* to_string(AgentCategory c) {
  switch (c) {
    case AgentCategory::browser: return "browser";
    case AgentCategory::spider: return "spider";
    case AgentCategory::program: return "program";
    case AgentCategory::admin: return "admin";
    case AgentCategory::unknown: return "unknown";
  }
  return "unknown";
}

AgentCategory agent_category_from_string(std::string_view s) {
  if (s == "browser") return AgentCategory::browser;
  if (s == "spider") return AgentCategory::spider;
  if (s == "program") return AgentCategory::program;
  if (s == "admin") return AgentCategory::admin;
  return AgentCategory::unknown;
}

const char* to_string(SessionClass c) {
  switch (c) {
    case SessionClass::unclassified: return "unclassified";
    case SessionClass::admin: return "admin";
    case SessionClass::spider: return "spider";
    case SessionClass::bot: return "bot";
    case SessionClass::mortal: return "mortal";
    case SessionClass::other: return "other";
  }
  return "unclassified";
}

SessionClass session_class_from_string(std::string_view s) {
  if (s == "admin") return SessionClass::admin;
  if (s == "spider") return SessionClass::spider;
  if (s == "bot") return SessionClass::bot;
  if (s == "mortal") return SessionClass::mortal;
  if (s == "other") return SessionClass::other;
  return SessionClass::unclassified;
}

}  // namespace logsift
