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

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace logsift {

enum class TokKind {
  keyword,  // reserved word, text uppercased
  ident,    // identifier; dotted chains ("p.ra", "a..b") and [bracketed] parts in one token
  number,   // numeric literal: integer, decimal, scientific, hex
  str,      // single-quoted literal; text holds the unescaped content
  op,       // operator: comparison, arithmetic, bitwise
  punct     // everything else, one char per token
};

struct SqlToken {
  TokKind kind;
  std::string text;

  bool operator==(const SqlToken&) const = default;
};

/// Total lexer for SQL-ish text. Never fails: unrecognized characters come
/// out as single-character punct tokens, unterminated strings/brackets run
/// to the end of input. Whitespace and comments ("--", "/* */") are
/// dropped. Keywords are case-folded to upper; identifier case is
/// preserved.
std::vector<SqlToken> tokenize_sql(std::string_view statement);

/// Canonical rendering of one token (strings get their quotes and ''
/// escapes back).
std::string render_token(const SqlToken& tok);

/// Space-joined rendering; tokenize_sql(render_tokens(t)) == t.
std::string render_tokens(std::span<const SqlToken> toks);

bool is_sql_keyword(std::string_view upper);

}  // namespace logsift
