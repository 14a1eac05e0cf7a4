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

#include "logsift/tokenize.hpp"

#include <cctype>
#include <unordered_set>

namespace logsift {

namespace {

bool is_name_start(char c) {
  return std::isalpha(static_cast<unsigned char>(c)) || c == '_' || c == '@' || c == '#' || c == '$';
}

bool is_name_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '@' || c == '#' || c == '$';
}

bool is_digit(char c) { return c >= '0' && c <= '9'; }

bool is_hex_digit(char c) {
  return is_digit(c) || (c >= 'a' && c <= 'f') || (c >= 'A' && c <= 'F');
}

const std::unordered_set<std::string_view>& keyword_set() {
  static const std::unordered_set<std::string_view> kw = {
      "SELECT", "FROM", "WHERE", "GROUP", "BY", "ORDER", "HAVING", "TOP", "DISTINCT",
      "ALL", "AS", "ON", "JOIN", "INNER", "OUTER", "LEFT", "RIGHT", "FULL", "CROSS",
      "UNION", "EXCEPT", "INTERSECT", "AND", "OR", "NOT", "NULL", "IS", "IN",
      "BETWEEN", "LIKE", "EXISTS", "ANY", "SOME", "CASE", "WHEN", "THEN", "ELSE",
      "END", "CAST", "CONVERT", "COUNT", "SUM", "AVG", "MIN", "MAX", "INSERT",
      "INTO", "VALUES", "UPDATE", "SET", "DELETE", "CREATE", "TABLE", "INDEX",
      "VIEW", "DROP", "ALTER", "DECLARE", "BEGIN", "IF", "WHILE", "RETURN",
      "EXEC", "EXECUTE", "PRINT", "WITH", "OPTION", "ASC", "DESC"};
  return kw;
}

std::string upper(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return out;
}

// One name part: a plain name or a [bracketed] name (verbatim content,
// unterminated bracket runs to end of input).
size_t scan_name_part(std::string_view s, size_t pos) {
  if (pos < s.size() && s[pos] == '[') {
    size_t close = s.find(']', pos + 1);
    return close == std::string_view::npos ? s.size() : close + 1;
  }
  while (pos < s.size() && is_name_char(s[pos])) ++pos;
  return pos;
}

size_t scan_number(std::string_view s, size_t pos) {
  if (s[pos] == '0' && pos + 2 < s.size() && (s[pos + 1] == 'x' || s[pos + 1] == 'X') &&
      is_hex_digit(s[pos + 2])) {
    pos += 2;
    while (pos < s.size() && is_hex_digit(s[pos])) ++pos;
    return pos;
  }
  while (pos < s.size() && is_digit(s[pos])) ++pos;
  if (pos + 1 < s.size() && s[pos] == '.' && is_digit(s[pos + 1])) {
    ++pos;
    while (pos < s.size() && is_digit(s[pos])) ++pos;
  } else if (pos < s.size() && s[pos] == '.' &&
             (pos + 1 == s.size() || !is_name_start(s[pos + 1]))) {
    // trailing decimal point with no fraction ("3."), but not "3.x"
    ++pos;
  }
  if (pos < s.size() && (s[pos] == 'e' || s[pos] == 'E')) {
    size_t e = pos + 1;
    if (e < s.size() && (s[e] == '+' || s[e] == '-')) ++e;
    if (e < s.size() && is_digit(s[e])) {
      ++e;
      while (e < s.size() && is_digit(s[e])) ++e;
      pos = e;
    }
  }
  return pos;
}

}  // namespace

bool is_sql_keyword(std::string_view up) { return keyword_set().count(up) > 0; }

std::vector<SqlToken> tokenize_sql(std::string_view s) {
  std::vector<SqlToken> toks;
  size_t i = 0;
  const size_t n = s.size();
  while (i < n) {
    char c = s[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    // comments
    if (c == '-' && i + 1 < n && s[i + 1] == '-') {
      size_t nl = s.find('\n', i + 2);
      i = nl == std::string_view::npos ? n : nl + 1;
      continue;
    }
    if (c == '/' && i + 1 < n && s[i + 1] == '*') {
      size_t close = s.find("*/", i + 2);
      i = close == std::string_view::npos ? n : close + 2;
      continue;
    }
    // string literal, '' escapes a quote; unterminated runs to end
    if (c == '\'') {
      std::string content;
      size_t j = i + 1;
      while (j < n) {
        if (s[j] == '\'') {
          if (j + 1 < n && s[j + 1] == '\'') {
            content.push_back('\'');
            j += 2;
            continue;
          }
          ++j;
          break;
        }
        content.push_back(s[j]);
        ++j;
      }
      i = j;
      toks.push_back({TokKind::str, std::move(content)});
      continue;
    }
    // numeric literal (leading digit, or ".5")
    if (is_digit(c) || (c == '.' && i + 1 < n && is_digit(s[i + 1]))) {
      size_t end = scan_number(s, i);
      toks.push_back({TokKind::number, std::string(s.substr(i, end - i))});
      i = end;
      continue;
    }
    // identifier / dotted chain / bracket-quoted name
    if (is_name_start(c) || c == '[') {
      size_t end = scan_name_part(s, i);
      // chain: ".part" or "..part" (empty middle part as in db..table);
      // a dot not followed by a part stays outside the token
      while (end < n && s[end] == '.') {
        if (end + 1 < n && (is_name_start(s[end + 1]) || s[end + 1] == '[')) {
          end = scan_name_part(s, end + 1);
        } else if (end + 2 < n && s[end + 1] == '.' &&
                   (is_name_start(s[end + 2]) || s[end + 2] == '[')) {
          end = scan_name_part(s, end + 2);
        } else {
          break;
        }
      }
      std::string text(s.substr(i, end - i));
      i = end;
      // single plain part may be a keyword
      if (text.find('.') == std::string::npos && text.front() != '[') {
        std::string up = upper(text);
        if (is_sql_keyword(up)) {
          toks.push_back({TokKind::keyword, std::move(up)});
          continue;
        }
      }
      toks.push_back({TokKind::ident, std::move(text)});
      continue;
    }
    // multi-char operators
    if (i + 1 < n) {
      std::string_view two = s.substr(i, 2);
      if (two == ">=" || two == "<=" || two == "<>" || two == "!=" || two == "!<" || two == "!>") {
        toks.push_back({TokKind::op, std::string(two)});
        i += 2;
        continue;
      }
    }
    if (c == '=' || c == '<' || c == '>' || c == '+' || c == '-' || c == '*' || c == '/' ||
        c == '%' || c == '&' || c == '|' || c == '^' || c == '~') {
      toks.push_back({TokKind::op, std::string(1, c)});
      ++i;
      continue;
    }
    // everything else: single-char punct (keeps the lexer total)
    toks.push_back({TokKind::punct, std::string(1, c)});
    ++i;
  }
  return toks;
}

std::string render_token(const SqlToken& tok) {
  if (tok.kind != TokKind::str) return tok.text;
  std::string out;
  out.reserve(tok.text.size() + 2);
  out.push_back('\'');
  for (char c : tok.text) {
    if (c == '\'') out.push_back('\'');
    out.push_back(c);
  }
  out.push_back('\'');
  return out;
}

std::string render_tokens(std::span<const SqlToken> toks) {
  std::string out;
  for (size_t i = 0; i < toks.size(); ++i) {
    if (i) out.push_back(' ');
    out += render_token(toks[i]);
  }
  return out;
}

}  // namespace logsift
