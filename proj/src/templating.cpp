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

#include "logsift/templating.hpp"

#include <algorithm>
#include <cctype>
#include <unordered_map>

#include "logsift/ingest.hpp"
#include "logsift/tokenize.hpp"

namespace logsift {

namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

// Final part of a dotted chain, brackets stripped; respects dots inside
// [bracketed] parts.
std::string last_name_part(std::string_view chain) {
  size_t last_start = 0;
  bool in_bracket = false;
  for (size_t i = 0; i < chain.size(); ++i) {
    char c = chain[i];
    if (c == '[') in_bracket = true;
    else if (c == ']') in_bracket = false;
    else if (c == '.' && !in_bracket) last_start = i + 1;
  }
  std::string_view part = chain.substr(last_start);
  if (part.size() >= 2 && part.front() == '[' && part.back() == ']')
    part = part.substr(1, part.size() - 2);
  return std::string(part);
}

bool is_cmp_op(std::string_view t) {
  return t == "=" || t == "<" || t == ">" || t == "<=" || t == ">=" || t == "<>" ||
         t == "!=" || t == "!<" || t == "!>";
}

bool is_arith_op(std::string_view t) {
  return t == "+" || t == "-" || t == "*" || t == "/" || t == "%";
}

bool is_bit_op(std::string_view t) {
  return t == "&" || t == "|" || t == "^" || t == "~";
}

// Multi-word keyword runs merged with underscores, longest match first.
const std::vector<std::vector<std::string_view>>& keyword_merges() {
  static const std::vector<std::vector<std::string_view>> merges = {
      {"LEFT", "OUTER", "JOIN"}, {"RIGHT", "OUTER", "JOIN"}, {"FULL", "OUTER", "JOIN"},
      {"GROUP", "BY"},           {"ORDER", "BY"},            {"INNER", "JOIN"},
      {"LEFT", "JOIN"},          {"RIGHT", "JOIN"},          {"FULL", "JOIN"},
      {"CROSS", "JOIN"},         {"UNION", "ALL"}};
  return merges;
}

}  // namespace

std::pair<std::string, std::string> extract_stem(std::string_view uri_stem) {
  return {std::string(uri_stem), stem_verb(uri_stem)};
}

std::string stem_verb(std::string_view uri_stem) {
  std::string_view seg = last_segment(uri_stem);
  size_t dot = seg.rfind('.');
  if (dot != std::string_view::npos) seg = seg.substr(0, dot);
  return lower(seg);
}

std::string sql_template(std::string_view statement) {
  std::vector<SqlToken> toks = tokenize_sql(statement);
  for (SqlToken& t : toks) {
    switch (t.kind) {
      case TokKind::number:
        t.kind = TokKind::ident;
        t.text = "#";
        break;
      case TokKind::ident:
        t.text = lower(t.text);
        break;
      default:
        break;
    }
  }
  return render_tokens(toks);
}

std::vector<std::string> simplify_template(std::string_view template_text) {
  std::vector<SqlToken> toks = tokenize_sql(template_text);

  // merge multi-word keywords
  std::vector<SqlToken> merged;
  merged.reserve(toks.size());
  for (size_t i = 0; i < toks.size();) {
    bool did = false;
    if (toks[i].kind == TokKind::keyword) {
      for (const auto& seq : keyword_merges()) {
        if (i + seq.size() > toks.size()) continue;
        bool match = true;
        for (size_t k = 0; k < seq.size(); ++k) {
          if (toks[i + k].kind != TokKind::keyword || toks[i + k].text != seq[k]) {
            match = false;
            break;
          }
        }
        if (match) {
          std::string joined;
          for (size_t k = 0; k < seq.size(); ++k) {
            if (k) joined.push_back('_');
            joined += seq[k];
          }
          merged.push_back({TokKind::keyword, std::move(joined)});
          i += seq.size();
          did = true;
          break;
        }
      }
    }
    if (!did) {
      merged.push_back(toks[i]);
      ++i;
    }
  }

  // collect `<ident> AS <ident>` aliases (single pass, first binding wins)
  // and mark the AS+alias tokens for removal
  std::unordered_map<std::string, std::string> alias_to_target;
  std::vector<bool> drop(merged.size(), false);
  for (size_t i = 0; i < merged.size(); ++i) {
    if (merged[i].kind != TokKind::keyword || merged[i].text != "AS") continue;
    drop[i] = true;
    if (i + 1 < merged.size() && merged[i + 1].kind == TokKind::ident) {
      drop[i + 1] = true;
      if (i > 0 && merged[i - 1].kind == TokKind::ident) {
        std::string alias = last_name_part(merged[i + 1].text);
        std::string target = last_name_part(merged[i - 1].text);
        alias_to_target.emplace(std::move(alias), std::move(target));
      }
    }
  }

  std::vector<std::string> out;
  out.reserve(merged.size());
  for (size_t i = 0; i < merged.size(); ++i) {
    if (drop[i]) continue;
    const SqlToken& t = merged[i];
    switch (t.kind) {
      case TokKind::punct:
        if (t.text == "(" || t.text == ")") continue;
        out.push_back(t.text);
        break;
      case TokKind::str:
        out.push_back("STR");
        break;
      case TokKind::number:  // raw input tolerated; templates arrive pre-masked
        out.push_back("#");
        break;
      case TokKind::op:
        if (is_cmp_op(t.text)) out.push_back("CMP");
        else if (is_arith_op(t.text)) out.push_back("ARITH");
        else if (is_bit_op(t.text)) out.push_back("BITOP");
        else out.push_back(t.text);
        break;
      case TokKind::keyword:
        if (t.text == "BETWEEN" || t.text == "LIKE" || t.text == "IN") out.push_back("CMP");
        else if (t.text == "AND" || t.text == "OR" || t.text == "NOT") out.push_back("LOGIC");
        else out.push_back(t.text);
        break;
      case TokKind::ident: {
        std::string name = last_name_part(t.text);
        auto it = alias_to_target.find(name);
        out.push_back(it != alias_to_target.end() ? it->second : std::move(name));
        break;
      }
    }
  }
  return out;
}

Corpora build_corpora(std::span<const HttpHit> hits, std::span<const SqlRequest> queries,
                      Exec exec) {
  Corpora out;
  out.hit_stem_ids.resize(hits.size());
  out.query_template_ids.resize(queries.size());

  // Stems key on the verbatim stem text; cheap, done serially.
  // Templates need a full lex per statement, that part parallelizes.
  std::vector<std::string> template_texts(queries.size());
  const std::int64_t nq = static_cast<std::int64_t>(queries.size());
  if (exec == Exec::parallel) {
#pragma omp parallel for schedule(dynamic, 1024) num_threads(worker_count())
    for (std::int64_t i = 0; i < nq; ++i)
      template_texts[i] = sql_template(queries[i].statement);
  } else {
    for (std::int64_t i = 0; i < nq; ++i)
      template_texts[i] = sql_template(queries[i].statement);
  }

  {
    std::unordered_map<std::string_view, std::uint64_t> stem_ids;
    stem_ids.reserve(hits.size() / 4 + 16);
    for (size_t i = 0; i < hits.size(); ++i) {
      auto [it, inserted] = stem_ids.try_emplace(hits[i].uri_stem, out.stems.size());
      if (inserted) {
        CommandStem cs;
        cs.stem_id = it->second;
        cs.stem = hits[i].uri_stem;
        cs.verb = stem_verb(cs.stem);
        out.stems.push_back(std::move(cs));
      }
      out.stems[it->second].count++;
      out.hit_stem_ids[i] = it->second;
    }
  }

  {
    std::unordered_map<std::string_view, std::uint64_t> template_ids;
    template_ids.reserve(queries.size() / 4 + 16);
    for (size_t i = 0; i < queries.size(); ++i) {
      auto [it, inserted] = template_ids.try_emplace(template_texts[i], out.templates.size());
      if (inserted) {
        SqlTemplate t;
        t.template_id = it->second;
        t.template_text = template_texts[i];
        out.templates.push_back(std::move(t));
      }
      SqlTemplate& t = out.templates[it->second];
      t.count++;
      if (queries[i].is_syntax_ok) {
        t.syntax_ok_count++;
        if (!t.example_query_id) t.example_query_id = queries[i].query_id;
      }
      if (queries[i].rows_returned >= 1) t.returned_rows_count++;
      out.query_template_ids[i] = it->second;
    }
  }
  return out;
}

}  // namespace logsift
