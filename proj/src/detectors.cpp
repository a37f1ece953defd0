// Copyright 2026 The Centfuzz Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//
// Detector rules. Each rule is a deterministic token-stream counter. They are
// documented approximations (this is not a C front end); the cases each rule
// gets right and the known blind spots are noted inline.

#include "src/detectors.hpp"

#include <algorithm>
#include <array>
#include <string_view>

#include "centfuzz/errors.hpp"

namespace centfuzz {
namespace detail {

namespace {

using Tokens = std::vector<Token>;

bool IsPunct(const Token& t, std::string_view p) {
  return t.kind == TokenKind::kPunct && t.text == p;
}

// A token that can end an expression operand: identifier, literal, closing
// paren/bracket. Used to tell prefix from postfix context.
bool EndsOperand(const Token& t) {
  if (t.kind == TokenKind::kIdent || t.kind == TokenKind::kNumber) return true;
  return IsPunct(t, ")") || IsPunct(t, "]");
}

// A token that can begin an expression operand.
bool StartsOperand(const Token& t) {
  if (t.kind == TokenKind::kIdent || t.kind == TokenKind::kNumber) return true;
  if (t.kind != TokenKind::kPunct) return false;
  static constexpr std::array<std::string_view, 9> kStarts = {
      "(", "*", "&", "+", "-", "!", "~", "++", "--"};
  return std::find(kStarts.begin(), kStarts.end(), t.text) != kStarts.end();
}

// Base type keywords (and the _t suffix convention) that mark a following
// '*' as a pointer declarator rather than a multiplication.
bool IsTypeWord(const Token& t) {
  if (t.kind != TokenKind::kIdent) return false;
  static constexpr std::array<std::string_view, 13> kTypes = {
      "void",   "char",     "short", "int",  "long",     "float",  "double",
      "signed", "unsigned", "_Bool", "bool", "volatile", "const"};
  if (std::find(kTypes.begin(), kTypes.end(), t.text) != kTypes.end())
    return true;
  return t.text.size() > 2 && t.text.ends_with("_t");
}

// Keywords that, two tokens back, mark "<kw> Name *" as a declaration
// ("struct S *p"), not a multiplication.
bool IsDeclIntroWord(const Token& t) {
  if (t.kind != TokenKind::kIdent) return false;
  static constexpr std::array<std::string_view, 12> kIntro = {
      "struct", "union",  "enum",     "const", "volatile", "static",
      "extern", "signed", "unsigned", "short", "long",     "typedef"};
  return std::find(kIntro.begin(), kIntro.end(), t.text) != kIntro.end();
}

int64_t CountWord(const Tokens& toks, std::string_view alternatives) {
  int64_t n = 0;
  for (const auto& t : toks) {
    if (t.kind != TokenKind::kIdent) continue;
    size_t pos = 0;
    while (pos <= alternatives.size()) {
      size_t bar = alternatives.find('|', pos);
      std::string_view alt = alternatives.substr(
          pos, bar == std::string_view::npos ? alternatives.size() - pos
                                             : bar - pos);
      if (t.text == alt) {
        ++n;
        break;
      }
      if (bar == std::string_view::npos) break;
      pos = bar + 1;
    }
  }
  return n;
}

int64_t CountPunct(const Tokens& toks, std::string_view p) {
  int64_t n = 0;
  for (const auto& t : toks)
    if (t.kind == TokenKind::kPunct && t.text == p) ++n;
  return n;
}

int64_t CountPrefix(const Tokens& toks, std::string_view prefix) {
  int64_t n = 0;
  for (const auto& t : toks)
    if (t.kind == TokenKind::kIdent && t.text.starts_with(prefix)) ++n;
  return n;
}

// Non-overlapping adjacent identifier pairs ("long long" counts once in
// "unsigned long long").
int64_t CountSeq(const Tokens& toks, std::string_view first,
                 std::string_view second) {
  int64_t n = 0;
  for (size_t i = 0; i + 1 < toks.size(); ++i) {
    if (toks[i].kind == TokenKind::kIdent && toks[i].text == first &&
        toks[i + 1].kind == TokenKind::kIdent && toks[i + 1].text == second) {
      ++n;
      ++i;  // consume both
    }
  }
  return n;
}

int64_t CountCompoundAssign(const Tokens& toks) {
  static constexpr std::array<std::string_view, 10> kOps = {
      "+=", "-=", "*=", "/=", "%=", "&=", "|=", "^=", "<<=", ">>="};
  int64_t n = 0;
  for (const auto& t : toks)
    if (t.kind == TokenKind::kPunct &&
        std::find(kOps.begin(), kOps.end(), t.text) != kOps.end())
      ++n;
  return n;
}

// "++"/"--" with an operand before it: postfix. Without one, and with an
// operand starting after it: prefix. "a++ + ++b" yields one of each.
int64_t CountIncrDecr(const Tokens& toks, std::string_view op, bool prefix) {
  int64_t n = 0;
  for (size_t i = 0; i < toks.size(); ++i) {
    if (!IsPunct(toks[i], op)) continue;
    bool prev_operand = i > 0 && EndsOperand(toks[i - 1]);
    if (prefix) {
      bool next_operand = i + 1 < toks.size() && StartsOperand(toks[i + 1]);
      if (!prev_operand && next_operand) ++n;
    } else {
      if (prev_operand) ++n;
    }
  }
  return n;
}

// '+' in prefix position: no operand ends before it, one starts after it.
// Exponent signs never reach here (the tokenizer folds them into numbers).
int64_t CountUnaryPlus(const Tokens& toks) {
  int64_t n = 0;
  for (size_t i = 0; i < toks.size(); ++i) {
    if (!IsPunct(toks[i], "+")) continue;
    bool prev_operand = i > 0 && EndsOperand(toks[i - 1]);
    bool next_operand = i + 1 < toks.size() && StartsOperand(toks[i + 1]);
    if (!prev_operand && next_operand) ++n;
  }
  return n;
}

// '*' used as multiplication: an operand on each side, and not a pointer
// declarator. "int *p" and "struct S *p" are excluded via the type-word and
// declaration-intro checks; "a * b" after an operator or '=' counts. Known
// blind spot: "MyType *p" with an unprefixed typedef name and no preceding
// keyword counts as a multiplication.
int64_t CountBinaryStar(const Tokens& toks) {
  int64_t n = 0;
  for (size_t i = 0; i < toks.size(); ++i) {
    if (!IsPunct(toks[i], "*")) continue;
    if (i == 0 || i + 1 >= toks.size()) continue;
    if (!EndsOperand(toks[i - 1]) || !StartsOperand(toks[i + 1])) continue;
    if (IsTypeWord(toks[i - 1])) continue;
    if (i >= 2 && toks[i - 1].kind == TokenKind::kIdent &&
        IsDeclIntroWord(toks[i - 2]))
      continue;
    ++n;
  }
  return n;
}

// "name : width" terminated by ';' or ',': a bit-field declarator. The
// identifier guard keeps ternaries with numeric arms ("x ? 1 : 2") out.
int64_t CountBitfieldWidth(const Tokens& toks) {
  int64_t n = 0;
  for (size_t i = 1; i + 2 < toks.size(); ++i) {
    if (!IsPunct(toks[i], ":")) continue;
    if (toks[i - 1].kind != TokenKind::kIdent) continue;
    if (toks[i + 1].kind != TokenKind::kNumber) continue;
    if (IsPunct(toks[i + 2], ";") || IsPunct(toks[i + 2], ",")) ++n;
  }
  return n;
}

// A qualifier word with a '*' among the next three tokens: a declaration of
// a pointer to <qual>-qualified data ("volatile int *p", "const unsigned
// long *q"). Three tokens spans a two-word base type.
int64_t CountQualPointer(const Tokens& toks, std::string_view qual) {
  int64_t n = 0;
  for (size_t i = 0; i < toks.size(); ++i) {
    if (toks[i].kind != TokenKind::kIdent || toks[i].text != qual) continue;
    for (size_t j = i + 1; j < toks.size() && j <= i + 3; ++j) {
      if (IsPunct(toks[j], "*")) {
        ++n;
        break;
      }
    }
  }
  return n;
}

// '=' nested inside parentheses, excluding for-statement headers: an
// assignment embedded in an expression ("if ((a = b))", "f(x = 1)").
int64_t CountEmbeddedAssign(const Tokens& toks) {
  int64_t n = 0;
  int depth = 0;
  // Paren depths that belong to for-headers, tracked as a stack flag.
  std::vector<bool> for_header;
  for (size_t i = 0; i < toks.size(); ++i) {
    const Token& t = toks[i];
    if (IsPunct(t, "(")) {
      bool is_for = i > 0 && toks[i - 1].kind == TokenKind::kIdent &&
                    toks[i - 1].text == "for";
      for_header.push_back(is_for);
      ++depth;
    } else if (IsPunct(t, ")")) {
      if (depth > 0) {
        --depth;
        for_header.pop_back();
      }
    } else if (IsPunct(t, "=") && depth > 0) {
      bool inside_for =
          std::find(for_header.begin(), for_header.end(), true) !=
          for_header.end();
      if (!inside_for) ++n;
    }
  }
  return n;
}

struct RuleSpec {
  std::string_view name;   // rule word before ':', or the whole rule
  bool takes_arg;
};

constexpr std::array<RuleSpec, 16> kRules = {{
    {"undetectable", false},
    {"word", true},
    {"punct", true},
    {"prefix", true},
    {"seq", true},
    {"compound-assign", false},
    {"pre-incr", false},
    {"pre-decr", false},
    {"post-incr", false},
    {"post-decr", false},
    {"unary-plus", false},
    {"binary-star", false},
    {"bitfield-width", false},
    {"qual-pointer", true},
    {"embedded-assign", false},
    {"global-decl", false},
}};

// Splits "word:const" into ("word", "const"); argless rules keep arg empty.
std::pair<std::string_view, std::string_view> SplitRule(const std::string& r) {
  size_t colon = r.find(':');
  if (colon == std::string::npos) return {std::string_view(r), {}};
  return {std::string_view(r).substr(0, colon),
          std::string_view(r).substr(colon + 1)};
}

// Depth-0 declaration statements ("int g;", "static long g1, g2;"): counts
// declarators (comma count + 1) in each top-level ';'-terminated chunk with
// no parentheses and no declaration-only lead keyword. Kept in the registry
// for custom catalogs; the builtin catalog uses the generator's g_ naming
// convention for globals instead, which is exact on generated corpora.
int64_t CountGlobalDecl(const Tokens& toks) {
  int64_t n = 0;
  int brace_depth = 0;
  size_t chunk_tokens = 0;
  int64_t chunk_commas = 0;
  bool chunk_has_paren = false;
  bool chunk_excluded = false;
  for (const auto& t : toks) {
    if (IsPunct(t, "{")) {
      ++brace_depth;
      chunk_tokens = 0;
      chunk_commas = 0;
      chunk_has_paren = false;
      chunk_excluded = false;
      continue;
    }
    if (IsPunct(t, "}")) {
      if (brace_depth > 0) --brace_depth;
      chunk_tokens = 0;
      chunk_commas = 0;
      chunk_has_paren = false;
      chunk_excluded = false;
      continue;
    }
    if (brace_depth != 0) continue;
    if (IsPunct(t, ";")) {
      if (chunk_tokens >= 2 && !chunk_has_paren && !chunk_excluded)
        n += chunk_commas + 1;
      chunk_tokens = 0;
      chunk_commas = 0;
      chunk_has_paren = false;
      chunk_excluded = false;
      continue;
    }
    if (chunk_tokens == 0 && t.kind == TokenKind::kIdent &&
        (t.text == "typedef" || t.text == "extern" || t.text == "struct" ||
         t.text == "union" || t.text == "enum")) {
      chunk_excluded = true;
    }
    if (IsPunct(t, "(") || IsPunct(t, ")")) chunk_has_paren = true;
    if (IsPunct(t, ",")) ++chunk_commas;
    ++chunk_tokens;
  }
  return n;
}

}  // namespace

bool IsKnownDetector(const std::string& rule) {
  auto [name, arg] = SplitRule(rule);
  for (const auto& r : kRules) {
    if (r.name != name) continue;
    if (r.takes_arg) return !arg.empty();
    return arg.empty() && rule.find(':') == std::string::npos;
  }
  return false;
}

int64_t CountDetector(const std::vector<Token>& toks, const std::string& rule) {
  auto [name, arg] = SplitRule(rule);
  if (name == "undetectable") return 0;
  if (name == "word") return CountWord(toks, arg);
  if (name == "punct") return CountPunct(toks, arg);
  if (name == "prefix") return CountPrefix(toks, arg);
  if (name == "seq") {
    size_t space = arg.find(' ');
    if (space == std::string_view::npos)
      throw ValidationError("seq detector needs two words: " + rule);
    return CountSeq(toks, arg.substr(0, space), arg.substr(space + 1));
  }
  if (name == "compound-assign") return CountCompoundAssign(toks);
  if (name == "pre-incr") return CountIncrDecr(toks, "++", /*prefix=*/true);
  if (name == "pre-decr") return CountIncrDecr(toks, "--", /*prefix=*/true);
  if (name == "post-incr") return CountIncrDecr(toks, "++", /*prefix=*/false);
  if (name == "post-decr") return CountIncrDecr(toks, "--", /*prefix=*/false);
  if (name == "unary-plus") return CountUnaryPlus(toks);
  if (name == "binary-star") return CountBinaryStar(toks);
  if (name == "bitfield-width") return CountBitfieldWidth(toks);
  if (name == "qual-pointer") return CountQualPointer(toks, arg);
  if (name == "embedded-assign") return CountEmbeddedAssign(toks);
  if (name == "global-decl") return CountGlobalDecl(toks);
  throw ValidationError("unknown detector rule: " + rule);
}

}  // namespace detail
}  // namespace centfuzz
