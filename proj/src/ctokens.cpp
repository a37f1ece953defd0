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

#include "centfuzz/ctokens.hpp"

#include <array>
#include <cctype>

namespace centfuzz {

namespace {

inline bool IsIdentStart(char c) {
  return std::isalpha(static_cast<unsigned char>(c)) || c == '_';
}

inline bool IsIdentCont(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
}

inline bool IsDigit(char c) {
  return std::isdigit(static_cast<unsigned char>(c));
}

}  // namespace

std::string ScrubSource(std::string_view source) {
  std::string out(source);
  enum class State { kCode, kLineComment, kBlockComment, kString, kChar };
  State state = State::kCode;
  size_t n = source.size();
  for (size_t i = 0; i < n; ++i) {
    char c = source[i];
    char next = (i + 1 < n) ? source[i + 1] : '\0';
    switch (state) {
      case State::kCode:
        if (c == '/' && next == '/') {
          state = State::kLineComment;
          out[i] = out[i + 1] = ' ';
          ++i;
        } else if (c == '/' && next == '*') {
          state = State::kBlockComment;
          out[i] = out[i + 1] = ' ';
          ++i;
        } else if (c == '"') {
          state = State::kString;
          out[i] = ' ';
        } else if (c == '\'') {
          state = State::kChar;
          out[i] = ' ';
        }
        break;
      case State::kLineComment:
        if (c == '\n') {
          state = State::kCode;
        } else {
          out[i] = ' ';
        }
        break;
      case State::kBlockComment:
        if (c == '*' && next == '/') {
          out[i] = out[i + 1] = ' ';
          ++i;
          state = State::kCode;
        } else if (c != '\n') {
          out[i] = ' ';
        }
        break;
      case State::kString:
        if (c == '\\' && i + 1 < n) {
          out[i] = ' ';
          if (next != '\n') out[i + 1] = ' ';
          ++i;
        } else if (c == '"') {
          out[i] = ' ';
          state = State::kCode;
        } else if (c == '\n') {
          // Unescaped newline: the literal was malformed; bail back to code
          // so the rest of the file still tokenizes.
          state = State::kCode;
        } else {
          out[i] = ' ';
        }
        break;
      case State::kChar:
        if (c == '\\' && i + 1 < n) {
          out[i] = ' ';
          if (next != '\n') out[i + 1] = ' ';
          ++i;
        } else if (c == '\'') {
          out[i] = ' ';
          state = State::kCode;
        } else if (c == '\n') {
          state = State::kCode;
        } else {
          out[i] = ' ';
        }
        break;
    }
  }
  return out;
}

std::vector<Token> Tokenize(std::string_view s) {
  // Three-character operators first, then two, then singles fall through.
  static constexpr std::array<std::string_view, 2> kPunct3 = {"<<=", ">>="};
  static constexpr std::array<std::string_view, 17> kPunct2 = {
      "++", "--", "->", "<<", ">>", "<=", ">=", "==", "!=",
      "&&", "||", "+=", "-=", "*=", "/=", "%=", "&="};
  static constexpr std::array<std::string_view, 2> kPunct2b = {"|=", "^="};

  std::vector<Token> tokens;
  size_t n = s.size();
  size_t i = 0;
  while (i < n) {
    char c = s[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    if (IsIdentStart(c)) {
      size_t j = i + 1;
      while (j < n && IsIdentCont(s[j])) ++j;
      tokens.push_back({TokenKind::kIdent, std::string(s.substr(i, j - i))});
      i = j;
      continue;
    }
    if (IsDigit(c) || (c == '.' && i + 1 < n && IsDigit(s[i + 1]))) {
      // Number: pp-number style scan. Swallows hex digits, suffixes, the
      // decimal point, and exponent signs so "1.5e+3" never emits a '+'.
      size_t j = i + 1;
      while (j < n) {
        char d = s[j];
        if (IsIdentCont(d) || d == '.') {
          ++j;
        } else if ((d == '+' || d == '-') &&
                   (s[j - 1] == 'e' || s[j - 1] == 'E' || s[j - 1] == 'p' ||
                    s[j - 1] == 'P')) {
          ++j;
        } else {
          break;
        }
      }
      tokens.push_back({TokenKind::kNumber, std::string(s.substr(i, j - i))});
      i = j;
      continue;
    }
    // Punctuation: longest match.
    bool matched = false;
    for (auto p : kPunct3) {
      if (s.substr(i, 3) == p) {
        tokens.push_back({TokenKind::kPunct, std::string(p)});
        i += 3;
        matched = true;
        break;
      }
    }
    if (matched) continue;
    for (auto p : kPunct2) {
      if (s.substr(i, 2) == p) {
        tokens.push_back({TokenKind::kPunct, std::string(p)});
        i += 2;
        matched = true;
        break;
      }
    }
    if (matched) continue;
    for (auto p : kPunct2b) {
      if (s.substr(i, 2) == p) {
        tokens.push_back({TokenKind::kPunct, std::string(p)});
        i += 2;
        matched = true;
        break;
      }
    }
    if (matched) continue;
    static constexpr std::string_view kSingles = "+-*/%=<>!&|^~?:;,.()[]{}#";
    if (kSingles.find(c) != std::string_view::npos) {
      tokens.push_back({TokenKind::kPunct, std::string(1, c)});
    }
    // Any other byte (stray backslash, control char) is dropped.
    ++i;
  }
  return tokens;
}

}  // namespace centfuzz
