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
// Lightweight C source scanning: comment/string scrubbing and a flat token
// stream. This is not a C parser; it is exactly enough structure for the
// syntactic feature detectors to count constructs without being fooled by
// comments, string literals, or adjacent punctuation.

#ifndef CENTFUZZ_CTOKENS_HPP_
#define CENTFUZZ_CTOKENS_HPP_

#include <string>
#include <string_view>
#include <vector>

namespace centfuzz {

// Replaces the contents of //- and /**/-comments, string literals, and
// character literals with spaces. Length and line structure are preserved so
// byte offsets in the result map back to the input. Unterminated constructs
// scrub to end of input rather than failing: detectors must tolerate
// syntactically odd C.
std::string ScrubSource(std::string_view source);

enum class TokenKind {
  kIdent,  // identifiers and keywords
  kNumber, // numeric literals, including hex/float/suffixed forms
  kPunct,  // operators and punctuation, longest-match
};

struct Token {
  TokenKind kind;
  std::string text;
};

// Tokenizes scrubbed source. Multi-character operators are matched longest
// first ("++" is one token, never two "+"). Number literals swallow exponent
// signs ("1.5e+3" is one token; its '+' is not an operator). Unknown bytes
// are skipped.
std::vector<Token> Tokenize(std::string_view scrubbed);

}  // namespace centfuzz

#endif  // CENTFUZZ_CTOKENS_HPP_
