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

#ifndef CENTFUZZ_SRC_DETECTORS_HPP_
#define CENTFUZZ_SRC_DETECTORS_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "centfuzz/ctokens.hpp"

namespace centfuzz {
namespace detail {

// True if `rule` names a detector the registry can evaluate
// ("undetectable" included).
bool IsKnownDetector(const std::string& rule);

// Evaluates one detector rule over a token stream. Pure and deterministic.
// "undetectable" always returns 0. Unknown rule names throw ValidationError
// (callers validate at catalog load, so this is a programming error path).
int64_t CountDetector(const std::vector<Token>& tokens, const std::string& rule);

}  // namespace detail
}  // namespace centfuzz

#endif  // CENTFUZZ_SRC_DETECTORS_HPP_
