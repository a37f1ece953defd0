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

#ifndef CENTFUZZ_ERRORS_HPP_
#define CENTFUZZ_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace centfuzz {

// Base class for all errors raised by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad user input: out-of-range parameters, inconsistent files, contract
// violations. The CLI maps these to exit code 1.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Malformed on-disk artifact (catalog, CSV, model, plan, records). Messages
// name the file and, where possible, the offending line. Exit code 1.
class ParseError : public Error {
 public:
  using Error::Error;
};

// The surrounding environment is unusable: a configured tool is missing or
// cannot be spawned. The CLI maps these to exit code 2.
class EnvironmentError : public Error {
 public:
  using Error::Error;
};

// Internal control-flow exception: a cooperative cancellation request (e.g.
// SIGINT) interrupted a trial mid-flight. Never escapes the campaign driver.
class CancelledError : public Error {
 public:
  CancelledError() : Error("cancelled") {}
};

}  // namespace centfuzz

#endif  // CENTFUZZ_ERRORS_HPP_
