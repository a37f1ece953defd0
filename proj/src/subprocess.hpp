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
// Child process runner with wall-clock deadlines. Each child runs in its own
// process group; on timeout or cancellation the whole group is killed, so
// grandchildren (a compiler's cc1, a /bin/sh wrapper's sleep) cannot outlive
// the trial.

#ifndef CENTFUZZ_SRC_SUBPROCESS_HPP_
#define CENTFUZZ_SRC_SUBPROCESS_HPP_

#include <atomic>
#include <string>
#include <vector>

namespace centfuzz {
namespace detail {

struct RunSpec {
  std::vector<std::string> argv;    // argv[0] = executable path
  double timeout_seconds = 10.0;
  bool capture_stdout = true;       // false: child stdout goes to /dev/null
  std::string working_dir;          // empty: inherit
  // Extra environment entries ("NAME=value") appended to the inherited
  // environment.
  std::vector<std::string> extra_env;
};

enum class RunStatus {
  kExited,       // child exited; exit_code valid
  kSignaled,     // child killed by a signal; term_signal valid
  kTimeout,      // deadline hit; group killed
  kSpawnFailed,  // exec failed; spawn_errno valid
  kCancelled,    // cancellation flag seen; group killed
};

struct RunResult {
  RunStatus status = RunStatus::kSpawnFailed;
  int exit_code = -1;
  int term_signal = -1;
  int spawn_errno = 0;
  std::string stdout_bytes;
  double wall_seconds = 0.0;  // >= timeout_seconds when status == kTimeout
};

// Runs the child to completion, deadline, or cancellation. `cancel` may be
// null; when non-null it is polled while waiting and a set flag kills the
// group and reports kCancelled. Stderr is inherited (diagnostics flow to the
// parent's stderr).
RunResult RunChild(const RunSpec& spec, const std::atomic<bool>* cancel);

}  // namespace detail
}  // namespace centfuzz

#endif  // CENTFUZZ_SRC_SUBPROCESS_HPP_
