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
// Differential-testing harness: generate a program, compile it at a low and
// a high optimization level, run both binaries, compare, classify.

#ifndef CENTFUZZ_HARNESS_HPP_
#define CENTFUZZ_HARNESS_HPP_

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "centfuzz/features.hpp"
#include "centfuzz/planner.hpp"

namespace centfuzz {

struct Toolchain {
  // Generator command: invoked as <cmd...> <feature flags> --seed N -o FILE.
  std::vector<std::string> generator_cmd;
  // Compiler command: invoked as <cmd...> <opt level> <extra args> FILE -o BIN.
  std::vector<std::string> compiler_cmd;
  std::vector<std::string> compiler_extra_args;
  std::string opt_low = "-O0";
  std::string opt_high = "-O3";
  double compile_timeout_seconds = 10.0;
  double execute_timeout_seconds = 10.0;

  void Validate() const;
};

// Probes that the configured generator and compiler exist and are runnable
// (resolved via PATH when not a path). Throws EnvironmentError naming the
// missing command.
void ValidateToolchainBinaries(const Toolchain& tc);

enum class StageKind { kOk, kCrash, kTimeout };

std::string ToString(StageKind k);
StageKind StageKindFromString(const std::string& s);

// Outcome of one compile or execute stage. Output is captured as a 64-bit
// FNV-1a digest plus the byte length (enough to compare byte equality) and a
// short sanitized preview for humans.
struct StageResult {
  StageKind kind = StageKind::kOk;
  int exit_status = 0;       // valid when the stage process exited
  int term_signal = -1;      // valid when the stage process died by signal
  uint64_t output_digest = 0;
  uint64_t output_bytes = 0;
  std::string output_preview;
  double wall_seconds = 0.0;  // >= the stage timeout when kind == kTimeout
};

// Trial classification. Differential verdicts treat the unoptimized build as
// the reference behavior.
enum class FailureClass {
  kPass,
  kCrashO0Only,
  kCrashO3Only,
  kCrashBoth,
  kTimeoutO0Only,
  kTimeoutO3Only,
  kTimeoutBoth,
  kMiscompilation,
  kExecInconclusive,
};

std::string ToString(FailureClass c);
FailureClass FailureClassFromString(const std::string& s);

// True for the classes that evidence an optimization-dependent compiler bug:
// a crash at exactly one level, or differing runtime behavior. Crashes and
// timeouts at both levels implicate the program or the machine, not the
// optimizer; execution-stage breakage is inconclusive.
bool IsDifferentialFailure(FailureClass c);

// Classifies a trial from its stage results.
//   - compile_low/compile_high are always present.
//   - exec results must be present iff both compiles are kOk (throws
//     ValidationError otherwise).
//   - Compile outcomes dominate: any compile-stage crash/timeout classifies
//     the trial before execution is considered, and a crash at one level
//     beats a timeout at the other.
//   - With both compiles ok: any exec crash or timeout -> kExecInconclusive;
//     otherwise equal output bytes and equal exit status -> kPass, anything
//     else -> kMiscompilation.
FailureClass Classify(const StageResult& compile_low,
                      const StageResult& compile_high,
                      const std::optional<StageResult>& exec_low,
                      const std::optional<StageResult>& exec_high);

// 64-bit FNV-1a over a byte string.
uint64_t Fnv1a64(std::string_view bytes);

// Low-level stages. All honor the optional cancellation flag by throwing
// CancelledError.

// Runs the generator; returns the path of the written program. A generator
// that fails, times out, or produces no output throws ValidationError (the
// caller marks the trial skipped); a generator that cannot be spawned throws
// EnvironmentError.
std::filesystem::path GenerateProgram(const GeneratorConfig& config,
                                      const FeatureCatalog& catalog,
                                      const Toolchain& tc,
                                      const std::filesystem::path& work_dir,
                                      const std::atomic<bool>* cancel = nullptr);

// Compiles `program` at `opt_level` into `out_binary`. kOk implies the
// binary exists (a compiler exiting 0 without producing one is recorded as a
// crash). A compiler that cannot be spawned throws EnvironmentError: that is
// a broken campaign configuration, not a compiler bug.
StageResult CompileProgram(const std::filesystem::path& program,
                           const std::string& opt_level, const Toolchain& tc,
                           const std::filesystem::path& out_binary,
                           const std::atomic<bool>* cancel = nullptr);

// Runs a compiled binary, capturing stdout. Spawn failure (unrunnable
// binary) is recorded as a crash with exit status 127.
StageResult ExecuteBinary(const std::filesystem::path& binary,
                          const Toolchain& tc,
                          const std::atomic<bool>* cancel = nullptr);

// One complete trial record.
struct TrialRecord {
  uint64_t trial_index = 0;
  GeneratorConfig config;
  // Program path relative to the campaign directory (or absolute for
  // standalone use).
  std::string program_path;
  bool skipped = false;
  std::string skip_reason;
  std::optional<StageResult> compile_low;
  std::optional<StageResult> compile_high;
  std::optional<StageResult> exec_low;
  std::optional<StageResult> exec_high;
  FailureClass failure_class = FailureClass::kPass;

  // Recomputes the class from the stored stage results and checks it matches
  // failure_class. Throws ValidationError on inconsistency.
  void CheckConsistent() const;
};

// Runs one trial end to end in `trial_dir` (created if needed): generate,
// compile twice, execute twice (when both compiles succeed), classify.
// Generator trouble yields a skipped record. When `keep_artifacts` is false
// the trial directory is removed afterwards unless the trial is a
// differential failure.
TrialRecord RunTrial(const GeneratorConfig& config, const FeatureCatalog& catalog,
                     const Toolchain& tc, const std::filesystem::path& trial_dir,
                     bool keep_artifacts,
                     const std::atomic<bool>* cancel = nullptr);

}  // namespace centfuzz

#endif  // CENTFUZZ_HARNESS_HPP_
