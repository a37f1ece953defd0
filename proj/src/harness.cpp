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

#include "centfuzz/harness.hpp"

#include <unistd.h>

#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>

#include "centfuzz/errors.hpp"
#include "src/subprocess.hpp"

namespace centfuzz {

namespace fs = std::filesystem;

void Toolchain::Validate() const {
  if (generator_cmd.empty())
    throw ValidationError("toolchain: generator command is empty");
  if (compiler_cmd.empty())
    throw ValidationError("toolchain: compiler command is empty");
  if (opt_low.empty() || opt_high.empty())
    throw ValidationError("toolchain: optimization levels must be non-empty");
  if (opt_low == opt_high)
    throw ValidationError(
        "toolchain: low and high optimization levels are identical");
  if (!(compile_timeout_seconds > 0.0))
    throw ValidationError("toolchain: compile timeout must be positive");
  if (!(execute_timeout_seconds > 0.0))
    throw ValidationError("toolchain: execute timeout must be positive");
}

namespace {

// Resolves a command word the way exec*p does: a word with a slash must be
// an executable file; otherwise PATH decides.
bool CommandIsRunnable(const std::string& cmd) {
  if (cmd.find('/') != std::string::npos)
    return ::access(cmd.c_str(), X_OK) == 0;
  const char* path = ::getenv("PATH");
  if (path == nullptr) return false;
  std::string p(path);
  size_t pos = 0;
  while (pos <= p.size()) {
    size_t colon = p.find(':', pos);
    std::string dir =
        p.substr(pos, colon == std::string::npos ? p.size() - pos : colon - pos);
    if (!dir.empty()) {
      std::string full = dir + "/" + cmd;
      if (::access(full.c_str(), X_OK) == 0) return true;
    }
    if (colon == std::string::npos) break;
    pos = colon + 1;
  }
  return false;
}

std::string Sanitize(std::string_view bytes, size_t limit) {
  std::string out;
  out.reserve(std::min(bytes.size(), limit));
  for (char c : bytes) {
    if (out.size() >= limit) break;
    if (c >= 0x20 && c < 0x7f)
      out += c;
    else if (c == '\n')
      out += "\\n";
    else
      out += '.';
  }
  return out;
}

StageResult StageFromRun(const detail::RunResult& r) {
  StageResult s;
  s.wall_seconds = r.wall_seconds;
  s.output_digest = Fnv1a64(r.stdout_bytes);
  s.output_bytes = r.stdout_bytes.size();
  s.output_preview = Sanitize(r.stdout_bytes, 80);
  switch (r.status) {
    case detail::RunStatus::kExited:
      s.kind = StageKind::kOk;
      s.exit_status = r.exit_code;
      break;
    case detail::RunStatus::kSignaled:
      s.kind = StageKind::kCrash;
      s.term_signal = r.term_signal;
      break;
    case detail::RunStatus::kTimeout:
      s.kind = StageKind::kTimeout;
      break;
    case detail::RunStatus::kSpawnFailed:
    case detail::RunStatus::kCancelled:
      // Callers special-case these before building a StageResult.
      s.kind = StageKind::kCrash;
      s.exit_status = 127;
      break;
  }
  return s;
}

}  // namespace

void ValidateToolchainBinaries(const Toolchain& tc) {
  tc.Validate();
  if (!CommandIsRunnable(tc.generator_cmd[0]))
    throw EnvironmentError("generator not found or not executable: " +
                           tc.generator_cmd[0]);
  if (!CommandIsRunnable(tc.compiler_cmd[0]))
    throw EnvironmentError("compiler not found or not executable: " +
                           tc.compiler_cmd[0]);
}

std::string ToString(StageKind k) {
  switch (k) {
    case StageKind::kOk: return "ok";
    case StageKind::kCrash: return "crash";
    case StageKind::kTimeout: return "timeout";
  }
  throw ValidationError("unknown stage kind");
}

StageKind StageKindFromString(const std::string& s) {
  if (s == "ok") return StageKind::kOk;
  if (s == "crash") return StageKind::kCrash;
  if (s == "timeout") return StageKind::kTimeout;
  throw ValidationError("unknown stage kind: " + s);
}

std::string ToString(FailureClass c) {
  switch (c) {
    case FailureClass::kPass: return "pass";
    case FailureClass::kCrashO0Only: return "crash_o0_only";
    case FailureClass::kCrashO3Only: return "crash_o3_only";
    case FailureClass::kCrashBoth: return "crash_both";
    case FailureClass::kTimeoutO0Only: return "timeout_o0_only";
    case FailureClass::kTimeoutO3Only: return "timeout_o3_only";
    case FailureClass::kTimeoutBoth: return "timeout_both";
    case FailureClass::kMiscompilation: return "miscompilation";
    case FailureClass::kExecInconclusive: return "exec_inconclusive";
  }
  throw ValidationError("unknown failure class");
}

FailureClass FailureClassFromString(const std::string& s) {
  if (s == "pass") return FailureClass::kPass;
  if (s == "crash_o0_only") return FailureClass::kCrashO0Only;
  if (s == "crash_o3_only") return FailureClass::kCrashO3Only;
  if (s == "crash_both") return FailureClass::kCrashBoth;
  if (s == "timeout_o0_only") return FailureClass::kTimeoutO0Only;
  if (s == "timeout_o3_only") return FailureClass::kTimeoutO3Only;
  if (s == "timeout_both") return FailureClass::kTimeoutBoth;
  if (s == "miscompilation") return FailureClass::kMiscompilation;
  if (s == "exec_inconclusive") return FailureClass::kExecInconclusive;
  throw ValidationError("unknown failure class: " + s);
}

bool IsDifferentialFailure(FailureClass c) {
  return c == FailureClass::kCrashO0Only || c == FailureClass::kCrashO3Only ||
         c == FailureClass::kMiscompilation;
}

FailureClass Classify(const StageResult& compile_low,
                      const StageResult& compile_high,
                      const std::optional<StageResult>& exec_low,
                      const std::optional<StageResult>& exec_high) {
  bool both_ok = compile_low.kind == StageKind::kOk &&
                 compile_high.kind == StageKind::kOk;
  if (both_ok != (exec_low.has_value() && exec_high.has_value()) ||
      exec_low.has_value() != exec_high.has_value())
    throw ValidationError(
        "execution results must be present exactly when both compiles "
        "succeed");

  if (!both_ok) {
    bool crash_low = compile_low.kind == StageKind::kCrash;
    bool crash_high = compile_high.kind == StageKind::kCrash;
    // A crash at either level outranks a timeout at the other: the crash is
    // the harder evidence.
    if (crash_low && crash_high) return FailureClass::kCrashBoth;
    if (crash_low) return FailureClass::kCrashO0Only;
    if (crash_high) return FailureClass::kCrashO3Only;
    bool to_low = compile_low.kind == StageKind::kTimeout;
    bool to_high = compile_high.kind == StageKind::kTimeout;
    if (to_low && to_high) return FailureClass::kTimeoutBoth;
    if (to_low) return FailureClass::kTimeoutO0Only;
    return FailureClass::kTimeoutO3Only;
  }

  if (exec_low->kind != StageKind::kOk || exec_high->kind != StageKind::kOk)
    return FailureClass::kExecInconclusive;

  bool same_output = exec_low->output_digest == exec_high->output_digest &&
                     exec_low->output_bytes == exec_high->output_bytes;
  bool same_exit = exec_low->exit_status == exec_high->exit_status;
  if (same_output && same_exit) return FailureClass::kPass;
  return FailureClass::kMiscompilation;
}

uint64_t Fnv1a64(std::string_view bytes) {
  uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::filesystem::path GenerateProgram(const GeneratorConfig& config,
                                      const FeatureCatalog& catalog,
                                      const Toolchain& tc,
                                      const std::filesystem::path& work_dir,
                                      const std::atomic<bool>* cancel) {
  fs::create_directories(work_dir);
  fs::path program = work_dir / "prog.c";

  detail::RunSpec spec;
  spec.argv = tc.generator_cmd;
  for (auto& f : RenderFlags(config, catalog)) spec.argv.push_back(f);
  spec.argv.push_back("-o");
  spec.argv.push_back(program.string());
  spec.timeout_seconds = tc.compile_timeout_seconds;
  spec.capture_stdout = false;

  detail::RunResult r = detail::RunChild(spec, cancel);
  switch (r.status) {
    case detail::RunStatus::kCancelled:
      throw CancelledError();
    case detail::RunStatus::kSpawnFailed:
      throw EnvironmentError("cannot spawn generator " + tc.generator_cmd[0] +
                             ": " + std::strerror(r.spawn_errno));
    case detail::RunStatus::kTimeout:
      throw ValidationError("generator timed out after " +
                            std::to_string(spec.timeout_seconds) + "s");
    case detail::RunStatus::kSignaled:
      throw ValidationError("generator killed by signal " +
                            std::to_string(r.term_signal));
    case detail::RunStatus::kExited:
      if (r.exit_code != 0)
        throw ValidationError("generator exited with status " +
                              std::to_string(r.exit_code));
      break;
  }
  std::error_code ec;
  uintmax_t size = fs::file_size(program, ec);
  if (ec || size == 0)
    throw ValidationError("generator produced no output file");
  return program;
}

StageResult CompileProgram(const std::filesystem::path& program,
                           const std::string& opt_level, const Toolchain& tc,
                           const std::filesystem::path& out_binary,
                           const std::atomic<bool>* cancel) {
  detail::RunSpec spec;
  spec.argv = tc.compiler_cmd;
  spec.argv.push_back(opt_level);
  for (const auto& a : tc.compiler_extra_args) spec.argv.push_back(a);
  spec.argv.push_back(program.string());
  spec.argv.push_back("-o");
  spec.argv.push_back(out_binary.string());
  spec.timeout_seconds = tc.compile_timeout_seconds;
  spec.capture_stdout = true;

  detail::RunResult r = detail::RunChild(spec, cancel);
  if (r.status == detail::RunStatus::kCancelled) throw CancelledError();
  if (r.status == detail::RunStatus::kSpawnFailed)
    throw EnvironmentError("cannot spawn compiler " + tc.compiler_cmd[0] +
                           ": " + std::strerror(r.spawn_errno));
  StageResult s = StageFromRun(r);
  if (s.kind == StageKind::kOk) {
    if (s.exit_status != 0) {
      s.kind = StageKind::kCrash;
    } else {
      std::error_code ec;
      if (!fs::exists(out_binary, ec) || ec) {
        // Claimed success without an output binary: broken compiler run.
        s.kind = StageKind::kCrash;
      }
    }
  }
  return s;
}

StageResult ExecuteBinary(const std::filesystem::path& binary,
                          const Toolchain& tc,
                          const std::atomic<bool>* cancel) {
  detail::RunSpec spec;
  spec.argv = {binary.string()};
  spec.timeout_seconds = tc.execute_timeout_seconds;
  spec.capture_stdout = true;

  detail::RunResult r = detail::RunChild(spec, cancel);
  if (r.status == detail::RunStatus::kCancelled) throw CancelledError();
  if (r.status == detail::RunStatus::kSpawnFailed) {
    // Unrunnable binary: evidence about the produced artifact, not about the
    // campaign configuration; classed per the usual exec rules.
    StageResult s;
    s.kind = StageKind::kCrash;
    s.exit_status = 127;
    s.wall_seconds = r.wall_seconds;
    s.output_digest = Fnv1a64("");
    s.output_bytes = 0;
    return s;
  }
  // A normal exit of any status is a completed run: the exit status joins
  // stdout in the output comparison. Only signal deaths and timeouts leave
  // no comparable result.
  return StageFromRun(r);
}

void TrialRecord::CheckConsistent() const {
  if (skipped) {
    if (compile_low || compile_high || exec_low || exec_high)
      throw ValidationError("skipped trial carries stage results");
    return;
  }
  if (!compile_low || !compile_high)
    throw ValidationError("trial record missing compile results");
  FailureClass expect = Classify(*compile_low, *compile_high, exec_low, exec_high);
  if (expect != failure_class)
    throw ValidationError("stored class " + ToString(failure_class) +
                          " does not match stage results (" + ToString(expect) +
                          ")");
}

TrialRecord RunTrial(const GeneratorConfig& config, const FeatureCatalog& catalog,
                     const Toolchain& tc, const std::filesystem::path& trial_dir,
                     bool keep_artifacts, const std::atomic<bool>* cancel) {
  TrialRecord rec;
  rec.trial_index = config.trial_index;
  rec.config = config;

  fs::path program;
  try {
    program = GenerateProgram(config, catalog, tc, trial_dir, cancel);
  } catch (const ValidationError& e) {
    rec.skipped = true;
    rec.skip_reason = e.what();
    if (!keep_artifacts) {
      std::error_code ec;
      fs::remove_all(trial_dir, ec);
    }
    return rec;
  }
  rec.program_path = program.string();

  fs::path bin_low = trial_dir / "bin-low";
  fs::path bin_high = trial_dir / "bin-high";
  rec.compile_low = CompileProgram(program, tc.opt_low, tc, bin_low, cancel);
  rec.compile_high = CompileProgram(program, tc.opt_high, tc, bin_high, cancel);
  if (rec.compile_low->kind == StageKind::kOk &&
      rec.compile_high->kind == StageKind::kOk) {
    rec.exec_low = ExecuteBinary(bin_low, tc, cancel);
    rec.exec_high = ExecuteBinary(bin_high, tc, cancel);
  }
  rec.failure_class = Classify(*rec.compile_low, *rec.compile_high, rec.exec_low,
                               rec.exec_high);

  if (!keep_artifacts && !IsDifferentialFailure(rec.failure_class)) {
    std::error_code ec;
    fs::remove_all(trial_dir, ec);
  }
  return rec;
}

}  // namespace centfuzz
