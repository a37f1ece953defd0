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
// Shared test helpers: temp directories, paths to the built tools, a CLI
// driver, and the fixture LCG.

#ifndef CENTFUZZ_TESTS_TESTUTIL_HPP_
#define CENTFUZZ_TESTS_TESTUTIL_HPP_

#include <unistd.h>

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "src/subprocess.hpp"

namespace centfuzz::testutil {

namespace fs = std::filesystem;

inline fs::path FixtureDir() { return CENTFUZZ_FIXTURE_DIR; }
inline std::string CentfuzzBin() { return CENTFUZZ_BIN; }
inline std::string MockgenBin() { return CENTFUZZ_MOCKGEN; }
inline std::string MockccBin() { return CENTFUZZ_MOCKCC; }

// Self-deleting scratch directory.
class TempDir {
 public:
  TempDir() {
    std::string tmpl = (fs::temp_directory_path() / "centfuzz-test-XXXXXX").string();
    std::vector<char> buf(tmpl.begin(), tmpl.end());
    buf.push_back('\0');
    char* made = ::mkdtemp(buf.data());
    if (made == nullptr) std::abort();
    path_ = made;
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const fs::path& path() const { return path_; }
  fs::path operator/(const std::string& leaf) const { return path_ / leaf; }

 private:
  fs::path path_;
};

inline void WriteFile(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::trunc | std::ios::binary);
  out << content;
}

inline std::string ReadFile(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// The LCG behind randomized fixtures and property datasets; kept identical
// to tests/oracle/*.py so frozen expectations and regenerated inputs agree
// bit for bit: state' = state * 6364136223846793005 + 1442695040888963407
// (mod 2^64); unit doubles are (state' >> 11) / 2^53.
class Lcg {
 public:
  explicit Lcg(uint64_t seed) : state_(seed) {}
  uint64_t NextU64() {
    state_ = state_ * 6364136223846793005ULL + 1442695040888963407ULL;
    return state_;
  }
  double NextUnit() {
    return static_cast<double>(NextU64() >> 11) /
           static_cast<double>(1ULL << 53);
  }

 private:
  uint64_t state_;
};

struct CliResult {
  int exit_code = -1;          // -1: did not exit normally
  int term_signal = -1;
  bool timed_out = false;
  std::string out;             // stdout only
};

// Runs the main binary (or any program) with the given arguments, capturing
// stdout. stderr passes through to the test log. A timeout SIGKILLs the
// process group, which doubles as the mid-campaign kill switch in the
// resume-integrity tests.
inline CliResult RunTool(const std::string& bin,
                         const std::vector<std::string>& args,
                         double timeout_seconds = 120.0,
                         const std::string& working_dir = "") {
  detail::RunSpec spec;
  spec.argv.push_back(bin);
  for (const auto& a : args) spec.argv.push_back(a);
  spec.timeout_seconds = timeout_seconds;
  spec.capture_stdout = true;
  spec.working_dir = working_dir;
  detail::RunResult r = detail::RunChild(spec, nullptr);
  CliResult res;
  res.out = r.stdout_bytes;
  switch (r.status) {
    case detail::RunStatus::kExited:
      res.exit_code = r.exit_code;
      break;
    case detail::RunStatus::kSignaled:
      res.term_signal = r.term_signal;
      break;
    case detail::RunStatus::kTimeout:
      res.timed_out = true;
      break;
    default:
      break;
  }
  return res;
}

inline CliResult RunCli(const std::vector<std::string>& args,
                        double timeout_seconds = 120.0,
                        const std::string& working_dir = "") {
  return RunTool(CentfuzzBin(), args, timeout_seconds, working_dir);
}

}  // namespace centfuzz::testutil

#endif  // CENTFUZZ_TESTS_TESTUTIL_HPP_
