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
// mockcc: a scriptable stand-in for a C compiler, used to exercise every
// branch of the differential harness without a real toolchain.
//
// Invocation mirrors a compiler driver: mockcc [-Olevel] [flags] FILE -o OUT.
// The "binary" it produces is a /bin/sh script that prints a checksum line
// derived from the source bytes, so two faithful compiles of the same
// program always produce byte-identical output.
//
// Behavior is driven by a scenario file (--scenario FILE, or the
// MOCKCC_SCENARIO environment variable). A scenario is JSON:
//
//   {"rules": [
//     {"features_all": ["volatiles","unions"], "opt": "-O3",
//      "action": "miscompile"},
//     {"features_all": ["jumps"], "action": "crash", "exit": 1}
//   ]}
//
// A rule matches when every listed feature marker appears in the source and,
// if "opt" is present, the current optimization flag equals it. The first
// matching rule decides the action; with no match the compile succeeds.
//
// Actions:
//   ok              write a faithful binary
//   crash           compiler exits nonzero ("exit", default 1) or dies by
//                   signal ("signal")
//   hang            compiler sleeps "seconds" (default 3600)
//   no-output       compiler exits 0 without writing the binary
//   miscompile      binary prints a checksum perturbed by the opt flag, so
//                   it disagrees with a faithful compile of the same source
//   exec-crash      binary dies at runtime by signal ("signal", default 11)
//   exec-hang       binary sleeps "seconds" (default 3600) at runtime
//   exec-wrong-exit binary prints the faithful checksum but exits "exit"
//
// Feature markers are the "/* feature:NAME */" lines mockgen emits for
// explicitly enabled flags; rules therefore key on planner decisions, not on
// incidental program content.

#include <sys/stat.h>
#include <time.h>

#include <csignal>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "centfuzz/harness.hpp"

namespace {

using nlohmann::json;

struct Rule {
  std::vector<std::string> features_all;
  std::string opt;  // empty: matches any optimization level
  std::string action = "ok";
  int exit_code = 1;
  int signal_no = 0;
  double seconds = 3600.0;
};

std::set<std::string> ParseMarkers(const std::string& source) {
  std::set<std::string> markers;
  std::istringstream in(source);
  std::string line;
  const std::string prefix = "/* feature:";
  const std::string suffix = " */";
  while (std::getline(in, line)) {
    if (line.rfind(prefix, 0) != 0) continue;
    if (line.size() < prefix.size() + suffix.size()) continue;
    if (line.compare(line.size() - suffix.size(), suffix.size(), suffix) != 0)
      continue;
    markers.insert(
        line.substr(prefix.size(), line.size() - prefix.size() - suffix.size()));
  }
  return markers;
}

std::vector<Rule> LoadScenario(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    std::cerr << "mockcc: cannot read scenario " << path << "\n";
    std::exit(2);
  }
  json doc;
  try {
    doc = json::parse(in);
  } catch (const std::exception& e) {
    std::cerr << "mockcc: bad scenario " << path << ": " << e.what() << "\n";
    std::exit(2);
  }
  std::vector<Rule> rules;
  if (!doc.is_object() || !doc.contains("rules")) return rules;
  for (const auto& r : doc["rules"]) {
    Rule rule;
    if (r.contains("features_all"))
      for (const auto& f : r["features_all"])
        rule.features_all.push_back(f.get<std::string>());
    if (r.contains("opt")) rule.opt = r["opt"].get<std::string>();
    if (r.contains("action")) rule.action = r["action"].get<std::string>();
    if (r.contains("exit")) rule.exit_code = r["exit"].get<int>();
    if (r.contains("signal")) rule.signal_no = r["signal"].get<int>();
    if (r.contains("seconds")) rule.seconds = r["seconds"].get<double>();
    rules.push_back(std::move(rule));
  }
  return rules;
}

void SleepSeconds(double seconds) {
  struct timespec ts;
  ts.tv_sec = static_cast<time_t>(seconds);
  ts.tv_nsec =
      static_cast<long>((seconds - static_cast<double>(ts.tv_sec)) * 1e9);
  while (nanosleep(&ts, &ts) != 0) {
  }
}

std::string DigestHex(uint64_t digest) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(digest));
  return buf;
}

void WriteBinary(const std::string& path, const std::string& body) {
  std::ofstream out(path, std::ios::trunc | std::ios::binary);
  if (!out) {
    std::cerr << "mockcc: cannot write " << path << "\n";
    std::exit(2);
  }
  out << body;
  out.close();
  if (!out.good()) {
    std::cerr << "mockcc: short write to " << path << "\n";
    std::exit(2);
  }
  ::chmod(path.c_str(), 0755);
}

}  // namespace

int main(int argc, char** argv) {
  std::string scenario_path;
  std::string source_path;
  std::string out_path;
  std::string opt;

  for (int i = 1; i < argc; ++i) {
    std::string arg = argv[i];
    if (arg == "--scenario") {
      if (i + 1 >= argc) {
        std::cerr << "mockcc: --scenario needs a value\n";
        return 2;
      }
      scenario_path = argv[++i];
    } else if (arg == "-o") {
      if (i + 1 >= argc) {
        std::cerr << "mockcc: -o needs a value\n";
        return 2;
      }
      out_path = argv[++i];
    } else if (arg.rfind("-O", 0) == 0) {
      opt = arg;
    } else if (!arg.empty() && arg[0] == '-') {
      // Tolerate pass-through compiler flags (-w, -fwrapv, ...).
    } else if (source_path.empty()) {
      source_path = arg;
    } else {
      std::cerr << "mockcc: multiple input files\n";
      return 2;
    }
  }
  if (source_path.empty() || out_path.empty()) {
    std::cerr << "mockcc: usage: mockcc [-Olevel] FILE -o OUT\n";
    return 2;
  }

  std::ifstream in(source_path, std::ios::binary);
  if (!in) {
    std::cerr << "mockcc: cannot read " << source_path << "\n";
    return 1;
  }
  std::ostringstream raw;
  raw << in.rdbuf();
  const std::string source = raw.str();
  if (source.empty()) {
    std::cerr << "mockcc: empty input " << source_path << "\n";
    return 1;
  }

  if (scenario_path.empty()) {
    const char* env = ::getenv("MOCKCC_SCENARIO");
    if (env != nullptr && env[0] != '\0') scenario_path = env;
  }
  std::vector<Rule> rules;
  if (!scenario_path.empty()) rules = LoadScenario(scenario_path);

  const std::set<std::string> markers = ParseMarkers(source);
  const Rule* matched = nullptr;
  for (const auto& rule : rules) {
    if (!rule.opt.empty() && rule.opt != opt) continue;
    bool all = true;
    for (const auto& f : rule.features_all) {
      if (markers.count(f) == 0) {
        all = false;
        break;
      }
    }
    if (all) {
      matched = &rule;
      break;
    }
  }

  const uint64_t digest = centfuzz::Fnv1a64(source);
  const std::string action = matched != nullptr ? matched->action : "ok";

  if (action == "crash") {
    if (matched->signal_no > 0) {
      ::raise(matched->signal_no);
      SleepSeconds(1.0);  // raise should not return; fail loudly if it does
      return 99;
    }
    return matched->exit_code;
  }
  if (action == "hang") {
    SleepSeconds(matched->seconds);
    return 0;
  }
  if (action == "no-output") return 0;

  std::string checksum = DigestHex(digest);
  std::string prologue;
  std::string epilogue = "exit 0\n";
  if (action == "miscompile") {
    checksum = DigestHex(digest ^ centfuzz::Fnv1a64(opt) ^
                         0x1ULL);
  } else if (action == "exec-crash") {
    int sig = matched->signal_no > 0 ? matched->signal_no : 11;
    prologue = "kill -" + std::to_string(sig) + " $$\n";
  } else if (action == "exec-hang") {
    char secs[32];
    std::snprintf(secs, sizeof(secs), "%.3f", matched->seconds);
    prologue = std::string("sleep ") + secs + "\n";
  } else if (action == "exec-wrong-exit") {
    epilogue = "exit " + std::to_string(matched->exit_code) + "\n";
  } else if (action != "ok") {
    std::cerr << "mockcc: unknown scenario action: " << action << "\n";
    return 2;
  }

  std::string body = "#!/bin/sh\n" + prologue + "printf 'checksum = %s\\n' '" +
                     checksum + "'\n" + epilogue;
  WriteBinary(out_path, body);
  return 0;
}
