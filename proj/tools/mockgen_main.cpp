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
// mockgen: a deterministic stand-in for a Csmith-style program generator.
//
// Accepts the same flag shape the harness emits (--feature / --no-feature /
// --seed N / -o FILE) and writes a small self-checksumming C program. The
// output is a pure function of the flag set and the seed. Every explicitly
// enabled feature is recorded as a "/* feature:NAME */" marker line, which is
// what the mock compiler's scenario rules match on; features the caller left
// unspecified may still contribute code (a per-seed coin) but never markers,
// so scenario behavior depends only on decisions the planner actually made.
//
// Test hooks (placed in the generator command itself, not emitted flags):
//   --mock-exit N    exit with status N before writing anything
//   --mock-sleep S   sleep S seconds first (timeout-path testing)
//   --mock-empty     write a zero-byte file

#include <time.h>

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

#include "centfuzz/harness.hpp"
#include "centfuzz/rng.hpp"

namespace {

struct Snippet {
  const char* name;
  const char* file_scope;  // nullptr when nothing at file scope
  const char* body;        // nullptr when the feature leaves no code
};

// One compilable construct per feature the builtin catalog can detect.
// Constructs are designed not to leak each other's syntax: the only '*'
// multiplications live in "muls", the only '/' in "divs", and casts through
// pointers always go via "(unsigned long)" so the dereference star sits
// after a type word.
const Snippet kSnippets[] = {
    {"arrays", "static int arr_v[4] = {1, 2, 3, 4};",
     "crc ^= (unsigned long)arr_v[2];"},
    {"bitfields",
     "struct bits { unsigned a : 3; unsigned b : 5; };\n"
     "static struct bits bits_v = {1, 2};",
     "crc ^= (unsigned long)bits_v.a;"},
    {"builtins", nullptr, "crc ^= (unsigned long)__builtin_abs(-5);"},
    {"comma-operators", nullptr,
     "{ int t; t = (1, 2); crc ^= (unsigned long)t; }"},
    {"compound-assignment", nullptr, "crc += 7UL;"},
    {"const-pointers",
     "static const int cp_cell = 42;\n"
     "static const int *cp_ptr = &cp_cell;",
     "crc ^= (unsigned long)*cp_ptr;"},
    {"consts", "static const int const_v = 9;",
     "crc ^= (unsigned long)const_v;"},
    {"divs", nullptr, "crc ^= (crc | 1UL) / 3UL;"},
    {"embedded-assigns", nullptr,
     "{ int ea = 0; if ((ea = 5) != 0) { crc ^= (unsigned long)ea; } }"},
    {"float", "static double float_v = 1.5;",
     "crc ^= (unsigned long)(float_v + float_v);"},
    {"global-variables", "static long g_state = 7;",
     "g_state = (long)(g_state ^ 3L);\n  crc ^= (unsigned long)g_state;"},
    {"inline-function",
     "static inline int inline_fn(int x) { return x ^ 3; }",
     "crc ^= (unsigned long)inline_fn(5);"},
    {"int8", "static int8_t i8_v = 5;", "crc ^= (unsigned long)i8_v;"},
    {"jumps", nullptr,
     "if (crc != 0xdeadUL) goto skip_label;\n  crc ^= 1UL;\n"
     "skip_label:\n  crc ^= 2UL;"},
    {"longlong", "static long long ll_v = 123456789LL;",
     "crc ^= (unsigned long)ll_v;"},
    {"math64",
     "static int64_t m64_v = 1000;\nstatic uint64_t mu64_v = 2000UL;",
     "crc ^= (unsigned long)(m64_v + (int64_t)mu64_v);"},
    {"muls", nullptr, "crc ^= (crc | 3UL) * 5UL;"},
    {"packed-struct",
     "struct __attribute__((packed)) packed_rec { char tag; int value; };\n"
     "static struct packed_rec packed_v = {1, 2};",
     "crc ^= (unsigned long)packed_v.value;"},
    {"post-decr-operator", nullptr,
     "{ int pd = 9; pd--; crc ^= (unsigned long)pd; }"},
    {"post-incr-operator", nullptr,
     "{ int pi = 3; pi++; crc ^= (unsigned long)pi; }"},
    {"pre-decr-operator", nullptr,
     "{ int rd = 9; --rd; crc ^= (unsigned long)rd; }"},
    {"pre-incr-operator", nullptr,
     "{ int ri = 3; ++ri; crc ^= (unsigned long)ri; }"},
    {"structs",
     "struct pair { int a; int b; };\nstatic struct pair pair_v = {3, 4};",
     "crc ^= (unsigned long)(pair_v.a + pair_v.b);"},
    {"uint8", "static uint8_t u8_v = 7;", "crc ^= (unsigned long)u8_v;"},
    {"unary-plus-operator", nullptr, "crc ^= (unsigned long)(+5);"},
    {"unions",
     "union blend { int i; long l; };\nstatic union blend blend_v;",
     "blend_v.i = 5;\n  crc ^= (unsigned long)blend_v.i;"},
    {"volatile-pointers",
     "static volatile int vp_cell = 3;\n"
     "static volatile int *vp_ptr = &vp_cell;",
     "crc ^= (unsigned long)*vp_ptr;"},
    {"volatiles", "static volatile int vol_v = 11;",
     "vol_v = vol_v ^ 1;\n  crc ^= (unsigned long)vol_v;"},
};

uint64_t ParseU64(const std::string& text, const char* what) {
  errno = 0;
  char* end = nullptr;
  unsigned long long v = std::strtoull(text.c_str(), &end, 10);
  if (errno != 0 || end == nullptr || *end != '\0' || text.empty()) {
    std::cerr << "mockgen: bad value for " << what << ": " << text << "\n";
    std::exit(2);
  }
  return static_cast<uint64_t>(v);
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<std::string> enabled;  // explicit --name, in flag order
  std::set<std::string> disabled;    // explicit --no-name
  std::string out_path;
  uint64_t seed = 0;
  bool have_seed = false;
  int mock_exit = -1;
  double mock_sleep = 0.0;
  bool mock_empty = false;

  for (int i = 1; i < argc; ++i) {
    std::string arg = argv[i];
    auto next = [&](const char* what) -> std::string {
      if (i + 1 >= argc) {
        std::cerr << "mockgen: " << what << " needs a value\n";
        std::exit(2);
      }
      return argv[++i];
    };
    if (arg == "-o" || arg == "--output") {
      out_path = next("-o");
    } else if (arg == "--seed" || arg == "-s") {
      seed = ParseU64(next("--seed"), "--seed");
      have_seed = true;
    } else if (arg == "--mock-exit") {
      mock_exit = static_cast<int>(ParseU64(next("--mock-exit"), "--mock-exit"));
    } else if (arg == "--mock-sleep") {
      mock_sleep = std::atof(next("--mock-sleep").c_str());
    } else if (arg == "--mock-empty") {
      mock_empty = true;
    } else if (arg.rfind("--no-", 0) == 0 && arg.size() > 5) {
      disabled.insert(arg.substr(5));
    } else if (arg.rfind("--", 0) == 0 && arg.size() > 2) {
      enabled.push_back(arg.substr(2));
    } else {
      std::cerr << "mockgen: unrecognized argument: " << arg << "\n";
      return 2;
    }
  }

  if (mock_sleep > 0.0) {
    struct timespec ts;
    ts.tv_sec = static_cast<time_t>(mock_sleep);
    ts.tv_nsec = static_cast<long>((mock_sleep - static_cast<double>(ts.tv_sec)) * 1e9);
    while (nanosleep(&ts, &ts) != 0) {
    }
  }
  if (mock_exit >= 0) return mock_exit;
  if (out_path.empty()) {
    std::cerr << "mockgen: missing -o <file>\n";
    return 2;
  }
  if (!have_seed) {
    std::cerr << "mockgen: missing --seed <n>\n";
    return 2;
  }

  std::set<std::string> enabled_set(enabled.begin(), enabled.end());
  auto active = [&](const char* name) {
    if (enabled_set.count(name) > 0) return true;
    if (disabled.count(name) > 0) return false;
    // Unspecified: a per-seed, per-feature coin keeps program content varied
    // without creating a marker.
    return (centfuzz::Mix64(seed ^ centfuzz::Fnv1a64(name)) & 1ULL) != 0ULL;
  };

  std::ostringstream src;
  src << "/* mockgen 1.0 seed=" << seed << " */\n";
  for (const auto& name : enabled) src << "/* feature:" << name << " */\n";
  src << "#include <stdint.h>\n#include <stdio.h>\n\n";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "0x%llxUL",
                static_cast<unsigned long long>(centfuzz::Mix64(seed) &
                                                0xffffffffULL));
  src << "static unsigned long crc = " << buf << ";\n\n";
  for (const auto& s : kSnippets) {
    if (s.file_scope != nullptr && active(s.name))
      src << s.file_scope << "\n";
  }
  src << "\nint main(void) {\n";
  for (const auto& s : kSnippets) {
    if (s.body != nullptr && active(s.name)) src << "  " << s.body << "\n";
  }
  std::snprintf(buf, sizeof(buf), "0x%llxUL",
                static_cast<unsigned long long>(
                    centfuzz::Mix64(seed ^ 0x9e3779b97f4a7c15ULL) &
                    0xffffffffULL));
  src << "  crc = (crc << 7) ^ (crc >> 3) ^ " << buf << ";\n";
  src << "  printf(\"checksum = %08lx\\n\", crc & 0xffffffffUL);\n";
  src << "  return 0;\n}\n";

  std::ofstream out(out_path, std::ios::trunc | std::ios::binary);
  if (!out) {
    std::cerr << "mockgen: cannot write " << out_path << "\n";
    return 2;
  }
  if (!mock_empty) out << src.str();
  out.close();
  return out.good() ? 0 : 2;
}
