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
// Deterministic random number generation. Everything that must reproduce
// bit-for-bit across platforms and standard-library versions goes through
// this engine; std::uniform_*_distribution is implementation-defined and is
// never used on a reproducibility-sensitive path.

#ifndef CENTFUZZ_RNG_HPP_
#define CENTFUZZ_RNG_HPP_

#include <cmath>
#include <cstdint>
#include <vector>

namespace centfuzz {

// Finalizer of the splitmix64 generator. Bijective on uint64_t.
constexpr uint64_t Mix64(uint64_t z) {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// Per-trial seed derivation. Mixing the trial index through the finalizer
// before combining with the master seed keeps neighbouring trials decorrelated
// while staying a pure function of (master_seed, trial_index).
constexpr uint64_t DeriveTrialSeed(uint64_t master_seed, uint64_t trial_index) {
  return Mix64(master_seed ^ Mix64(trial_index + 0x632BE59BD9B4E019ULL));
}

// splitmix64 stream generator.
class Rng {
 public:
  explicit Rng(uint64_t seed) : state_(seed) {}

  uint64_t NextU64() {
    state_ += 0x9E3779B97F4A7C15ULL;
    uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  // Uniform double in [0, 1), 53-bit resolution.
  double NextUnit() { return static_cast<double>(NextU64() >> 11) * 0x1.0p-53; }

  // Uniform double in (0, 1]. Used for threshold tests of the form u <= c so
  // that c == 0 never fires and c == 1 always fires, for every seed.
  double NextUnitPositive() {
    return static_cast<double>((NextU64() >> 11) + 1) * 0x1.0p-53;
  }

  // Uniform integer in [0, bound). Rejection-free multiply-shift would bias
  // for huge bounds; bounds here are tiny (dataset sizes), so take the
  // 128-bit multiply path which is exact enough and portable on GCC/Clang.
  uint64_t NextBounded(uint64_t bound) {
    return static_cast<uint64_t>(
        (static_cast<unsigned __int128>(NextU64()) * bound) >> 64);
  }

  // Standard normal via Box-Muller on two fresh uniforms.
  double NextGaussian() {
    double u1 = NextUnitPositive();  // strictly positive: log stays finite
    double u2 = NextUnit();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * 3.14159265358979323846 * u2);
  }

  // Uniformly random unit vector of dimension d (normalized Gaussian sample).
  std::vector<double> NextUnitVector(size_t d) {
    std::vector<double> v(d);
    while (true) {
      double norm2 = 0.0;
      for (size_t i = 0; i < d; ++i) {
        v[i] = NextGaussian();
        norm2 += v[i] * v[i];
      }
      // Degenerate draws are astronomically rare; retry keeps the result a
      // genuine unit vector rather than dividing by ~0.
      if (norm2 > 1e-30) {
        double inv = 1.0 / std::sqrt(norm2);
        for (size_t i = 0; i < d; ++i) v[i] *= inv;
        return v;
      }
    }
  }

 private:
  uint64_t state_;
};

}  // namespace centfuzz

#endif  // CENTFUZZ_RNG_HPP_
