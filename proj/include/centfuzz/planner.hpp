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
// Campaign planning: maps a cluster model (or none) plus a strategy and a
// trial budget onto a deterministic schedule, and turns centroids into
// per-trial generator configurations.

#ifndef CENTFUZZ_PLANNER_HPP_
#define CENTFUZZ_PLANNER_HPP_

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "centfuzz/clustering.hpp"
#include "centfuzz/features.hpp"

namespace centfuzz {

enum class Strategy {
  kRoundRobin,  // cycle through centroids: trial i uses centroid i mod k
  kWeighted,    // trials apportioned to centroids by cluster size
  kSwarm,       // every feature decided by a fair coin per trial
  kDefault,     // generator defaults; no feature flags at all
};

// Canonical CLI spellings: kconfig-round-robin, kconfig-weighted, swarm,
// default. FromString throws ValidationError on anything else.
std::string ToString(Strategy s);
Strategy StrategyFromString(const std::string& s);

// True for the strategies that consume a cluster model.
bool NeedsModel(Strategy s);

struct GeneratorConfig {
  Strategy strategy = Strategy::kDefault;
  uint64_t trial_index = 0;
  // Centroid used, or -1 for swarm/default.
  int centroid_index = -1;
  // Seed passed to the generator; equal to the derived per-trial seed.
  uint64_t generator_seed = 0;
  // One decision per catalog feature for flagful strategies; empty for the
  // default strategy (generator defaults apply).
  std::vector<uint8_t> decisions;
};

struct CampaignPlan {
  Strategy strategy = Strategy::kDefault;
  uint64_t budget = 0;
  uint64_t master_seed = 0;
  std::string catalog_version;
  // Per-trial centroid index (schedule.size() == budget). All -1 for
  // swarm/default.
  std::vector<int> schedule;
  // Cluster sizes backing the weighted strategy; informational otherwise.
  std::vector<int> cluster_sizes;

  void Validate() const;
};

// Hamilton (largest remainder) apportionment of `budget` trials over
// clusters proportionally to their sizes. Floors of the exact quotas first,
// leftover trials to the largest fractional remainders, remainder ties to
// the lowest index. Exact integer arithmetic throughout. The result sums to
// budget and each count is within 1 of its exact quota.
std::vector<uint64_t> ApportionLargestRemainder(const std::vector<int>& sizes,
                                                uint64_t budget);

// Builds the trial schedule. `model` must be non-null exactly for the
// strategies that need one. Round robin: trial i -> i mod k. Weighted:
// apportioned counts, interleaved by cycling over clusters with remaining
// budget. Schedules never consume randomness.
CampaignPlan PlanSchedule(const ClusterModel* model, Strategy strategy,
                          uint64_t budget, uint64_t master_seed);

// Converts one scheduled trial into a generator configuration.
// For kconfig strategies: decision i is true iff u_i <= centroid[i], where
// u_1..u_d are draws in (0,1] from a fresh splitmix64 stream seeded with
// trial_seed, taken in catalog order. A coordinate of 0 therefore never
// enables and 1 always enables, for every seed. Swarm uses the same rule
// with every coordinate 0.5. Default draws nothing and emits no decisions.
// The generator seed is trial_seed itself.
GeneratorConfig ConfigFromCentroid(std::span<const double> centroid, size_t dim,
                                   Strategy strategy, uint64_t trial_seed,
                                   uint64_t trial_index, int centroid_index);

// Renders generator command-line arguments: enable/disable flag per decision
// in catalog order (nothing for the default strategy), then the seed
// arguments ("--seed", "<n>"). Throws ValidationError if the decision vector
// length does not match the catalog.
std::vector<std::string> RenderFlags(const GeneratorConfig& config,
                                     const FeatureCatalog& catalog);

// Plan file round trip (JSON). Save-then-load is identity.
void SavePlan(const CampaignPlan& plan, const std::filesystem::path& path);
CampaignPlan LoadPlan(const std::filesystem::path& path);

}  // namespace centfuzz

#endif  // CENTFUZZ_PLANNER_HPP_
