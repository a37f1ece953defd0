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

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <numeric>
#include <vector>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "centfuzz/errors.hpp"
#include "centfuzz/planner.hpp"
#include "centfuzz/rng.hpp"
#include "tests/testutil.hpp"

namespace centfuzz {
namespace {

using testutil::TempDir;

// A structurally valid model with the requested cluster sizes; centroid
// coordinates are synthetic but in [0, 1].
ClusterModel SyntheticModel(const std::vector<int>& sizes, size_t dim) {
  ClusterModel m;
  m.k = int(sizes.size());
  m.dim = dim;
  m.sizes = sizes;
  for (int c = 0; c < m.k; ++c) {
    for (int r = 0; r < sizes[c]; ++r) m.assignment.push_back(c);
    for (size_t j = 0; j < dim; ++j)
      m.centroids.push_back(double((c + j) % 10) / 10.0);
  }
  m.sse = 0.0;
  m.catalog_version = "builtin-v1";
  return m;
}

// ---------------------------------------------------------------------------
// Strategy parsing
// ---------------------------------------------------------------------------

TEST(Strategy, StringRoundTrip) {
  for (Strategy s : {Strategy::kRoundRobin, Strategy::kWeighted,
                     Strategy::kSwarm, Strategy::kDefault}) {
    EXPECT_EQ(StrategyFromString(ToString(s)), s);
  }
  EXPECT_EQ(ToString(Strategy::kRoundRobin), "kconfig-round-robin");
  EXPECT_EQ(ToString(Strategy::kWeighted), "kconfig-weighted");
  EXPECT_EQ(ToString(Strategy::kSwarm), "swarm");
  EXPECT_EQ(ToString(Strategy::kDefault), "default");
  EXPECT_THROW(StrategyFromString("bogus"), ValidationError);
  EXPECT_THROW(StrategyFromString(""), ValidationError);
  EXPECT_TRUE(NeedsModel(Strategy::kRoundRobin));
  EXPECT_TRUE(NeedsModel(Strategy::kWeighted));
  EXPECT_FALSE(NeedsModel(Strategy::kSwarm));
  EXPECT_FALSE(NeedsModel(Strategy::kDefault));
}

// ---------------------------------------------------------------------------
// Apportionment
// ---------------------------------------------------------------------------

TEST(Apportion, HandCases) {
  EXPECT_EQ(ApportionLargestRemainder({5, 3, 3}, 10),
            (std::vector<uint64_t>{4, 3, 3}));
  // Equal remainders: leftover goes to the lowest indices.
  EXPECT_EQ(ApportionLargestRemainder({1, 1, 1}, 1),
            (std::vector<uint64_t>{1, 0, 0}));
  EXPECT_EQ(ApportionLargestRemainder({1, 1, 1, 1}, 2),
            (std::vector<uint64_t>{1, 1, 0, 0}));
  EXPECT_EQ(ApportionLargestRemainder({2, 2, 2}, 9),
            (std::vector<uint64_t>{3, 3, 3}));
  EXPECT_EQ(ApportionLargestRemainder({7}, 13), (std::vector<uint64_t>{13}));
  EXPECT_EQ(ApportionLargestRemainder({3, 5}, 0),
            (std::vector<uint64_t>{0, 0}));
}

TEST(Apportion, MatchesFrozenFixture) {
  std::ifstream in(testutil::FixtureDir() / "apportion_cases.json");
  ASSERT_TRUE(in) << "missing fixture apportion_cases.json";
  nlohmann::json doc = nlohmann::json::parse(in);
  ASSERT_EQ(doc.at("format"), "apportion-cases");
  int checked = 0;
  for (const auto& cs : doc.at("cases")) {
    SCOPED_TRACE(cs.at("name").get<std::string>());
    auto sizes = cs.at("sizes").get<std::vector<int>>();
    uint64_t budget = cs.at("budget").get<uint64_t>();
    auto want = cs.at("counts").get<std::vector<uint64_t>>();
    auto got = ApportionLargestRemainder(sizes, budget);
    EXPECT_EQ(got, want);

    // Cross-check the contract on every case: exact sum, and each count
    // within one seat of its exact quota (checked in integer arithmetic).
    EXPECT_EQ(std::accumulate(got.begin(), got.end(), uint64_t{0}), budget);
    __int128 total = 0;
    for (int s : sizes) total += s;
    for (size_t i = 0; i < sizes.size(); ++i) {
      __int128 scaled = __int128(got[i]) * total;
      __int128 quota = __int128(budget) * sizes[i];
      __int128 diff = scaled > quota ? scaled - quota : quota - scaled;
      EXPECT_LT(diff, total) << "entry " << i;
    }
    ++checked;
  }
  EXPECT_GE(checked, 200);
}

TEST(Apportion, RejectsBadSizes) {
  EXPECT_THROW(ApportionLargestRemainder({}, 5), ValidationError);
  EXPECT_THROW(ApportionLargestRemainder({3, 0, 2}, 5), ValidationError);
  EXPECT_THROW(ApportionLargestRemainder({-1}, 5), ValidationError);
}

// ---------------------------------------------------------------------------
// Schedules
// ---------------------------------------------------------------------------

TEST(Schedule, RoundRobinCyclesFairly) {
  ClusterModel m = SyntheticModel({4, 1, 1, 1}, 3);
  CampaignPlan plan = PlanSchedule(&m, Strategy::kRoundRobin, 10, 77);
  ASSERT_NO_THROW(plan.Validate());
  EXPECT_EQ(plan.schedule,
            (std::vector<int>{0, 1, 2, 3, 0, 1, 2, 3, 0, 1}));
  // Round robin ignores cluster sizes: spread of per-cluster counts <= 1.
  std::vector<int> counts(4, 0);
  for (int c : plan.schedule) ++counts[c];
  auto [lo, hi] = std::minmax_element(counts.begin(), counts.end());
  EXPECT_LE(*hi - *lo, 1);
  EXPECT_EQ(plan.cluster_sizes, m.sizes);
  EXPECT_EQ(plan.master_seed, 77u);
  EXPECT_EQ(plan.catalog_version, "builtin-v1");
}

TEST(Schedule, WeightedFollowsApportionmentInterleaved) {
  ClusterModel m = SyntheticModel({6, 2, 2}, 2);
  CampaignPlan plan = PlanSchedule(&m, Strategy::kWeighted, 10, 1);
  ASSERT_NO_THROW(plan.Validate());
  // Apportioned counts 6/2/2, emitted by cycling clusters that still have
  // remaining budget.
  EXPECT_EQ(plan.schedule, (std::vector<int>{0, 1, 2, 0, 1, 2, 0, 0, 0, 0}));
  auto counts = ApportionLargestRemainder(m.sizes, 10);
  std::vector<uint64_t> got(3, 0);
  for (int c : plan.schedule) ++got[c];
  EXPECT_EQ(got, counts);
}

TEST(Schedule, ModelFreeStrategies) {
  for (Strategy s : {Strategy::kSwarm, Strategy::kDefault}) {
    CampaignPlan plan = PlanSchedule(nullptr, s, 5, 9);
    ASSERT_NO_THROW(plan.Validate());
    EXPECT_EQ(plan.schedule, (std::vector<int>{-1, -1, -1, -1, -1}));
    EXPECT_TRUE(plan.cluster_sizes.empty());
  }
}

TEST(Schedule, ModelPresenceIsValidatedBothWays) {
  ClusterModel m = SyntheticModel({2, 2}, 2);
  EXPECT_THROW(PlanSchedule(nullptr, Strategy::kRoundRobin, 5, 0),
               ValidationError);
  EXPECT_THROW(PlanSchedule(nullptr, Strategy::kWeighted, 5, 0),
               ValidationError);
  EXPECT_THROW(PlanSchedule(&m, Strategy::kSwarm, 5, 0), ValidationError);
  EXPECT_THROW(PlanSchedule(&m, Strategy::kDefault, 5, 0), ValidationError);
  EXPECT_THROW(PlanSchedule(&m, Strategy::kRoundRobin, 0, 0), ValidationError);
}

TEST(Schedule, NeverConsultsTheMasterSeed) {
  // The schedule is a pure function of (model, strategy, budget); the master
  // seed only affects per-trial derived seeds.
  ClusterModel m = SyntheticModel({5, 3, 3}, 4);
  for (Strategy s : {Strategy::kRoundRobin, Strategy::kWeighted}) {
    CampaignPlan a = PlanSchedule(&m, s, 123, 1);
    CampaignPlan b = PlanSchedule(&m, s, 123, 0xFFFFFFFFFFFFFFFFull);
    EXPECT_EQ(a.schedule, b.schedule);
    EXPECT_NE(a.master_seed, b.master_seed);
  }
}

// ---------------------------------------------------------------------------
// Per-trial configuration
// ---------------------------------------------------------------------------

TEST(Config, EndpointCoordinatesAreDeterministic) {
  // Coordinate 0 never enables and coordinate 1 always enables, whatever
  // the seed: the threshold test uses draws in (0, 1].
  std::vector<double> centroid = {0.0, 1.0, 0.0, 1.0};
  for (uint64_t seed = 0; seed < 500; ++seed) {
    GeneratorConfig c = ConfigFromCentroid(centroid, 4, Strategy::kRoundRobin,
                                           seed, 0, 0);
    ASSERT_EQ(c.decisions.size(), 4u);
    EXPECT_EQ(c.decisions[0], 0);
    EXPECT_EQ(c.decisions[1], 1);
    EXPECT_EQ(c.decisions[2], 0);
    EXPECT_EQ(c.decisions[3], 1);
    EXPECT_EQ(c.generator_seed, seed);
  }
}

TEST(Config, MatchesThresholdRule) {
  // The decision stream is exactly: u_i <- fresh splitmix64(trial_seed)
  // mapped to (0, 1], in catalog order; decision i = (u_i <= centroid_i).
  std::vector<double> centroid = {0.3, 0.7, 0.5, 0.9, 0.1};
  for (uint64_t trial = 0; trial < 50; ++trial) {
    uint64_t seed = DeriveTrialSeed(0xABCD, trial);
    GeneratorConfig c =
        ConfigFromCentroid(centroid, 5, Strategy::kWeighted, seed, trial, 2);
    Rng rng(seed);
    for (size_t i = 0; i < centroid.size(); ++i) {
      uint8_t want = rng.NextUnitPositive() <= centroid[i] ? 1 : 0;
      EXPECT_EQ(c.decisions[i], want) << "trial " << trial << " coord " << i;
    }
    EXPECT_EQ(c.trial_index, trial);
    EXPECT_EQ(c.centroid_index, 2);
  }
}

TEST(Config, SwarmUsesFairCoins) {
  // Swarm is the threshold rule with every coordinate 0.5. With 2000 trials
  // the enable fraction per coordinate stays within 4 standard errors.
  const size_t dim = 8;
  const int trials = 2000;
  std::vector<int> enabled(dim, 0);
  for (int t = 0; t < trials; ++t) {
    uint64_t seed = DeriveTrialSeed(7, uint64_t(t));
    GeneratorConfig c =
        ConfigFromCentroid({}, dim, Strategy::kSwarm, seed, uint64_t(t), -1);
    ASSERT_EQ(c.decisions.size(), dim);
    for (size_t j = 0; j < dim; ++j) enabled[j] += c.decisions[j];
  }
  double bound = 4.0 * std::sqrt(0.25 / trials);
  for (size_t j = 0; j < dim; ++j) {
    double frac = double(enabled[j]) / trials;
    EXPECT_NEAR(frac, 0.5, bound) << "coordinate " << j;
  }
}

TEST(Config, DefaultDrawsNothing) {
  GeneratorConfig c =
      ConfigFromCentroid({}, 32, Strategy::kDefault, 1234, 0, -1);
  EXPECT_TRUE(c.decisions.empty());
  EXPECT_EQ(c.generator_seed, 1234u);
}

TEST(Config, ValidatesArguments) {
  std::vector<double> c3 = {0.1, 0.2, 0.3};
  std::vector<double> bad = {0.1, 1.5, 0.3};
  EXPECT_THROW(
      ConfigFromCentroid(c3, 4, Strategy::kRoundRobin, 1, 0, 0),
      ValidationError);
  EXPECT_THROW(
      ConfigFromCentroid(bad, 3, Strategy::kRoundRobin, 1, 0, 0),
      ValidationError);
  EXPECT_THROW(ConfigFromCentroid(c3, 3, Strategy::kSwarm, 1, 0, -1),
               ValidationError);
  EXPECT_THROW(ConfigFromCentroid(c3, 3, Strategy::kDefault, 1, 0, -1),
               ValidationError);
}

TEST(Config, SeedDerivationIsStable) {
  // Golden values lock the derivation so campaign records stay replayable
  // across releases.
  EXPECT_EQ(DeriveTrialSeed(0, 0), DeriveTrialSeed(0, 0));
  EXPECT_NE(DeriveTrialSeed(0, 0), DeriveTrialSeed(0, 1));
  EXPECT_NE(DeriveTrialSeed(0, 0), DeriveTrialSeed(1, 0));
  uint64_t a = DeriveTrialSeed(42, 7);
  uint64_t b = Mix64(42 ^ Mix64(7 + 0x632BE59BD9B4E019ULL));
  EXPECT_EQ(a, b);
}

// ---------------------------------------------------------------------------
// Flag rendering
// ---------------------------------------------------------------------------

TEST(Flags, CatalogOrderThenSeed) {
  FeatureCatalog catalog = FeatureCatalog::Builtin();
  GeneratorConfig c;
  c.strategy = Strategy::kRoundRobin;
  c.generator_seed = 99;
  for (size_t i = 0; i < catalog.size(); ++i)
    c.decisions.push_back(i % 2 == 0 ? 1 : 0);
  std::vector<std::string> flags = RenderFlags(c, catalog);
  ASSERT_EQ(flags.size(), catalog.size() + 2);
  for (size_t i = 0; i < catalog.size(); ++i) {
    const auto& f = catalog.features[i];
    EXPECT_EQ(flags[i], c.decisions[i] ? f.enable_flag : f.disable_flag);
  }
  EXPECT_EQ(flags[catalog.size()], "--seed");
  EXPECT_EQ(flags[catalog.size() + 1], "99");
}

TEST(Flags, DefaultStrategyIsSeedOnly) {
  FeatureCatalog catalog = FeatureCatalog::Builtin();
  GeneratorConfig c;
  c.strategy = Strategy::kDefault;
  c.generator_seed = 5;
  EXPECT_EQ(RenderFlags(c, catalog),
            (std::vector<std::string>{"--seed", "5"}));
}

TEST(Flags, RejectsLengthMismatch) {
  FeatureCatalog catalog = FeatureCatalog::Builtin();
  GeneratorConfig c;
  c.strategy = Strategy::kSwarm;
  c.decisions = {1, 0, 1};  // catalog has 32 features
  EXPECT_THROW(RenderFlags(c, catalog), ValidationError);
  GeneratorConfig d;
  d.strategy = Strategy::kDefault;
  d.decisions = {1};
  EXPECT_THROW(RenderFlags(d, catalog), ValidationError);
}

// ---------------------------------------------------------------------------
// Plan persistence
// ---------------------------------------------------------------------------

TEST(PlanIo, RoundTripIsIdentity) {
  TempDir tmp;
  ClusterModel m = SyntheticModel({5, 3, 3}, 6);
  CampaignPlan plan = PlanSchedule(&m, Strategy::kWeighted, 37, 0xfeed);
  SavePlan(plan, tmp / "plan.json");
  CampaignPlan back = LoadPlan(tmp / "plan.json");
  EXPECT_EQ(back.strategy, plan.strategy);
  EXPECT_EQ(back.budget, plan.budget);
  EXPECT_EQ(back.master_seed, plan.master_seed);
  EXPECT_EQ(back.catalog_version, plan.catalog_version);
  EXPECT_EQ(back.schedule, plan.schedule);
  EXPECT_EQ(back.cluster_sizes, plan.cluster_sizes);
}

TEST(PlanIo, LoadRejectsBadFiles) {
  TempDir tmp;
  EXPECT_THROW(LoadPlan(tmp / "missing.json"), ParseError);
  testutil::WriteFile(tmp / "garbage.json", "][");
  EXPECT_THROW(LoadPlan(tmp / "garbage.json"), ParseError);
  testutil::WriteFile(tmp / "inconsistent.json",
                      "{\"format\":\"centfuzz-plan\",\"version\":1,"
                      "\"strategy\":\"swarm\",\"budget\":3,\"master_seed\":0,"
                      "\"catalog_version\":\"builtin-v1\","
                      "\"schedule\":[-1,-1],\"cluster_sizes\":[]}");
  EXPECT_THROW(LoadPlan(tmp / "inconsistent.json"), ParseError);
}

}  // namespace
}  // namespace centfuzz
