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

#include "centfuzz/planner.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>

#include <nlohmann/json.hpp>

#include "centfuzz/errors.hpp"
#include "centfuzz/rng.hpp"

namespace centfuzz {

std::string ToString(Strategy s) {
  switch (s) {
    case Strategy::kRoundRobin: return "kconfig-round-robin";
    case Strategy::kWeighted: return "kconfig-weighted";
    case Strategy::kSwarm: return "swarm";
    case Strategy::kDefault: return "default";
  }
  throw ValidationError("unknown strategy value");
}

Strategy StrategyFromString(const std::string& s) {
  if (s == "kconfig-round-robin") return Strategy::kRoundRobin;
  if (s == "kconfig-weighted") return Strategy::kWeighted;
  if (s == "swarm") return Strategy::kSwarm;
  if (s == "default") return Strategy::kDefault;
  throw ValidationError(
      "unknown strategy \"" + s +
      "\" (expected kconfig-round-robin, kconfig-weighted, swarm, or default)");
}

bool NeedsModel(Strategy s) {
  return s == Strategy::kRoundRobin || s == Strategy::kWeighted;
}

void CampaignPlan::Validate() const {
  if (budget < 1) throw ValidationError("budget must be >= 1");
  if (schedule.size() != budget)
    throw ValidationError("schedule length != budget");
  if (NeedsModel(strategy)) {
    int k = static_cast<int>(cluster_sizes.size());
    if (k < 1) throw ValidationError("kconfig plan without cluster sizes");
    for (int c : schedule)
      if (c < 0 || c >= k)
        throw ValidationError("schedule entry out of centroid range");
  } else {
    for (int c : schedule)
      if (c != -1)
        throw ValidationError("model-free plan must schedule centroid -1");
  }
}

std::vector<uint64_t> ApportionLargestRemainder(const std::vector<int>& sizes,
                                                uint64_t budget) {
  if (sizes.empty()) throw ValidationError("no clusters to apportion over");
  uint64_t total = 0;
  for (int s : sizes) {
    if (s <= 0) throw ValidationError("cluster sizes must be positive");
    total += static_cast<uint64_t>(s);
  }
  size_t k = sizes.size();
  std::vector<uint64_t> counts(k);
  std::vector<uint64_t> remainders(k);
  uint64_t assigned = 0;
  for (size_t i = 0; i < k; ++i) {
    // Exact integer quota split: budget * size = count * total + remainder.
    // Products fit unsigned 128-bit comfortably for any plausible inputs.
    unsigned __int128 num =
        static_cast<unsigned __int128>(budget) * static_cast<uint64_t>(sizes[i]);
    counts[i] = static_cast<uint64_t>(num / total);
    remainders[i] = static_cast<uint64_t>(num % total);
    assigned += counts[i];
  }
  uint64_t leftover = budget - assigned;
  std::vector<size_t> order(k);
  std::iota(order.begin(), order.end(), size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    return remainders[a] > remainders[b];  // ties keep lower index first
  });
  for (uint64_t j = 0; j < leftover; ++j) ++counts[order[j % k]];
  return counts;
}

CampaignPlan PlanSchedule(const ClusterModel* model, Strategy strategy,
                          uint64_t budget, uint64_t master_seed) {
  if (budget < 1) throw ValidationError("budget must be >= 1");
  if (NeedsModel(strategy) && model == nullptr)
    throw ValidationError("strategy " + ToString(strategy) +
                          " requires a cluster model");
  if (!NeedsModel(strategy) && model != nullptr)
    throw ValidationError("strategy " + ToString(strategy) +
                          " does not take a cluster model");

  CampaignPlan plan;
  plan.strategy = strategy;
  plan.budget = budget;
  plan.master_seed = master_seed;
  plan.schedule.reserve(budget);

  if (!NeedsModel(strategy)) {
    plan.schedule.assign(budget, -1);
    return plan;
  }

  model->Validate();
  plan.catalog_version = model->catalog_version;
  plan.cluster_sizes = model->sizes;
  int k = model->k;

  if (strategy == Strategy::kRoundRobin) {
    for (uint64_t i = 0; i < budget; ++i)
      plan.schedule.push_back(static_cast<int>(i % static_cast<uint64_t>(k)));
  } else {
    std::vector<uint64_t> remaining =
        ApportionLargestRemainder(model->sizes, budget);
    // Interleave by cycling over clusters that still have budget, so heavy
    // clusters spread across the campaign instead of front-loading.
    uint64_t emitted = 0;
    while (emitted < budget) {
      for (int c = 0; c < k && emitted < budget; ++c) {
        if (remaining[c] == 0) continue;
        --remaining[c];
        plan.schedule.push_back(c);
        ++emitted;
      }
    }
  }
  plan.Validate();
  return plan;
}

GeneratorConfig ConfigFromCentroid(std::span<const double> centroid, size_t dim,
                                   Strategy strategy, uint64_t trial_seed,
                                   uint64_t trial_index, int centroid_index) {
  GeneratorConfig cfg;
  cfg.strategy = strategy;
  cfg.trial_index = trial_index;
  cfg.centroid_index = centroid_index;
  cfg.generator_seed = trial_seed;
  if (strategy == Strategy::kDefault) {
    if (!centroid.empty())
      throw ValidationError("default strategy takes no centroid");
    return cfg;
  }
  if (NeedsModel(strategy)) {
    if (centroid.size() != dim)
      throw ValidationError("centroid length " +
                            std::to_string(centroid.size()) +
                            " does not match catalog size " +
                            std::to_string(dim));
    for (double c : centroid)
      if (!(c >= 0.0 && c <= 1.0))
        throw ValidationError("centroid coordinate outside [0,1]");
  } else if (!centroid.empty()) {
    throw ValidationError("swarm strategy takes no centroid");
  }

  Rng rng(trial_seed);
  cfg.decisions.resize(dim);
  for (size_t i = 0; i < dim; ++i) {
    double c = NeedsModel(strategy) ? centroid[i] : 0.5;
    // u is drawn from (0, 1]: coordinate 0 can never fire, coordinate 1
    // always does, and P(u <= c) = c up to one ulp of the draw grid.
    double u = rng.NextUnitPositive();
    cfg.decisions[i] = (u <= c) ? 1 : 0;
  }
  return cfg;
}

std::vector<std::string> RenderFlags(const GeneratorConfig& config,
                                     const FeatureCatalog& catalog) {
  std::vector<std::string> args;
  if (config.strategy == Strategy::kDefault) {
    if (!config.decisions.empty())
      throw ValidationError("default strategy config carries decisions");
  } else {
    if (config.decisions.size() != catalog.size())
      throw ValidationError("decision vector length " +
                            std::to_string(config.decisions.size()) +
                            " does not match catalog size " +
                            std::to_string(catalog.size()));
    args.reserve(catalog.size() + 2);
    for (size_t i = 0; i < catalog.size(); ++i)
      args.push_back(config.decisions[i] ? catalog.features[i].enable_flag
                                         : catalog.features[i].disable_flag);
  }
  args.push_back("--seed");
  args.push_back(std::to_string(config.generator_seed));
  return args;
}

void SavePlan(const CampaignPlan& plan, const std::filesystem::path& path) {
  plan.Validate();
  nlohmann::json j;
  j["format"] = "centfuzz-plan";
  j["v"] = 1;
  j["strategy"] = ToString(plan.strategy);
  j["budget"] = plan.budget;
  j["master_seed"] = plan.master_seed;
  j["catalog_version"] = plan.catalog_version;
  j["cluster_sizes"] = plan.cluster_sizes;
  j["schedule"] = plan.schedule;
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw EnvironmentError("cannot write plan file: " + path.string());
  out << j.dump() << "\n";
  if (!out.flush())
    throw EnvironmentError("failed writing plan file: " + path.string());
}

CampaignPlan LoadPlan(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open plan file: " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("malformed plan file " + path.string() + ": " + e.what());
  }
  try {
    if (j.at("format").get<std::string>() != "centfuzz-plan")
      throw ParseError("not a plan file: " + path.string());
    CampaignPlan plan;
    plan.strategy = StrategyFromString(j.at("strategy").get<std::string>());
    plan.budget = j.at("budget").get<uint64_t>();
    plan.master_seed = j.at("master_seed").get<uint64_t>();
    plan.catalog_version = j.at("catalog_version").get<std::string>();
    plan.cluster_sizes = j.at("cluster_sizes").get<std::vector<int>>();
    plan.schedule = j.at("schedule").get<std::vector<int>>();
    plan.Validate();
    return plan;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("malformed plan file " + path.string() + ": " + e.what());
  } catch (const ValidationError& e) {
    // A well-formed file describing an inconsistent plan is still a load
    // failure from the caller's point of view.
    throw ParseError("invalid plan file " + path.string() + ": " + e.what());
  }
}

}  // namespace centfuzz
