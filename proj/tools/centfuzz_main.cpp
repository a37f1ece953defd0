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
// centfuzz: corpus-guided fuzzing configuration for C compilers.
//
//   extract   corpus directory -> feature CSV
//   cluster   feature CSV -> cluster model
//   plan      cluster model -> campaign plan (inspection/dry-run)
//   run       execute or resume a differential-testing campaign
//   report    records log(s) -> human table / machine summary
//
// Exit codes: 0 success; 1 invalid input or configuration; 2 unusable
// environment (missing tools); 3 internal error; 130 interrupted.

#include <signal.h>
#include <unistd.h>

#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "centfuzz/campaign.hpp"
#include "centfuzz/errors.hpp"
#include "centfuzz/records.hpp"

namespace fs = std::filesystem;
using namespace centfuzz;

namespace {

std::atomic<bool> g_cancel{false};

void HandleSignal(int) {
  g_cancel.store(true, std::memory_order_relaxed);
  const char msg[] = "\ninterrupt: finishing in-flight bookkeeping\n";
  ssize_t ignored = ::write(STDERR_FILENO, msg, sizeof(msg) - 1);
  (void)ignored;
}

void InstallSignalHandlers() {
  struct sigaction sa;
  sa.sa_handler = HandleSignal;
  sigemptyset(&sa.sa_mask);
  sa.sa_flags = 0;  // no SA_RESTART: blocking reads should wake
  ::sigaction(SIGINT, &sa, nullptr);
  ::sigaction(SIGTERM, &sa, nullptr);
}

int CmdExtract(const std::string& corpus, const std::string& catalog_spec,
               const std::string& out) {
  FeatureCatalog catalog = ResolveCatalog(catalog_spec);
  ExtractStats stats = ExtractCorpus(corpus, catalog, out, std::cerr);
  std::cout << "extracted " << stats.extracted << " program(s) to " << out;
  if (stats.failed > 0) std::cout << " (" << stats.failed << " skipped)";
  std::cout << "\n";
  return 0;
}

int CmdCluster(const std::string& features, const std::string& catalog_spec,
               const ClusteringParams& params, const std::string& out) {
  FeatureCatalog catalog = ResolveCatalog(catalog_spec);
  ClusterModel model = ClusterCsv(features, catalog, params, out);
  std::cout << "clustered " << model.assignment.size() << " program(s) into "
            << model.k << " cluster(s); sizes:";
  for (int s : model.sizes) std::cout << " " << s;
  std::cout << "\nmodel written to " << out << "\n";
  return 0;
}

int CmdPlan(const std::string& model_path, const std::string& strategy_name,
            uint64_t budget, uint64_t master_seed, const std::string& out) {
  Strategy strategy = StrategyFromString(strategy_name);
  ClusterModel model;
  const ClusterModel* model_ptr = nullptr;
  if (NeedsModel(strategy)) {
    if (model_path.empty())
      throw ValidationError("strategy " + strategy_name +
                            " requires --model");
    model = LoadModel(model_path);
    model_ptr = &model;
  } else if (!model_path.empty()) {
    throw ValidationError("strategy " + strategy_name +
                          " does not take a model");
  }
  CampaignPlan plan = PlanSchedule(model_ptr, strategy, budget, master_seed);
  SavePlan(plan, out);
  std::cout << "plan written to " << out << ": strategy " << ToString(strategy)
            << ", budget " << budget;
  if (model_ptr != nullptr) std::cout << ", " << model.k << " centroid(s)";
  std::cout << "\n";
  return 0;
}

int CmdRun(const CampaignConfig& config) {
  CampaignOutcome outcome = RunCampaign(config, &g_cancel, std::cerr);
  if (outcome.interrupted) {
    std::cerr << "campaign interrupted: " << outcome.summary.total << " of "
              << config.budget
              << " trial(s) recorded; rerun the same command to resume\n";
    return 130;
  }
  if (outcome.resumed > 0)
    std::cerr << "resumed: " << outcome.resumed << " trial(s) already done, "
              << outcome.executed << " executed now\n";
  std::cout << RenderTable({outcome.summary});
  std::cout << "records: "
            << (fs::path(config.output_dir) / "records.jsonl").string() << "\n";
  return 0;
}

int CmdReport(const std::vector<std::string>& inputs, bool machine,
              const std::string& out_path) {
  std::vector<CampaignSummary> summaries;
  for (const auto& input : inputs) {
    fs::path p = input;
    if (fs::is_directory(p)) p /= "records.jsonl";
    if (!fs::exists(p))
      throw ValidationError("records log not found: " + p.string());
    RecordsReadStats stats;
    CampaignSummary s = TallyFile(p, &stats);
    if (stats.malformed_lines > 0)
      std::cerr << "note: " << p.string() << ": dropped "
                << stats.malformed_lines << " malformed line(s)\n";
    s.label = input;
    summaries.push_back(std::move(s));
  }
  std::string rendered;
  if (machine) {
    rendered = RenderMachine(summaries);
  } else {
    rendered = RenderTable(summaries);
    if (summaries.size() > 1) {
      SummaryMean m = MeanOf(summaries);
      char buf[512];
      std::snprintf(buf, sizeof(buf),
                    "mean over %zu runs: C0=%.1f C3=%.1f C03=%.1f T0=%.1f "
                    "T3=%.1f T03=%.1f MC=%.1f inconclusive=%.1f skipped=%.1f "
                    "pass=%.1f total=%.1f\n",
                    summaries.size(), m.c0, m.c3, m.c03, m.t0, m.t3, m.t03,
                    m.mc, m.inconclusive, m.skipped, m.passes, m.total);
      rendered += buf;
    }
  }
  if (!out_path.empty()) {
    std::ofstream out(out_path, std::ios::trunc);
    if (!out)
      throw EnvironmentError("cannot write report to " + out_path);
    out << rendered;
  }
  std::cout << rendered;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  InstallSignalHandlers();

  CLI::App app{
      "corpus-guided fuzzing configuration for differential C compiler "
      "testing"};
  app.require_subcommand(1);

  // Global flags; usable before or after the subcommand name.
  std::string g_config;
  uint64_t g_seed = 0;
  int g_workers = -1;
  bool g_keep_all = false;
  std::string g_output;
  app.fallthrough();
  app.add_option("--config", g_config, "campaign config file (JSON)");
  auto* seed_opt =
      app.add_option("--seed", g_seed, "master seed override");
  auto* workers_opt =
      app.add_option("--workers", g_workers, "worker thread count (0 = auto)");
  auto* keep_opt = app.add_flag("--keep-all", g_keep_all,
                                "keep every trial's artifacts on disk");
  auto* output_opt =
      app.add_option("--output", g_output, "output directory/file override");

  // extract
  auto* extract = app.add_subcommand("extract", "corpus -> feature CSV");
  std::string x_corpus, x_catalog = "builtin", x_out = "features.csv";
  extract->add_option("--corpus", x_corpus, "directory of C programs")
      ->required();
  extract->add_option("--catalog", x_catalog, "feature catalog path or 'builtin'");
  extract->add_option("--out", x_out, "output CSV path");

  // cluster
  auto* cluster = app.add_subcommand("cluster", "feature CSV -> cluster model");
  std::string c_features, c_catalog = "builtin", c_out = "model.json";
  ClusteringParams c_params;
  cluster->add_option("--features", c_features, "feature CSV path")->required();
  cluster->add_option("--catalog", c_catalog, "feature catalog path or 'builtin'");
  cluster->add_option("--out", c_out, "output model path");
  cluster->add_option("--k-min", c_params.k_min, "initial cluster count");
  cluster->add_option("--k-max", c_params.k_max, "cluster count ceiling");
  cluster->add_option("--tolerance", c_params.tolerance,
                      "centroid displacement convergence threshold");
  cluster->add_option("--rng-seed", c_params.rng_seed, "clustering RNG seed");

  // plan
  auto* plan = app.add_subcommand("plan", "cluster model -> campaign plan");
  std::string p_model, p_strategy, p_out = "plan.json";
  uint64_t p_budget = 10000, p_seed = 0;
  plan->add_option("--model", p_model, "cluster model path");
  plan->add_option("--strategy", p_strategy,
                   "kconfig-round-robin | kconfig-weighted | swarm | default")
      ->required();
  plan->add_option("--budget", p_budget, "number of trials");
  plan->add_option("--master-seed", p_seed, "campaign master seed");
  plan->add_option("--out", p_out, "output plan path");

  // run
  auto* run = app.add_subcommand("run", "run or resume a campaign");
  std::string r_strategy, r_model, r_catalog;
  uint64_t r_budget = 0;
  bool r_budget_set = false;
  auto* r_strategy_opt = run->add_option("--strategy", r_strategy,
                                         "trial strategy override");
  auto* r_budget_opt =
      run->add_option("--budget", r_budget, "trial budget override");
  auto* r_model_opt =
      run->add_option("--model", r_model, "cluster model path override");
  auto* r_catalog_opt =
      run->add_option("--catalog", r_catalog, "catalog override");

  // report
  auto* report = app.add_subcommand(
      "report", "summarize campaign records (dirs or records.jsonl paths)");
  std::vector<std::string> t_inputs;
  bool t_machine = false;
  report->add_option("inputs", t_inputs, "campaign directories or records logs")
      ->required();
  report->add_flag("--machine", t_machine,
                   "emit the machine-readable JSON summary");

  try {
    app.parse(argc, argv);

    if (extract->parsed()) {
      std::string out = output_opt->count() > 0 ? g_output : x_out;
      return CmdExtract(x_corpus, x_catalog, out);
    }
    if (cluster->parsed()) {
      std::string out = output_opt->count() > 0 ? g_output : c_out;
      return CmdCluster(c_features, c_catalog, c_params, out);
    }
    if (plan->parsed()) {
      if (seed_opt->count() > 0) p_seed = g_seed;
      std::string out = output_opt->count() > 0 ? g_output : p_out;
      return CmdPlan(p_model, p_strategy, p_budget, p_seed, out);
    }
    if (run->parsed()) {
      CampaignConfig config;
      if (!g_config.empty()) config = LoadCampaignConfig(g_config);
      // Command line beats config file beats defaults.
      if (r_strategy_opt->count() > 0)
        config.strategy = StrategyFromString(r_strategy);
      if (r_budget_opt->count() > 0) {
        config.budget = r_budget;
        r_budget_set = true;
      }
      (void)r_budget_set;
      if (r_model_opt->count() > 0) config.model = r_model;
      if (r_catalog_opt->count() > 0) config.catalog = r_catalog;
      if (seed_opt->count() > 0) config.master_seed = g_seed;
      if (workers_opt->count() > 0) config.workers = g_workers;
      if (keep_opt->count() > 0) config.keep_artifacts = true;
      if (output_opt->count() > 0) config.output_dir = g_output;
      return CmdRun(config);
    }
    if (report->parsed()) {
      return CmdReport(t_inputs, t_machine,
                       output_opt->count() > 0 ? g_output : "");
    }
    return 3;  // unreachable: a subcommand is required
  } catch (const CLI::ParseError& e) {
    // CLI11 uses distinct per-error exit codes; collapse to the 0/1 contract.
    return app.exit(e) == 0 ? 0 : 1;
  } catch (const EnvironmentError& e) {
    std::cerr << "environment error: " << e.what() << "\n";
    return 2;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 3;
  }
}
