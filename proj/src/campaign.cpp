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

#include "centfuzz/campaign.hpp"

#include <algorithm>
#include <fstream>
#include <mutex>
#include <ostream>
#include <set>
#include <thread>

#include <nlohmann/json.hpp>

#include "centfuzz/errors.hpp"
#include "centfuzz/records.hpp"
#include "centfuzz/rng.hpp"

namespace centfuzz {

namespace fs = std::filesystem;

void CampaignConfig::Validate() const {
  if (budget < 1) throw ValidationError("budget must be >= 1");
  if (workers < 0) throw ValidationError("workers must be >= 0 (0 = auto)");
  if (output_dir.empty()) throw ValidationError("output_dir must be set");
  if (NeedsModel(strategy) && model.empty())
    throw ValidationError("strategy " + ToString(strategy) +
                          " requires a cluster model (set \"model\")");
  clustering.Validate();
  toolchain.Validate();
}

namespace {

void ParseToolchain(const nlohmann::json& j, Toolchain* tc,
                    const std::string& file) {
  static const std::set<std::string> known = {
      "generator",       "compiler",        "compiler_extra_args",
      "opt_low",         "opt_high",        "compile_timeout_seconds",
      "execute_timeout_seconds"};
  for (auto it = j.begin(); it != j.end(); ++it)
    if (known.find(it.key()) == known.end())
      throw ParseError(file + ": unknown toolchain key \"" + it.key() + "\"");
  if (j.contains("generator"))
    tc->generator_cmd = j.at("generator").get<std::vector<std::string>>();
  if (j.contains("compiler"))
    tc->compiler_cmd = j.at("compiler").get<std::vector<std::string>>();
  if (j.contains("compiler_extra_args"))
    tc->compiler_extra_args =
        j.at("compiler_extra_args").get<std::vector<std::string>>();
  if (j.contains("opt_low")) tc->opt_low = j.at("opt_low").get<std::string>();
  if (j.contains("opt_high"))
    tc->opt_high = j.at("opt_high").get<std::string>();
  if (j.contains("compile_timeout_seconds"))
    tc->compile_timeout_seconds =
        j.at("compile_timeout_seconds").get<double>();
  if (j.contains("execute_timeout_seconds"))
    tc->execute_timeout_seconds =
        j.at("execute_timeout_seconds").get<double>();
}

void ParseClustering(const nlohmann::json& j, ClusteringParams* p,
                     const std::string& file) {
  static const std::set<std::string> known = {"k_min", "k_max", "tolerance",
                                              "rng_seed"};
  for (auto it = j.begin(); it != j.end(); ++it)
    if (known.find(it.key()) == known.end())
      throw ParseError(file + ": unknown clustering key \"" + it.key() + "\"");
  if (j.contains("k_min")) p->k_min = j.at("k_min").get<int>();
  if (j.contains("k_max")) p->k_max = j.at("k_max").get<int>();
  if (j.contains("tolerance")) p->tolerance = j.at("tolerance").get<double>();
  if (j.contains("rng_seed")) p->rng_seed = j.at("rng_seed").get<uint64_t>();
}

}  // namespace

CampaignConfig LoadCampaignConfig(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open config file: " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("malformed config file " + path.string() + ": " +
                     e.what());
  }
  std::string file = path.string();
  static const std::set<std::string> known = {
      "corpus_dir", "catalog",     "clustering", "model",
      "strategy",   "budget",      "master_seed", "toolchain",
      "workers",    "output_dir",  "keep_artifacts"};
  for (auto it = j.begin(); it != j.end(); ++it)
    if (known.find(it.key()) == known.end())
      throw ParseError(file + ": unknown config key \"" + it.key() + "\"");
  CampaignConfig cfg;
  try {
    if (j.contains("corpus_dir"))
      cfg.corpus_dir = j.at("corpus_dir").get<std::string>();
    if (j.contains("catalog"))
      cfg.catalog = j.at("catalog").get<std::string>();
    if (j.contains("clustering"))
      ParseClustering(j.at("clustering"), &cfg.clustering, file);
    if (j.contains("model")) cfg.model = j.at("model").get<std::string>();
    if (j.contains("strategy"))
      cfg.strategy = StrategyFromString(j.at("strategy").get<std::string>());
    if (j.contains("budget")) cfg.budget = j.at("budget").get<uint64_t>();
    if (j.contains("master_seed"))
      cfg.master_seed = j.at("master_seed").get<uint64_t>();
    if (j.contains("toolchain"))
      ParseToolchain(j.at("toolchain"), &cfg.toolchain, file);
    if (j.contains("workers")) cfg.workers = j.at("workers").get<int>();
    if (j.contains("output_dir"))
      cfg.output_dir = j.at("output_dir").get<std::string>();
    if (j.contains("keep_artifacts"))
      cfg.keep_artifacts = j.at("keep_artifacts").get<bool>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("malformed config file " + file + ": " + e.what());
  }
  return cfg;
}

FeatureCatalog ResolveCatalog(const std::string& catalog_spec) {
  if (catalog_spec.empty() || catalog_spec == "builtin")
    return FeatureCatalog::Builtin();
  return FeatureCatalog::Load(catalog_spec);
}

ExtractStats ExtractCorpus(const std::filesystem::path& corpus_dir,
                           const FeatureCatalog& catalog,
                           const std::filesystem::path& out_csv,
                           std::ostream& diagnostics) {
  std::error_code ec;
  if (!fs::is_directory(corpus_dir, ec) || ec)
    throw ValidationError("corpus directory not found: " + corpus_dir.string());

  std::vector<fs::path> files;
  for (fs::recursive_directory_iterator it(corpus_dir, ec), end;
       it != end && !ec; it.increment(ec)) {
    if (it->is_regular_file(ec) && !ec) files.push_back(it->path());
  }
  if (ec)
    throw ValidationError("cannot walk corpus directory: " + ec.message());
  std::sort(files.begin(), files.end());

  // Per-file work is independent; slot in by index so the CSV row order is
  // the sorted path order regardless of scheduling.
  std::vector<FeatureRow> rows(files.size());
  std::vector<std::string> errors(files.size());
  const long nfiles = static_cast<long>(files.size());
#if defined(CENTFUZZ_HAVE_OPENMP)
#pragma omp parallel for schedule(dynamic)
#endif
  for (long i = 0; i < nfiles; ++i) {
    const fs::path& p = files[size_t(i)];
    std::string id = fs::relative(p, corpus_dir).generic_string();
    std::ifstream in(p, std::ios::binary);
    if (!in) {
      errors[size_t(i)] = id + ": cannot read";
      continue;
    }
    std::string source((std::istreambuf_iterator<char>(in)),
                       std::istreambuf_iterator<char>());
    try {
      rows[size_t(i)] = ExtractFeatures(source, catalog, id);
    } catch (const Error& e) {
      errors[size_t(i)] = id + ": " + e.what();
    }
  }

  FeatureMatrix m;
  m.catalog_version = catalog.version;
  for (const auto& f : catalog.features) m.names.push_back(f.name);
  ExtractStats stats;
  for (size_t i = 0; i < files.size(); ++i) {
    if (!errors[i].empty()) {
      diagnostics << "skipped " << errors[i] << "\n";
      ++stats.failed;
      continue;
    }
    m.rows.push_back(std::move(rows[i]));
    ++stats.extracted;
  }
  if (stats.extracted == 0)
    throw ValidationError("no extractable files in corpus " +
                          corpus_dir.string());
  WriteFeatureCsv(m, out_csv);
  return stats;
}

ClusterModel ClusterCsv(const std::filesystem::path& csv,
                        const FeatureCatalog& catalog,
                        const ClusteringParams& params,
                        const std::filesystem::path& model_out) {
  FeatureMatrix m = ReadFeatureCsv(csv, catalog);
  if (m.rows.empty())
    throw ValidationError("feature CSV has no rows: " + csv.string());
  Matrix points(m.rows.size(), m.Dim());
  std::vector<double> normalized = NormalizeMinMax(m);
  points.a = std::move(normalized);
  ClusterModel model = XMeans(points, params);
  model.catalog_version = catalog.version;
  SaveModel(model, model_out);
  return model;
}

namespace {

std::string TrialDirName(uint64_t index) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "trial-%06llu",
                static_cast<unsigned long long>(index));
  return buf;
}

}  // namespace

CampaignOutcome RunCampaign(const CampaignConfig& config,
                            std::atomic<bool>* cancel, std::ostream& log) {
  config.Validate();
  FeatureCatalog catalog = ResolveCatalog(config.catalog);
  ValidateToolchainBinaries(config.toolchain);

  fs::path out_dir = config.output_dir;
  fs::create_directories(out_dir);
  catalog.Save(out_dir / "catalog.txt");

  // Model (for kconfig strategies) and plan. An existing plan pins the
  // campaign identity; the config must agree with it.
  ClusterModel model;
  bool have_model = false;
  if (NeedsModel(config.strategy)) {
    model = LoadModel(config.model);
    have_model = true;
    if (model.catalog_version != catalog.version)
      throw ValidationError("model was built for catalog version \"" +
                            model.catalog_version +
                            "\" but the campaign uses \"" + catalog.version +
                            "\"");
  }
  fs::path plan_path = out_dir / "plan.json";
  CampaignPlan plan;
  if (fs::exists(plan_path)) {
    plan = LoadPlan(plan_path);
    if (plan.strategy != config.strategy || plan.budget != config.budget ||
        plan.master_seed != config.master_seed)
      throw ValidationError(
          "existing plan in " + out_dir.string() +
          " disagrees with the requested strategy/budget/master_seed; use a "
          "fresh output directory or matching settings");
    if (have_model &&
        plan.cluster_sizes != model.sizes)
      throw ValidationError("existing plan was built from a different model");
  } else {
    plan = PlanSchedule(have_model ? &model : nullptr, config.strategy,
                        config.budget, config.master_seed);
    SavePlan(plan, plan_path);
  }

  // Resume state.
  fs::path records_path = out_dir / "records.jsonl";
  std::set<uint64_t> done;
  uint64_t resumed = 0;
  if (fs::exists(records_path)) {
    RecordsReadStats stats;
    std::vector<TrialRecord> existing = LoadRecords(records_path, &stats);
    if (stats.malformed_lines > 0)
      log << "note: dropped " << stats.malformed_lines
          << " malformed record line(s) (torn write)\n";
    if (stats.duplicate_trials > 0)
      log << "note: ignored " << stats.duplicate_trials
          << " duplicate record(s)\n";
    for (const auto& rec : existing) {
      if (rec.trial_index >= config.budget)
        throw ValidationError("records log contains trial " +
                              std::to_string(rec.trial_index) +
                              " outside budget " +
                              std::to_string(config.budget));
      done.insert(rec.trial_index);
    }
    resumed = done.size();
    if (stats.malformed_lines > 0 || stats.duplicate_trials > 0)
      RewriteRecordsSorted(records_path, std::move(existing));
  }

  std::vector<uint64_t> pending;
  pending.reserve(config.budget - done.size());
  for (uint64_t i = 0; i < config.budget; ++i)
    if (done.find(i) == done.end()) pending.push_back(i);

  int workers = config.workers;
  if (workers == 0) {
    unsigned hw = std::thread::hardware_concurrency();
    workers = hw == 0 ? 1 : static_cast<int>(hw);
  }
  workers = std::max(1, std::min<int>(workers, 256));

  std::atomic<bool> local_cancel{false};
  std::atomic<bool>* stop = cancel != nullptr ? cancel : &local_cancel;

  std::ofstream records_out(records_path, std::ios::app);
  if (!records_out)
    throw EnvironmentError("cannot append to records log: " +
                           records_path.string());

  std::mutex io_mutex;
  std::atomic<size_t> next{0};
  std::atomic<uint64_t> executed{0};
  std::string env_error;
  bool env_failed = false;

  auto worker = [&]() {
    while (true) {
      if (stop->load(std::memory_order_relaxed)) return;
      size_t slot = next.fetch_add(1, std::memory_order_relaxed);
      if (slot >= pending.size()) return;
      uint64_t index = pending[slot];

      uint64_t trial_seed = DeriveTrialSeed(config.master_seed, index);
      int centroid = plan.schedule[index];
      std::span<const double> centroid_span;
      if (have_model && centroid >= 0)
        centroid_span = {model.Centroid(centroid), model.dim};
      GeneratorConfig gen_cfg =
          ConfigFromCentroid(centroid_span, catalog.size(), config.strategy,
                             trial_seed, index, centroid);

      std::string trial_rel = "trials/" + TrialDirName(index);
      fs::path trial_dir = out_dir / "trials" / TrialDirName(index);
      TrialRecord rec;
      try {
        rec = RunTrial(gen_cfg, catalog, config.toolchain, trial_dir,
                       config.keep_artifacts, stop);
      } catch (const CancelledError&) {
        return;
      } catch (const EnvironmentError& e) {
        std::lock_guard<std::mutex> lock(io_mutex);
        if (!env_failed) {
          env_failed = true;
          env_error = e.what();
        }
        stop->store(true, std::memory_order_relaxed);
        return;
      }
      if (!rec.skipped) rec.program_path = trial_rel + "/prog.c";

      std::string line = RecordToLine(rec);
      {
        std::lock_guard<std::mutex> lock(io_mutex);
        records_out << line << "\n";
        records_out.flush();
      }
      executed.fetch_add(1, std::memory_order_relaxed);
    }
  };

  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int i = 0; i < workers; ++i) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  records_out.close();

  if (env_failed) throw EnvironmentError(env_error);

  CampaignOutcome outcome;
  outcome.executed = executed.load();
  outcome.resumed = resumed;

  if (stop->load(std::memory_order_relaxed)) {
    outcome.interrupted = true;
    RecordsReadStats stats;
    outcome.summary = TallyFile(records_path, &stats);
    outcome.summary.label = ToString(config.strategy);
    return outcome;
  }

  // Completion: canonicalize the log (sorted by trial index), tally, write
  // summaries, collect the reproduction suite.
  RecordsReadStats stats;
  std::vector<TrialRecord> all = LoadRecords(records_path, &stats);
  if (all.size() != config.budget)
    throw ValidationError("campaign finished with " +
                          std::to_string(all.size()) + " records, expected " +
                          std::to_string(config.budget));
  RewriteRecordsSorted(records_path, all);

  outcome.summary = Tally(all);
  outcome.summary.label = ToString(config.strategy);
  {
    std::ofstream st(out_dir / "summary.txt", std::ios::trunc);
    st << RenderTable({outcome.summary});
  }
  {
    std::ofstream sj(out_dir / "summary.json", std::ios::trunc);
    sj << RenderMachine({outcome.summary});
  }
  CollectFailingSuite(all, out_dir, catalog, out_dir / "failing-suite");
  return outcome;
}

}  // namespace centfuzz
