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
// Campaign orchestration: configuration loading, the corpus -> CSV and
// CSV -> model pipeline steps, and the resumable multi-worker trial loop.
//
// Campaign directory layout (created under output_dir):
//   plan.json        deterministic trial schedule
//   catalog.txt      the catalog the campaign ran with
//   records.jsonl    one record per trial; sorted by trial index on completion
//   summary.txt      human-readable tally (written on completion)
//   summary.json     machine-readable tally (written on completion)
//   trials/          per-trial work directories (kept per keep_artifacts)
//   failing-suite/   differential-failure reproduction suite (on completion)

#ifndef CENTFUZZ_CAMPAIGN_HPP_
#define CENTFUZZ_CAMPAIGN_HPP_

#include <atomic>
#include <filesystem>
#include <iosfwd>
#include <string>

#include "centfuzz/clustering.hpp"
#include "centfuzz/features.hpp"
#include "centfuzz/harness.hpp"
#include "centfuzz/planner.hpp"
#include "centfuzz/reporting.hpp"

namespace centfuzz {

struct CampaignConfig {
  std::string corpus_dir;
  std::string catalog = "builtin";  // "builtin" or a catalog file path
  ClusteringParams clustering;
  std::string model;  // cluster model path; required for kconfig strategies
  Strategy strategy = Strategy::kDefault;
  uint64_t budget = 10000;
  uint64_t master_seed = 0;
  Toolchain toolchain;
  int workers = 0;  // 0 = number of hardware threads
  std::string output_dir;
  bool keep_artifacts = false;

  // Structural checks that need no filesystem access.
  void Validate() const;
};

// Reads a JSON config file. Unknown keys are rejected (typo protection);
// absent keys keep their defaults. See docs/formats.md for the schema.
CampaignConfig LoadCampaignConfig(const std::filesystem::path& path);

// "builtin" -> the built-in catalog; anything else -> FeatureCatalog::Load.
FeatureCatalog ResolveCatalog(const std::string& catalog_spec);

struct ExtractStats {
  size_t extracted = 0;
  size_t failed = 0;
};

// Walks corpus_dir recursively (deterministic path order), extracts features
// from every regular file, and writes the CSV. Files that cannot be read or
// are not text are skipped with one diagnostic line each. Extraction across
// files runs in parallel when built with OpenMP; output order and content
// are independent of the worker count.
ExtractStats ExtractCorpus(const std::filesystem::path& corpus_dir,
                           const FeatureCatalog& catalog,
                           const std::filesystem::path& out_csv,
                           std::ostream& diagnostics);

// CSV -> normalized matrix -> cluster-count search -> model file.
ClusterModel ClusterCsv(const std::filesystem::path& csv,
                        const FeatureCatalog& catalog,
                        const ClusteringParams& params,
                        const std::filesystem::path& model_out);

struct CampaignOutcome {
  CampaignSummary summary;
  uint64_t executed = 0;     // trials run by this invocation
  uint64_t resumed = 0;      // trials honored from an existing records log
  bool interrupted = false;  // cancellation stopped the campaign early
};

// Runs (or resumes) a campaign. An existing plan must agree with the config;
// existing records are kept and their trials not re-run. `cancel` may be
// null; when the flag is set mid-run, in-flight trials are killed, completed
// records stay, and the outcome reports interrupted (no summary files are
// written). On completion the records log is rewritten sorted, summaries and
// the failing suite are written, and the summary is returned.
CampaignOutcome RunCampaign(const CampaignConfig& config,
                            std::atomic<bool>* cancel, std::ostream& log);

}  // namespace centfuzz

#endif  // CENTFUZZ_CAMPAIGN_HPP_
