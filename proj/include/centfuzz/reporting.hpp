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
// Campaign reporting: tally records into per-class counts, render them for
// humans and for machines, and collect differential failures into a
// reproduction suite.

#ifndef CENTFUZZ_REPORTING_HPP_
#define CENTFUZZ_REPORTING_HPP_

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "centfuzz/harness.hpp"
#include "centfuzz/records.hpp"

namespace centfuzz {

// Per-class trial counts for one campaign. Fields c0/c3/c03 are crashes at
// -O0 only / -O3 only / both; t* the same for timeouts; mc miscompilations.
struct CampaignSummary {
  std::string label;  // free-form row label (strategy or directory name)
  uint64_t c0 = 0;
  uint64_t c3 = 0;
  uint64_t c03 = 0;
  uint64_t t0 = 0;
  uint64_t t3 = 0;
  uint64_t t03 = 0;
  uint64_t mc = 0;
  uint64_t passes = 0;
  uint64_t inconclusive = 0;
  uint64_t skipped = 0;
  uint64_t total = 0;

  uint64_t DifferentialFailures() const { return c0 + c3 + mc; }
  // Every trial lands in exactly one bucket.
  bool PartitionHolds() const {
    return c0 + c3 + c03 + t0 + t3 + t03 + mc + passes + inconclusive +
               skipped ==
           total;
  }
};

// Tallies records (each record increments exactly one bucket).
CampaignSummary Tally(const std::vector<TrialRecord>& records);

// Tallies a records log, tolerating torn lines; malformed/duplicate counts
// land in `stats` when non-null.
CampaignSummary TallyFile(const std::filesystem::path& records_path,
                          RecordsReadStats* stats);

// Human-readable table: a header line naming the columns, one row of
// name=value counts per summary in column order (crashes, timeouts,
// miscompilations, then the bookkeeping columns), and a verdict line that
// says whether differential failures were found.
std::string RenderTable(const std::vector<CampaignSummary>& summaries);

// Machine-readable JSON document for the same summaries. ParseMachine is
// its exact inverse.
std::string RenderMachine(const std::vector<CampaignSummary>& summaries);
std::vector<CampaignSummary> ParseMachine(const std::string& text);

// Arithmetic-mean row over runs (counts averaged as doubles, label "mean").
// Meaningful when the inputs are repeated runs of one configuration.
struct SummaryMean {
  double c0 = 0, c3 = 0, c03 = 0, t0 = 0, t3 = 0, t03 = 0, mc = 0;
  double passes = 0, inconclusive = 0, skipped = 0, total = 0;
};
SummaryMean MeanOf(const std::vector<CampaignSummary>& summaries);

// Copies every differential-failure trial's program (when its artifacts
// still exist) into `out_dir` and writes a manifest.json describing each
// entry: trial index, class, generator seed, and the exact generator flags
// needed to regenerate the program. Returns the number of suite entries.
size_t CollectFailingSuite(const std::vector<TrialRecord>& records,
                           const std::filesystem::path& campaign_dir,
                           const FeatureCatalog& catalog,
                           const std::filesystem::path& out_dir);

}  // namespace centfuzz

#endif  // CENTFUZZ_REPORTING_HPP_
