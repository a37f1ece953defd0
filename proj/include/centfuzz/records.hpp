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
// Trial records on disk: one JSON object per line, append-only while a
// campaign runs, rewritten sorted by trial index when it finishes. The
// format is versioned ("v": 1) and documented in docs/formats.md.

#ifndef CENTFUZZ_RECORDS_HPP_
#define CENTFUZZ_RECORDS_HPP_

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "centfuzz/harness.hpp"

namespace centfuzz {

nlohmann::json RecordToJson(const TrialRecord& rec);

// Parses and cross-checks (stage results must re-classify to the stored
// class). Throws ParseError/ValidationError on malformed or inconsistent
// input.
TrialRecord RecordFromJson(const nlohmann::json& j);

// One line, no trailing newline. Key order is stable (alphabetical), so
// identical records serialize identically.
std::string RecordToLine(const TrialRecord& rec);

struct RecordsReadStats {
  size_t malformed_lines = 0;  // unparseable or inconsistent lines skipped
  size_t duplicate_trials = 0; // extra records for an already-seen index
};

// Tolerant reader used for resume and reporting: a torn trailing line or a
// duplicated index (a crash window artifact) is skipped and counted, never
// fatal. First record for an index wins. A missing file is an error.
std::vector<TrialRecord> LoadRecords(const std::filesystem::path& path,
                                     RecordsReadStats* stats);

// Sorts by trial index (records must already be unique per index) and
// replaces `path` atomically: the full content lands in a temp file first
// and rename() swaps it in, so a reader at any instant sees the old or the
// new log, nothing in between.
void RewriteRecordsSorted(const std::filesystem::path& path,
                          std::vector<TrialRecord> records);

}  // namespace centfuzz

#endif  // CENTFUZZ_RECORDS_HPP_
