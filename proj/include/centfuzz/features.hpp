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
// Feature catalog and syntactic feature extraction.
//
// A catalog row ties together a feature name, the generator command-line
// flags that enable/disable it, and a detector rule that counts occurrences
// of the construct in C source. Detectors are heuristic token counters, not
// a C front end: they are deterministic, total (any text input yields a
// count), and documented individually in src/detectors.cpp.

#ifndef CENTFUZZ_FEATURES_HPP_
#define CENTFUZZ_FEATURES_HPP_

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace centfuzz {

struct FeatureSpec {
  std::string name;
  std::string enable_flag;
  std::string disable_flag;
  // Detector rule, e.g. "word:const", "punct:[", "binary-star",
  // "undetectable". Validated against the detector registry at load time.
  std::string detector;

  bool detectable() const { return detector != "undetectable"; }
};

class FeatureCatalog {
 public:
  std::string version;
  std::vector<FeatureSpec> features;

  size_t size() const { return features.size(); }
  // Index of a feature by name, or -1.
  int IndexOf(std::string_view name) const;

  // The built-in 32-entry catalog (version "builtin-v1").
  static FeatureCatalog Builtin();

  // Parses a catalog file. Errors name the offending line. Enforces: unique
  // names, unique flags, known detector rules, a version directive.
  static FeatureCatalog Load(const std::filesystem::path& path);

  // Serializes in the same format Load() accepts.
  void Save(const std::filesystem::path& path) const;

  // Throws ValidationError on duplicate names/flags or unknown detectors.
  void Validate() const;
};

// One extracted row: raw (un-normalized) construct counts, catalog order.
struct FeatureRow {
  std::string program_id;
  std::vector<int64_t> counts;
};

struct FeatureMatrix {
  std::string catalog_version;
  std::vector<std::string> names;  // column names, catalog order
  std::vector<FeatureRow> rows;

  size_t Dim() const { return names.size(); }
};

// Counts catalog constructs in one C source text. Never fails on odd or
// non-compiling C; throws ValidationError on binary (NUL-containing) input.
// Undetectable features always count 0.
FeatureRow ExtractFeatures(std::string_view source, const FeatureCatalog& catalog,
                           std::string program_id = "");

// Min-max normalization, columnwise: z = (x - min) / (max - min), so every
// in-range column lands in [0, 1]. A constant column (max == min) maps to 0.5
// for every row. Row order is preserved. Output is row-major rows x dim.
std::vector<double> NormalizeMinMax(const FeatureMatrix& m);

// CSV round trip. Header: program_id,<feature names in catalog order>.
// Write-then-read is loss-free (counts are integers; ids are quoted as
// needed). Read validates the header against the catalog and rejects
// negative or non-integer counts.
void WriteFeatureCsv(const FeatureMatrix& m, const std::filesystem::path& path);
FeatureMatrix ReadFeatureCsv(const std::filesystem::path& path,
                             const FeatureCatalog& catalog);

}  // namespace centfuzz

#endif  // CENTFUZZ_FEATURES_HPP_
