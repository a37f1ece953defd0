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

#include "centfuzz/features.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "centfuzz/errors.hpp"
#include "src/detectors.hpp"

namespace centfuzz {

namespace {

// One catalog entry: name, detector. Flags follow the --name / --no-name
// convention for every builtin feature, so they are derived.
struct BuiltinEntry {
  const char* name;
  const char* detector;
};

// The builtin catalog. 32 entries, alphabetical. Four entries have no
// syntactic footprint a counter could attribute (they alter generator
// internals or emit boilerplate shared by all programs) and are pinned
// "undetectable": argc, checksum, paranoid, safe-math.
//
// global-variables keys on the generator's g_ naming convention for global
// symbols rather than on declaration syntax; on generated corpora that is
// exact, and it never misfires on locals.
constexpr BuiltinEntry kBuiltin[] = {
    {"argc", "undetectable"},
    {"arrays", "punct:["},
    {"bitfields", "bitfield-width"},
    {"builtins", "prefix:__builtin_"},
    {"checksum", "undetectable"},
    {"comma-operators", "punct:,"},
    {"compound-assignment", "compound-assign"},
    {"const-pointers", "qual-pointer:const"},
    {"consts", "word:const"},
    {"divs", "punct:/"},
    {"embedded-assigns", "embedded-assign"},
    {"float", "word:float|double"},
    {"global-variables", "prefix:g_"},
    {"inline-function", "word:inline"},
    {"int8", "word:int8_t"},
    {"jumps", "word:goto"},
    {"longlong", "seq:long long"},
    {"math64", "word:int64_t|uint64_t"},
    {"muls", "binary-star"},
    {"packed-struct", "word:packed"},
    {"paranoid", "undetectable"},
    {"post-decr-operator", "post-decr"},
    {"post-incr-operator", "post-incr"},
    {"pre-decr-operator", "pre-decr"},
    {"pre-incr-operator", "pre-incr"},
    {"safe-math", "undetectable"},
    {"structs", "word:struct"},
    {"uint8", "word:uint8_t"},
    {"unary-plus-operator", "unary-plus"},
    {"unions", "word:union"},
    {"volatile-pointers", "qual-pointer:volatile"},
    {"volatiles", "word:volatile"},
};

constexpr size_t kCatalogSize = 32;
static_assert(sizeof(kBuiltin) / sizeof(kBuiltin[0]) == kCatalogSize);

std::vector<std::string> SplitWhitespace(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream in(line);
  std::string w;
  while (in >> w) out.push_back(w);
  return out;
}

}  // namespace

int FeatureCatalog::IndexOf(std::string_view name) const {
  for (size_t i = 0; i < features.size(); ++i)
    if (features[i].name == name) return static_cast<int>(i);
  return -1;
}

FeatureCatalog FeatureCatalog::Builtin() {
  FeatureCatalog c;
  c.version = "builtin-v1";
  c.features.reserve(kCatalogSize);
  for (const auto& e : kBuiltin) {
    FeatureSpec f;
    f.name = e.name;
    f.enable_flag = std::string("--") + e.name;
    f.disable_flag = std::string("--no-") + e.name;
    f.detector = e.detector;
    c.features.push_back(std::move(f));
  }
  c.Validate();
  return c;
}

void FeatureCatalog::Validate() const {
  if (features.size() != kCatalogSize)
    throw ValidationError("catalog must have exactly " +
                          std::to_string(kCatalogSize) + " entries, got " +
                          std::to_string(features.size()));
  if (version.empty()) throw ValidationError("catalog version is empty");
  std::set<std::string> names, flags;
  for (const auto& f : features) {
    if (f.name.empty()) throw ValidationError("catalog entry with empty name");
    if (!names.insert(f.name).second)
      throw ValidationError("duplicate feature name: " + f.name);
    if (!flags.insert(f.enable_flag).second)
      throw ValidationError("duplicate flag: " + f.enable_flag);
    if (!flags.insert(f.disable_flag).second)
      throw ValidationError("duplicate flag: " + f.disable_flag);
    if (!detail::IsKnownDetector(f.detector))
      throw ValidationError("unknown detector rule for feature " + f.name +
                            ": " + f.detector);
  }
}

FeatureCatalog FeatureCatalog::Load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in)
    throw ParseError("cannot open catalog file: " + path.string());
  FeatureCatalog c;
  std::string line;
  int lineno = 0;
  auto fail = [&](const std::string& what) {
    throw ParseError(path.string() + ":" + std::to_string(lineno) + ": " +
                     what);
  };
  while (std::getline(in, line)) {
    ++lineno;
    size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    auto fields = SplitWhitespace(line);
    if (fields.empty()) continue;
    if (fields[0] == "version") {
      if (fields.size() != 2) fail("version directive needs one value");
      if (!c.version.empty()) fail("duplicate version directive");
      c.version = fields[1];
      continue;
    }
    if (fields.size() < 4)
      fail("expected: name enable_flag disable_flag detector");
    FeatureSpec f;
    f.name = fields[0];
    f.enable_flag = fields[1];
    f.disable_flag = fields[2];
    // The detector may contain spaces ("seq:long long"): rejoin the tail.
    f.detector = fields[3];
    for (size_t i = 4; i < fields.size(); ++i) f.detector += " " + fields[i];
    if (!detail::IsKnownDetector(f.detector))
      fail("unknown detector rule: " + f.detector);
    c.features.push_back(std::move(f));
  }
  if (c.version.empty())
    throw ParseError(path.string() + ": missing version directive");
  try {
    c.Validate();
  } catch (const ValidationError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
  return c;
}

void FeatureCatalog::Save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::trunc);
  if (!out)
    throw EnvironmentError("cannot write catalog file: " + path.string());
  out << "# feature catalog: name enable_flag disable_flag detector\n";
  out << "version " << version << "\n";
  for (const auto& f : features)
    out << f.name << " " << f.enable_flag << " " << f.disable_flag << " "
        << f.detector << "\n";
  if (!out.flush())
    throw EnvironmentError("failed writing catalog file: " + path.string());
}

FeatureRow ExtractFeatures(std::string_view source,
                           const FeatureCatalog& catalog,
                           std::string program_id) {
  if (source.find('\0') != std::string_view::npos)
    throw ValidationError("binary input (NUL byte) for program " + program_id);
  std::string scrubbed = ScrubSource(source);
  std::vector<Token> tokens = Tokenize(scrubbed);
  FeatureRow row;
  row.program_id = std::move(program_id);
  row.counts.reserve(catalog.size());
  for (const auto& f : catalog.features)
    row.counts.push_back(detail::CountDetector(tokens, f.detector));
  return row;
}

std::vector<double> NormalizeMinMax(const FeatureMatrix& m) {
  size_t n = m.rows.size();
  size_t d = m.Dim();
  if (n == 0) throw ValidationError("feature matrix has no rows");
  for (const auto& r : m.rows) {
    if (r.counts.size() != d)
      throw ValidationError("row " + r.program_id + " has " +
                            std::to_string(r.counts.size()) +
                            " counts, expected " + std::to_string(d));
    for (int64_t c : r.counts)
      if (c < 0)
        throw ValidationError("negative count in row " + r.program_id);
  }
  std::vector<double> out(n * d, 0.0);
  for (size_t j = 0; j < d; ++j) {
    int64_t lo = 0, hi = 0;
    for (size_t i = 0; i < n; ++i) {
      int64_t v = m.rows[i].counts[j];
      if (i == 0 || v < lo) lo = v;
      if (i == 0 || v > hi) hi = v;
    }
    if (hi == lo) {
      // Constant column: no spread to scale by; midpoint keeps the column
      // neutral instead of biasing toward either extreme.
      for (size_t i = 0; i < n; ++i) out[i * d + j] = 0.5;
    } else {
      double range = static_cast<double>(hi - lo);
      for (size_t i = 0; i < n; ++i)
        out[i * d + j] =
            static_cast<double>(m.rows[i].counts[j] - lo) / range;
    }
  }
  return out;
}

namespace {

// Minimal CSV quoting: quote when the field contains a comma, quote, or
// newline; embedded quotes double.
std::string CsvQuote(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += "\"\"";
    else out += c;
  }
  out += "\"";
  return out;
}

std::vector<std::string> CsvSplit(const std::string& line, int lineno,
                                  const std::string& file) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur += c;
      }
    } else if (c == '"' && cur.empty()) {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (quoted)
    throw ParseError(file + ":" + std::to_string(lineno) +
                     ": unterminated quoted field");
  fields.push_back(cur);
  return fields;
}

}  // namespace

void WriteFeatureCsv(const FeatureMatrix& m, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out)
    throw EnvironmentError("cannot write CSV file: " + path.string());
  out << "program_id";
  for (const auto& name : m.names) out << "," << CsvQuote(name);
  out << "\n";
  for (const auto& r : m.rows) {
    out << CsvQuote(r.program_id);
    for (int64_t c : r.counts) out << "," << c;
    out << "\n";
  }
  if (!out.flush())
    throw EnvironmentError("failed writing CSV file: " + path.string());
}

FeatureMatrix ReadFeatureCsv(const std::filesystem::path& path,
                             const FeatureCatalog& catalog) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open CSV file: " + path.string());
  std::string file = path.string();
  std::string line;
  int lineno = 0;
  if (!std::getline(in, line))
    throw ParseError(file + ": empty CSV (missing header)");
  ++lineno;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  auto header = CsvSplit(line, lineno, file);
  if (header.empty() || header[0] != "program_id")
    throw ParseError(file + ":1: first header column must be program_id");
  if (header.size() != catalog.size() + 1)
    throw ParseError(file + ":1: header has " +
                     std::to_string(header.size() - 1) +
                     " feature columns, catalog has " +
                     std::to_string(catalog.size()));
  for (size_t i = 0; i < catalog.size(); ++i) {
    if (header[i + 1] != catalog.features[i].name)
      throw ParseError(file + ":1: header column " + std::to_string(i + 1) +
                       " is \"" + header[i + 1] + "\", catalog expects \"" +
                       catalog.features[i].name + "\"");
  }
  FeatureMatrix m;
  m.catalog_version = catalog.version;
  m.names.reserve(catalog.size());
  for (const auto& f : catalog.features) m.names.push_back(f.name);
  std::set<std::string> ids;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto fields = CsvSplit(line, lineno, file);
    if (fields.size() != catalog.size() + 1)
      throw ParseError(file + ":" + std::to_string(lineno) + ": expected " +
                       std::to_string(catalog.size() + 1) + " fields, got " +
                       std::to_string(fields.size()));
    FeatureRow r;
    r.program_id = fields[0];
    if (!ids.insert(r.program_id).second)
      throw ParseError(file + ":" + std::to_string(lineno) +
                       ": duplicate program_id " + r.program_id);
    r.counts.reserve(catalog.size());
    for (size_t i = 1; i < fields.size(); ++i) {
      const std::string& s = fields[i];
      if (s.empty() || s.find_first_not_of("0123456789") != std::string::npos)
        throw ParseError(file + ":" + std::to_string(lineno) + ": column " +
                         std::to_string(i) +
                         ": counts must be non-negative integers, got \"" + s +
                         "\"");
      r.counts.push_back(std::stoll(s));
    }
    m.rows.push_back(std::move(r));
  }
  return m;
}

}  // namespace centfuzz
