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

#include "centfuzz/reporting.hpp"

#include <fstream>
#include <sstream>

#include "centfuzz/errors.hpp"

namespace centfuzz {

namespace fs = std::filesystem;

CampaignSummary Tally(const std::vector<TrialRecord>& records) {
  CampaignSummary s;
  for (const auto& rec : records) {
    ++s.total;
    if (rec.skipped) {
      ++s.skipped;
      continue;
    }
    switch (rec.failure_class) {
      case FailureClass::kPass: ++s.passes; break;
      case FailureClass::kCrashO0Only: ++s.c0; break;
      case FailureClass::kCrashO3Only: ++s.c3; break;
      case FailureClass::kCrashBoth: ++s.c03; break;
      case FailureClass::kTimeoutO0Only: ++s.t0; break;
      case FailureClass::kTimeoutO3Only: ++s.t3; break;
      case FailureClass::kTimeoutBoth: ++s.t03; break;
      case FailureClass::kMiscompilation: ++s.mc; break;
      case FailureClass::kExecInconclusive: ++s.inconclusive; break;
    }
  }
  return s;
}

CampaignSummary TallyFile(const std::filesystem::path& records_path,
                          RecordsReadStats* stats) {
  return Tally(LoadRecords(records_path, stats));
}

namespace {

void AppendRow(std::ostringstream& out, const CampaignSummary& s) {
  out << "C0=" << s.c0 << " C3=" << s.c3 << " C03=" << s.c03 << " T0=" << s.t0
      << " T3=" << s.t3 << " T03=" << s.t03 << " MC=" << s.mc
      << " inconclusive=" << s.inconclusive << " skipped=" << s.skipped
      << " pass=" << s.passes << " total=" << s.total
      << " differential=" << s.DifferentialFailures();
  if (!s.label.empty()) out << "  [" << s.label << "]";
  out << "\n";
}

nlohmann::json SummaryToJson(const CampaignSummary& s) {
  return {{"label", s.label},
          {"c0", s.c0},
          {"c3", s.c3},
          {"c03", s.c03},
          {"t0", s.t0},
          {"t3", s.t3},
          {"t03", s.t03},
          {"mc", s.mc},
          {"passes", s.passes},
          {"inconclusive", s.inconclusive},
          {"skipped", s.skipped},
          {"total", s.total},
          {"differential", s.DifferentialFailures()}};
}

CampaignSummary SummaryFromJson(const nlohmann::json& j) {
  CampaignSummary s;
  s.label = j.at("label").get<std::string>();
  s.c0 = j.at("c0").get<uint64_t>();
  s.c3 = j.at("c3").get<uint64_t>();
  s.c03 = j.at("c03").get<uint64_t>();
  s.t0 = j.at("t0").get<uint64_t>();
  s.t3 = j.at("t3").get<uint64_t>();
  s.t03 = j.at("t03").get<uint64_t>();
  s.mc = j.at("mc").get<uint64_t>();
  s.passes = j.at("passes").get<uint64_t>();
  s.inconclusive = j.at("inconclusive").get<uint64_t>();
  s.skipped = j.at("skipped").get<uint64_t>();
  s.total = j.at("total").get<uint64_t>();
  if (j.at("differential").get<uint64_t>() != s.DifferentialFailures())
    throw ParseError("summary differential count does not match its parts");
  return s;
}

}  // namespace

std::string RenderTable(const std::vector<CampaignSummary>& summaries) {
  std::ostringstream out;
  out << "# campaign summary: crash(C0,C3,C03) timeout(T0,T3,T03) "
         "miscompile(MC) columns, then bookkeeping\n";
  uint64_t differential = 0;
  for (const auto& s : summaries) {
    AppendRow(out, s);
    differential += s.DifferentialFailures();
  }
  if (differential > 0)
    out << "verdict: found differential failures (" << differential << ")\n";
  else
    out << "verdict: no differential failures\n";
  return out.str();
}

std::string RenderMachine(const std::vector<CampaignSummary>& summaries) {
  nlohmann::json j;
  j["format"] = "centfuzz-summary";
  j["v"] = 1;
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& s : summaries) rows.push_back(SummaryToJson(s));
  j["campaigns"] = std::move(rows);
  return j.dump(2) + "\n";
}

std::vector<CampaignSummary> ParseMachine(const std::string& text) {
  try {
    nlohmann::json j = nlohmann::json::parse(text);
    if (j.at("format").get<std::string>() != "centfuzz-summary")
      throw ParseError("not a machine summary document");
    std::vector<CampaignSummary> out;
    for (const auto& row : j.at("campaigns")) out.push_back(SummaryFromJson(row));
    return out;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed machine summary: ") + e.what());
  }
}

SummaryMean MeanOf(const std::vector<CampaignSummary>& summaries) {
  if (summaries.empty()) throw ValidationError("mean of zero summaries");
  SummaryMean m;
  double n = static_cast<double>(summaries.size());
  for (const auto& s : summaries) {
    m.c0 += s.c0; m.c3 += s.c3; m.c03 += s.c03;
    m.t0 += s.t0; m.t3 += s.t3; m.t03 += s.t03;
    m.mc += s.mc; m.passes += s.passes;
    m.inconclusive += s.inconclusive; m.skipped += s.skipped;
    m.total += s.total;
  }
  m.c0 /= n; m.c3 /= n; m.c03 /= n; m.t0 /= n; m.t3 /= n; m.t03 /= n;
  m.mc /= n; m.passes /= n; m.inconclusive /= n; m.skipped /= n; m.total /= n;
  return m;
}

size_t CollectFailingSuite(const std::vector<TrialRecord>& records,
                           const std::filesystem::path& campaign_dir,
                           const FeatureCatalog& catalog,
                           const std::filesystem::path& out_dir) {
  fs::create_directories(out_dir);
  nlohmann::json manifest = nlohmann::json::array();
  size_t entries = 0;
  for (const auto& rec : records) {
    if (rec.skipped || !IsDifferentialFailure(rec.failure_class)) continue;
    char name[64];
    std::snprintf(name, sizeof(name), "trial-%06llu.c",
                  static_cast<unsigned long long>(rec.trial_index));
    nlohmann::json entry;
    entry["trial"] = rec.trial_index;
    entry["class"] = ToString(rec.failure_class);
    entry["generator_seed"] = rec.config.generator_seed;
    entry["generator_args"] = RenderFlags(rec.config, catalog);
    // Copy the program when its artifacts were kept; the manifest entry is
    // complete for regeneration either way.
    fs::path src = rec.program_path;
    if (src.is_relative()) src = campaign_dir / src;
    std::error_code ec;
    if (fs::exists(src, ec) && !ec) {
      fs::copy_file(src, out_dir / name, fs::copy_options::overwrite_existing,
                    ec);
      if (!ec) entry["program"] = name;
    }
    manifest.push_back(std::move(entry));
    ++entries;
  }
  std::ofstream out(out_dir / "manifest.json", std::ios::trunc);
  if (!out)
    throw EnvironmentError("cannot write suite manifest in " +
                           out_dir.string());
  out << manifest.dump(2) << "\n";
  if (!out.flush())
    throw EnvironmentError("failed writing suite manifest in " +
                           out_dir.string());
  return entries;
}

}  // namespace centfuzz
