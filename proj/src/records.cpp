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

#include "centfuzz/records.hpp"

#include <algorithm>
#include <fstream>
#include <set>

#include "centfuzz/errors.hpp"

namespace centfuzz {

namespace {

nlohmann::json StageToJson(const StageResult& s) {
  return {{"kind", ToString(s.kind)},   {"exit", s.exit_status},
          {"signal", s.term_signal},    {"digest", s.output_digest},
          {"bytes", s.output_bytes},    {"preview", s.output_preview},
          {"wall", s.wall_seconds}};
}

StageResult StageFromJson(const nlohmann::json& j) {
  StageResult s;
  s.kind = StageKindFromString(j.at("kind").get<std::string>());
  s.exit_status = j.at("exit").get<int>();
  s.term_signal = j.at("signal").get<int>();
  s.output_digest = j.at("digest").get<uint64_t>();
  s.output_bytes = j.at("bytes").get<uint64_t>();
  s.output_preview = j.at("preview").get<std::string>();
  s.wall_seconds = j.at("wall").get<double>();
  return s;
}

std::string DecisionsToString(const std::vector<uint8_t>& d) {
  std::string s;
  s.reserve(d.size());
  for (uint8_t b : d) s += (b ? '1' : '0');
  return s;
}

std::vector<uint8_t> DecisionsFromString(const std::string& s) {
  std::vector<uint8_t> d;
  d.reserve(s.size());
  for (char c : s) {
    if (c != '0' && c != '1')
      throw ParseError("decision string must be over {0,1}");
    d.push_back(c == '1' ? 1 : 0);
  }
  return d;
}

}  // namespace

nlohmann::json RecordToJson(const TrialRecord& rec) {
  nlohmann::json j;
  j["v"] = 1;
  j["trial"] = rec.trial_index;
  j["status"] = rec.skipped ? "skipped" : "done";
  j["config"] = {{"strategy", ToString(rec.config.strategy)},
                 {"centroid", rec.config.centroid_index},
                 {"generator_seed", rec.config.generator_seed},
                 {"decisions", DecisionsToString(rec.config.decisions)}};
  if (rec.skipped) {
    j["skip_reason"] = rec.skip_reason;
    return j;
  }
  j["class"] = ToString(rec.failure_class);
  j["program"] = rec.program_path;
  nlohmann::json stages;
  if (rec.compile_low) stages["compile_low"] = StageToJson(*rec.compile_low);
  if (rec.compile_high) stages["compile_high"] = StageToJson(*rec.compile_high);
  if (rec.exec_low) stages["exec_low"] = StageToJson(*rec.exec_low);
  if (rec.exec_high) stages["exec_high"] = StageToJson(*rec.exec_high);
  j["stages"] = std::move(stages);
  return j;
}

TrialRecord RecordFromJson(const nlohmann::json& j) {
  try {
    if (j.at("v").get<int>() != 1)
      throw ParseError("unsupported record version");
    TrialRecord rec;
    rec.trial_index = j.at("trial").get<uint64_t>();
    const auto& cfg = j.at("config");
    rec.config.strategy =
        StrategyFromString(cfg.at("strategy").get<std::string>());
    rec.config.centroid_index = cfg.at("centroid").get<int>();
    rec.config.generator_seed = cfg.at("generator_seed").get<uint64_t>();
    rec.config.decisions =
        DecisionsFromString(cfg.at("decisions").get<std::string>());
    rec.config.trial_index = rec.trial_index;
    std::string status = j.at("status").get<std::string>();
    if (status == "skipped") {
      rec.skipped = true;
      rec.skip_reason = j.value("skip_reason", std::string());
      rec.CheckConsistent();
      return rec;
    }
    if (status != "done") throw ParseError("unknown record status: " + status);
    rec.failure_class = FailureClassFromString(j.at("class").get<std::string>());
    rec.program_path = j.at("program").get<std::string>();
    const auto& stages = j.at("stages");
    if (stages.contains("compile_low"))
      rec.compile_low = StageFromJson(stages.at("compile_low"));
    if (stages.contains("compile_high"))
      rec.compile_high = StageFromJson(stages.at("compile_high"));
    if (stages.contains("exec_low"))
      rec.exec_low = StageFromJson(stages.at("exec_low"));
    if (stages.contains("exec_high"))
      rec.exec_high = StageFromJson(stages.at("exec_high"));
    rec.CheckConsistent();
    return rec;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed trial record: ") + e.what());
  }
}

std::string RecordToLine(const TrialRecord& rec) {
  return RecordToJson(rec).dump();
}

std::vector<TrialRecord> LoadRecords(const std::filesystem::path& path,
                                     RecordsReadStats* stats) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open records log: " + path.string());
  RecordsReadStats local;
  std::vector<TrialRecord> records;
  std::set<uint64_t> seen;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    try {
      TrialRecord rec = RecordFromJson(nlohmann::json::parse(line));
      if (!seen.insert(rec.trial_index).second) {
        ++local.duplicate_trials;
        continue;
      }
      records.push_back(std::move(rec));
    } catch (const Error&) {
      ++local.malformed_lines;
    } catch (const nlohmann::json::exception&) {
      ++local.malformed_lines;
    }
  }
  if (stats != nullptr) *stats = local;
  return records;
}

void RewriteRecordsSorted(const std::filesystem::path& path,
                          std::vector<TrialRecord> records) {
  std::stable_sort(records.begin(), records.end(),
                   [](const TrialRecord& a, const TrialRecord& b) {
                     return a.trial_index < b.trial_index;
                   });
  for (size_t i = 1; i < records.size(); ++i)
    if (records[i].trial_index == records[i - 1].trial_index)
      throw ValidationError("duplicate trial index " +
                            std::to_string(records[i].trial_index) +
                            " in records rewrite");
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::trunc);
    if (!out)
      throw EnvironmentError("cannot write records log: " + tmp.string());
    for (const auto& rec : records) out << RecordToLine(rec) << "\n";
    if (!out.flush())
      throw EnvironmentError("failed writing records log: " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace centfuzz
