// Copyright (c) 2026 sasv-fusion authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "sasv/fusion.h"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "sasv/io.h"

namespace sasv {

double Fuse(const FusionStrategy& strategy, double s_asv, double s_cm) {
  switch (strategy.kind) {
    case FusionStrategy::Kind::kProductRule:
      return Sigmoid(s_cm) * ApplyMapping(strategy.mapping, s_asv);
    case FusionStrategy::Kind::kMappedSum:
      return Sigmoid(s_cm) + Sigmoid(s_asv);
    case FusionStrategy::Kind::kRawProduct:
      return s_cm * s_asv;
    case FusionStrategy::Kind::kRawSum:
      return s_cm + s_asv;
  }
  return 0.0;
}

std::vector<ScoreRecord> FuseRecords(const FusionStrategy& strategy,
                                     std::vector<ScoreRecord> records) {
  for (auto& r : records) r.s_sasv = Fuse(strategy, r.s_asv, r.s_cm);
  return records;
}

const std::vector<SystemSpec>& KnownSystems() {
  static const std::vector<SystemSpec> systems = {
      {"pr-l-i", FusionStrategy::ProductRule(Mapping::Linear()), false, false},
      {"pr-s-i", FusionStrategy::ProductRule(Mapping::Sigmoid()), false, false},
      {"pr-c-i", FusionStrategy::ProductRule(Mapping::Calibrated({})), true,
       false},
      {"pr-l-f", FusionStrategy::ProductRule(Mapping::Linear()), false, true},
      {"pr-s-f", FusionStrategy::ProductRule(Mapping::Sigmoid()), false, true},
      {"baseline1", FusionStrategy::RawSum(), false, false},
      {"ablation-sum", FusionStrategy::MappedSum(), false, false},
      {"ablation-prod", FusionStrategy::RawProduct(), false, false},
  };
  return systems;
}

std::optional<SystemSpec> FindSystem(std::string_view name) {
  for (const auto& s : KnownSystems()) {
    if (s.name == name) return s;
  }
  return std::nullopt;
}

std::string FormatScoresTsv(const std::vector<ScoreRecord>& records) {
  std::ostringstream os;
  os << "speaker\tutt\ts_asv\ts_cm\ts_sasv\tlabel\n";
  for (const auto& r : records) {
    os << r.trial.speaker_id << '\t' << r.trial.test_utt_id << '\t'
       << FormatDouble(r.s_asv, 9) << '\t' << FormatDouble(r.s_cm, 9) << '\t'
       << (r.s_sasv ? FormatDouble(*r.s_sasv, 9) : "-") << '\t'
       << (r.trial.label ? TrialClassName(*r.trial.label) : "-") << '\n';
  }
  return os.str();
}

void WriteScoresTsv(const std::string& path,
                    const std::vector<ScoreRecord>& records) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, path + ": cannot open for writing");
  out << FormatScoresTsv(records);
  if (!out) throw Error(ErrorCode::kIo, path + ": write failed");
}

std::vector<ScoreRecord> LoadScoresTsv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, path + ": cannot open for reading");
  auto fail = [&](ErrorCode code, std::size_t line, const std::string& what) {
    throw Error(code, path + ":" + std::to_string(line) + ": " + what);
  };
  auto number = [&](const std::string& tok, std::size_t line) {
    char* end = nullptr;
    double v = std::strtod(tok.c_str(), &end);
    if (tok.empty() || *end != '\0') {
      fail(ErrorCode::kMalformedLine, line, "bad number '" + tok + "'");
    }
    if (!std::isfinite(v)) {
      fail(ErrorCode::kNonFinite, line, "non-finite score '" + tok + "'");
    }
    return v;
  };

  std::string line;
  std::size_t lineno = 0;
  if (!std::getline(in, line)) {
    throw Error(ErrorCode::kEmptyInput, path + ": empty scores file");
  }
  ++lineno;
  const std::vector<std::string> header = {"speaker", "utt",    "s_asv",
                                           "s_cm",    "s_sasv", "label"};
  if (SplitFields(line) != header) {
    fail(ErrorCode::kMalformedLine, lineno,
         "expected header 'speaker utt s_asv s_cm s_sasv label'");
  }
  std::vector<ScoreRecord> records;
  while (std::getline(in, line)) {
    ++lineno;
    auto f = SplitFields(line);
    if (f.empty()) continue;
    if (f.size() != 6) {
      fail(ErrorCode::kMalformedLine, lineno, "expected 6 columns");
    }
    ScoreRecord r;
    r.trial.speaker_id = f[0];
    r.trial.test_utt_id = f[1];
    r.s_asv = number(f[2], lineno);
    r.s_cm = number(f[3], lineno);
    if (f[4] != "-") r.s_sasv = number(f[4], lineno);
    if (f[5] != "-") {
      r.trial.label = ParseTrialClass(f[5]);
      if (!r.trial.label) {
        fail(ErrorCode::kUnknownLabel, lineno, "unknown label '" + f[5] + "'");
      }
    }
    records.push_back(std::move(r));
  }
  return records;
}

}  // namespace sasv
