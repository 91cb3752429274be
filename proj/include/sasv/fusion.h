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

#ifndef SASV_FUSION_H_
#define SASV_FUSION_H_

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sasv/core.h"
#include "sasv/mapping.h"

namespace sasv {

struct FusionStrategy {
  enum class Kind {
    kProductRule,  // sigmoid(s_cm) * f(s_asv)
    kMappedSum,    // sigmoid(s_cm) + sigmoid(s_asv)
    kRawProduct,   // s_cm * s_asv
    kRawSum,       // s_cm + s_asv
  };

  Kind kind = Kind::kProductRule;
  Mapping mapping;  // ASV mapping f, product rule only

  static FusionStrategy ProductRule(Mapping m) { return {Kind::kProductRule, m}; }
  static FusionStrategy MappedSum() { return {Kind::kMappedSum, {}}; }
  static FusionStrategy RawProduct() { return {Kind::kRawProduct, {}}; }
  static FusionStrategy RawSum() { return {Kind::kRawSum, {}}; }
};

double Fuse(const FusionStrategy& strategy, double s_asv, double s_cm);

// Fills s_sasv of every record; order is preserved.
std::vector<ScoreRecord> FuseRecords(const FusionStrategy& strategy,
                                     std::vector<ScoreRecord> records);

// The named systems exposed on the command line.
struct SystemSpec {
  std::string name;
  FusionStrategy strategy;  // calibrated mapping params left at zero
  bool needs_calibrator = false;
  bool fine_tuned = false;  // expects a head produced by `train`
};

// pr-l-i, pr-s-i, pr-c-i, pr-l-f, pr-s-f, baseline1, ablation-sum,
// ablation-prod.
const std::vector<SystemSpec>& KnownSystems();
std::optional<SystemSpec> FindSystem(std::string_view name);

// Scores TSV: header "speaker utt s_asv s_cm s_sasv label" (tab-separated),
// floats with 9 significant digits, '-' for an absent label or score.
void WriteScoresTsv(const std::string& path,
                    const std::vector<ScoreRecord>& records);
std::string FormatScoresTsv(const std::vector<ScoreRecord>& records);
std::vector<ScoreRecord> LoadScoresTsv(const std::string& path);

}  // namespace sasv

#endif  // SASV_FUSION_H_
