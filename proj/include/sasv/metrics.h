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

#ifndef SASV_METRICS_H_
#define SASV_METRICS_H_

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sasv/core.h"

namespace sasv {

struct EerResult {
  double eer = 0.0;  // fraction in [0, 1]
  double threshold = 0.0;
};

/**
 * Equal error rate of positive vs negative scores.
 *
 * A trial is accepted iff score >= threshold. The rates are evaluated at
 * every distinct observed score plus -inf and +inf:
 *
 *   FRR(t) = #{pos < t} / |pos|,   FAR(t) = #{neg >= t} / |neg|.
 *
 * D(t) = FAR(t) - FRR(t) is non-increasing, +1 at -inf and -1 at +inf.
 * At the first sweep point with D <= 0: if D == 0 that point is returned;
 * otherwise both rates and the threshold are interpolated linearly in D
 * between it and the previous sweep point. When the crossing lies between
 * the largest score and +inf the threshold is the largest score.
 *
 * Throws kEmptyInput on an empty side and kNonFinite on NaN/inf scores.
 */
EerResult ComputeEer(std::span<const double> pos, std::span<const double> neg);

// Which column of a ScoreRecord to evaluate.
enum class ScoreColumn { kAsv, kCm, kSasv };

std::optional<ScoreColumn> ParseScoreColumn(const std::string& name);
const char* ScoreColumnName(ScoreColumn column);

// The three error rates of a spoofing-aware system. Target is the positive
// class for all three; a metric is absent when its negative class (or the
// target class) has no trials.
//   sv:   target vs nontarget
//   spf:  target vs spoof
//   sasv: target vs nontarget + spoof
struct MetricSuite {
  std::optional<EerResult> sv_eer;
  std::optional<EerResult> spf_eer;
  std::optional<EerResult> sasv_eer;
};

// Every record must carry a label (kInvalidArgument otherwise).
MetricSuite Evaluate(const std::vector<ScoreRecord>& records,
                     ScoreColumn column = ScoreColumn::kSasv);

// "12.34%" style formatting used by the command-line tools.
std::string FormatPercent(double fraction);

}  // namespace sasv

#endif  // SASV_METRICS_H_
