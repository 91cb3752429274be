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

#include "sasv/metrics.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

namespace sasv {

namespace {

void CheckScores(std::span<const double> scores, const char* side) {
  if (scores.empty()) {
    throw Error(ErrorCode::kEmptyInput,
                std::string("EER needs at least one ") + side + " score");
  }
  for (double s : scores) {
    if (!std::isfinite(s)) {
      throw Error(ErrorCode::kNonFinite,
                  std::string("non-finite ") + side + " score");
    }
  }
}

}  // namespace

EerResult ComputeEer(std::span<const double> pos_in,
                     std::span<const double> neg_in) {
  CheckScores(pos_in, "positive");
  CheckScores(neg_in, "negative");
  std::vector<double> pos(pos_in.begin(), pos_in.end());
  std::vector<double> neg(neg_in.begin(), neg_in.end());
  std::sort(pos.begin(), pos.end());
  std::sort(neg.begin(), neg.end());
  const double n_pos = static_cast<double>(pos.size());
  const double n_neg = static_cast<double>(neg.size());
  const double kInf = std::numeric_limits<double>::infinity();

  // Previous sweep point starts at -inf: nothing rejected, all accepted.
  double prev_t = -kInf, prev_frr = 0.0, prev_far = 1.0;
  std::size_t ip = 0, in = 0;  // #pos < t, #neg < t
  while (true) {
    double t;
    if (ip < pos.size() || in < neg.size()) {
      double next_p = ip < pos.size() ? pos[ip] : kInf;
      double next_n = in < neg.size() ? neg[in] : kInf;
      t = std::min(next_p, next_n);
    } else {
      t = kInf;
    }
    double frr = t == kInf ? 1.0 : ip / n_pos;
    double far = t == kInf ? 0.0 : (neg.size() - in) / n_neg;
    // Sign of FAR - FRR from integer counts, free of rounding.
    double lhs = (t == kInf ? 0.0 : static_cast<double>(neg.size() - in)) * n_pos;
    double rhs = (t == kInf ? n_pos : static_cast<double>(ip)) * n_neg;
    if (lhs == rhs) return {frr, t};
    if (lhs < rhs) {
      double d0 = prev_far - prev_frr;
      double d1 = far - frr;
      double w = d0 / (d0 - d1);
      EerResult r;
      r.eer = prev_frr + w * (frr - prev_frr);
      if (t == kInf) {
        r.threshold = prev_t;
      } else if (prev_t == -kInf) {
        r.threshold = t;
      } else {
        r.threshold = prev_t + w * (t - prev_t);
      }
      return r;
    }
    prev_t = t;
    prev_frr = frr;
    prev_far = far;
    while (ip < pos.size() && pos[ip] <= t) ++ip;
    while (in < neg.size() && neg[in] <= t) ++in;
  }
}

std::optional<ScoreColumn> ParseScoreColumn(const std::string& name) {
  if (name == "s_asv") return ScoreColumn::kAsv;
  if (name == "s_cm") return ScoreColumn::kCm;
  if (name == "s_sasv") return ScoreColumn::kSasv;
  return std::nullopt;
}

const char* ScoreColumnName(ScoreColumn column) {
  switch (column) {
    case ScoreColumn::kAsv: return "s_asv";
    case ScoreColumn::kCm: return "s_cm";
    case ScoreColumn::kSasv: return "s_sasv";
  }
  return "?";
}

MetricSuite Evaluate(const std::vector<ScoreRecord>& records,
                     ScoreColumn column) {
  std::vector<double> target, nontarget, spoof;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    if (!r.trial.label) {
      throw Error(ErrorCode::kInvalidArgument,
                  "record " + std::to_string(i) + " has no label");
    }
    double s = 0.0;
    switch (column) {
      case ScoreColumn::kAsv: s = r.s_asv; break;
      case ScoreColumn::kCm: s = r.s_cm; break;
      case ScoreColumn::kSasv:
        if (!r.s_sasv) {
          throw Error(ErrorCode::kInvalidArgument,
                      "record " + std::to_string(i) + " has no fused score");
        }
        s = *r.s_sasv;
        break;
    }
    switch (*r.trial.label) {
      case TrialClass::kTarget: target.push_back(s); break;
      case TrialClass::kNonTarget: nontarget.push_back(s); break;
      case TrialClass::kSpoof: spoof.push_back(s); break;
    }
  }
  MetricSuite suite;
  if (target.empty()) return suite;
  if (!nontarget.empty()) suite.sv_eer = ComputeEer(target, nontarget);
  if (!spoof.empty()) suite.spf_eer = ComputeEer(target, spoof);
  std::vector<double> negatives = nontarget;
  negatives.insert(negatives.end(), spoof.begin(), spoof.end());
  if (!negatives.empty()) suite.sasv_eer = ComputeEer(target, negatives);
  return suite;
}

std::string FormatPercent(double fraction) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f%%", 100.0 * fraction);
  return buf;
}

}  // namespace sasv
