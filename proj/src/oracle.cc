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

// Slow reference implementations used to check the production code paths.

#include <algorithm>
#include <cmath>
#include <limits>

#include "sasv/synth.h"

namespace sasv {

EerResult OracleEer(std::span<const double> pos, std::span<const double> neg) {
  if (pos.empty() || neg.empty()) {
    throw Error(ErrorCode::kEmptyInput, "oracle EER needs both sides");
  }
  const double kInf = std::numeric_limits<double>::infinity();

  std::vector<double> values(pos.begin(), pos.end());
  values.insert(values.end(), neg.begin(), neg.end());
  std::sort(values.begin(), values.end());
  values.erase(std::unique(values.begin(), values.end()), values.end());

  std::vector<double> candidates = {-kInf};
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i > 0) candidates.push_back(0.5 * (values[i - 1] + values[i]));
    candidates.push_back(values[i]);
  }
  candidates.push_back(kInf);

  struct Point {
    double t;
    std::size_t pos_below;  // #pos < t
    std::size_t neg_above;  // #neg >= t
  };
  std::vector<Point> points;
  for (double t : candidates) {
    Point p{t, 0, 0};
    for (double s : pos) p.pos_below += s < t;
    for (double s : neg) p.neg_above += s >= t;
    // A run of candidates with equal rates is one plateau; keep its
    // largest threshold.
    if (!points.empty() && points.back().pos_below == p.pos_below &&
        points.back().neg_above == p.neg_above) {
      points.back() = p;
    } else {
      points.push_back(p);
    }
  }

  const double n_pos = static_cast<double>(pos.size());
  const double n_neg = static_cast<double>(neg.size());
  for (std::size_t k = 0; k < points.size(); ++k) {
    const Point& p = points[k];
    double frr = p.pos_below / n_pos;
    double far = p.neg_above / n_neg;
    double lhs = static_cast<double>(p.neg_above) * n_pos;
    double rhs = static_cast<double>(p.pos_below) * n_neg;
    if (lhs == rhs) return {frr, p.t};
    if (lhs < rhs) {
      const Point& q = points[k - 1];
      double q_frr = q.pos_below / n_pos;
      double q_far = q.neg_above / n_neg;
      double d0 = q_far - q_frr;
      double d1 = far - frr;
      double w = d0 / (d0 - d1);
      EerResult r;
      r.eer = q_frr + w * (frr - q_frr);
      if (p.t == kInf) {
        r.threshold = q.t;
      } else if (q.t == -kInf) {
        r.threshold = p.t;
      } else {
        r.threshold = q.t + w * (p.t - q.t);
      }
      return r;
    }
  }
  return {1.0, kInf};  // unreachable: the +inf point always has D = -1
}

CalibratorParams OracleCalibrator(std::span<const double> scores,
                                  std::span<const int> labels, double l2,
                                  int refinements) {
  bool has_pos = false, has_neg = false;
  for (int y : labels) (y == 1 ? has_pos : has_neg) = true;
  if (!has_pos || !has_neg) {
    throw Error(ErrorCode::kSingleClass, "oracle calibrator needs both labels");
  }
  constexpr int kPoints = 201;
  double a_lo = 0.0, a_hi = 50.0, b_lo = -25.0, b_hi = 25.0;
  CalibratorParams best;
  double best_f = std::numeric_limits<double>::infinity();
  for (int round = 0; round <= refinements; ++round) {
    const double da = (a_hi - a_lo) / (kPoints - 1);
    const double db = (b_hi - b_lo) / (kPoints - 1);
    for (int i = 0; i < kPoints; ++i) {
      for (int j = 0; j < kPoints; ++j) {
        CalibratorParams p{a_lo + i * da, b_lo + j * db};
        double f = CalibrationObjective(p, scores, labels, l2);
        if (f < best_f) {
          best_f = f;
          best = p;
        }
      }
    }
    a_lo = best.a - da;
    a_hi = best.a + da;
    b_lo = best.b - db;
    b_hi = best.b + db;
  }
  return best;
}

}  // namespace sasv
