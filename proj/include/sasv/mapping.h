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

#ifndef SASV_MAPPING_H_
#define SASV_MAPPING_H_

#include <span>
#include <string>
#include <string_view>

namespace sasv {

// Logistic calibrator p = sigmoid(a * s + b).
struct CalibratorParams {
  double a = 0.0;
  double b = 0.0;
};

// How a raw ASV cosine score is turned into a probability.
struct Mapping {
  enum class Kind { kLinear, kSigmoid, kCalibrated };

  Kind kind = Kind::kLinear;
  CalibratorParams params;  // used by kCalibrated only

  static Mapping Linear() { return {Kind::kLinear, {}}; }
  static Mapping Sigmoid() { return {Kind::kSigmoid, {}}; }
  static Mapping Calibrated(CalibratorParams p) { return {Kind::kCalibrated, p}; }
};

std::string_view MappingName(Mapping::Kind kind);

// Numerically stable logistic function.
double Sigmoid(double s);
// log(1 + exp(x)) without overflow.
double Softplus(double x);

// (s + 1) / 2; maps a cosine score in [-1, 1] onto [0, 1].
double MapLinear(double s);
double MapSigmoid(double s);

double ApplyMapping(const Mapping& mapping, double s);

// Mean negative log-likelihood of sigmoid(a*s + b) against 0/1 labels plus
// l2 * (a^2 + b^2) / 2.
double CalibrationObjective(const CalibratorParams& p,
                            std::span<const double> scores,
                            std::span<const int> labels, double l2);

inline constexpr double kDefaultCalibratorL2 = 1e-4;

// Regularized logistic-regression fit by damped Newton iterations, stopping
// once the gradient norm drops below 1e-8. Labels are 1 (target) and
// 0 (non-target); spoof trials must be filtered out by the caller.
// Throws kSingleClass, kNonConvergence or kInvalidArgument.
CalibratorParams FitCalibrator(std::span<const double> scores,
                               std::span<const int> labels,
                               double l2 = kDefaultCalibratorL2);

// Text format: "a <float>" and "b <float>" lines.
CalibratorParams LoadCalibrator(const std::string& path);
void WriteCalibrator(const std::string& path, const CalibratorParams& p);

}  // namespace sasv

#endif  // SASV_MAPPING_H_
