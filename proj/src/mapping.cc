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

#include "sasv/mapping.h"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>

#include "sasv/core.h"
#include "sasv/io.h"

namespace sasv {

std::string_view MappingName(Mapping::Kind kind) {
  switch (kind) {
    case Mapping::Kind::kLinear: return "linear";
    case Mapping::Kind::kSigmoid: return "sigmoid";
    case Mapping::Kind::kCalibrated: return "calibrated";
  }
  return "?";
}

double Sigmoid(double s) {
  if (s < 0.0) {
    double e = std::exp(s);
    return e / (1.0 + e);
  }
  return 1.0 / (1.0 + std::exp(-s));
}

double Softplus(double x) {
  if (x > 0.0) return x + std::log1p(std::exp(-x));
  return std::log1p(std::exp(x));
}

double MapLinear(double s) { return (s + 1.0) / 2.0; }

double MapSigmoid(double s) { return Sigmoid(s); }

double ApplyMapping(const Mapping& mapping, double s) {
  switch (mapping.kind) {
    case Mapping::Kind::kLinear: return MapLinear(s);
    case Mapping::Kind::kSigmoid: return MapSigmoid(s);
    case Mapping::Kind::kCalibrated:
      return Sigmoid(mapping.params.a * s + mapping.params.b);
  }
  return 0.0;
}

double CalibrationObjective(const CalibratorParams& p,
                            std::span<const double> scores,
                            std::span<const int> labels, double l2) {
  double sum = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    double z = p.a * scores[i] + p.b;
    // -log sigmoid(z) for targets, -log(1 - sigmoid(z)) otherwise.
    sum += labels[i] == 1 ? Softplus(-z) : Softplus(z);
  }
  return sum / static_cast<double>(scores.size()) +
         0.5 * l2 * (p.a * p.a + p.b * p.b);
}

CalibratorParams FitCalibrator(std::span<const double> scores,
                               std::span<const int> labels, double l2) {
  if (scores.size() != labels.size()) {
    throw Error(ErrorCode::kInvalidArgument,
                "calibrator scores and labels differ in length");
  }
  if (!(l2 >= 0.0) || !std::isfinite(l2)) {
    throw Error(ErrorCode::kInvalidArgument, "l2 must be nonnegative");
  }
  std::size_t n_pos = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (!std::isfinite(scores[i])) {
      throw Error(ErrorCode::kNonFinite, "non-finite calibration score");
    }
    if (labels[i] != 0 && labels[i] != 1) {
      throw Error(ErrorCode::kInvalidArgument, "calibration labels must be 0/1");
    }
    n_pos += labels[i];
  }
  if (n_pos == 0 || n_pos == scores.size()) {
    throw Error(ErrorCode::kSingleClass,
                "calibrator needs both target and non-target scores");
  }

  constexpr int kMaxIterations = 200;
  constexpr double kGradTol = 1e-8;
  const double n = static_cast<double>(scores.size());
  CalibratorParams p;
  double f = CalibrationObjective(p, scores, labels, l2);

  for (int iter = 0; iter < kMaxIterations; ++iter) {
    double ga = 0.0, gb = 0.0, haa = 0.0, hab = 0.0, hbb = 0.0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
      double s = scores[i];
      double q = Sigmoid(p.a * s + p.b);
      double r = q - labels[i];
      double w = q * (1.0 - q);
      ga += r * s;
      gb += r;
      haa += w * s * s;
      hab += w * s;
      hbb += w;
    }
    ga = ga / n + l2 * p.a;
    gb = gb / n + l2 * p.b;
    haa = haa / n + l2;
    hab = hab / n;
    hbb = hbb / n + l2;
    double gnorm = std::hypot(ga, gb);
    if (gnorm < kGradTol) return p;

    // Newton direction; gradient direction if the Hessian is not usable.
    double det = haa * hbb - hab * hab;
    double da = -ga, db = -gb;
    if (det > 1e-300 && haa > 0.0) {
      double na = -(hbb * ga - hab * gb) / det;
      double nb = -(haa * gb - hab * ga) / det;
      if (na * ga + nb * gb < 0.0) {
        da = na;
        db = nb;
      }
    }
    // Backtracking (Armijo) line search.
    double slope = da * ga + db * gb;
    double step = 1.0;
    bool moved = false;
    for (int k = 0; k < 60; ++k) {
      CalibratorParams trial{p.a + step * da, p.b + step * db};
      double ft = CalibrationObjective(trial, scores, labels, l2);
      if (ft <= f + 1e-4 * step * slope) {
        p = trial;
        f = ft;
        moved = true;
        break;
      }
      step *= 0.5;
    }
    if (!moved) {
      // At the limit of floating-point resolution; accept if close enough.
      if (gnorm < 1e3 * kGradTol) return p;
      break;
    }
  }
  throw Error(ErrorCode::kNonConvergence,
              "calibrator did not converge (data may be separable; "
              "increase l2)");
}

CalibratorParams LoadCalibrator(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, path + ": cannot open for reading");
  std::map<std::string, double> values;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto f = SplitFields(line);
    if (f.empty() || f[0][0] == '#') continue;
    char* end = nullptr;
    double v = f.size() == 2 ? std::strtod(f[1].c_str(), &end) : 0.0;
    if (f.size() != 2 || (f[0] != "a" && f[0] != "b") || *end != '\0' ||
        !std::isfinite(v)) {
      throw Error(ErrorCode::kMalformedLine,
                  path + ":" + std::to_string(lineno) +
                      ": expected 'a <float>' or 'b <float>'");
    }
    values[f[0]] = v;
  }
  if (values.size() != 2) {
    throw Error(ErrorCode::kMalformedLine, path + ": needs both 'a' and 'b'");
  }
  return {values["a"], values["b"]};
}

void WriteCalibrator(const std::string& path, const CalibratorParams& p) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, path + ": cannot open for writing");
  out << "a " << FormatDouble(p.a, 17) << '\n'
      << "b " << FormatDouble(p.b, 17) << '\n';
  if (!out) throw Error(ErrorCode::kIo, path + ": write failed");
}

}  // namespace sasv
