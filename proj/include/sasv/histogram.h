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

#ifndef SASV_HISTOGRAM_H_
#define SASV_HISTOGRAM_H_

#include <string>
#include <vector>

#include "sasv/core.h"
#include "sasv/metrics.h"

namespace sasv {

// Per-class score histograms over one shared set of equal-width bins.
struct HistogramData {
  ScoreColumn column = ScoreColumn::kSasv;
  // n_bins + 1 increasing edges; a constant column yields the single
  // degenerate bin [v, v].
  std::vector<double> edges;
  bool degenerate = false;
  struct Series {
    std::string name;  // target, nontarget, spoof or unlabeled
    std::vector<long> counts;
    long total = 0;
  };
  std::vector<Series> series;  // classes present, in a fixed order
};

// Bins span [min, max] of the column over all records; bin i covers
// [edge_i, edge_i+1), the last bin also includes max.
HistogramData BuildHistogram(const std::vector<ScoreRecord>& records,
                             ScoreColumn column, int n_bins = 50);

// Text layout:
//   # histogram column=<col> bins=<n> min=<lo> max=<hi> [degenerate=1]
//   class <name> count=<total>
//   <edge_low> <edge_high> <count>     (one row per bin)
//   ...                                (next class header and rows)
std::string FormatHistogram(const HistogramData& hist);

}  // namespace sasv

#endif  // SASV_HISTOGRAM_H_
