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

#include "sasv/histogram.h"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "sasv/io.h"

namespace sasv {

namespace {

double ColumnValue(const ScoreRecord& r, ScoreColumn column) {
  switch (column) {
    case ScoreColumn::kAsv: return r.s_asv;
    case ScoreColumn::kCm: return r.s_cm;
    case ScoreColumn::kSasv:
      if (!r.s_sasv) {
        throw Error(ErrorCode::kInvalidArgument,
                    "record without a fused score");
      }
      return *r.s_sasv;
  }
  return 0.0;
}

int SeriesIndex(const ScoreRecord& r) {
  if (!r.trial.label) return 3;
  return static_cast<int>(*r.trial.label);
}

}  // namespace

HistogramData BuildHistogram(const std::vector<ScoreRecord>& records,
                             ScoreColumn column, int n_bins) {
  if (records.empty()) {
    throw Error(ErrorCode::kEmptyInput, "no scores to histogram");
  }
  if (n_bins < 1) {
    throw Error(ErrorCode::kInvalidArgument, "number of bins must be positive");
  }
  std::vector<double> values;
  values.reserve(records.size());
  for (const auto& r : records) values.push_back(ColumnValue(r, column));
  auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
  const double lo = *lo_it, hi = *hi_it;

  HistogramData hist;
  hist.column = column;
  if (lo == hi) {
    hist.degenerate = true;
    hist.edges = {lo, hi};
    n_bins = 1;
  } else {
    hist.edges.resize(n_bins + 1);
    for (int i = 0; i < n_bins; ++i) {
      hist.edges[i] = lo + (hi - lo) * i / n_bins;
    }
    hist.edges[n_bins] = hi;
  }

  static const char* kNames[] = {"target", "nontarget", "spoof", "unlabeled"};
  std::vector<HistogramData::Series> all(4);
  for (int c = 0; c < 4; ++c) {
    all[c].name = kNames[c];
    all[c].counts.assign(n_bins, 0);
  }
  for (std::size_t i = 0; i < records.size(); ++i) {
    int bin = 0;
    if (!hist.degenerate) {
      bin = static_cast<int>(std::floor((values[i] - lo) / (hi - lo) * n_bins));
      bin = std::clamp(bin, 0, n_bins - 1);
    }
    auto& s = all[SeriesIndex(records[i])];
    ++s.counts[bin];
    ++s.total;
  }
  for (auto& s : all) {
    if (s.total > 0) hist.series.push_back(std::move(s));
  }
  return hist;
}

std::string FormatHistogram(const HistogramData& hist) {
  std::ostringstream os;
  os << "# histogram column=" << ScoreColumnName(hist.column)
     << " bins=" << hist.edges.size() - 1
     << " min=" << FormatDouble(hist.edges.front(), 9)
     << " max=" << FormatDouble(hist.edges.back(), 9);
  if (hist.degenerate) os << " degenerate=1";
  os << '\n';
  for (const auto& s : hist.series) {
    os << "class " << s.name << " count=" << s.total << '\n';
    for (std::size_t b = 0; b < s.counts.size(); ++b) {
      os << FormatDouble(hist.edges[b], 9) << ' '
         << FormatDouble(hist.edges[b + 1], 9) << ' ' << s.counts[b] << '\n';
    }
  }
  return os.str();
}

}  // namespace sasv
