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

#include "sasv/scoring.h"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <numeric>
#include <sstream>

#include "sasv/io.h"

namespace sasv {

namespace {

double Dot(std::span<const double> a, std::span<const double> b) {
  return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

bool ParseDouble(const std::string& token, double* out) {
  char* end = nullptr;
  *out = std::strtod(token.c_str(), &end);
  return !token.empty() && end == token.c_str() + token.size() &&
         std::isfinite(*out);
}

}  // namespace

CmHead LoadCmHead(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, path + ": cannot open for reading");
  auto fail = [&](int line, const std::string& what) {
    throw Error(ErrorCode::kMalformedLine,
                path + ":" + std::to_string(line) + ": " + what);
  };
  std::string line;
  std::vector<std::string> f;

  if (!std::getline(in, line)) fail(1, "missing 'dim <n>'");
  f = SplitFields(line);
  if (f.size() != 2 || f[0] != "dim") fail(1, "expected 'dim <n>'");
  char* end = nullptr;
  long dim = std::strtol(f[1].c_str(), &end, 10);
  if (*end != '\0' || dim <= 0) fail(1, "bad dimension '" + f[1] + "'");

  CmHead head;
  if (!std::getline(in, line)) fail(2, "missing 'bias <float>'");
  f = SplitFields(line);
  if (f.size() != 2 || f[0] != "bias" || !ParseDouble(f[1], &head.bias)) {
    fail(2, "expected 'bias <float>'");
  }

  if (!std::getline(in, line)) fail(3, "missing weights");
  f = SplitFields(line);
  if (f.size() != static_cast<std::size_t>(dim)) {
    throw Error(ErrorCode::kDimensionMismatch,
                path + ":3: expected " + std::to_string(dim) +
                    " weights, got " + std::to_string(f.size()));
  }
  head.weights.resize(dim);
  for (long i = 0; i < dim; ++i) {
    if (!ParseDouble(f[i], &head.weights[i])) {
      fail(3, "bad weight '" + f[i] + "'");
    }
  }
  return head;
}

void WriteCmHead(const std::string& path, const CmHead& head) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, path + ": cannot open for writing");
  out << "dim " << head.dim() << '\n';
  out << "bias " << FormatDouble(head.bias, 17) << '\n';
  for (std::size_t i = 0; i < head.weights.size(); ++i) {
    if (i) out << ' ';
    out << FormatDouble(head.weights[i], 17);
  }
  out << '\n';
  if (!out) throw Error(ErrorCode::kIo, path + ": write failed");
}

std::vector<double> EnrollCentroid(
    std::span<const std::vector<double>> embeddings) {
  if (embeddings.empty()) {
    throw Error(ErrorCode::kEmptyInput, "no enrollment embeddings");
  }
  const std::size_t dim = embeddings.front().size();
  std::vector<double> mean(dim, 0.0);
  for (const auto& e : embeddings) {
    if (e.size() != dim) {
      throw Error(ErrorCode::kDimensionMismatch,
                  "enrollment embeddings differ in dimension");
    }
    for (std::size_t d = 0; d < dim; ++d) mean[d] += e[d];
  }
  for (double& v : mean) v /= static_cast<double>(embeddings.size());
  double norm = std::sqrt(Dot(mean, mean));
  if (norm == 0.0) {
    throw Error(ErrorCode::kZeroVector,
                "enrollment mean is the zero vector");
  }
  for (double& v : mean) v /= norm;
  return mean;
}

double CosineScore(std::span<const double> enroll,
                   std::span<const double> test) {
  if (enroll.size() != test.size()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "cosine of vectors with dimensions " +
                    std::to_string(enroll.size()) + " and " +
                    std::to_string(test.size()));
  }
  double ne = Dot(enroll, enroll);
  double nt = Dot(test, test);
  if (ne == 0.0 || nt == 0.0) {
    throw Error(ErrorCode::kZeroVector, "cosine of a zero-norm vector");
  }
  double c = Dot(enroll, test) / (std::sqrt(ne) * std::sqrt(nt));
  return std::clamp(c, -1.0, 1.0);
}

double CmScore(const CmHead& head, std::span<const double> x_cm) {
  if (x_cm.size() != head.dim()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "CM embedding has dimension " + std::to_string(x_cm.size()) +
                    ", head expects " + std::to_string(head.dim()));
  }
  return Dot(head.weights, x_cm) + head.bias;
}

SpeakerModels::SpeakerModels(const EnrollmentMap& enrollment,
                             const EmbeddingTable& asv, EnrollMode mode)
    : mode_(mode) {
  for (const auto& spk : enrollment.speakers()) {
    Model m;
    for (const auto& utt : *enrollment.Find(spk)) {
      const Embedding* e = asv.Find(utt);
      if (e == nullptr) {
        throw Error(ErrorCode::kUnresolvedId,
                    "enrollment utterance '" + utt + "' of speaker '" + spk +
                        "' has no ASV embedding");
      }
      m.utterances.push_back(e->values);
    }
    m.centroid = EnrollCentroid(m.utterances);
    if (mode_ == EnrollMode::kEmbeddingMean) m.utterances.clear();
    models_.emplace(spk, std::move(m));
  }
}

const std::vector<double>& SpeakerModels::Centroid(
    const std::string& speaker_id) const {
  auto it = models_.find(speaker_id);
  if (it == models_.end()) {
    throw Error(ErrorCode::kUnresolvedId,
                "speaker '" + speaker_id + "' is not enrolled");
  }
  return it->second.centroid;
}

double SpeakerModels::Score(const std::string& speaker_id,
                            std::span<const double> test) const {
  auto it = models_.find(speaker_id);
  if (it == models_.end()) {
    throw Error(ErrorCode::kUnresolvedId,
                "speaker '" + speaker_id + "' is not enrolled");
  }
  const Model& m = it->second;
  if (mode_ == EnrollMode::kEmbeddingMean) return CosineScore(m.centroid, test);
  double sum = 0.0;
  for (const auto& u : m.utterances) sum += CosineScore(u, test);
  return sum / static_cast<double>(m.utterances.size());
}

std::vector<ScoreRecord> ScoreAll(const std::vector<Trial>& trials,
                                  const SpeakerModels& speakers,
                                  const EmbeddingTable& asv,
                                  const EmbeddingTable& cm,
                                  const CmHead& head) {
  std::vector<ScoreRecord> records;
  records.reserve(trials.size());
  for (std::size_t i = 0; i < trials.size(); ++i) {
    const Trial& t = trials[i];
    auto unresolved = [&](const std::string& what) {
      throw Error(ErrorCode::kUnresolvedId,
                  "trial " + std::to_string(i) + " (" + t.speaker_id + " " +
                      t.test_utt_id + "): " + what);
    };
    if (!speakers.Contains(t.speaker_id)) {
      unresolved("unknown speaker '" + t.speaker_id + "'");
    }
    const Embedding* x_asv = asv.Find(t.test_utt_id);
    if (x_asv == nullptr) {
      unresolved("no ASV embedding for '" + t.test_utt_id + "'");
    }
    const Embedding* x_cm = cm.Find(t.test_utt_id);
    if (x_cm == nullptr) {
      unresolved("no CM embedding for '" + t.test_utt_id + "'");
    }
    ScoreRecord r;
    r.trial = t;
    r.s_asv = speakers.Score(t.speaker_id, x_asv->values);
    r.s_cm = CmScore(head, x_cm->values);
    records.push_back(std::move(r));
  }
  return records;
}

std::vector<ScoreRecord> ScoreAll(const std::vector<Trial>& trials,
                                  const EnrollmentMap& enrollment,
                                  const EmbeddingTable& asv,
                                  const EmbeddingTable& cm,
                                  const CmHead& head, EnrollMode mode) {
  SpeakerModels speakers(enrollment, asv, mode);
  return ScoreAll(trials, speakers, asv, cm, head);
}

}  // namespace sasv
