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

#ifndef SASV_SCORING_H_
#define SASV_SCORING_H_

#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "sasv/core.h"

namespace sasv {

// Affine countermeasure head: S_CM = w . x_cm + b (a logit).
struct CmHead {
  std::vector<double> weights;
  double bias = 0.0;

  std::size_t dim() const { return weights.size(); }
};

// Text format:
//   dim <n>
//   bias <float>
//   <w_1> ... <w_n>
CmHead LoadCmHead(const std::string& path);
void WriteCmHead(const std::string& path, const CmHead& head);

// Coordinate-wise mean of the enrollment embeddings, L2-normalized.
// Throws kEmptyInput, kDimensionMismatch or kZeroVector.
std::vector<double> EnrollCentroid(
    std::span<const std::vector<double>> embeddings);

// Cosine similarity clamped to [-1, 1]. Throws kZeroVector on a zero-norm
// input and kDimensionMismatch on unequal lengths.
double CosineScore(std::span<const double> enroll,
                   std::span<const double> test);

double CmScore(const CmHead& head, std::span<const double> x_cm);

// How several enrollment utterances of one speaker are combined.
enum class EnrollMode {
  kEmbeddingMean,  // cosine against the normalized mean embedding
  kScoreMean,      // mean of per-utterance cosine scores
};

// Per-speaker enrollment data resolved against an ASV embedding table.
class SpeakerModels {
 public:
  SpeakerModels(const EnrollmentMap& enrollment, const EmbeddingTable& asv,
                EnrollMode mode = EnrollMode::kEmbeddingMean);

  bool Contains(const std::string& speaker_id) const {
    return models_.count(speaker_id) != 0;
  }
  // ASV score of a test embedding against a speaker.
  double Score(const std::string& speaker_id,
               std::span<const double> test) const;
  const std::vector<double>& Centroid(const std::string& speaker_id) const;

 private:
  struct Model {
    std::vector<double> centroid;
    std::vector<std::vector<double>> utterances;
  };
  EnrollMode mode_;
  std::unordered_map<std::string, Model> models_;
};

// One record per trial, in input order, with s_sasv unset. Unresolved ids
// raise kUnresolvedId naming the trial index and the missing id.
std::vector<ScoreRecord> ScoreAll(const std::vector<Trial>& trials,
                                  const SpeakerModels& speakers,
                                  const EmbeddingTable& asv,
                                  const EmbeddingTable& cm,
                                  const CmHead& head);

std::vector<ScoreRecord> ScoreAll(const std::vector<Trial>& trials,
                                  const EnrollmentMap& enrollment,
                                  const EmbeddingTable& asv,
                                  const EmbeddingTable& cm,
                                  const CmHead& head,
                                  EnrollMode mode = EnrollMode::kEmbeddingMean);

}  // namespace sasv

#endif  // SASV_SCORING_H_
