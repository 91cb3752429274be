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

#ifndef SASV_TRAINER_H_
#define SASV_TRAINER_H_

#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "sasv/core.h"
#include "sasv/mapping.h"
#include "sasv/metrics.h"
#include "sasv/rng.h"
#include "sasv/scoring.h"

namespace sasv {

// Relative frequencies of target / non-target / spoof pairs. Classes are
// drawn round-robin from the repeated pattern, e.g. {1, 1, 1} gives
// target, nontarget, spoof, target, ...
struct ClassMix {
  int target = 1;
  int nontarget = 1;
  int spoof = 1;
};

struct TrainConfig {
  double learning_rate = 3e-4;
  int batch_size = 1024;
  int epochs = 200;
  double target_prior = 0.1;
  std::uint64_t seed = 0;
  Mapping mapping = Mapping::Sigmoid();  // linear or sigmoid only
  int pairs_per_epoch = 8192;            // fresh pairs drawn every epoch
  ClassMix mix;
};

// Throws kInvalidArgument on out-of-range fields or a calibrated mapping.
void ValidateTrainConfig(const TrainConfig& config);

// One training example. The ASV branch is frozen, so the enrollment
// centroid and test ASV embedding enter only through their cosine score.
struct TrainPair {
  std::string speaker_id;
  std::string test_utt_id;
  double s_asv = 0.0;
  std::vector<double> x_cm;
  int label = 0;  // 1 for target; non-target and spoof share label 0
};

// Draws training pairs from a labeled protocol. Bona fide utterances are
// attributed to their speaker through target trials; spoofs to the speaker
// they attack. A non-target pair claims a speaker other than the owner of
// the bona fide utterance.
class PairSampler {
 public:
  PairSampler(const std::vector<Trial>& labeled_trials,
              const SpeakerModels& speakers, const EmbeddingTable& asv,
              const EmbeddingTable& cm);

  // Throws kInsufficientData when a requested class cannot be realized.
  std::vector<TrainPair> Sample(Rng* rng, int n_pairs,
                                const ClassMix& mix = {}) const;

  const std::vector<std::string>& speakers() const { return speakers_; }

 private:
  TrainPair MakePair(const std::string& claimed, const std::string& utt,
                     int label) const;

  const SpeakerModels& models_;
  const EmbeddingTable& asv_;
  const EmbeddingTable& cm_;
  std::vector<std::string> speakers_;        // owners of bona fide utts
  std::vector<std::string> spoof_speakers_;  // speakers with attacks
  std::unordered_map<std::string, std::vector<std::string>> bonafide_;
  std::unordered_map<std::string, std::vector<std::string>> spoofs_;
};

inline constexpr double kLossEpsilon = 1e-12;

// rho * mean_pos(-log s) + (1 - rho) * mean_neg(-log(1 - s)), with s clamped
// to [1e-12, 1 - 1e-12]. A class without samples contributes nothing.
double LossPriorBce(std::span<const double> s_sasv, std::span<const int> labels,
                    double rho);

struct HeadGradient {
  std::vector<double> d_weights;
  double d_bias = 0.0;
  double loss = 0.0;
};

// Loss and analytic gradient of LossPriorBce over the batch with respect to
// the head, where s_sasv = sigmoid(w . x_cm + b) * f(s_asv) and s_asv is
// held fixed. Per sample, ds_sasv/ds_cm = f(s_asv) * sigmoid'(s_cm).
HeadGradient GradHead(const CmHead& head, std::span<const TrainPair> batch,
                      double rho, const Mapping& mapping);

// Loss only; same definition as GradHead.
double BatchLoss(const CmHead& head, std::span<const TrainPair> batch,
                 double rho, const Mapping& mapping);

struct AdamState {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  long step = 0;
  std::vector<double> m;
  std::vector<double> v;
};

// Bias-corrected Adam:
//   m <- b1 m + (1 - b1) g,  v <- b2 v + (1 - b2) g^2
//   p <- p - lr / (1 - b1^t) * m / (sqrt(v) / sqrt(1 - b2^t) + eps)
void AdamStep(AdamState* state, std::span<double> params,
              std::span<const double> grads, double lr);

// Development trials with the fixed ASV score precomputed, so that only
// the CM score is recomputed when the head changes.
struct DevSet {
  std::vector<ScoreRecord> records;
  std::vector<std::vector<double>> x_cm;
};

DevSet BuildDevSet(const std::vector<Trial>& trials,
                   const SpeakerModels& speakers, const EmbeddingTable& asv,
                   const EmbeddingTable& cm);

// Scores the dev set with `head` and product-rule fusion under `mapping`.
MetricSuite EvaluateHead(const DevSet& dev, const CmHead& head,
                         const Mapping& mapping);

struct EpochStats {
  int epoch = 0;  // 0 is the initial head
  MetricSuite dev;
  double loss = 0.0;  // mean training loss over the epoch's pairs
};

struct TrainResult {
  CmHead best_head;
  int best_epoch = 0;
  double best_dev_sasv_eer = 0.0;
  std::vector<EpochStats> history;
};

/**
 * Fine-tunes the CM head against the fused score.
 *
 * Each epoch draws config.pairs_per_epoch fresh pairs and takes one Adam
 * step per batch (the last batch may be short). After every epoch the dev
 * set is scored with the current head and its SASV-EER recorded. The
 * returned head is the snapshot with the lowest dev SASV-EER; the initial
 * head competes as epoch 0 and ties go to the earliest epoch. The epoch-0
 * loss is measured on the first epoch's pairs before any update.
 */
TrainResult TrainFinetune(const TrainConfig& config,
                          const PairSampler& sampler, const DevSet& dev,
                          const CmHead& initial_head);

}  // namespace sasv

#endif  // SASV_TRAINER_H_
