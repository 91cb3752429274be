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

#include "sasv/trainer.h"

#include <algorithm>
#include <cmath>

#include "sasv/fusion.h"

namespace sasv {

void ValidateTrainConfig(const TrainConfig& config) {
  auto bad = [](const std::string& what) {
    throw Error(ErrorCode::kInvalidArgument, "train config: " + what);
  };
  if (!(config.learning_rate > 0.0)) bad("learning rate must be positive");
  if (config.batch_size < 1) bad("batch size must be positive");
  if (config.epochs < 0) bad("epochs must be nonnegative");
  if (!(config.target_prior > 0.0 && config.target_prior < 1.0)) {
    bad("target prior must lie in (0, 1)");
  }
  if (config.mapping.kind == Mapping::Kind::kCalibrated) {
    bad("fine-tuning supports linear or sigmoid mapping only");
  }
  if (config.pairs_per_epoch < 1) bad("pairs per epoch must be positive");
  if (config.mix.target < 0 || config.mix.nontarget < 0 ||
      config.mix.spoof < 0 ||
      config.mix.target + config.mix.nontarget + config.mix.spoof == 0) {
    bad("class mix needs nonnegative weights with a positive sum");
  }
}

PairSampler::PairSampler(const std::vector<Trial>& labeled_trials,
                         const SpeakerModels& speakers,
                         const EmbeddingTable& asv, const EmbeddingTable& cm)
    : models_(speakers), asv_(asv), cm_(cm) {
  for (const auto& t : labeled_trials) {
    if (!t.label || *t.label == TrialClass::kNonTarget) continue;
    if (!models_.Contains(t.speaker_id)) {
      throw Error(ErrorCode::kUnresolvedId,
                  "training speaker '" + t.speaker_id + "' is not enrolled");
    }
    if (!asv_.Contains(t.test_utt_id) || !cm_.Contains(t.test_utt_id)) {
      throw Error(ErrorCode::kUnresolvedId,
                  "training utterance '" + t.test_utt_id +
                      "' lacks an ASV or CM embedding");
    }
    if (*t.label == TrialClass::kTarget) {
      auto& list = bonafide_[t.speaker_id];
      if (list.empty()) speakers_.push_back(t.speaker_id);
      if (std::find(list.begin(), list.end(), t.test_utt_id) == list.end()) {
        list.push_back(t.test_utt_id);
      }
    } else {
      auto& list = spoofs_[t.speaker_id];
      if (list.empty()) spoof_speakers_.push_back(t.speaker_id);
      if (std::find(list.begin(), list.end(), t.test_utt_id) == list.end()) {
        list.push_back(t.test_utt_id);
      }
    }
  }
}

TrainPair PairSampler::MakePair(const std::string& claimed,
                                const std::string& utt, int label) const {
  TrainPair p;
  p.speaker_id = claimed;
  p.test_utt_id = utt;
  p.s_asv = models_.Score(claimed, asv_.At(utt).values);
  p.x_cm = cm_.At(utt).values;
  p.label = label;
  return p;
}

std::vector<TrainPair> PairSampler::Sample(Rng* rng, int n_pairs,
                                           const ClassMix& mix) const {
  std::vector<TrialClass> pattern;
  pattern.insert(pattern.end(), mix.target, TrialClass::kTarget);
  pattern.insert(pattern.end(), mix.nontarget, TrialClass::kNonTarget);
  pattern.insert(pattern.end(), mix.spoof, TrialClass::kSpoof);
  if (pattern.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "empty class mix");
  }
  auto pick = [rng](const std::vector<std::string>& v) -> const std::string& {
    return v[rng->UniformInt(v.size())];
  };

  std::vector<TrainPair> pairs;
  pairs.reserve(n_pairs);
  for (int i = 0; i < n_pairs; ++i) {
    switch (pattern[i % pattern.size()]) {
      case TrialClass::kTarget: {
        if (speakers_.empty()) {
          throw Error(ErrorCode::kInsufficientData,
                      "no bona fide utterances for target pairs");
        }
        const std::string& spk = pick(speakers_);
        pairs.push_back(MakePair(spk, pick(bonafide_.at(spk)), 1));
        break;
      }
      case TrialClass::kNonTarget: {
        if (speakers_.size() < 2) {
          throw Error(ErrorCode::kInsufficientData,
                      "non-target pairs need at least two speakers");
        }
        std::size_t claimed = rng->UniformInt(speakers_.size());
        std::size_t owner = rng->UniformInt(speakers_.size() - 1);
        if (owner >= claimed) ++owner;
        pairs.push_back(MakePair(speakers_[claimed],
                                 pick(bonafide_.at(speakers_[owner])), 0));
        break;
      }
      case TrialClass::kSpoof: {
        if (spoof_speakers_.empty()) {
          throw Error(ErrorCode::kInsufficientData,
                      "no spoofed utterances for spoof pairs");
        }
        const std::string& spk = pick(spoof_speakers_);
        pairs.push_back(MakePair(spk, pick(spoofs_.at(spk)), 0));
        break;
      }
    }
  }
  return pairs;
}

double LossPriorBce(std::span<const double> s_sasv, std::span<const int> labels,
                    double rho) {
  double pos = 0.0, neg = 0.0;
  std::size_t n_pos = 0, n_neg = 0;
  for (std::size_t i = 0; i < s_sasv.size(); ++i) {
    double s = std::clamp(s_sasv[i], kLossEpsilon, 1.0 - kLossEpsilon);
    if (labels[i] == 1) {
      pos -= std::log(s);
      ++n_pos;
    } else {
      neg -= std::log1p(-s);
      ++n_neg;
    }
  }
  double loss = 0.0;
  if (n_pos) loss += rho * pos / static_cast<double>(n_pos);
  if (n_neg) loss += (1.0 - rho) * neg / static_cast<double>(n_neg);
  return loss;
}

namespace {

// Per-sample loss term and dloss/ds_cm, before class weighting.
struct SampleTerm {
  double loss;
  double d_logit;
};

SampleTerm Term(double logit, double f, int label) {
  const double sig = Sigmoid(logit);
  const double sig_neg = Sigmoid(-logit);  // 1 - sigmoid, without cancellation
  const double ds_dlogit = f * sig * sig_neg;
  if (label == 1) {
    double s = sig * f;
    if (s < kLossEpsilon) return {-std::log(kLossEpsilon), 0.0};
    if (s > 1.0 - kLossEpsilon) return {-std::log1p(-kLossEpsilon), 0.0};
    return {-std::log(s), -ds_dlogit / s};
  }
  double one_minus = (1.0 - f) + f * sig_neg;
  if (one_minus < kLossEpsilon) return {-std::log(kLossEpsilon), 0.0};
  if (one_minus > 1.0 - kLossEpsilon) {
    return {-std::log1p(-kLossEpsilon), 0.0};
  }
  return {-std::log(one_minus), ds_dlogit / one_minus};
}

}  // namespace

HeadGradient GradHead(const CmHead& head, std::span<const TrainPair> batch,
                      double rho, const Mapping& mapping) {
  HeadGradient g;
  g.d_weights.assign(head.dim(), 0.0);
  std::size_t n_pos = 0;
  for (const auto& p : batch) n_pos += p.label == 1;
  const std::size_t n_neg = batch.size() - n_pos;
  const double w_pos = n_pos ? rho / static_cast<double>(n_pos) : 0.0;
  const double w_neg = n_neg ? (1.0 - rho) / static_cast<double>(n_neg) : 0.0;

  for (const auto& p : batch) {
    const double f = ApplyMapping(mapping, p.s_asv);
    const SampleTerm t = Term(CmScore(head, p.x_cm), f, p.label);
    const double w = p.label == 1 ? w_pos : w_neg;
    g.loss += w * t.loss;
    const double d = w * t.d_logit;
    if (d == 0.0) continue;
    for (std::size_t k = 0; k < g.d_weights.size(); ++k) {
      g.d_weights[k] += d * p.x_cm[k];
    }
    g.d_bias += d;
  }
  return g;
}

double BatchLoss(const CmHead& head, std::span<const TrainPair> batch,
                 double rho, const Mapping& mapping) {
  std::vector<double> scores;
  std::vector<int> labels;
  scores.reserve(batch.size());
  labels.reserve(batch.size());
  for (const auto& p : batch) {
    scores.push_back(
        Sigmoid(CmScore(head, p.x_cm)) * ApplyMapping(mapping, p.s_asv));
    labels.push_back(p.label);
  }
  return LossPriorBce(scores, labels, rho);
}

void AdamStep(AdamState* state, std::span<double> params,
              std::span<const double> grads, double lr) {
  if (params.size() != grads.size()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "Adam parameter and gradient sizes differ");
  }
  if (state->m.empty()) {
    state->m.assign(params.size(), 0.0);
    state->v.assign(params.size(), 0.0);
  }
  if (state->m.size() != params.size()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "Adam state does not match the parameter size");
  }
  ++state->step;
  const double bc1 = 1.0 - std::pow(state->beta1, state->step);
  const double bc2 = 1.0 - std::pow(state->beta2, state->step);
  const double step_size = lr / bc1;
  const double bc2_sqrt = std::sqrt(bc2);
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double g = grads[i];
    state->m[i] = state->beta1 * state->m[i] + (1.0 - state->beta1) * g;
    state->v[i] = state->beta2 * state->v[i] + (1.0 - state->beta2) * g * g;
    const double denom = std::sqrt(state->v[i]) / bc2_sqrt + state->eps;
    params[i] -= step_size * state->m[i] / denom;
  }
}

DevSet BuildDevSet(const std::vector<Trial>& trials,
                   const SpeakerModels& speakers, const EmbeddingTable& asv,
                   const EmbeddingTable& cm) {
  DevSet dev;
  // A zero head gives the ASV scores and resolves every id up front.
  CmHead zero{std::vector<double>(cm.dim(), 0.0), 0.0};
  dev.records = ScoreAll(trials, speakers, asv, cm, zero);
  dev.x_cm.reserve(trials.size());
  for (const auto& t : trials) dev.x_cm.push_back(cm.At(t.test_utt_id).values);
  return dev;
}

MetricSuite EvaluateHead(const DevSet& dev, const CmHead& head,
                         const Mapping& mapping) {
  std::vector<ScoreRecord> records = dev.records;
  for (std::size_t i = 0; i < records.size(); ++i) {
    records[i].s_cm = CmScore(head, dev.x_cm[i]);
  }
  return Evaluate(FuseRecords(FusionStrategy::ProductRule(mapping),
                              std::move(records)));
}

namespace {

std::vector<double> Flatten(const CmHead& head) {
  std::vector<double> params = head.weights;
  params.push_back(head.bias);
  return params;
}

void Unflatten(const std::vector<double>& params, CmHead* head) {
  std::copy(params.begin(), params.end() - 1, head->weights.begin());
  head->bias = params.back();
}

double DevSasvEer(const MetricSuite& suite) {
  if (!suite.sasv_eer) {
    throw Error(ErrorCode::kInsufficientData,
                "dev set needs target and non-target or spoof trials");
  }
  return suite.sasv_eer->eer;
}

}  // namespace

TrainResult TrainFinetune(const TrainConfig& config,
                          const PairSampler& sampler, const DevSet& dev,
                          const CmHead& initial_head) {
  ValidateTrainConfig(config);
  Rng rng(config.seed);
  CmHead head = initial_head;
  AdamState adam;

  TrainResult result;
  result.best_head = head;

  std::vector<TrainPair> pairs;
  double initial_loss = 0.0;
  if (config.epochs > 0) {
    pairs = sampler.Sample(&rng, config.pairs_per_epoch, config.mix);
    initial_loss =
        BatchLoss(head, pairs, config.target_prior, config.mapping);
  }
  EpochStats start{0, EvaluateHead(dev, head, config.mapping), initial_loss};
  result.best_dev_sasv_eer = DevSasvEer(start.dev);
  result.history.push_back(std::move(start));

  std::vector<double> params = Flatten(head);
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    if (epoch > 1) pairs = sampler.Sample(&rng, config.pairs_per_epoch, config.mix);
    double loss_sum = 0.0;
    for (std::size_t begin = 0; begin < pairs.size();
         begin += config.batch_size) {
      std::size_t end =
          std::min(pairs.size(), begin + static_cast<std::size_t>(config.batch_size));
      std::span<const TrainPair> batch(pairs.data() + begin, end - begin);
      HeadGradient g =
          GradHead(head, batch, config.target_prior, config.mapping);
      loss_sum += g.loss * static_cast<double>(batch.size());
      std::vector<double> grads = g.d_weights;
      grads.push_back(g.d_bias);
      AdamStep(&adam, params, grads, config.learning_rate);
      Unflatten(params, &head);
    }
    EpochStats stats{epoch, EvaluateHead(dev, head, config.mapping),
                     loss_sum / static_cast<double>(pairs.size())};
    double eer = DevSasvEer(stats.dev);
    if (eer < result.best_dev_sasv_eer) {
      result.best_dev_sasv_eer = eer;
      result.best_head = head;
      result.best_epoch = epoch;
    }
    result.history.push_back(std::move(stats));
  }
  return result;
}

}  // namespace sasv
