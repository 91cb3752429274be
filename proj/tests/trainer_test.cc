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

#include "gtest/gtest.h"
#include "sasv/fusion.h"
#include "sasv/rng.h"
#include "sasv/synth.h"
#include "test_util.h"

namespace sasv {
namespace {

using testing::ErrorOf;

std::vector<TrainPair> RandomBatch(Rng* rng, int n, std::size_t dim) {
  std::vector<TrainPair> batch(n);
  for (auto& p : batch) {
    p.s_asv = 2 * rng->Uniform01() - 1;
    p.x_cm.resize(dim);
    for (auto& x : p.x_cm) x = rng->Gaussian();
    p.label = rng->Uniform01() < 0.4 ? 1 : 0;
  }
  return batch;
}

CmHead RandomHead(Rng* rng, std::size_t dim, double logit_scale) {
  CmHead h;
  h.weights.resize(dim);
  for (auto& w : h.weights) w = rng->Gaussian() * logit_scale / std::sqrt(double(dim));
  h.bias = rng->Gaussian();
  return h;
}

WorldSpec SmallSpec() {
  WorldSpec s;
  s.seed = 17;
  s.n_speakers = 4;
  s.utts_per_speaker = 8;
  s.spoofs_per_speaker = 6;
  s.enroll_per_speaker = 2;
  s.asv_dim = 16;
  s.cm_dim = 8;
  s.cm_spread = 0.4;
  return s;
}

TEST(LossPriorBce, Examples) {
  std::vector<double> s = {0.5, 0.5};
  std::vector<int> y = {1, 0};
  EXPECT_NEAR(LossPriorBce(s, y, 0.1), 0.6931471805599453, 1e-15);
  std::vector<double> perfect = {1 - 1e-15, 1 - 1e-15, 1e-15};
  std::vector<int> py = {1, 1, 0};
  EXPECT_LT(LossPriorBce(perfect, py, 0.1), 1e-11);
  std::vector<double> clamped = {0.0, 1.0};
  std::vector<int> cy = {1, 0};
  EXPECT_TRUE(std::isfinite(LossPriorBce(clamped, cy, 0.3)));
  // rho = 0.5 is half the sum of the per-class mean BCE.
  std::vector<double> b = {0.9, 0.6, 0.2, 0.3, 0.7};
  std::vector<int> by = {1, 1, 0, 0, 0};
  double expected = 0.5 * (-(std::log(0.9) + std::log(0.6)) / 2) +
                    0.5 * (-(std::log(0.8) + std::log(0.7) + std::log(0.3)) / 3);
  EXPECT_NEAR(LossPriorBce(b, by, 0.5), expected, 1e-15);
  // An absent class contributes nothing.
  std::vector<double> only = {0.25};
  std::vector<int> oy = {1};
  EXPECT_NEAR(LossPriorBce(only, oy, 0.1), 0.1 * -std::log(0.25), 1e-15);
}

TEST(GradHead, ZeroWhenAsvFactorVanishes) {
  Rng rng(1);
  auto batch = RandomBatch(&rng, 10, 6);
  for (auto& p : batch) p.s_asv = -1.0;
  CmHead h = RandomHead(&rng, 6, 2.0);
  HeadGradient g = GradHead(h, batch, 0.1, Mapping::Linear());
  for (double d : g.d_weights) EXPECT_EQ(d, 0.0);
  EXPECT_EQ(g.d_bias, 0.0);
}

TEST(GradHead, LossMatchesBatchLoss) {
  Rng rng(2);
  auto batch = RandomBatch(&rng, 32, 10);
  CmHead h = RandomHead(&rng, 10, 3.0);
  for (const auto& m : {Mapping::Linear(), Mapping::Sigmoid()}) {
    EXPECT_NEAR(GradHead(h, batch, 0.1, m).loss, BatchLoss(h, batch, 0.1, m), 1e-12);
  }
}

TEST(GradHead, MatchesFiniteDifferences) {
  Rng rng(3);
  const double step = 1e-6;
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t dim = 20;
    auto batch = RandomBatch(&rng, 1 + rng.UniformInt(64), dim);
    CmHead h = RandomHead(&rng, dim, 3.0);
    Mapping m = trial % 2 ? Mapping::Linear() : Mapping::Sigmoid();
    double rho = 0.05 + 0.9 * rng.Uniform01();
    HeadGradient g = GradHead(h, batch, rho, m);
    for (std::size_t k = 0; k <= dim; ++k) {
      CmHead hp = h, hm = h;
      double& up = k < dim ? hp.weights[k] : hp.bias;
      double& dn = k < dim ? hm.weights[k] : hm.bias;
      up += step;
      dn -= step;
      double fd = (BatchLoss(hp, batch, rho, m) - BatchLoss(hm, batch, rho, m)) / (2 * step);
      double an = k < dim ? g.d_weights[k] : g.d_bias;
      double rel = std::fabs(an - fd) / std::max({std::fabs(an), std::fabs(fd), 1e-5});
      ASSERT_LT(rel, 1e-4) << "trial " << trial << " coord " << k;
    }
  }
}

TEST(GradHead, ChainFactorIsAsvWeighted) {
  Rng rng(4);
  for (int i = 0; i < 200; ++i) {
    double cm = 4 * rng.Gaussian();
    double a1 = 2 * rng.Uniform01() - 1, a2 = 2 * rng.Uniform01() - 1;
    if (a1 > a2) std::swap(a1, a2);
    for (const auto& m : {Mapping::Linear(), Mapping::Sigmoid()}) {
      auto st = FusionStrategy::ProductRule(m);
      const double h = 1e-6;
      auto factor = [&](double a) {
        return (Fuse(st, a, cm + h) - Fuse(st, a, cm - h)) / (2 * h);
      };
      double exact1 = ApplyMapping(m, a1) * Sigmoid(cm) * Sigmoid(-cm);
      double exact2 = ApplyMapping(m, a2) * Sigmoid(cm) * Sigmoid(-cm);
      EXPECT_NEAR(factor(a1), exact1, 1e-8);
      EXPECT_LE(exact1, exact2);
    }
  }
  // Single-sample batches that differ only in s_asv.
  TrainPair p{"s", "u", 0.2, {1.0}, 1};
  TrainPair q = p;
  q.s_asv = 0.8;
  CmHead head{{0.3}, -0.1};
  std::vector<TrainPair> bp = {p}, bq = {q};
  // dL/ds_cm = -(1/s) ds/ds_cm: compare |ds/ds_cm| = |dL/db| * s.
  double sp = Sigmoid(0.2) * MapLinear(0.2), sq = Sigmoid(0.2) * MapLinear(0.8);
  double fp = std::fabs(GradHead(head, bp, 1.0, Mapping::Linear()).d_bias) * sp;
  double fq = std::fabs(GradHead(head, bq, 1.0, Mapping::Linear()).d_bias) * sq;
  EXPECT_LT(fp, fq);
}

TEST(AdamStep, ZeroGradientIsFixedPoint) {
  AdamState s;
  std::vector<double> params = {1.0, -2.0, 3.5};
  std::vector<double> zero(3, 0.0);
  for (int i = 0; i < 10; ++i) AdamStep(&s, params, zero, 1e-3);
  EXPECT_EQ(params, (std::vector<double>{1.0, -2.0, 3.5}));
}

TEST(AdamStep, FirstStep) {
  for (double g : {0.5, -3.0, 1e-3}) {
    AdamState s;
    std::vector<double> params = {1.0};
    std::vector<double> grads = {g};
    const double lr = 3e-4;
    AdamStep(&s, params, grads, lr);
    double standard = 1.0 - lr * g / (std::fabs(g) + s.eps);
    EXPECT_NEAR(params[0], standard, 1e-15);
    double approx = 1.0 - lr * g / (std::fabs(g) + s.eps * std::sqrt(1 - s.beta2) / (1 - s.beta1));
    EXPECT_NEAR((1.0 - params[0]) / (1.0 - approx), 1.0, 1e-4);
  }
}

TEST(AdamStep, ConstantGradientStepIsBoundedByLr) {
  AdamState s;
  std::vector<double> params = {0.0, 0.0};
  std::vector<double> grads = {2.0, -1e-4};
  const double lr = 1e-2;
  for (int i = 0; i < 500; ++i) {
    std::vector<double> before = params;
    AdamStep(&s, params, grads, lr);
    for (int k = 0; k < 2; ++k) EXPECT_LE(std::fabs(params[k] - before[k]), lr * (1 + 1e-9));
  }
  EXPECT_NEAR(params[0], -500 * lr, 1e-6);
}

TEST(AdamStep, SizeMismatch) {
  AdamState s;
  std::vector<double> params = {0.0};
  std::vector<double> grads = {1.0, 2.0};
  EXPECT_EQ(ErrorOf([&] { AdamStep(&s, params, grads, 1.0); }), ErrorCode::kDimensionMismatch);
}

TEST(Descent, LossDecreasesOnFixedBatch) {
  Rng rng(5);
  auto batch = RandomBatch(&rng, 64, 16);
  CmHead h = RandomHead(&rng, 16, 2.0);
  std::vector<double> params = h.weights;
  params.push_back(h.bias);
  AdamState s;
  double before = BatchLoss(h, batch, 0.1, Mapping::Sigmoid());
  for (int i = 0; i < 8; ++i) {
    HeadGradient g = GradHead(h, batch, 0.1, Mapping::Sigmoid());
    g.d_weights.push_back(g.d_bias);
    AdamStep(&s, params, g.d_weights, 1e-4);
    std::copy(params.begin(), params.end() - 1, h.weights.begin());
    h.bias = params.back();
  }
  EXPECT_LT(BatchLoss(h, batch, 0.1, Mapping::Sigmoid()), before);
}

TEST(PairSampler, ClassMixAndDeterminism) {
  World w = GenerateWorld(SmallSpec());
  SpeakerModels spk(w.enrollment, w.asv);
  PairSampler sampler(w.train, spk, w.asv, w.cm);
  Rng rng(9);
  auto three = sampler.Sample(&rng, 3);
  ASSERT_EQ(three.size(), 3u);
  EXPECT_EQ(three[0].label, 1);
  EXPECT_EQ(three[1].label, 0);
  EXPECT_EQ(three[2].label, 0);
  EXPECT_EQ(three[0].test_utt_id.find("_b") != std::string::npos, true);
  EXPECT_NE(three[1].speaker_id, three[1].test_utt_id.substr(0, three[1].speaker_id.size()));
  EXPECT_NE(three[2].test_utt_id.find("_a"), std::string::npos);

  Rng r1(42), r2(42);
  auto a = sampler.Sample(&r1, 300);
  auto b = sampler.Sample(&r2, 300);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].speaker_id, b[i].speaker_id);
    EXPECT_EQ(a[i].test_utt_id, b[i].test_utt_id);
    EXPECT_EQ(a[i].s_asv, b[i].s_asv);
    if (a[i].label == 1) {
      EXPECT_EQ(a[i].test_utt_id.rfind(a[i].speaker_id, 0), 0u);
    }
  }
  ClassMix spoof_only{0, 0, 1};
  for (const auto& p : sampler.Sample(&r1, 10, spoof_only)) EXPECT_EQ(p.label, 0);
}

TEST(PairSampler, OneSpeakerCannotMakeNonTargets) {
  World w = GenerateWorld(SmallSpec());
  SpeakerModels spk(w.enrollment, w.asv);
  std::vector<Trial> one;
  for (const auto& t : w.train) {
    if (t.speaker_id == "train_s000" && t.label != TrialClass::kNonTarget) one.push_back(t);
  }
  PairSampler sampler(one, spk, w.asv, w.cm);
  Rng rng(1);
  EXPECT_EQ(ErrorOf([&] { sampler.Sample(&rng, 3); }), ErrorCode::kInsufficientData);
  EXPECT_NO_THROW(sampler.Sample(&rng, 10, ClassMix{1, 0, 1}));
}

class TrainFinetuneTest : public ::testing::Test {
 protected:
  TrainFinetuneTest()
      : world_(GenerateWorld(SmallSpec())),
        speakers_(world_.enrollment, world_.asv),
        sampler_(world_.train, speakers_, world_.asv, world_.cm),
        dev_(BuildDevSet(world_.dev, speakers_, world_.asv, world_.cm)) {
    config_.epochs = 15;
    config_.batch_size = 64;
    config_.pairs_per_epoch = 256;
    config_.learning_rate = 0.05;
    config_.seed = 3;
    Rng rng(77);
    initial_ = RandomHead(&rng, world_.cm.dim(), 3.0);
  }
  World world_;
  SpeakerModels speakers_;
  PairSampler sampler_;
  DevSet dev_;
  TrainConfig config_;
  CmHead initial_;
};

TEST_F(TrainFinetuneTest, ZeroEpochsReturnsInitialHead) {
  config_.epochs = 0;
  TrainResult r = TrainFinetune(config_, sampler_, dev_, initial_);
  EXPECT_EQ(r.best_head.weights, initial_.weights);
  EXPECT_EQ(r.best_head.bias, initial_.bias);
  EXPECT_EQ(r.best_epoch, 0);
  EXPECT_EQ(r.history.size(), 1u);
}

TEST_F(TrainFinetuneTest, DeterministicAndSelectsBestEpoch) {
  TrainResult a = TrainFinetune(config_, sampler_, dev_, initial_);
  TrainResult b = TrainFinetune(config_, sampler_, dev_, initial_);
  EXPECT_EQ(a.best_head.weights, b.best_head.weights);
  EXPECT_EQ(a.best_head.bias, b.best_head.bias);
  ASSERT_EQ(a.history.size(), 16u);
  double min_eer = 2.0;
  int first_min = -1;
  for (const auto& e : a.history) {
    EXPECT_EQ(e.loss, b.history[e.epoch].loss);
    if (e.dev.sasv_eer->eer < min_eer) {
      min_eer = e.dev.sasv_eer->eer;
      first_min = e.epoch;
    }
  }
  EXPECT_EQ(a.best_dev_sasv_eer, min_eer);
  EXPECT_EQ(a.best_epoch, first_min);
  EXPECT_LE(a.best_dev_sasv_eer, a.history[0].dev.sasv_eer->eer);
  // The selected head reproduces its recorded dev metric.
  EXPECT_EQ(EvaluateHead(dev_, a.best_head, config_.mapping).sasv_eer->eer, min_eer);
}

TEST_F(TrainFinetuneTest, TrainingReducesLoss) {
  config_.epochs = 30;
  TrainResult r = TrainFinetune(config_, sampler_, dev_, initial_);
  EXPECT_LT(r.history.back().loss, r.history.front().loss);
}

TEST_F(TrainFinetuneTest, RejectsBadConfig) {
  TrainConfig c = config_;
  c.mapping = Mapping::Calibrated({1, 0});
  EXPECT_EQ(ErrorOf([&] { TrainFinetune(c, sampler_, dev_, initial_); }),
            ErrorCode::kInvalidArgument);
  c = config_;
  c.target_prior = 1.0;
  EXPECT_EQ(ErrorOf([&] { ValidateTrainConfig(c); }), ErrorCode::kInvalidArgument);
  c = config_;
  c.batch_size = 0;
  EXPECT_EQ(ErrorOf([&] { ValidateTrainConfig(c); }), ErrorCode::kInvalidArgument);
  TrainConfig defaults;
  EXPECT_EQ(defaults.learning_rate, 3e-4);
  EXPECT_EQ(defaults.batch_size, 1024);
  EXPECT_EQ(defaults.epochs, 200);
  EXPECT_EQ(defaults.target_prior, 0.1);
  EXPECT_EQ(defaults.mapping.kind, Mapping::Kind::kSigmoid);
}

}  // namespace
}  // namespace sasv
