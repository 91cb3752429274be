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


#include "sasv/fusion.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "gtest/gtest.h"
#include "sasv/metrics.h"
#include "sasv/rng.h"
#include "test_util.h"

namespace sasv {
namespace {

using testing::ErrorOf;
using testing::ReadFile;
using testing::TempDir;

const FusionStrategy kPrl = FusionStrategy::ProductRule(Mapping::Linear());
const FusionStrategy kPrs = FusionStrategy::ProductRule(Mapping::Sigmoid());

ScoreRecord Rec(double s_asv, double s_cm, std::optional<TrialClass> c) {
  return {{"spk", "utt", c}, s_asv, s_cm, std::nullopt};
}

std::vector<std::size_t> RankBy(const std::vector<double>& v) {
  std::vector<std::size_t> idx(v.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](auto i, auto j) { return v[i] < v[j]; });
  return idx;
}

TEST(Fuse, Examples) {
  EXPECT_EQ(Fuse(kPrl, 1.0, 0.7), Sigmoid(0.7));
  EXPECT_NEAR(Fuse(kPrl, 0.6, 2.0), 0.7046376623823059, 1e-16);
  EXPECT_NEAR(Fuse(FusionStrategy::RawSum(), 0.3, -5.2), -4.9, 1e-15);
  EXPECT_EQ(Fuse(FusionStrategy::RawProduct(), 0.5, -4.0), -2.0);
  EXPECT_EQ(Fuse(FusionStrategy::MappedSum(), 0.0, 0.0), 1.0);
  EXPECT_EQ(Fuse(kPrs, 0.0, 0.0), 0.25);
}

TEST(Fuse, ProductRuleProperties) {
  Rng rng(1);
  for (int i = 0; i < 1000; ++i) {
    double a1 = 2 * rng.Uniform01() - 1, a2 = 2 * rng.Uniform01() - 1;
    double c1 = 10 * rng.Gaussian(), c2 = 10 * rng.Gaussian();
    if (a1 > a2) std::swap(a1, a2);
    if (c1 > c2) std::swap(c1, c2);
    for (const auto& st : {kPrl, kPrs,
                           FusionStrategy::ProductRule(Mapping::Calibrated({3, -1}))}) {
      double s = Fuse(st, a1, c1);
      EXPECT_GE(s, 0.0);
      EXPECT_LE(s, 1.0);
      EXPECT_LE(s, std::min(Sigmoid(c1), ApplyMapping(st.mapping, a1)));
      if (a1 < a2) {
        EXPECT_LT(s, Fuse(st, a2, c1));
      }
      if (c1 < c2 && ApplyMapping(st.mapping, a1) > 0) {
        // Strict in exact arithmetic; sigmoid saturation can tie in floating point.
        EXPECT_LE(s, Fuse(st, a1, c2));
        if (std::fabs(c1) < 30 && std::fabs(c2) < 30) {
          EXPECT_LT(s, Fuse(st, a1, c2));
        }
      }
    }
  }
}

TEST(FuseRecords, EmptyAndOrder) {
  EXPECT_TRUE(FuseRecords(kPrs, {}).empty());
  Rng rng(2);
  std::vector<ScoreRecord> recs;
  for (int i = 0; i < 50; ++i) recs.push_back(Rec(2 * rng.Uniform01() - 1, 20 * rng.Gaussian(), std::nullopt));
  auto fused = FuseRecords(kPrl, recs);
  ASSERT_EQ(fused.size(), recs.size());
  for (std::size_t i = 0; i < recs.size(); ++i) {
    ASSERT_TRUE(fused[i].s_sasv.has_value());
    EXPECT_EQ(*fused[i].s_sasv, Fuse(kPrl, recs[i].s_asv, recs[i].s_cm));
    EXPECT_GE(*fused[i].s_sasv, 0.0);
    EXPECT_LE(*fused[i].s_sasv, 1.0);
  }
}

TEST(FuseRecords, RawSumFollowsCmWhenCmDominates) {
  // |s_cm| is at least 100x max|s_asv| and distinct s_cm values are more
  // than 2 max|s_asv| apart.
  Rng rng(3);
  std::vector<ScoreRecord> recs;
  for (int i = 0; i < 200; ++i) {
    double cm = (i % 2 ? -1 : 1) * (100 + 3.0 * i);
    recs.push_back(Rec(2 * rng.Uniform01() - 1, cm, std::nullopt));
  }
  std::vector<double> raw_sum, cm_only, product;
  for (const auto& r : FuseRecords(FusionStrategy::RawSum(), recs)) raw_sum.push_back(*r.s_sasv);
  for (const auto& r : recs) cm_only.push_back(r.s_cm);
  EXPECT_EQ(RankBy(raw_sum), RankBy(cm_only));
}

TEST(FuseRecords, MagnitudeRatioAloneDoesNotFixTheRanking) {
  // Both |s_cm| exceed 100 max|s_asv|, yet s_asv reverses their order.
  std::vector<ScoreRecord> recs = {Rec(1.0, 100.0, std::nullopt),
                                   Rec(-1.0, 100.5, std::nullopt)};
  auto fused = FuseRecords(FusionStrategy::RawSum(), recs);
  EXPECT_GT(*fused[0].s_sasv, *fused[1].s_sasv);
  EXPECT_LT(recs[0].s_cm, recs[1].s_cm);
}

TEST(FuseRecords, RawSumAndProductRuleRankDifferently) {
  // The CM-saturated non-target outranks a target under RawSum only.
  std::vector<ScoreRecord> recs = {Rec(0.9, 5.0, TrialClass::kTarget),
                                   Rec(-0.2, 9.0, TrialClass::kNonTarget),
                                   Rec(0.8, -9.0, TrialClass::kSpoof)};
  EXPECT_GT(Evaluate(FuseRecords(FusionStrategy::RawSum(), recs)).sasv_eer->eer, 0.0);
  EXPECT_EQ(Evaluate(FuseRecords(kPrl, recs)).sasv_eer->eer, 0.0);
}

TEST(FuseRecords, MappingChoiceChangesEer) {
  // Target: sigmoid(s_cm) ~ 1, s_asv = -0.5. Spoof: sigmoid(s_cm) = 0.4,
  // s_asv = 1. Linear: 0.25 < 0.4, the spoof wins. Sigmoid: 0.378 > 0.292,
  // the target wins.
  std::vector<ScoreRecord> recs = {Rec(-0.5, 30.0, TrialClass::kTarget),
                                   Rec(1.0, std::log(0.4 / 0.6), TrialClass::kSpoof),
                                   Rec(-0.9, 30.0, TrialClass::kNonTarget)};
  double lin = Evaluate(FuseRecords(kPrl, recs)).sasv_eer->eer;
  double sig = Evaluate(FuseRecords(kPrs, recs)).sasv_eer->eer;
  EXPECT_GT(lin, 0.0);
  EXPECT_EQ(sig, 0.0);
}

TEST(Systems, Registry) {
  std::vector<std::string> names;
  for (const auto& s : KnownSystems()) names.push_back(s.name);
  EXPECT_EQ(names, (std::vector<std::string>{"pr-l-i", "pr-s-i", "pr-c-i", "pr-l-f",
                                             "pr-s-f", "baseline1", "ablation-sum",
                                             "ablation-prod"}));
  EXPECT_TRUE(FindSystem("pr-c-i")->needs_calibrator);
  EXPECT_TRUE(FindSystem("pr-s-f")->fine_tuned);
  EXPECT_EQ(FindSystem("baseline1")->strategy.kind, FusionStrategy::Kind::kRawSum);
  EXPECT_EQ(FindSystem("ablation-sum")->strategy.kind, FusionStrategy::Kind::kMappedSum);
  EXPECT_EQ(FindSystem("ablation-prod")->strategy.kind, FusionStrategy::Kind::kRawProduct);
  EXPECT_EQ(FindSystem("pr-l-i")->strategy.mapping.kind, Mapping::Kind::kLinear);
  EXPECT_EQ(FindSystem("pr-s-i")->strategy.mapping.kind, Mapping::Kind::kSigmoid);
  EXPECT_FALSE(FindSystem("PR-S-I").has_value());
}

TEST(ScoresTsv, FormatAndRoundTrip) {
  TempDir dir;
  std::vector<ScoreRecord> recs = {Rec(0.123456789012, -3.5, TrialClass::kTarget),
                                   Rec(-0.5, 2.0, std::nullopt)};
  recs = FuseRecords(FusionStrategy::RawSum(), recs);
  std::string text = FormatScoresTsv(recs);
  EXPECT_EQ(text,
            "speaker\tutt\ts_asv\ts_cm\ts_sasv\tlabel\n"
            "spk\tutt\t0.123456789\t-3.5\t-3.37654321\ttarget\n"
            "spk\tutt\t-0.5\t2\t1.5\t-\n");
  WriteScoresTsv(dir.File("s.tsv"), recs);
  EXPECT_EQ(ReadFile(dir.File("s.tsv")), text);
  auto back = LoadScoresTsv(dir.File("s.tsv"));
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[0].trial.label, TrialClass::kTarget);
  EXPECT_FALSE(back[1].trial.label.has_value());
  EXPECT_EQ(*back[1].s_sasv, 1.5);
  EXPECT_EQ(FormatScoresTsv(back), text);
}

TEST(ScoresTsv, Errors) {
  TempDir dir;
  dir.Write("h.tsv", "speaker\tutt\n");
  EXPECT_EQ(ErrorOf([&] { LoadScoresTsv(dir.File("h.tsv")); }), ErrorCode::kMalformedLine);
  dir.Write("l.tsv", "speaker\tutt\ts_asv\ts_cm\ts_sasv\tlabel\na\tb\t1\t2\t3\tbogus\n");
  EXPECT_EQ(ErrorOf([&] { LoadScoresTsv(dir.File("l.tsv")); }), ErrorCode::kUnknownLabel);
  dir.Write("n.tsv", "speaker\tutt\ts_asv\ts_cm\ts_sasv\tlabel\na\tb\tnan\t2\t3\ttarget\n");
  EXPECT_EQ(ErrorOf([&] { LoadScoresTsv(dir.File("n.tsv")); }), ErrorCode::kNonFinite);
}

}  // namespace
}  // namespace sasv
