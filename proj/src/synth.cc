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

#include "sasv/synth.h"

#include <cmath>
#include <cstdio>

#include "sasv/rng.h"

namespace sasv {

namespace {

using Vec = std::vector<double>;

Vec GaussianVec(Rng* rng, int dim, double scale) {
  Vec v(dim);
  for (double& x : v) x = scale * rng->Gaussian();
  return v;
}

void Normalize(Vec* v) {
  double n = 0.0;
  for (double x : *v) n += x * x;
  n = std::sqrt(n);
  for (double& x : *v) x /= n;
}

Vec RandomUnit(Rng* rng, int dim) {
  Vec v = GaussianVec(rng, dim, 1.0);
  Normalize(&v);
  return v;
}

std::string Id(const char* fmt, const std::string& prefix, int a, int b = 0) {
  char buf[128];
  std::snprintf(buf, sizeof(buf), fmt, prefix.c_str(), a, b);
  return buf;
}

struct CmClusters {
  Vec bonafide;
  Vec spoof;
};

// Adds one split's speakers, utterances, enrollment and trials.
void GenerateSplit(const WorldSpec& spec, const std::string& split,
                   const CmClusters& clusters, Rng* rng, World* world,
                   std::vector<Trial>* trials) {
  const int n = spec.n_speakers;
  const double asv_scale = spec.asv_noise / std::sqrt(spec.asv_dim);

  auto cm_sample = [&](const Vec& mean) {
    Vec x(spec.cm_dim);
    for (int d = 0; d < spec.cm_dim; ++d) {
      x[d] = mean[d] + spec.cm_spread * rng->Gaussian();
    }
    return x;
  };

  std::vector<std::string> speakers;
  std::vector<std::vector<std::string>> test_utts(n);
  std::vector<std::vector<std::string>> spoof_utts(n);
  for (int s = 0; s < n; ++s) {
    const std::string spk = Id("%s_s%03d", split, s);
    speakers.push_back(spk);
    Vec direction = RandomUnit(rng, spec.asv_dim);

    for (int u = 0; u < spec.utts_per_speaker; ++u) {
      const std::string utt = Id("%s_s%03d_b%03d", split, s, u);
      Vec x = direction;
      for (double& v : x) v += asv_scale * rng->Gaussian();
      Normalize(&x);
      world->asv.Add({utt, std::move(x)});
      world->cm.Add({utt, cm_sample(clusters.bonafide)});
      if (u < spec.enroll_per_speaker) {
        world->enrollment.Add(spk, utt);
      } else {
        test_utts[s].push_back(utt);
      }
    }
    for (int a = 0; a < spec.spoofs_per_speaker; ++a) {
      const std::string utt = Id("%s_s%03d_a%03d", split, s, a);
      Vec source = RandomUnit(rng, spec.asv_dim);
      Vec x(spec.asv_dim);
      for (int d = 0; d < spec.asv_dim; ++d) {
        x[d] = spec.spoof_asv_alpha * direction[d] +
               (1.0 - spec.spoof_asv_alpha) * source[d] +
               asv_scale * rng->Gaussian();
      }
      Normalize(&x);
      world->asv.Add({utt, std::move(x)});
      world->cm.Add({utt, cm_sample(clusters.spoof)});
      spoof_utts[s].push_back(utt);
    }
  }

  for (int s = 0; s < n; ++s) {
    for (const auto& utt : test_utts[s]) {
      trials->push_back({speakers[s], utt, TrialClass::kTarget});
    }
  }
  for (int s = 0; s < n; ++s) {
    for (const auto& utt : test_utts[s]) {
      int other = static_cast<int>(rng->UniformInt(n - 1));
      if (other >= s) ++other;
      trials->push_back({speakers[other], utt, TrialClass::kNonTarget});
    }
  }
  for (int s = 0; s < n; ++s) {
    for (const auto& utt : spoof_utts[s]) {
      trials->push_back({speakers[s], utt, TrialClass::kSpoof});
    }
  }
}

}  // namespace

void ValidateWorldSpec(const WorldSpec& spec) {
  auto bad = [](const std::string& what) {
    throw Error(ErrorCode::kInvalidArgument, "world spec: " + what);
  };
  if (spec.n_speakers < 2) bad("n_speakers must be at least 2");
  if (spec.enroll_per_speaker < 1) bad("enroll_per_speaker must be positive");
  if (spec.utts_per_speaker <= spec.enroll_per_speaker) {
    bad("utts_per_speaker must exceed enroll_per_speaker");
  }
  if (spec.spoofs_per_speaker < 1) bad("spoofs_per_speaker must be positive");
  if (spec.asv_dim < 2 || spec.cm_dim < 2) bad("dimensions must be at least 2");
  if (!(spec.asv_noise > 0.0)) bad("asv_noise must be positive");
  if (!(spec.cm_spread > 0.0)) bad("cm_spread must be positive");
  if (!(spec.cm_margin > 0.0)) bad("cm_margin must be positive");
  if (!(spec.spoof_asv_alpha >= 0.0 && spec.spoof_asv_alpha <= 1.0)) {
    bad("spoof_asv_alpha must lie in [0, 1]");
  }
  if (!(spec.eval_spoof_shift >= 0.0 && spec.eval_spoof_shift <= 1.0)) {
    bad("eval_spoof_shift must lie in [0, 1]");
  }
}

World GenerateWorld(const WorldSpec& spec) {
  ValidateWorldSpec(spec);
  Rng rng(spec.seed);
  World world{EmbeddingTable(spec.asv_dim), EmbeddingTable(spec.cm_dim),
              {}, {}, {}, {}, {}};

  // CM geometry shared by all splits.
  Vec axis = RandomUnit(&rng, spec.cm_dim);
  Vec center = GaussianVec(&rng, spec.cm_dim, 1.0 / std::sqrt(spec.cm_dim));
  CmClusters clusters{center, center};
  double center_proj = 0.0;
  for (int d = 0; d < spec.cm_dim; ++d) {
    clusters.bonafide[d] += 0.5 * axis[d];
    clusters.spoof[d] -= 0.5 * axis[d];
    center_proj += axis[d] * center[d];
  }
  world.true_head.weights.resize(spec.cm_dim);
  for (int d = 0; d < spec.cm_dim; ++d) {
    world.true_head.weights[d] = spec.cm_margin * axis[d];
  }
  world.true_head.bias = -spec.cm_margin * center_proj;

  CmClusters eval_clusters = clusters;
  for (int d = 0; d < spec.cm_dim; ++d) {
    eval_clusters.spoof[d] += spec.eval_spoof_shift * axis[d];
  }

  GenerateSplit(spec, "train", clusters, &rng, &world, &world.train);
  GenerateSplit(spec, "dev", clusters, &rng, &world, &world.dev);
  GenerateSplit(spec, "eval", eval_clusters, &rng, &world, &world.eval);
  return world;
}

CmHead PerturbHead(const CmHead& head, double sigma, std::uint64_t seed) {
  Rng rng(seed);
  CmHead out = head;
  for (double& w : out.weights) w += sigma * rng.Gaussian();
  out.bias += sigma * rng.Gaussian();
  return out;
}

}  // namespace sasv
