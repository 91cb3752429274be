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

#ifndef SASV_SYNTH_H_
#define SASV_SYNTH_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "sasv/core.h"
#include "sasv/mapping.h"
#include "sasv/metrics.h"
#include "sasv/scoring.h"

namespace sasv {

// Parameters of a synthetic embedding world. Each of the three splits
// (train, dev, eval) gets its own n_speakers speakers.
struct WorldSpec {
  std::uint64_t seed = 1;
  int n_speakers = 8;
  int utts_per_speaker = 12;    // bona fide, including enrollment
  int spoofs_per_speaker = 12;  // attacks aimed at each speaker
  int enroll_per_speaker = 3;   // first utterances of a speaker
  int asv_dim = 192;
  int cm_dim = 160;
  // Norm of the within-speaker noise relative to the unit speaker direction.
  double asv_noise = 0.6;
  // Logit distance between the bona fide and spoof CM cluster means under
  // the true head.
  double cm_margin = 8.0;
  // Per-coordinate std of the CM clusters, in units of the distance between
  // the cluster means. Logit std under the true head = cm_margin * cm_spread.
  double cm_spread = 0.1;
  // Weight of the attacked speaker's direction in a spoof ASV embedding.
  double spoof_asv_alpha = 0.9;
  // Fraction of the way the eval spoof cluster moves toward bona fide.
  double eval_spoof_shift = 0.3;
};

// Throws kInvalidArgument describing the first violated constraint.
void ValidateWorldSpec(const WorldSpec& spec);

struct World {
  EmbeddingTable asv;
  EmbeddingTable cm;
  EnrollmentMap enrollment;  // all splits
  std::vector<Trial> train;
  std::vector<Trial> dev;
  std::vector<Trial> eval;
  CmHead true_head;
};

/**
 * Builds a world as a pure function of the spec.
 *
 * ASV: each speaker has a random unit direction; a bona fide embedding is
 * the direction plus isotropic noise of relative norm asv_noise, then
 * normalized. A spoof aimed at a speaker mixes that direction (weight
 * spoof_asv_alpha) with a random source direction before the same noise.
 *
 * CM: bona fide and spoof embeddings are Gaussian clusters whose means are
 * a unit distance apart. The true head is the scaled unit difference of the
 * means, with the bias placing the clusters at +/- cm_margin / 2. The eval
 * split's spoof mean is shifted toward bona fide by eval_spoof_shift.
 *
 * Trials per split and speaker: one target trial per non-enrollment
 * utterance, one non-target trial per such utterance claimed by a
 * different random speaker, one spoof trial per attack.
 *
 * Ids: "<split>_sNNN" for speakers, "<split>_sNNN_bNNN" for bona fide
 * and "<split>_sNNN_aNNN" for spoofed utterances.
 */
World GenerateWorld(const WorldSpec& spec);

// Adds N(0, sigma^2) noise to every weight and the bias.
CmHead PerturbHead(const CmHead& head, double sigma, std::uint64_t seed);

// Brute-force EER: rates counted independently at every observed score,
// every midpoint between neighbouring distinct scores and +/-inf, then
// reduced to one point per distinct rate pair (the largest threshold that
// produces it) and crossed with the ComputeEer convention. O(n^2).
EerResult OracleEer(std::span<const double> pos, std::span<const double> neg);

// Grid search over (a, b): a coarse 201 x 201 grid on [0, 50] x [-25, 25],
// then `refinements` rounds of a 201 x 201 grid spanning one coarse cell on
// each side of the current best point.
CalibratorParams OracleCalibrator(std::span<const double> scores,
                                  std::span<const int> labels, double l2,
                                  int refinements = 1);

}  // namespace sasv

#endif  // SASV_SYNTH_H_
