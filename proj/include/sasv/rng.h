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

#ifndef SASV_RNG_H_
#define SASV_RNG_H_

#include <array>
#include <cstdint>

namespace sasv {

// xoshiro256** (Blackman & Vigna) seeded by four SplitMix64 outputs.
//
// The standard <random> distributions are implementation-defined, so every
// derived draw is spelled out here to keep generated data identical across
// compilers and platforms:
//   Uniform01()   (next >> 11) * 2^-53, in [0, 1)
//   UniformInt(n) rejection sampling of next % n below 2^64 - (2^64 mod n)
//   Gaussian()    Box-Muller cosine branch on two fresh uniforms,
//                 sqrt(-2 ln(1 - u1)) * cos(2 pi u2); no cached second value
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t Next();
  double Uniform01();
  std::uint64_t UniformInt(std::uint64_t n);
  double Gaussian();

 private:
  std::array<std::uint64_t, 4> s_;
};

std::uint64_t SplitMix64(std::uint64_t* state);

}  // namespace sasv

#endif  // SASV_RNG_H_
