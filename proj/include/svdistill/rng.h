// svdistill/rng.h

// Copyright 2026  The svdistill authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#ifndef SVDISTILL_RNG_H_
#define SVDISTILL_RNG_H_

#include <cstdint>

#include "svdistill/matrix.h"

namespace svdistill {

// Seedable, platform-independent generator. The algorithm is pinned so that
// corpora and training runs reproduce bit-for-bit from a seed:
//
//   * core stream: xoshiro256++ (Blackman & Vigna), state seeded by four
//     successive outputs of SplitMix64(seed);
//   * NextDouble: (NextU64() >> 11) * 2^-53, uniform in [0, 1);
//   * NextInt(n): 64-bit modulo rejection;
//   * NextGaussian: Marsaglia polar method, spare value cached;
//   * Fork(k): an independent substream seeded with
//     SplitMix64(SplitMix64(seed) ^ (k + 0x9e3779b97f4a7c15)).
//
// Single-owner mutable state; use one Rng per thread.
class Rng {
 public:
  explicit Rng(uint64_t seed);

  uint64_t NextU64();
  double NextDouble();              // uniform [0,1)
  double NextGaussian();            // standard normal
  // Uniform integer in [0, bound); bound must be positive.
  int64_t NextInt(int64_t bound);
  // Substream k, a pure function of (seed, k): forks taken in any order or
  // from any point in the parent stream are identical.
  Rng Fork(uint64_t k) const;

  uint64_t seed() const { return seed_; }

 private:
  uint64_t seed_;
  uint64_t s_[4];
  bool has_spare_ = false;
  double spare_ = 0.0;
};

uint64_t SplitMix64(uint64_t x);

// rows x cols matrix of i.i.d. N(mean, std^2) draws; std must be >= 0 and
// std = 0 yields mean exactly. Consumes rows*cols gaussians either way.
Matrix GaussianMatrix(Rng *rng, double mean, double std, int rows, int cols);

}  // namespace svdistill

#endif  // SVDISTILL_RNG_H_
