/* Copyright 2026 The Response Timing Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

// Seed derivation for reproducible stochastic stages. Every random stream
// is a pure function of a root seed and a stream index, so results do not
// depend on evaluation order or thread count.

#ifndef RESPONSE_TIMING_RNG_H_
#define RESPONSE_TIMING_RNG_H_

#include <cstdint>
#include <random>

namespace response_timing {

using Rng = std::mt19937_64;

// splitmix64 finalizer.
constexpr uint64_t MixSeed(uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

constexpr uint64_t DeriveSeed(uint64_t seed, uint64_t stream) {
  return MixSeed(MixSeed(seed) ^ MixSeed(stream + 0x632be59bd9b4e019ULL));
}

}  // namespace response_timing

#endif  // RESPONSE_TIMING_RNG_H_
