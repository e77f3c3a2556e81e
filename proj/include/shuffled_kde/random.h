// Copyright 2026 The Shuffled KDE Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef SHUFFLED_KDE_RANDOM_H_
#define SHUFFLED_KDE_RANDOM_H_

#include <cstdint>
#include <random>
#include <string_view>

namespace shuffled_kde {

// Every randomness stream in the library is an mt19937_64. Streams are never
// shared between owners; independent streams are obtained with DeriveSeed.
using Rng = std::mt19937_64;

// Mixes a 64-bit value (splitmix64 finalizer).
inline uint64_t Mix64(uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Domain-separated child seed: distinct (label, index) pairs under the same
// parent give unrelated streams.
inline uint64_t DeriveSeed(uint64_t parent, std::string_view label,
                           uint64_t index = 0) {
  uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a over the label.
  for (char c : label) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return Mix64(Mix64(parent ^ h) + index);
}

// Portable transforms. Unlike the <random> distributions, these produce the
// same values on every standard library, so public randomness can be
// reproduced from a seed anywhere.

// Uniform on [0, 1) with 53 bits of precision.
inline double UniformUnit(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Standard normal via Box-Muller (one draw per call, the sine branch is
// discarded so that the stream position is a function of the call count).
double StandardNormal(Rng& rng);

inline bool BernoulliDraw(double p, Rng& rng) { return UniformUnit(rng) < p; }

}  // namespace shuffled_kde

#endif  // SHUFFLED_KDE_RANDOM_H_
