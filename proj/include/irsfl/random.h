/*
 * Copyright 2026 The irsfl Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#ifndef IRSFL_RANDOM_H_
#define IRSFL_RANDOM_H_

#include <cstdint>
#include <initializer_list>
#include <random>

#include "irsfl/linalg.h"

namespace irsfl {

using Rng = std::mt19937_64;

// Named random streams. Every source of randomness in an experiment draws
// from its own stream so that schemes compared on one seed see identical
// channels, noise, and mini-batches.
enum class Stream : std::uint64_t {
  kGeometry = 1,
  kTask = 2,
  kChannel = 3,
  kNoise = 4,
  kBatch = 5,
  kPhaseInit = 6,
  kCsiError = 7,
  kTest = 99,
};

// SplitMix64 finalizer.
inline std::uint64_t Mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Derives a child seed from a base seed and a list of integer keys.
inline std::uint64_t DeriveSeed(std::uint64_t base,
                                std::initializer_list<std::uint64_t> keys) {
  std::uint64_t h = Mix64(base);
  for (std::uint64_t k : keys) h = Mix64(h ^ Mix64(k + 0x632be59bd9b4e019ULL));
  return h;
}

inline std::uint64_t DeriveSeed(std::uint64_t base, Stream stream,
                                std::initializer_list<std::uint64_t> keys = {}) {
  std::uint64_t h = DeriveSeed(base, {static_cast<std::uint64_t>(stream)});
  for (std::uint64_t k : keys) h = Mix64(h ^ Mix64(k + 0x632be59bd9b4e019ULL));
  return h;
}

// Circularly symmetric complex Gaussian with E|z|^2 = variance.
inline Complex ComplexGaussian(Rng& rng, double variance) {
  std::normal_distribution<double> n(0.0, 1.0);
  const double s = std::sqrt(variance / 2.0);
  const double re = n(rng);
  const double im = n(rng);
  return {s * re, s * im};
}

}  // namespace irsfl

#endif  // IRSFL_RANDOM_H_
