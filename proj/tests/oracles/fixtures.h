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
// Random instances shared by the unit and acceptance tests.
#ifndef IRSFL_TESTS_ORACLES_FIXTURES_H_
#define IRSFL_TESTS_ORACLES_FIXTURES_H_

#include <cstdint>
#include <random>

#include "irsfl/channel_model.h"
#include "irsfl/random.h"

namespace irsfl::fixtures {

// Unit-variance i.i.d. complex Gaussian channels of the given shape.
inline ChannelState RandomState(int m, int n, int k, std::uint64_t seed,
                                double scale = 1.0) {
  Rng rng(seed);
  ChannelState s;
  s.h_d.resize(m, k);
  s.h_r.resize(n, k);
  s.g.resize(m, n);
  for (Eigen::Index i = 0; i < s.h_d.size(); ++i) s.h_d.data()[i] = ComplexGaussian(rng, scale);
  for (Eigen::Index i = 0; i < s.h_r.size(); ++i) s.h_r.data()[i] = ComplexGaussian(rng, 1.0);
  for (Eigen::Index i = 0; i < s.g.size(); ++i) s.g.data()[i] = ComplexGaussian(rng, scale);
  return s;
}

inline CVec RandomComplex(int n, Rng& rng, double var = 1.0) {
  CVec v(n);
  for (int i = 0; i < n; ++i) v[i] = ComplexGaussian(rng, var);
  return v;
}

inline double Uniform(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

}  // namespace irsfl::fixtures

#endif  // IRSFL_TESTS_ORACLES_FIXTURES_H_
