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
#ifndef IRSFL_LINALG_H_
#define IRSFL_LINALG_H_

#include <cmath>
#include <complex>
#include <numbers>

#include <Eigen/Dense>

namespace irsfl {

using Complex = std::complex<double>;
using CVec = Eigen::VectorXcd;
using CMat = Eigen::MatrixXcd;
using RVec = Eigen::VectorXd;
using RMat = Eigen::MatrixXd;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Wraps an angle into [0, 2*pi).
inline double WrapPhase(double theta) {
  double r = std::fmod(theta, kTwoPi);
  if (r < 0.0) r += kTwoPi;
  if (r >= kTwoPi) r = 0.0;
  return r;
}

inline double DbToLinear(double db) { return std::pow(10.0, db / 10.0); }
inline double DbmToWatts(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }

}  // namespace irsfl

#endif  // IRSFL_LINALG_H_
