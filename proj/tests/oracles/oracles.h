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
// Independent numerical reference solvers used only by the tests. None of
// them reuses the closed forms of the library.
#ifndef IRSFL_TESTS_ORACLES_ORACLES_H_
#define IRSFL_TESTS_ORACLES_ORACLES_H_

#include <cstdint>
#include <functional>
#include <vector>

#include "irsfl/bcd_solver.h"
#include "irsfl/channel_model.h"
#include "irsfl/linalg.h"

namespace irsfl::oracle {

// Argmin of f over `points` equally spaced samples of [lo, hi).
double GridArgmin(const std::function<double(double)>& f, double lo, double hi,
                  long points);

// Golden-section search for a unimodal f on [lo, hi].
double GoldenSection(const std::function<double(double)>& f, double lo, double hi,
                     double tol = 1e-13);

// h_d,k + G Theta h_r,k with an explicit N x N diagonal matrix.
CVec DenseEffectiveChannel(const ChannelState& s, const RVec& theta, int k);

// Two-pass population variance.
double TwoPassVariance(const RVec& x);

// Minimizes m^H A m - 2 Re(r^H m) for Hermitian PSD A by conjugate gradient.
CVec ConjugateGradientQuadratic(const CMat& a, const CVec& r, int iters = 400);

// Accelerated gradient descent on the offline receiver objective below, with
// the gradient accumulated term by term. w1 = 0, w2 = nm = 1 gives the online
// receiver objective.
CVec GradientDescentReceiver(const CMat& h, const CVec& b, double w1, double w2,
                             double nm, double sigma, int iters = 100000);

// Receiver objectives evaluated term by term.
double OfflineReceiverObjective(const CMat& h, const CVec& b, const CVec& m,
                                double w1, double w2, double nm, double sigma);
double OnlineReceiverObjective(const CMat& h, const CVec& b, const CVec& m,
                               double sigma);

// FISTA on the magnitude problem with exact projection onto the per-device
// set {0 <= x <= u, ||x||^2 <= B}. Returns rho x K magnitudes.
RMat ProjectedGradientPower(const RMat& bar_h, const PeriodCost& cost,
                            int iters = 200000);

// Projection of y onto {0 <= x <= u, ||x||^2 <= budget}.
RVec ProjectBoxBall(const RVec& y, const RVec& u, double budget);

// Best grid assignment by enumerating all (2^bits)^N configurations.
std::vector<int> ExhaustivePhases(const ChannelState& s, const CVec& m, const CVec& b,
                                  double w1, double w2, int bits, double* best_value);

// Phase objective for explicit theta, evaluated through dense products.
double DensePhaseObjective(const ChannelState& s, const CVec& m, const CVec& b,
                           double w1, double w2, const RVec& theta);

// Online per-round objective minimized by random restarts of projected
// gradient descent over (b, m, theta) jointly.
double RandomRestartP2(const ChannelState& s, double weight, const RVec& queues,
                       const RVec& p_max, double sigma, int restarts,
                       std::uint64_t seed);

// Online per-round objective in the scaled form weight (sum |a - 1|^2 +
// sigma ||m||^2) + sum_k e_k |b_k|^2.
double ScaledP2Objective(const ChannelState& s, double weight, const RVec& queues,
                         double sigma, const CVec& b, const CVec& m, const RVec& theta);

// (1 - mu alpha)^n alpha (1 - L alpha) / 2 and (1 - mu alpha)^n L alpha^2 / 2 in
// 50-digit arithmetic.
std::pair<double, double> HighPrecisionOmega(double mu, double alpha, double l, int n);

}  // namespace irsfl::oracle

#endif  // IRSFL_TESTS_ORACLES_ORACLES_H_
