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
// Convergence-gap weights of perturbed gradient descent under smoothness and
// the PL condition, the per-period weighted error sum, and the end-to-end
// gap bound.
#ifndef IRSFL_GAP_MODEL_H_
#define IRSFL_GAP_MODEL_H_

#include <vector>

#include "irsfl/aircomp.h"
#include "irsfl/channel_model.h"

namespace irsfl {

struct GapWeights {
  double mu = 0.2;
  double alpha = 0.005;
  double lipschitz = 10.0;
  int total_rounds = 100;
  int period_len = 10;
  int num_periods = 10;

  // Throws ConfigError unless mu, L > 0, 0 < alpha <= min(1/mu, 1/L) and
  // total_rounds == num_periods * period_len.
  void Validate() const;
  // 1 - mu * alpha.
  double contraction() const { return 1.0 - mu * alpha; }
};

struct OmegaPair {
  double omega1 = 0.0;
  double omega2 = 0.0;
};

// omega1 = c^(horizon - t) alpha (1 - L alpha) / 2, omega2 = c^(horizon - t)
// L alpha^2 / 2 with c = 1 - mu alpha. Throws ConfigError if t > horizon.
OmegaPair Omega(int t, int horizon, const GapWeights& w);

// Weight c^((R-1-r) rho) that carries period r (0-based) to the final round.
double PeriodDecay(int r, const GapWeights& w);

// Design-dependent part of the weighted error sum of period r (0-based):
// sum over its rounds of omega1 * bias^2 + omega2 * mse, with the horizon at
// the period end. The design-independent ||g||^2 term is not included.
double LambdaPeriod(int r, const std::vector<RoundDesign>& designs,
                    const std::vector<ChannelState>& states,
                    const std::vector<double>& gammas, const NoiseModel& noise,
                    const GapWeights& w, int d);

// c^T initial_gap + sum_r c^((R-1-r) rho) lambda_values[r].
double GapBound(double initial_gap, const std::vector<double>& lambda_values,
                const GapWeights& w);

// Error moments entering the one-step recursion of round t.
struct RoundErrorMoments {
  double bias_sq = 0.0;  // ||E eps_g||^2
  double mse = 0.0;      // E ||eps_g||^2
  double grad_sq = 0.0;  // E ||g_bar||^2
};

// General recursion with a per-round learning rate:
//   gap(t+1) <= (1 - mu a_t) gap(t) + a_t (1 - L a_t)/2 bias_sq
//               + L a_t^2 / 2 (mse + grad_sq).
// Throws DomainError if some a_t is negative or exceeds min(1/mu, 1/L).
double GapBoundVaryingRate(double initial_gap,
                           const std::vector<double>& per_round_alphas,
                           const std::vector<RoundErrorMoments>& moments,
                           double mu, double lipschitz);

// Lambda values (one per period) from per-round moments at constant alpha,
// including the grad_sq term.
std::vector<double> LambdaFromMoments(const std::vector<RoundErrorMoments>& moments,
                                      const GapWeights& w);

}  // namespace irsfl

#endif  // IRSFL_GAP_MODEL_H_
