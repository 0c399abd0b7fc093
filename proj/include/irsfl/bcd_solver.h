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
// Block coordinate descent over transmit factors, receive beamformer and IRS
// phases for the periodized offline problem and the per-round online
// problem.
#ifndef IRSFL_BCD_SOLVER_H_
#define IRSFL_BCD_SOLVER_H_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "irsfl/aircomp.h"
#include "irsfl/channel_model.h"
#include "irsfl/energy_queues.h"
#include "irsfl/gap_model.h"
#include "irsfl/linalg.h"

namespace irsfl {

struct PowerBudget {
  RVec p_max;  // watts
  RVec p_avg;  // watts
  int d = 1;

  int num_devices() const { return static_cast<int>(p_max.size()); }
  void Validate() const;
};

enum class DualMethod {
  // Exact coordinate-wise root finding on each multiplier, warm started.
  kCoordinate,
  // Projected subgradient ascent with step dual_step0 / sqrt(iter).
  kSubgradient,
};

struct BcdSettings {
  int max_iters = 50;
  double rel_tol = 1e-6;
  // Step scale of the subgradient method; <= 0 selects 1 / (rho d mean(p_avg)).
  double dual_step0 = 0.0;
  int dual_max_iters = 200;
  int phase_sweeps_max = 30;
  std::optional<int> quant_bits;
  DualMethod dual_method = DualMethod::kCoordinate;
  // Snap the continuous per-element optimum to the nearest grid point instead
  // of picking the better of its two grid neighbours.
  bool nearest_point_quantization = false;
  // Keep the IRS phases at their initial value (theta-fixed baseline).
  bool optimize_phases = true;
  // Iteration cap of the reduced-space block run after the closed-form power
  // step: projected gradient on b (and continuous theta) with m eliminated.
  // 0 leaves plain alternation.
  int reduced_iters = 1000;
  // Quantized phases: also run continuous sweeps, round them to the grid and
  // refine; keep whichever of the two grid solutions is better.
  bool round_from_relaxation = true;
  // Quantized phases: after the element sweeps stall, re-pick pairs of
  // elements jointly over all level combinations until no pair improves.
  bool pair_moves = true;

  void Validate() const;
};

// Returns b with |b| = b_mag and channel * b real and nonnegative. Throws
// DegenerateChannelError when the channel is exactly zero.
Complex AlignPhase(double b_mag, Complex effective_scalar_channel);

// Scaled per-round cost used by the period solver:
//   f_t = s_t / K^2 [ w1_t |sum_k a_k - K|^2
//                     + w2_t (sum_k |a_k - 1|^2 + nm sigma^2 ||m||^2) ]
// with a_k = m^H h~_k b_k. The offline problem uses s_t = gamma_t, nm = d; the
// online-normalized comparator uses s_t = d sum iota^2 / K^2, nm = 1.
struct PeriodCost {
  std::vector<double> omega1;
  std::vector<double> omega2;
  std::vector<double> error_scale;
  double noise_mult = 1.0;
  double sigma_z_sq = 0.0;
  RVec cap_sq;   // per-round bound on |b_k|^2
  RVec budget;   // per-period bound on sum_t |b_k^(t)|^2
  // Optional per-device price on |b_k|^2 added to every round (online
  // queue weights); empty means none.
  RVec energy_price;

  int num_rounds() const { return static_cast<int>(omega1.size()); }
};

double RoundCost(const PeriodCost& cost, int t, const RoundDesign& design,
                 const ChannelState& state);

struct PowerResult {
  RMat b_mags;       // rho x K
  RVec duals;        // K
  bool converged = true;
  // max_k lambda_k * |budget_k - sum_t b^2| / budget_k.
  double slackness_residual = 0.0;
  int dual_iters = 0;
};

// Magnitude allocation for fixed |m^H h~| (bar_h, rho x K) under the
// per-round caps and per-period budgets of `cost`.
// `warm_duals`, if given, starts the multiplier search.
PowerResult PowerAllocPeriod(const RMat& bar_h, const PeriodCost& cost,
                             const BcdSettings& settings,
                             const RVec* warm_duals = nullptr);

// Value of the magnitude objective sum_t s_t/K^2 [w1 (sum h x - K)^2
// + w2 sum (h x - 1)^2] (noise term excluded).
double PowerObjective(const RMat& bar_h, const RMat& x, const PeriodCost& cost);

// Cost of offline period `period_index`: omega weights with the horizon at
// the period end, error scale gamma_t, noise multiplier d, caps
// min(d p_max, rho d p_avg) and budgets rho d p_avg.
PeriodCost OfflineCost(const std::vector<double>& gammas, const GapWeights& w,
                       const PowerBudget& budget, const NoiseModel& noise,
                       int period_index);

// Offline allocation for period `period_index` (see OfflineCost).
PowerResult PowerAllocOffline(const RMat& bar_h, const std::vector<double>& gammas,
                              const GapWeights& w, const PowerBudget& budget,
                              int period_index, const BcdSettings& settings);

// Closed-form online allocation
//   b_k = min{ 1 / (h_k + e_k K^4 / (V decay omega2 S h_k)), sqrt(p_max_k) }.
// Returns zeros when V, S or the weights vanish; b_k = 0 where h_k = 0.
RVec PowerAllocOnline(const RVec& bar_h, const RVec& queues, double v_r,
                      double omega2, double decay, double iota_sum,
                      const PowerBudget& budget);

// m = (w1 u u^H + w2 sum |b_k|^2 h_k h_k^H + w2 nm sigma^2 I)^-1 (K w1 + w2) u,
// u = sum_k h_k b_k. `noise_mult` is d for the offline scheme.
CVec ReceiverOffline(const CMat& h_tilde, const CVec& b, double omega1,
                     double omega2, double noise_mult, double sigma_z_sq);

// m = (sum |b_k|^2 h_k h_k^H + sigma^2 I)^-1 sum_k h_k b_k.
CVec ReceiverOnline(const CMat& h_tilde, const CVec& b, double sigma_z_sq);

// Phase-only objective w1 |sum a - K|^2 + w2 sum |a - 1|^2.
double PhaseObjective(const ChannelState& state, const CVec& m, const CVec& b,
                      double omega1, double omega2, const IrsPhases& phases);

// Coefficient Q_n of the single-element reduction: with the other phases
// fixed, the phase objective equals const + 2 Re{e^{j theta_n} Q_n}.
struct ElementCoefficient {
  Complex q1;  // omega1 part
  Complex q2;  // omega2 part
  Complex total() const { return q1 + q2; }
};

// Continuous per-element minimizer via the sinusoid form
// c sin(theta + theta_hat), theta* = 3 pi / 2 - theta_hat, with theta_hat
// assembled from the atan branch rule on the relative angle of q1, q2.
double ElementOptimum(const ElementCoefficient& c);

struct PhaseRefineStats {
  int sweeps = 0;
  std::vector<double> sweep_objective;  // objective after each sweep
};

IrsPhases RefinePhases(const ChannelState& state, const CVec& m, const CVec& b,
                       double omega1, double omega2, const IrsPhases& start,
                       const BcdSettings& settings,
                       PhaseRefineStats* stats = nullptr);

struct TraceEntry {
  int iter = 0;
  std::string block;  // "init", "power", "reduced", "receiver", "phase"
  double objective = 0.0;
};

struct PeriodDesign {
  std::vector<RoundDesign> rounds;
  std::vector<double> objective_trace;  // after init and each full iteration
  std::vector<TraceEntry> block_trace;
  RVec dual_vars;
  bool converged = false;
  bool dual_converged = true;
  int iterations = 0;
};

// Generic period solver. `phase_seeds` (one per round) seed the uniform
// initial phases; `initial_phases`, if given, overrides them.
PeriodDesign SolvePeriod(const std::vector<ChannelState>& states,
                         const PeriodCost& cost, const BcdSettings& settings,
                         const std::vector<std::uint64_t>& phase_seeds,
                         const std::vector<IrsPhases>* initial_phases = nullptr);

// Offline periodized problem for period `period_index` (0-based).
PeriodDesign SolveP1Period(const std::vector<ChannelState>& states,
                           const std::vector<double>& gammas, const GapWeights& w,
                           const PowerBudget& budget, const NoiseModel& noise,
                           int period_index, const BcdSettings& settings,
                           const std::vector<std::uint64_t>& phase_seeds);

// Cost of the online-normalized omniscient comparator over one period: omega1
// forced to 0, weights carried to the final round, online error scale, caps
// p_max and budgets rho p_avg.
PeriodCost OmniscientCost(const std::vector<GradientStats>& stats,
                          const GapWeights& w, const PowerBudget& budget,
                          const NoiseModel& noise, int period_index);

// Online per-round problem:
//   min V decay omega2 E||eps_g||^2 + sum_k d e_k |b_k|^2,  |b_k|^2 <= p_max.
struct P2Result {
  RoundDesign design;
  std::vector<double> objective_trace;
  double objective = 0.0;
};

// Per-round objective value of the online problem (with the common factor d
// kept on both terms).
double P2Objective(const RoundDesign& design, const ChannelState& state,
                   const GradientStats& stats, const EnergyQueues& queues,
                   double v_r, double decay, double omega2,
                   const NoiseModel& noise);

P2Result SolveP2Round(const ChannelState& state, const GradientStats& stats,
                      const EnergyQueues& queues, double v_r, int round_index,
                      const GapWeights& w, const PowerBudget& budget,
                      const NoiseModel& noise, const BcdSettings& settings,
                      std::uint64_t phase_seed);

// Receiver and phases for prescribed transmit magnitudes, alternating the
// receiver, the phase sweeps and the phase alignment of b; every accepted
// step lowers w1 |sum a - K|^2 + w2 (sum |a - 1|^2 + nm sigma^2 ||m||^2).
RoundDesign RedesignFixedPower(const ChannelState& state, const RVec& mags,
                               double omega1, double omega2, double noise_mult,
                               double sigma_z_sq, const BcdSettings& settings,
                               std::uint64_t phase_seed);

// Uniform random phases on [0, 2 pi), snapped to the grid when bits is set.
IrsPhases RandomPhases(int n, std::uint64_t seed, std::optional<int> bits);

}  // namespace irsfl

#endif  // IRSFL_BCD_SOLVER_H_
