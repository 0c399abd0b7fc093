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
// Online design: virtual energy-deficit queues, the V_r schedule, the
// per-round drift-plus-penalty controller, and the empirical check of the
// performance/backlog bounds on a finished trace.
#ifndef IRSFL_LYAPUNOV_ONLINE_H_
#define IRSFL_LYAPUNOV_ONLINE_H_

#include <cstdint>
#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include "irsfl/aircomp.h"
#include "irsfl/bcd_solver.h"
#include "irsfl/channel_model.h"
#include "irsfl/energy_queues.h"
#include "irsfl/gap_model.h"

namespace irsfl {

// e <- max{e + d |b|^2 - d p_avg, 0}, elementwise.
EnergyQueues QueueUpdate(const EnergyQueues& queues, const RVec& b_mags);

// e_k = fraction * d * p_avg_k.
EnergyQueues InitQueues(const PowerBudget& budget, double fraction);

struct VSchedule {
  enum class Mode { kFixed, kVarying };
  Mode mode = Mode::kVarying;
  double fixed_value = 90.0;
  // V_r = coeff * sqrt(slope * r + offset).
  double varying_coeff = 20.0;
  double inner_slope = 10.0;
  double inner_offset = 1.0;
  // Common multiplier applied to every V_r. It converts the schedule into
  // the units of the learning task at hand; 1 keeps the raw values.
  double scale = 1.0;

  void Validate() const;
};

// V for period r, counted from 1. Throws DomainError if r < 1.
double VValue(int r, const VSchedule& schedule);

struct OnlineSettings {
  VSchedule schedule;
  double queue_init_fraction = 0.2;
  // Re-initialize the queues at every period start; false keeps one queue
  // trajectory for the whole run.
  bool reset_each_period = true;
  BcdSettings bcd;
  NoiseModel noise;
};

// Everything the controller decided and observed in one round.
struct OnlineRound {
  int round = 0;  // 0-based
  RoundDesign design;
  RVec power;         // |b_k|^2
  RVec queue_before;  // e_k(t) used by the design
  RVec queue_after;   // e_k(t+1)
  double v = 0.0;
  double objective = 0.0;  // drift-plus-penalty value of the chosen design
  double gap_term = 0.0;   // decay * omega2 * E||eps_g||^2
  double mse = 0.0;        // E||eps_g||^2 of the online normalization
};

// Streaming controller. Each Step sees only the current round's channel and
// gradient statistics; nothing about future rounds can reach it.
class OnlineController {
 public:
  OnlineController(const GapWeights& w, const PowerBudget& budget,
                   const OnlineSettings& settings, std::uint64_t seed);

  const OnlineRound& Step(const ChannelState& state, const GradientStats& stats);

  int round() const { return round_; }
  bool done() const { return round_ >= w_.total_rounds; }
  const EnergyQueues& queues() const { return queues_; }
  const std::vector<OnlineRound>& history() const { return history_; }

 private:
  GapWeights w_;
  PowerBudget budget_;
  OnlineSettings settings_;
  std::uint64_t seed_;
  EnergyQueues queues_;
  int round_ = 0;
  std::vector<OnlineRound> history_;
};

// Multiplier s for VSchedule::scale at which the round-0 design, with the
// queues at their initial value and V = s * V_1 of `schedule` taken with
// scale 1, spends the mean average power: mean_k |b_k|^2 = mean_k p_avg_k.
// Geometric bisection on s; uses only the first round's inputs. Throws
// DegenerateInputError when that round's gradient variance sum is zero.
double CalibrateVScale(const ChannelState& state, const GradientStats& stats,
                       const GapWeights& w, const PowerBudget& budget,
                       const OnlineSettings& settings, std::uint64_t seed);

// Pulls rounds from `next` until it returns nullopt or the horizon ends.
using RoundSource =
    std::function<std::optional<std::pair<ChannelState, GradientStats>>()>;

std::vector<OnlineRound> RunOnlineController(const RoundSource& next,
                                             const GapWeights& w,
                                             const PowerBudget& budget,
                                             const OnlineSettings& settings,
                                             std::uint64_t seed);

// Per-round gap terms G_t = decay * omega2 * E||eps_g||^2 of the omniscient
// comparator: the period solver on the realized channels and statistics
// with omega1 = 0 and the online normalization.
std::vector<double> OmniscientGaps(const std::vector<ChannelState>& states,
                                   const std::vector<GradientStats>& stats,
                                   const GapWeights& w, const PowerBudget& budget,
                                   const NoiseModel& noise, const BcdSettings& settings,
                                   std::uint64_t seed);

struct ComparatorReport {
  double e_max = 0.0;      // max_{k,t} (d |b|^2 - d p_avg)
  double e_max_abs = 0.0;  // max_{k,t} |d |b|^2 - d p_avg|, diagnostic
  double c_e = 0.0;
  // C_r with the growth term counted from the run start (t - 1) and from
  // the period start (t - r rho - 1); `c_r` is the larger of the two.
  std::vector<double> c_r_absolute;
  std::vector<double> c_r_relative;
  std::vector<double> c_r;

  double online_gap_sum = 0.0;
  double offline_gap_sum = 0.0;
  double gap_rhs = 0.0;
  double gap_slack = 0.0;  // rhs - lhs
  bool gap_holds = false;

  RVec energy_lhs;  // per device
  RVec energy_rhs;
  RVec energy_slack;
  bool energy_holds = false;

  bool holds() const { return gap_holds && energy_holds; }
};

// Both inequalities with constants computed from the trace. `offline_gaps`
// holds G*_t for every round. Throws DomainError on an incomplete trace.
ComparatorReport ComparatorCheck(const std::vector<OnlineRound>& trace,
                             const std::vector<double>& offline_gaps,
                             const GapWeights& w, const PowerBudget& budget,
                             const VSchedule& schedule);

}  // namespace irsfl

#endif  // IRSFL_LYAPUNOV_ONLINE_H_
