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
#include "irsfl/lyapunov_online.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include "irsfl/errors.h"
#include "irsfl/random.h"

namespace irsfl {

EnergyQueues QueueUpdate(const EnergyQueues& queues, const RVec& b_mags) {
  if (b_mags.size() != queues.e.size() || queues.p_avg.size() != queues.e.size())
    throw DimensionError("queue update needs K powers and budgets");
  EnergyQueues out = queues;
  const double d = static_cast<double>(queues.d);
  for (Eigen::Index k = 0; k < out.e.size(); ++k) {
    const double next = queues.e[k] + d * b_mags[k] * b_mags[k] - d * queues.p_avg[k];
    out.e[k] = std::max(next, 0.0);
  }
  return out;
}

EnergyQueues InitQueues(const PowerBudget& budget, double fraction) {
  if (!(fraction >= 0.0)) throw DomainError("queue init fraction must be >= 0");
  EnergyQueues q;
  q.p_avg = budget.p_avg;
  q.d = budget.d;
  q.e = fraction * static_cast<double>(budget.d) * budget.p_avg;
  return q;
}

void VSchedule::Validate() const {
  if (!(scale >= 0.0)) throw ConfigError("V scale must be >= 0");
  if (mode == Mode::kFixed && !(fixed_value >= 0.0))
    throw ConfigError("fixed V must be >= 0");
  if (mode == Mode::kVarying &&
      (!(varying_coeff >= 0.0) || !(inner_slope >= 0.0) || !(inner_slope + inner_offset >= 0.0)))
    throw ConfigError("varying V schedule must be nonnegative");
}

double VValue(int r, const VSchedule& schedule) {
  if (r < 1) throw DomainError("V schedule periods are counted from 1");
  schedule.Validate();
  if (schedule.mode == VSchedule::Mode::kFixed) return schedule.scale * schedule.fixed_value;
  return schedule.scale * schedule.varying_coeff *
         std::sqrt(schedule.inner_slope * r + schedule.inner_offset);
}

OnlineController::OnlineController(const GapWeights& w, const PowerBudget& budget,
                                   const OnlineSettings& settings, std::uint64_t seed)
    : w_(w), budget_(budget), settings_(settings), seed_(seed) {
  w_.Validate();
  budget_.Validate();
  settings_.schedule.Validate();
  settings_.bcd.Validate();
  queues_ = InitQueues(budget_, settings_.queue_init_fraction);
}

const OnlineRound& OnlineController::Step(const ChannelState& state,
                                          const GradientStats& stats) {
  if (done()) throw DomainError("controller already ran every round");
  if (state.num_devices() != budget_.num_devices())
    throw DimensionError("channel and budget disagree on K");
  const int r = round_ / w_.period_len;
  if (round_ % w_.period_len == 0 && (settings_.reset_each_period || round_ == 0))
    queues_ = InitQueues(budget_, settings_.queue_init_fraction);

  OnlineRound rec;
  rec.round = round_;
  rec.v = VValue(r + 1, settings_.schedule);
  rec.queue_before = queues_.e;
  const P2Result res =
      SolveP2Round(state, stats, queues_, rec.v, round_, w_, budget_, settings_.noise,
                   settings_.bcd, DeriveSeed(seed_, Stream::kPhaseInit, {static_cast<std::uint64_t>(round_)}));
  rec.design = res.design;
  rec.objective = res.objective;
  rec.power = rec.design.b.cwiseAbs2();
  rec.mse = ErrorTermsOnline(rec.design, state, stats, settings_.noise, budget_.d);
  const OmegaPair o = Omega(round_ + 1, (r + 1) * w_.period_len, w_);
  rec.gap_term = PeriodDecay(r, w_) * o.omega2 * rec.mse;

  queues_ = QueueUpdate(queues_, rec.design.b.cwiseAbs());
  rec.queue_after = queues_.e;
  history_.push_back(std::move(rec));
  ++round_;
  return history_.back();
}

double CalibrateVScale(const ChannelState& state, const GradientStats& stats,
                       const GapWeights& w, const PowerBudget& budget,
                       const OnlineSettings& settings, std::uint64_t seed) {
  VSchedule unit = settings.schedule;
  unit.scale = 1.0;
  const double v1 = VValue(1, unit);
  if (!(v1 > 0.0)) throw DomainError("cannot calibrate a zero V schedule");
  if (!(stats.iota_sum() > 0.0))
    throw DegenerateInputError("cannot calibrate V on a zero-variance round");
  const EnergyQueues q = InitQueues(budget, settings.queue_init_fraction);
  const double target = budget.p_avg.mean();
  const std::uint64_t ps = DeriveSeed(seed, Stream::kPhaseInit, {0});
  auto mean_power = [&](double s) {
    return SolveP2Round(state, stats, q, s * v1, 0, w, budget, settings.noise, settings.bcd, ps)
        .design.b.cwiseAbs2()
        .mean();
  };
  double lo = 1e-12;
  double hi = 1.0;
  while (mean_power(hi) < target) {
    lo = hi;
    hi *= 10.0;
    if (hi > 1e30) throw DomainError("average power unreachable for any V scale");
  }
  for (int it = 0; it < 60 && hi / lo > 1.0 + 1e-6; ++it) {
    const double mid = std::sqrt(lo * hi);
    if (mean_power(mid) < target) lo = mid; else hi = mid;
  }
  return std::sqrt(lo * hi);
}

std::vector<OnlineRound> RunOnlineController(const RoundSource& next,
                                             const GapWeights& w,
                                             const PowerBudget& budget,
                                             const OnlineSettings& settings,
                                             std::uint64_t seed) {
  OnlineController ctl(w, budget, settings, seed);
  while (!ctl.done()) {
    auto item = next();
    if (!item) break;
    ctl.Step(item->first, item->second);
  }
  return ctl.history();
}

std::vector<double> OmniscientGaps(const std::vector<ChannelState>& states,
                                   const std::vector<GradientStats>& stats,
                                   const GapWeights& w, const PowerBudget& budget,
                                   const NoiseModel& noise, const BcdSettings& settings,
                                   std::uint64_t seed) {
  w.Validate();
  const int total = w.total_rounds;
  if (static_cast<int>(states.size()) != total || static_cast<int>(stats.size()) != total)
    throw DimensionError("comparator needs channels and statistics for every round");
  std::vector<double> gaps(static_cast<std::size_t>(total), 0.0);
  const int rho = w.period_len;
  for (int r = 0; r < w.num_periods; ++r) {
    const auto lo = static_cast<std::ptrdiff_t>(r * rho);
    const std::vector<ChannelState> st(states.begin() + lo, states.begin() + lo + rho);
    const std::vector<GradientStats> gs(stats.begin() + lo, stats.begin() + lo + rho);
    std::vector<std::uint64_t> seeds;
    for (int i = 0; i < rho; ++i)
      seeds.push_back(DeriveSeed(seed, Stream::kPhaseInit, {static_cast<std::uint64_t>(r * rho + i)}));
    const PeriodCost cost = OmniscientCost(gs, w, budget, noise, r);
    const PeriodDesign pd = SolvePeriod(st, cost, settings, seeds);
    for (int i = 0; i < rho; ++i)
      gaps[static_cast<std::size_t>(r * rho + i)] = RoundCost(cost, i, pd.rounds[i], st[i]);
  }
  return gaps;
}

ComparatorReport ComparatorCheck(const std::vector<OnlineRound>& trace,
                             const std::vector<double>& offline_gaps,
                             const GapWeights& w, const PowerBudget& budget,
                             const VSchedule& schedule) {
  w.Validate();
  budget.Validate();
  const int total = w.total_rounds;
  const int rho = w.period_len;
  if (static_cast<int>(trace.size()) != total)
    throw DomainError("comparator check needs a complete trace");
  if (static_cast<int>(offline_gaps.size()) != total)
    throw DomainError("comparator check needs a comparator value for every round");
  const int kc = budget.num_devices();
  const double d = static_cast<double>(budget.d);

  RMat excess(total, kc);  // d |b|^2 - d p_avg
  for (int t = 0; t < total; ++t) {
    if (trace[t].power.size() != kc || trace[t].queue_before.size() != kc)
      throw DomainError("trace round has the wrong device count");
    for (int k = 0; k < kc; ++k) excess(t, k) = d * trace[t].power[k] - d * budget.p_avg[k];
  }

  ComparatorReport rep;
  rep.e_max = excess.maxCoeff();
  rep.e_max_abs = excess.cwiseAbs().maxCoeff();
  const double e = rep.e_max;
  rep.c_e = 0.5 * kc * e * e;

  for (int r = 0; r < w.num_periods; ++r) {
    const RVec& e0 = trace[r * rho].queue_before;
    double c_abs = rho * rep.c_e;
    double c_rel = rho * rep.c_e;
    for (int t = r * rho + 1; t <= (r + 1) * rho; ++t) {
      for (int k = 0; k < kc; ++k) {
        c_abs += e * ((t - 1) * e + e0[k]);
        c_rel += e * ((t - r * rho - 1) * e + e0[k]);
      }
    }
    rep.c_r_absolute.push_back(c_abs);
    rep.c_r_relative.push_back(c_rel);
    rep.c_r.push_back(std::max(c_abs, c_rel));
  }

  for (int t = 0; t < total; ++t) {
    rep.online_gap_sum += trace[t].gap_term;
    rep.offline_gap_sum += offline_gaps[t];
  }
  rep.gap_rhs = rep.offline_gap_sum;
  for (int r = 0; r < w.num_periods; ++r) {
    const double v = VValue(r + 1, schedule);
    rep.gap_rhs += v > 0.0 ? rep.c_r[r] / v : std::numeric_limits<double>::infinity();
  }
  rep.gap_slack = rep.gap_rhs - rep.online_gap_sum;
  rep.gap_holds = rep.online_gap_sum <= rep.gap_rhs;

  rep.energy_lhs = excess.colwise().sum().transpose();
  rep.energy_rhs = RVec::Zero(kc);
  for (int r = 0; r < w.num_periods; ++r) {
    double g_star = 0.0;
    for (int t = r * rho; t < (r + 1) * rho; ++t) g_star += offline_gaps[t];
    const double root =
        std::sqrt(2.0 * std::max(0.0, rep.c_r[r] + VValue(r + 1, schedule) * g_star));
    for (int k = 0; k < kc; ++k) rep.energy_rhs[k] += root - trace[r * rho].queue_before[k];
  }
  rep.energy_slack = rep.energy_rhs - rep.energy_lhs;
  rep.energy_holds = (rep.energy_slack.array() >= 0.0).all();
  return rep;
}

}  // namespace irsfl
