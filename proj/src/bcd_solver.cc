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
#include "irsfl/bcd_solver.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "irsfl/errors.h"
#include "irsfl/random.h"

namespace irsfl {
namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

// Minimizer over 0 <= x <= u of
//   c1 (sum_k h_k x_k - K)^2 + c2 sum_k (h_k x_k - 1)^2 + sum_k lam_k x_k^2.
// Stationarity gives x_k = clip(h_k (c2 + c1 (K - S)) / (c2 h_k^2 + lam_k))
// with S = sum_k h_k x_k; the scalar fixed point in S is monotone and found
// by safeguarded Newton on its piecewise-linear residual.
void SolveRound(const double* h, const double* lam, const double* u, int k_count,
                double c1, double c2, double* x) {
  const double kk = static_cast<double>(k_count);
  auto eval = [&](double s, double* slope) {
    double total = 0.0;
    double sl = 0.0;
    for (int k = 0; k < k_count; ++k) {
      if (h[k] <= 0.0 || u[k] <= 0.0) {
        x[k] = 0.0;
        continue;
      }
      const double den = c2 * h[k] * h[k] + lam[k];
      const double num = h[k] * (c2 + c1 * (kk - s));
      double v;
      if (den > 0.0) {
        v = num / den;
        if (v <= 0.0) {
          v = 0.0;
        } else if (v >= u[k]) {
          v = u[k];
        } else {
          sl -= h[k] * h[k] * c1 / den;
        }
      } else {
        v = num > 0.0 ? u[k] : 0.0;
      }
      x[k] = v;
      total += h[k] * v;
    }
    if (slope) *slope = sl - 1.0;
    return total - s;
  };

  if (c1 == 0.0) {
    eval(0.0, nullptr);
    return;
  }
  double hi = 0.0;
  for (int k = 0; k < k_count; ++k) hi += std::max(h[k], 0.0) * std::max(u[k], 0.0);
  double lo = 0.0;
  if (eval(lo, nullptr) <= 0.0) return;  // all-zero allocation
  if (eval(hi, nullptr) >= 0.0) return;  // everything at the cap
  double s = 0.5 * (lo + hi);
  for (int iter = 0; iter < 200; ++iter) {
    double slope = -1.0;
    const double r = eval(s, &slope);
    if (r == 0.0) return;
    if (r > 0.0) lo = s; else hi = s;
    if (hi - lo <= 4.0 * kEps * std::max(1.0, hi)) break;
    double next = s - r / slope;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (next == s) break;
    s = next;
  }
  eval(0.5 * (lo + hi), nullptr);
}

// Per-device squared-magnitude sums for given multipliers; fills x.
void SolveAllRounds(const RMat& bar_h, const PeriodCost& cost, const RVec& lam,
                    const RVec& u, RMat& x) {
  const int rho = static_cast<int>(bar_h.rows());
  const int k = static_cast<int>(bar_h.cols());
  const double k2 = static_cast<double>(k) * k;
  std::vector<double> h(k), xr(k);
  for (int t = 0; t < rho; ++t) {
    for (int i = 0; i < k; ++i) h[i] = bar_h(t, i);
    const double c1 = cost.error_scale[t] * cost.omega1[t] / k2;
    const double c2 = cost.error_scale[t] * cost.omega2[t] / k2;
    SolveRound(h.data(), lam.data(), u.data(), k, c1, c2, xr.data());
    for (int i = 0; i < k; ++i) x(t, i) = xr[i];
  }
}

double ColumnEnergy(const RMat& x, int k) { return x.col(k).squaredNorm(); }

RVec EffectiveCaps(const PeriodCost& cost) {
  RVec u(cost.cap_sq.size());
  for (Eigen::Index k = 0; k < u.size(); ++k)
    u[k] = std::sqrt(std::max(0.0, std::min(cost.cap_sq[k], cost.budget[k])));
  return u;
}

// Scales each device down to its budget where the multiplier search stopped
// short; caps stay satisfied because the scale is <= 1.
void EnforceBudgets(const PeriodCost& cost, RMat& x) {
  for (Eigen::Index k = 0; k < x.cols(); ++k) {
    const double e = x.col(k).squaredNorm();
    if (e > cost.budget[k] && e > 0.0) x.col(k) *= std::sqrt(cost.budget[k] / e);
  }
}

void ValidateCost(const PeriodCost& cost, int rho, int k) {
  if (cost.num_rounds() != rho || static_cast<int>(cost.omega2.size()) != rho ||
      static_cast<int>(cost.error_scale.size()) != rho)
    throw DimensionError("cost weights must have one entry per round");
  if (cost.cap_sq.size() != k || cost.budget.size() != k)
    throw DimensionError("caps and budgets must have K entries");
}

}  // namespace

void PowerBudget::Validate() const {
  if (p_max.size() < 1 || p_max.size() != p_avg.size())
    throw DimensionError("power budget vectors must be nonempty and equal length");
  if (d < 1) throw DomainError("model dimension must be >= 1");
  for (Eigen::Index k = 0; k < p_max.size(); ++k) {
    if (!(p_max[k] > 0.0) || !(p_avg[k] > 0.0))
      throw DomainError("power levels must be positive");
  }
}

void BcdSettings::Validate() const {
  if (max_iters < 1 || dual_max_iters < 1 || phase_sweeps_max < 1)
    throw DomainError("iteration limits must be positive");
  if (!(rel_tol > 0.0 && rel_tol < 1.0)) throw DomainError("rel_tol must be in (0,1)");
  if (quant_bits && (*quant_bits < 1 || *quant_bits > 16))
    throw DomainError("quant_bits out of range");
}

Complex AlignPhase(double b_mag, Complex effective_scalar_channel) {
  const double a = std::abs(effective_scalar_channel);
  if (a == 0.0) throw DegenerateChannelError("effective scalar channel is zero");
  return b_mag * std::conj(effective_scalar_channel) / a;
}

double RoundCost(const PeriodCost& cost, int t, const RoundDesign& design,
                 const ChannelState& state) {
  const CVec a = AlignmentFactors(design, state);
  const double k = static_cast<double>(a.size());
  Complex sum = 0.0;
  double sq = 0.0;
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    sum += a[i];
    sq += std::norm(a[i] - 1.0);
  }
  const double noise =
      cost.noise_mult * cost.sigma_z_sq * design.m.squaredNorm();
  double energy = 0.0;
  if (cost.energy_price.size() > 0) energy = cost.energy_price.dot(design.b.cwiseAbs2());
  return cost.error_scale[t] / (k * k) *
             (cost.omega1[t] * std::norm(sum - k) + cost.omega2[t] * (sq + noise)) +
         energy;
}

double PowerObjective(const RMat& bar_h, const RMat& x, const PeriodCost& cost) {
  const double k = static_cast<double>(bar_h.cols());
  double total = 0.0;
  for (Eigen::Index t = 0; t < bar_h.rows(); ++t) {
    const RVec a = bar_h.row(t).cwiseProduct(x.row(t)).transpose();
    const double s = a.sum();
    const double sq = (a.array() - 1.0).square().sum();
    total += cost.error_scale[t] / (k * k) *
             (cost.omega1[t] * (s - k) * (s - k) + cost.omega2[t] * sq);
  }
  return total;
}

PowerResult PowerAllocPeriod(const RMat& bar_h, const PeriodCost& cost,
                             const BcdSettings& settings, const RVec* warm_duals) {
  const int rho = static_cast<int>(bar_h.rows());
  const int kc = static_cast<int>(bar_h.cols());
  ValidateCost(cost, rho, kc);
  if ((bar_h.array() < 0.0).any()) throw DomainError("bar_h must be nonnegative");

  const RVec u = EffectiveCaps(cost);
  PowerResult res;
  res.b_mags = RMat::Zero(rho, kc);
  res.duals = RVec::Zero(kc);
  if (warm_duals && warm_duals->size() == kc) res.duals = warm_duals->cwiseMax(0.0);

  // Devices whose caps already imply the budget never bind.
  std::vector<bool> can_bind(kc);
  for (int k = 0; k < kc; ++k) {
    can_bind[k] = rho * u[k] * u[k] > cost.budget[k];
    if (!can_bind[k]) res.duals[k] = 0.0;
  }

  RMat& x = res.b_mags;
  const double tol = 1e-12;
  auto excess = [&](int k) { return ColumnEnergy(x, k) - cost.budget[k]; };

  if (settings.dual_method == DualMethod::kCoordinate) {
    SolveAllRounds(bar_h, cost, res.duals, u, x);
    res.converged = false;
    // Largest relative complementarity violation of the current multipliers.
    auto violation = [&]() {
      double v = 0.0;
      for (int k = 0; k < kc; ++k) {
        if (!can_bind[k]) continue;
        const double e = excess(k) / cost.budget[k];
        v = std::max(v, res.duals[k] > 0.0 ? std::abs(e) : std::max(e, 0.0));
      }
      return v;
    };
    // Newton step on the active multipliers with a forward-difference
    // Jacobian; kept only if it halves the violation.
    auto newton = [&]() {
      std::vector<int> act;
      for (int k = 0; k < kc; ++k)
        if (can_bind[k] && (res.duals[k] > 0.0 || excess(k) > 0.0)) act.push_back(k);
      const int n = static_cast<int>(act.size());
      if (n == 0) return false;
      const double v0 = violation();
      const RMat x0 = x;
      const RVec l0 = res.duals;
      RVec e0(n);
      for (int i = 0; i < n; ++i) e0[i] = excess(act[i]);
      RMat jac(n, n);
      for (int j = 0; j < n; ++j) {
        const int k = act[j];
        double scale = l0[k];
        for (int t = 0; t < rho; ++t) {
          scale = std::max(scale, cost.error_scale[t] * cost.omega2[t] * bar_h(t, k) *
                                      bar_h(t, k) / (kc * kc));
        }
        const double h = 1e-7 * std::max(scale, 1e-300);
        res.duals = l0;
        res.duals[k] += h;
        SolveAllRounds(bar_h, cost, res.duals, u, x);
        for (int i = 0; i < n; ++i) jac(i, j) = (excess(act[i]) - e0[i]) / h;
      }
      const RVec step = jac.partialPivLu().solve(-e0);
      res.duals = l0;
      if (step.allFinite()) {
        for (int i = 0; i < n; ++i) res.duals[act[i]] = std::max(0.0, l0[act[i]] + step[i]);
        SolveAllRounds(bar_h, cost, res.duals, u, x);
        if (violation() <= 0.5 * v0) return true;
      }
      res.duals = l0;
      x = x0;
      return false;
    };
    for (int sweep = 0; sweep < settings.dual_max_iters; ++sweep) {
      res.dual_iters = sweep + 1;
      for (int it = 0; it < 8 && violation() > 0.1 * tol; ++it) {
        if (!newton()) break;
      }
      bool ok = true;
      for (int k = 0; k < kc; ++k) {
        if (!can_bind[k]) continue;
        const double bk = cost.budget[k];
        const double g0 = excess(k);
        const bool satisfied = (res.duals[k] == 0.0 && g0 <= 0.0) ||
                               std::abs(g0) <= tol * bk;
        if (satisfied) continue;
        ok = false;
        // Bracket the root of g(lam_k) = sum_t x_tk^2 - B_k, decreasing.
        auto g = [&](double lam) {
          res.duals[k] = lam;
          SolveAllRounds(bar_h, cost, res.duals, u, x);
          return excess(k);
        };
        double lo = 0.0;
        double glo = g(0.0);
        if (glo <= 0.0) continue;  // multiplier 0 is optimal
        double scale = 0.0;
        for (int t = 0; t < rho; ++t) {
          scale = std::max(scale, cost.error_scale[t] * cost.omega2[t] *
                                      bar_h(t, k) * bar_h(t, k) / (kc * kc));
        }
        double hi = std::max({res.duals[k], 1e-3 * scale, 1e-300});
        double ghi = g(hi);
        while (ghi > 0.0) {
          lo = hi;
          glo = ghi;
          hi *= 4.0;
          ghi = g(hi);
          if (!std::isfinite(hi)) break;
        }
        // Anderson-Bjorck false position with bisection safeguard.
        double lam = hi;
        double glam = ghi;
        int side = 0;
        for (int it = 0; it < 200; ++it) {
          double next = (lo * ghi - hi * glo) / (ghi - glo);
          if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
          lam = next;
          glam = g(lam);
          if (std::abs(glam) <= 0.1 * tol * bk || hi - lo <= 4.0 * kEps * hi) break;
          if (glam > 0.0) {
            if (side == -1) {
              const double m = 1.0 - glam / glo;
              ghi *= m > 0.0 ? m : 0.5;
            }
            lo = lam;
            glo = glam;
            side = -1;
          } else {
            if (side == 1) {
              const double m = 1.0 - glam / ghi;
              glo *= m > 0.0 ? m : 0.5;
            }
            hi = lam;
            ghi = glam;
            side = 1;
          }
        }
        res.duals[k] = lam;
        SolveAllRounds(bar_h, cost, res.duals, u, x);
      }
      if (ok) {
        res.converged = true;
        break;
      }
    }
  } else {
    double mean_budget = cost.budget.mean();
    const double step0 = settings.dual_step0 > 0.0 ? settings.dual_step0
                                                   : 1.0 / std::max(mean_budget, 1e-300);
    double best = std::numeric_limits<double>::infinity();
    RMat best_x = RMat::Zero(rho, kc);
    RVec best_l = res.duals;
    res.converged = false;
    for (int it = 1; it <= settings.dual_max_iters; ++it) {
      res.dual_iters = it;
      SolveAllRounds(bar_h, cost, res.duals, u, x);
      bool ok = true;
      RVec grad(kc);
      for (int k = 0; k < kc; ++k) {
        grad[k] = can_bind[k] ? excess(k) : 0.0;
        if (grad[k] > tol * cost.budget[k]) ok = false;
        if (res.duals[k] > 0.0 && std::abs(grad[k]) > 1e-6 * cost.budget[k]) ok = false;
      }
      RMat feas = x;
      EnforceBudgets(cost, feas);
      const double obj = PowerObjective(bar_h, feas, cost);
      if (obj < best) {
        best = obj;
        best_x = feas;
        best_l = res.duals;
      }
      if (ok) {
        res.converged = true;
        break;
      }
      const double step = step0 / std::sqrt(static_cast<double>(it));
      for (int k = 0; k < kc; ++k)
        res.duals[k] = std::max(0.0, res.duals[k] + step * grad[k]);
    }
    if (!res.converged) {
      x = best_x;
      res.duals = best_l;
    }
  }

  EnforceBudgets(cost, x);
  res.slackness_residual = 0.0;
  for (int k = 0; k < kc; ++k) {
    const double r = res.duals[k] * std::abs(cost.budget[k] - ColumnEnergy(x, k)) /
                     cost.budget[k];
    res.slackness_residual = std::max(res.slackness_residual, r);
  }
  return res;
}

PeriodCost OfflineCost(const std::vector<double>& gammas, const GapWeights& w,
                       const PowerBudget& budget, const NoiseModel& noise,
                       int period_index) {
  w.Validate();
  budget.Validate();
  const int rho = w.period_len;
  if (static_cast<int>(gammas.size()) != rho)
    throw DimensionError("need one gamma per round of the period");
  PeriodCost c;
  const int horizon = (period_index + 1) * rho;
  for (int i = 0; i < rho; ++i) {
    if (!(gammas[i] > 0.0)) throw DomainError("gamma must be positive");
    const OmegaPair o = Omega(period_index * rho + i + 1, horizon, w);
    c.omega1.push_back(o.omega1);
    c.omega2.push_back(o.omega2);
    c.error_scale.push_back(gammas[i]);
  }
  c.noise_mult = budget.d;
  c.sigma_z_sq = noise.sigma_z_sq;
  c.budget = budget.p_avg * (static_cast<double>(rho) * budget.d);
  c.cap_sq = (budget.p_max * static_cast<double>(budget.d)).cwiseMin(c.budget);
  return c;
}

PowerResult PowerAllocOffline(const RMat& bar_h, const std::vector<double>& gammas,
                              const GapWeights& w, const PowerBudget& budget,
                              int period_index, const BcdSettings& settings) {
  if (bar_h.rows() != w.period_len || bar_h.cols() != budget.num_devices())
    throw DimensionError("bar_h must be rho x K");
  const PeriodCost c = OfflineCost(gammas, w, budget, NoiseModel{}, period_index);
  return PowerAllocPeriod(bar_h, c, settings);
}

RVec PowerAllocOnline(const RVec& bar_h, const RVec& queues, double v_r,
                      double omega2, double decay, double iota_sum,
                      const PowerBudget& budget) {
  const Eigen::Index kc = bar_h.size();
  if (queues.size() != kc || budget.p_max.size() != kc)
    throw DimensionError("online allocation inputs must have K entries");
  RVec b = RVec::Zero(kc);
  const double weight = v_r * decay * omega2 * iota_sum;
  if (!(weight > 0.0)) return b;
  const double k4 = std::pow(static_cast<double>(kc), 4);
  for (Eigen::Index k = 0; k < kc; ++k) {
    const double h = bar_h[k];
    if (!(h > 0.0)) continue;
    if (queues[k] < 0.0) throw DomainError("queue values must be >= 0");
    const double inv = 1.0 / (h + queues[k] * k4 / (weight * h));
    b[k] = std::min(inv, std::sqrt(budget.p_max[k]));
  }
  return b;
}

namespace {

CVec SolveHermitian(const CMat& a, const CVec& rhs) {
  Eigen::LLT<CMat> llt(a);
  if (llt.info() == Eigen::Success) {
    CVec x = llt.solve(rhs);
    if (x.allFinite()) return x;
  }
  return a.completeOrthogonalDecomposition().solve(rhs);
}

}  // namespace

CVec ReceiverOffline(const CMat& h_tilde, const CVec& b, double omega1,
                     double omega2, double noise_mult, double sigma_z_sq) {
  if (h_tilde.cols() != b.size()) throw DimensionError("b must have K entries");
  const Eigen::Index m = h_tilde.rows();
  const double k = static_cast<double>(b.size());
  const CVec u = h_tilde * b;
  CMat hb = h_tilde * b.asDiagonal();
  CMat a = omega1 * (u * u.adjoint()) + omega2 * (hb * hb.adjoint());
  a.diagonal().array() += omega2 * noise_mult * sigma_z_sq;
  (void)m;
  return SolveHermitian(a, (k * omega1 + omega2) * u);
}

CVec ReceiverOnline(const CMat& h_tilde, const CVec& b, double sigma_z_sq) {
  if (h_tilde.cols() != b.size()) throw DimensionError("b must have K entries");
  const CVec u = h_tilde * b;
  CMat hb = h_tilde * b.asDiagonal();
  CMat a = hb * hb.adjoint();
  a.diagonal().array() += sigma_z_sq;
  return SolveHermitian(a, u);
}

namespace {

// Precomputed pieces of a_k = x0_k + sum_n e^{j theta_n} phi(k, n).
struct PhaseModel {
  CVec x0;   // K
  CMat phi;  // K x N
};

PhaseModel BuildPhaseModel(const ChannelState& state, const CVec& m, const CVec& b) {
  PhaseModel pm;
  const CVec mh_d = (m.adjoint() * state.h_d).transpose();
  pm.x0 = mh_d.cwiseProduct(b);
  const CVec mg = (m.adjoint() * state.g).transpose();  // N
  pm.phi = (state.h_r.transpose() * mg.asDiagonal());   // K x N
  pm.phi = b.asDiagonal() * pm.phi;
  return pm;
}

CVec Alignments(const PhaseModel& pm, const CVec& v) { return pm.x0 + pm.phi * v; }

double ObjectiveFromA(const CVec& a, double omega1, double omega2) {
  const double k = static_cast<double>(a.size());
  return omega1 * std::norm(a.sum() - k) + omega2 * (a.array() - 1.0).abs2().sum();
}

ElementCoefficient Coefficient(const PhaseModel& pm, const CVec& a, const Complex vn,
                               int n, double omega1, double omega2) {
  const double k = static_cast<double>(a.size());
  const auto phi_n = pm.phi.col(n);
  const Complex psi = phi_n.sum();
  const Complex s_rest = a.sum() - vn * psi;
  ElementCoefficient c;
  c.q1 = omega1 * psi * std::conj(s_rest - k);
  Complex acc = 0.0;
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    acc += phi_n[i] * std::conj(a[i] - vn * phi_n[i] - 1.0);
  }
  c.q2 = omega2 * acc;
  return c;
}

double Sinusoid(const Complex q, double theta) {
  return 2.0 * (std::polar(1.0, theta) * q).real();
}

}  // namespace

double PhaseObjective(const ChannelState& state, const CVec& m, const CVec& b,
                      double omega1, double omega2, const IrsPhases& phases) {
  const PhaseModel pm = BuildPhaseModel(state, m, b);
  return ObjectiveFromA(Alignments(pm, phases.Coefficients()), omega1, omega2);
}

double ElementOptimum(const ElementCoefficient& c) {
  const double a1 = std::abs(c.q1);
  const double a2 = std::abs(c.q2);
  if (a1 == 0.0 && a2 == 0.0) return 0.0;
  const double nu = a1 > 0.0 ? std::arg(c.q1) : 0.0;
  const double vs = a2 > 0.0 ? std::arg(c.q2) : 0.0;
  const double num = a2 * std::sin(vs - nu);
  const double den = a1 + a2 * std::cos(vs - nu);
  double rel;
  if (den > 0.0) {
    rel = std::atan(num / den);
  } else if (den < 0.0) {
    rel = kPi + std::atan(num / den);
  } else {
    rel = num > 0.0 ? kPi / 2.0 : 1.5 * kPi;
  }
  const double theta_hat = nu + kPi / 2.0 + rel;
  return WrapPhase(1.5 * kPi - theta_hat);
}

namespace {

IrsPhases SweepPhases(const ChannelState& state, const CVec& m, const CVec& b,
                      double omega1, double omega2, const IrsPhases& start,
                      const BcdSettings& settings, PhaseRefineStats* stats);

}  // namespace

IrsPhases RefinePhases(const ChannelState& state, const CVec& m, const CVec& b,
                       double omega1, double omega2, const IrsPhases& start,
                       const BcdSettings& settings, PhaseRefineStats* stats) {
  IrsPhases direct = SweepPhases(state, m, b, omega1, omega2, start, settings, stats);
  if (!settings.quant_bits || !settings.round_from_relaxation || state.num_elements() == 0)
    return direct;
  BcdSettings relaxed = settings;
  relaxed.quant_bits.reset();
  const IrsPhases cont =
      SweepPhases(state, m, b, omega1, omega2, IrsPhases(start.theta()), relaxed, nullptr);
  const IrsPhases rounded = SweepPhases(
      state, m, b, omega1, omega2, IrsPhases::Quantize(cont.theta(), *settings.quant_bits),
      settings, nullptr);
  if (PhaseObjective(state, m, b, omega1, omega2, rounded) <
      PhaseObjective(state, m, b, omega1, omega2, direct))
    return rounded;
  return direct;
}

namespace {

// 2-opt over grid levels: each pass scans every element pair and every level
// combination, applying a strict improvement as soon as it is found.
void PairPolish(const PhaseModel& pm, double omega1, double omega2, int bits,
                int max_passes, IrsPhases& phases, PhaseRefineStats* stats) {
  const int n_el = static_cast<int>(pm.phi.cols());
  const int levels = 1 << bits;
  std::vector<Complex> grid(static_cast<std::size_t>(levels));
  for (int l = 0; l < levels; ++l) grid[static_cast<std::size_t>(l)] = std::polar(1.0, GridPhase(l, bits));
  CVec v = phases.Coefficients();
  CVec a = Alignments(pm, v);
  double cur = ObjectiveFromA(a, omega1, omega2);
  CVec trial(a.size());
  for (int pass = 0; pass < max_passes; ++pass) {
    bool improved = false;
    for (int i = 0; i < n_el; ++i) {
      for (int j = i + 1; j < n_el; ++j) {
        const CVec base = a - v[i] * pm.phi.col(i) - v[j] * pm.phi.col(j);
        int best_i = -1, best_j = -1;
        double best = cur;
        for (int li = 0; li < levels; ++li) {
          const Complex gi = grid[static_cast<std::size_t>(li)];
          for (int lj = 0; lj < levels; ++lj) {
            const Complex gj = grid[static_cast<std::size_t>(lj)];
            trial = base + gi * pm.phi.col(i) + gj * pm.phi.col(j);
            const double val = ObjectiveFromA(trial, omega1, omega2);
            if (val < best * (1.0 - 1e-13)) {
              best = val;
              best_i = li;
              best_j = lj;
            }
          }
        }
        if (best_i < 0) continue;
        phases.SetLevel(i, best_i);
        phases.SetLevel(j, best_j);
        v[i] = grid[static_cast<std::size_t>(best_i)];
        v[j] = grid[static_cast<std::size_t>(best_j)];
        a = Alignments(pm, v);
        cur = ObjectiveFromA(a, omega1, omega2);
        improved = true;
      }
    }
    if (stats) stats->sweep_objective.push_back(cur);
    if (!improved) break;
  }
}

IrsPhases SweepPhases(const ChannelState& state, const CVec& m, const CVec& b,
                      double omega1, double omega2, const IrsPhases& start,
                      const BcdSettings& settings, PhaseRefineStats* stats) {
  const int n_el = state.num_elements();
  if (start.size() != n_el) throw DimensionError("start phases must have N entries");
  IrsPhases phases = start;
  const std::optional<int> bits = settings.quant_bits;
  if (bits && start.quant_bits() != bits) phases = IrsPhases::Quantize(start.theta(), *bits);
  if (!bits && start.quant_bits()) phases = IrsPhases(start.theta());
  if (stats) *stats = PhaseRefineStats{};
  if (n_el == 0) return phases;

  const PhaseModel pm = BuildPhaseModel(state, m, b);
  CVec v = phases.Coefficients();
  double prev = ObjectiveFromA(Alignments(pm, v), omega1, omega2);
  const int levels = bits ? (1 << *bits) : 0;
  const double step = bits ? PhaseStep(*bits) : 0.0;

  for (int sweep = 0; sweep < settings.phase_sweeps_max; ++sweep) {
    CVec a = Alignments(pm, v);
    for (int n = 0; n < n_el; ++n) {
      const ElementCoefficient c = Coefficient(pm, a, v[n], n, omega1, omega2);
      const Complex q = c.total();
      if (q == 0.0) continue;
      const double target = ElementOptimum(c);
      Complex vn;
      if (!bits) {
        phases.Set(n, target);
        vn = std::polar(1.0, phases.theta()[n]);
      } else {
        int lo = static_cast<int>(std::floor(target / step)) % levels;
        if (lo < 0) lo += levels;
        const int hi = (lo + 1) % levels;
        int best = phases.Level(n);
        if (settings.nearest_point_quantization) {
          const double dlo = target - GridPhase(lo, *bits);
          best = dlo <= step / 2.0 ? lo : hi;
        } else {
          double best_val = Sinusoid(q, phases.theta()[n]);
          for (int cand : {lo, hi}) {
            const double val = Sinusoid(q, GridPhase(cand, *bits));
            if (val < best_val) {
              best_val = val;
              best = cand;
            }
          }
        }
        phases.SetLevel(n, best);
        vn = std::polar(1.0, phases.theta()[n]);
      }
      a += (vn - v[n]) * pm.phi.col(n);
      v[n] = vn;
    }
    const double cur = ObjectiveFromA(Alignments(pm, v), omega1, omega2);
    if (stats) {
      stats->sweeps = sweep + 1;
      stats->sweep_objective.push_back(cur);
    }
    const double gain = prev - cur;
    prev = cur;
    if (gain < settings.rel_tol * std::max(std::abs(cur), 1e-300)) break;
  }
  if (bits && settings.pair_moves && !settings.nearest_point_quantization && n_el > 1)
    PairPolish(pm, omega1, omega2, *bits, settings.phase_sweeps_max, phases, stats);
  return phases;
}

}  // namespace

IrsPhases RandomPhases(int n, std::uint64_t seed, std::optional<int> bits) {
  Rng rng(seed);
  std::uniform_real_distribution<double> u(0.0, kTwoPi);
  RVec theta(n);
  for (int i = 0; i < n; ++i) theta[i] = u(rng);
  if (bits) return IrsPhases::Quantize(theta, *bits);
  return IrsPhases(theta);
}

namespace {

// Weighted projection of y onto {0 <= x <= u, ||x||^2 <= budget} in the
// metric sum_i w_i (x_i - y_i)^2: x_i = clip(w_i y_i / (w_i + nu), 0, u).
RVec WeightedBoxBallProjection(const RVec& y, const RVec& w, double u, double budget) {
  auto at = [&](double nu) {
    RVec x(y.size());
    for (Eigen::Index i = 0; i < y.size(); ++i)
      x[i] = std::clamp(w[i] * y[i] / (w[i] + nu), 0.0, u);
    return x;
  };
  RVec x = at(0.0);
  if (x.squaredNorm() <= budget) return x;
  double lo = 0.0, hi = w.maxCoeff();
  while (at(hi).squaredNorm() > budget) hi *= 2.0;
  for (int i = 0; i < 100 && hi - lo > 1e-15 * hi; ++i) {
    const double mid = 0.5 * (lo + hi);
    (at(mid).squaredNorm() > budget ? lo : hi) = mid;
  }
  return at(hi);
}

// Spectral projected gradient on the transmit factors (and, when
// `with_phases`, the continuous IRS phases) with the receivers eliminated:
// J = sum_t min_m f_t. By the envelope theorem the gradient of J is that of
// f_t at the optimal m. The power constraints depend on |b| only, so the
// projection keeps transmit phases. Each coordinate is scaled by a diagonal
// curvature estimate; a nonmonotone Armijo test accepts steps, and only the
// best point found is returned.
void ReducedBlock(const std::vector<ChannelState>& states, const PeriodCost& cost,
                  const RVec& u, bool with_phases, int iters, double tol,
                  std::vector<RoundDesign>& rounds, double& obj) {
  const int rho = static_cast<int>(rounds.size());
  const int kc = static_cast<int>(u.size());
  const double k2 = static_cast<double>(kc) * kc;
  const bool priced = cost.energy_price.size() > 0;

  struct Point {
    std::vector<CVec> b;
    std::vector<RVec> theta;
    std::vector<CVec> m;
    std::vector<CMat> h;
    double f = 0.0;
  };
  auto evaluate = [&](Point& p) {
    p.m.resize(rho);
    p.h.resize(rho);
    p.f = 0.0;
    for (int t = 0; t < rho; ++t) {
      p.h[t] = with_phases ? EffectiveChannels(states[t], IrsPhases(p.theta[t]))
                           : EffectiveChannels(states[t], rounds[t].phases);
      p.m[t] = ReceiverOffline(p.h[t], p.b[t], cost.omega1[t], cost.omega2[t],
                               cost.noise_mult, cost.sigma_z_sq);
      const CVec a = (p.m[t].adjoint() * p.h[t]).transpose().cwiseProduct(p.b[t]);
      const double kk = static_cast<double>(kc);
      p.f += cost.error_scale[t] / k2 *
             (cost.omega1[t] * std::norm(a.sum() - kk) +
              cost.omega2[t] * ((a.array() - 1.0).abs2().sum() +
                                cost.noise_mult * cost.sigma_z_sq * p.m[t].squaredNorm()));
      if (priced) p.f += cost.energy_price.dot(p.b[t].cwiseAbs2());
    }
    return p.f;
  };

  Point cur;
  cur.b.resize(rho);
  cur.theta.resize(rho);
  for (int t = 0; t < rho; ++t) {
    cur.b[t] = rounds[t].b;
    cur.theta[t] = rounds[t].phases.theta();
  }
  if (evaluate(cur) > obj) return;
  Point best = cur;

  // Gradients (Wirtinger for b, real for theta) and diagonal scalings.
  struct Grad {
    std::vector<CVec> gb;
    std::vector<RVec> gt;
    RMat db;
    std::vector<RVec> dt;
  };
  auto gradient = [&](const Point& p, Grad& g) {
    g.gb.resize(rho);
    g.gt.resize(rho);
    g.dt.resize(rho);
    g.db.resize(rho, kc);
    for (int t = 0; t < rho; ++t) {
      const CVec c = (p.m[t].adjoint() * p.h[t]).transpose();
      const CVec a = c.cwiseProduct(p.b[t]);
      const Complex dev = a.sum() - static_cast<double>(kc);
      const double sc = cost.error_scale[t] / k2;
      CVec r(kc);  // conj of d f / d a_k, up to the factor sc
      g.gb[t].resize(kc);
      for (int k = 0; k < kc; ++k) {
        const Complex e = cost.omega1[t] * dev + cost.omega2[t] * (a[k] - 1.0);
        g.gb[t][k] = sc * std::conj(c[k]) * e;
        g.db(t, k) = sc * (cost.omega1[t] + cost.omega2[t]) * std::norm(c[k]);
        if (priced) {
          g.gb[t][k] += cost.energy_price[k] * p.b[t][k];
          g.db(t, k) += cost.energy_price[k];
        }
        r[k] = std::conj(e);
      }
      if (with_phases) {
        const int n = states[t].num_elements();
        const CVec mg = (p.m[t].adjoint() * states[t].g).transpose();
        CMat phi = p.b[t].asDiagonal() * states[t].h_r.transpose();
        phi = phi * mg.asDiagonal();  // K x N
        const CVec pr = phi.transpose() * r;
        g.gt[t].resize(n);
        g.dt[t].resize(n);
        for (int i = 0; i < n; ++i) {
          const Complex v = std::polar(1.0, p.theta[t][i]);
          g.gt[t][i] = 2.0 * sc * (Complex(0.0, 1.0) * v * pr[i]).real();
          const Complex psi = phi.col(i).sum();
          g.dt[t][i] = 2.0 * sc *
                       (cost.omega1[t] * std::norm(psi) +
                        cost.omega2[t] * phi.col(i).squaredNorm() + std::abs(pr[i]));
        }
      }
    }
    double dmax = g.db.maxCoeff();
    for (int t = 0; t < rho && with_phases; ++t)
      if (g.dt[t].size() > 0) dmax = std::max(dmax, g.dt[t].maxCoeff());
    if (!(dmax > 0.0)) return false;
    g.db = g.db.cwiseMax(1e-12 * dmax);
    for (int t = 0; t < rho && with_phases; ++t) g.dt[t] = g.dt[t].cwiseMax(1e-12 * dmax);
    return true;
  };

  constexpr int kMemory = 8;
  std::vector<double> history{cur.f};
  Grad g, g_prev;
  if (!gradient(cur, g)) return;
  double alpha = 1.0;
  int stall = 0;
  for (int it = 0; it < iters; ++it) {
    std::vector<CVec> sb(rho, CVec(kc));
    std::vector<RVec> st(rho);
    double slope = 0.0;
    for (int k = 0; k < kc; ++k) {
      RVec mag(rho), w(rho);
      std::vector<Complex> dir(rho);
      for (int t = 0; t < rho; ++t) {
        const Complex y = cur.b[t][k] - alpha * g.gb[t][k] / g.db(t, k);
        mag[t] = std::abs(y);
        dir[t] = mag[t] > 0.0 ? y / mag[t] : Complex(0.0);
        w[t] = g.db(t, k);
      }
      const RVec p = WeightedBoxBallProjection(mag, w, u[k], cost.budget[k]);
      for (int t = 0; t < rho; ++t) {
        sb[t][k] = p[t] * dir[t] - cur.b[t][k];
        slope += 2.0 * (std::conj(g.gb[t][k]) * sb[t][k]).real();
      }
    }
    if (with_phases) {
      for (int t = 0; t < rho; ++t) {
        st[t] = -alpha * g.gt[t].cwiseQuotient(g.dt[t]);
        slope += g.gt[t].dot(st[t]);
      }
    }
    if (!(slope < 0.0)) break;
    const double f_ref = *std::max_element(history.begin(), history.end());
    double tau = 1.0;
    bool accepted = false;
    Point trial = cur;
    for (int ls = 0; ls < 40; ++ls) {
      for (int t = 0; t < rho; ++t) {
        trial.b[t] = cur.b[t] + tau * sb[t];
        if (with_phases) trial.theta[t] = cur.theta[t] + tau * st[t];
      }
      if (evaluate(trial) <= f_ref + 1e-4 * tau * slope) {
        accepted = true;
        break;
      }
      tau *= 0.5;
    }
    if (!accepted) break;
    Point prev = std::move(cur);
    cur = std::move(trial);
    history.push_back(cur.f);
    if (static_cast<int>(history.size()) > kMemory) history.erase(history.begin());
    if (cur.f < best.f) {
      stall = (best.f - cur.f <= tol * best.f) ? stall + 1 : 0;
      best = cur;
    } else {
      ++stall;
    }
    if (stall >= kMemory) break;
    g_prev = g;
    if (!gradient(cur, g)) break;
    double sds = 0.0, sy = 0.0;
    for (int t = 0; t < rho; ++t) {
      for (int k = 0; k < kc; ++k) {
        const Complex sv = cur.b[t][k] - prev.b[t][k];
        sds += g.db(t, k) * std::norm(sv);
        sy += 2.0 * (std::conj(sv) * (g.gb[t][k] - g_prev.gb[t][k])).real();
      }
      if (with_phases) {
        const RVec sv = cur.theta[t] - prev.theta[t];
        sds += sv.cwiseAbs2().dot(g.dt[t]);
        sy += sv.dot(g.gt[t] - g_prev.gt[t]);
      }
    }
    alpha = sy > 0.0 ? std::clamp(sds / sy, 1e-4, 1e4) : 1e4;
  }
  if (best.f < obj) {
    for (int t = 0; t < rho; ++t) {
      rounds[t].b = best.b[t];
      if (with_phases) rounds[t].phases = IrsPhases(best.theta[t]);
      rounds[t].m = best.m[t];
    }
    obj = best.f;
  }
}

}  // namespace

PeriodDesign SolvePeriod(const std::vector<ChannelState>& states,
                         const PeriodCost& cost, const BcdSettings& settings,
                         const std::vector<std::uint64_t>& phase_seeds,
                         const std::vector<IrsPhases>* initial_phases) {
  settings.Validate();
  const int rho = static_cast<int>(states.size());
  if (rho < 1) throw DomainError("period needs at least one round");
  const int kc = states[0].num_devices();
  ValidateCost(cost, rho, kc);
  if (!initial_phases && static_cast<int>(phase_seeds.size()) != rho)
    throw DimensionError("need one phase seed per round");

  PeriodDesign out;
  out.rounds.resize(rho);
  const RVec u = EffectiveCaps(cost);
  const RVec x_init = (cost.budget / rho).cwiseSqrt().cwiseMin(u);

  auto total_cost = [&]() {
    double s = 0.0;
    for (int t = 0; t < rho; ++t) s += RoundCost(cost, t, out.rounds[t], states[t]);
    return s;
  };

  for (int t = 0; t < rho; ++t) {
    states[t].Validate();
    RoundDesign& r = out.rounds[t];
    r.phases = initial_phases ? (*initial_phases)[t]
                              : RandomPhases(states[t].num_elements(), phase_seeds[t],
                                             settings.quant_bits);
    if (settings.quant_bits && r.phases.quant_bits() != settings.quant_bits)
      r.phases = IrsPhases::Quantize(r.phases.theta(), *settings.quant_bits);
    r.b = x_init.cast<Complex>();
    r.m = ReceiverOffline(EffectiveChannels(states[t], r.phases), r.b, cost.omega1[t],
                          cost.omega2[t], cost.noise_mult, cost.sigma_z_sq);
  }
  double obj = total_cost();
  out.objective_trace.push_back(obj);
  out.block_trace.push_back({0, "init", obj});
  out.dual_vars = RVec::Zero(kc);

  for (int it = 1; it <= settings.max_iters; ++it) {
    const double prev = obj;

    // Transmit magnitudes with phase compensation.
    RMat bar_h(rho, kc);
    std::vector<CVec> chan(rho);
    for (int t = 0; t < rho; ++t) {
      const CMat h = EffectiveChannels(states[t], out.rounds[t].phases);
      chan[t] = (out.rounds[t].m.adjoint() * h).transpose();
      bar_h.row(t) = chan[t].cwiseAbs().transpose();
    }
    const PowerResult pr = PowerAllocPeriod(bar_h, cost, settings, &out.dual_vars);
    std::vector<CVec> old_b(rho);
    for (int t = 0; t < rho; ++t) {
      old_b[t] = out.rounds[t].b;
      for (int k = 0; k < kc; ++k) {
        out.rounds[t].b[k] =
            bar_h(t, k) > 0.0 ? AlignPhase(pr.b_mags(t, k), chan[t][k]) : Complex(0.0);
      }
    }
    const double cand = total_cost();
    if (cand <= obj) {
      obj = cand;
      out.dual_vars = pr.duals;
      out.dual_converged = pr.converged;
    } else {
      for (int t = 0; t < rho; ++t) out.rounds[t].b = old_b[t];
    }
    out.block_trace.push_back({it, "power", obj});

    if (settings.reduced_iters > 0) {
      const bool joint = settings.optimize_phases && !settings.quant_bits;
      ReducedBlock(states, cost, u, joint, settings.reduced_iters, 0.1 * settings.rel_tol,
                   out.rounds, obj);
      out.block_trace.push_back({it, "reduced", obj});
    }

    for (int t = 0; t < rho; ++t) {
      RoundDesign& r = out.rounds[t];
      r.m = ReceiverOffline(EffectiveChannels(states[t], r.phases), r.b, cost.omega1[t],
                            cost.omega2[t], cost.noise_mult, cost.sigma_z_sq);
    }
    obj = total_cost();
    out.block_trace.push_back({it, "receiver", obj});

    if (settings.optimize_phases) {
      for (int t = 0; t < rho; ++t) {
        RoundDesign& r = out.rounds[t];
        if (states[t].num_elements() == 0) continue;
        r.phases = RefinePhases(states[t], r.m, r.b, cost.omega1[t], cost.omega2[t],
                                r.phases, settings);
      }
    }
    obj = total_cost();
    out.block_trace.push_back({it, "phase", obj});

    out.objective_trace.push_back(obj);
    out.iterations = it;
    if (std::abs(prev - obj) <= settings.rel_tol * std::abs(prev)) {
      out.converged = true;
      break;
    }
  }
  return out;
}

PeriodDesign SolveP1Period(const std::vector<ChannelState>& states,
                           const std::vector<double>& gammas, const GapWeights& w,
                           const PowerBudget& budget, const NoiseModel& noise,
                           int period_index, const BcdSettings& settings,
                           const std::vector<std::uint64_t>& phase_seeds) {
  if (static_cast<int>(states.size()) != w.period_len)
    throw DimensionError("need rho channel states");
  const PeriodCost c = OfflineCost(gammas, w, budget, noise, period_index);
  return SolvePeriod(states, c, settings, phase_seeds);
}

PeriodCost OmniscientCost(const std::vector<GradientStats>& stats,
                          const GapWeights& w, const PowerBudget& budget,
                          const NoiseModel& noise, int period_index) {
  w.Validate();
  budget.Validate();
  const int rho = w.period_len;
  if (static_cast<int>(stats.size()) != rho)
    throw DimensionError("need one statistics record per round");
  const double k = static_cast<double>(budget.num_devices());
  const double decay = PeriodDecay(period_index, w);
  const int horizon = (period_index + 1) * rho;
  PeriodCost c;
  for (int i = 0; i < rho; ++i) {
    const OmegaPair o = Omega(period_index * rho + i + 1, horizon, w);
    c.omega1.push_back(0.0);
    c.omega2.push_back(decay * o.omega2);
    c.error_scale.push_back(budget.d * stats[i].iota_sum() / (k * k));
  }
  c.noise_mult = 1.0;
  c.sigma_z_sq = noise.sigma_z_sq;
  c.budget = budget.p_avg * static_cast<double>(rho);
  c.cap_sq = budget.p_max.cwiseMin(c.budget);
  return c;
}

double P2Objective(const RoundDesign& design, const ChannelState& state,
                   const GradientStats& stats, const EnergyQueues& queues,
                   double v_r, double decay, double omega2,
                   const NoiseModel& noise) {
  const double mse = ErrorTermsOnline(design, state, stats, noise, queues.d);
  double energy = 0.0;
  for (Eigen::Index k = 0; k < design.b.size(); ++k)
    energy += queues.d * queues.e[k] * std::norm(design.b[k]);
  return v_r * decay * omega2 * mse + energy;
}

P2Result SolveP2Round(const ChannelState& state, const GradientStats& stats,
                      const EnergyQueues& queues, double v_r, int round_index,
                      const GapWeights& w, const PowerBudget& budget,
                      const NoiseModel& noise, const BcdSettings& settings,
                      std::uint64_t phase_seed) {
  settings.Validate();
  budget.Validate();
  state.Validate();
  const int kc = state.num_devices();
  if (queues.e.size() != kc) throw DimensionError("queues must have K entries");
  if ((queues.e.array() < 0.0).any()) throw DomainError("queues must be >= 0");
  if (v_r < 0.0) throw DomainError("V must be >= 0");
  const int r = round_index / w.period_len;
  const OmegaPair o = Omega(round_index + 1, (r + 1) * w.period_len, w);
  const double decay = PeriodDecay(r, w);

  P2Result res;
  RoundDesign& d = res.design;
  d.phases = RandomPhases(state.num_elements(), phase_seed, settings.quant_bits);
  auto objective = [&]() {
    return P2Objective(d, state, stats, queues, v_r, decay, o.omega2, noise);
  };
  if (!(stats.iota_sum() > 0.0) || v_r == 0.0) {
    d.b = CVec::Zero(kc);
    d.m = CVec::Zero(state.num_antennas());
    res.objective = objective();
    res.objective_trace.push_back(res.objective);
    return res;
  }
  // The same objective in the generic period form, for the reduced block.
  PeriodCost p2cost;
  p2cost.omega1 = {0.0};
  p2cost.omega2 = {v_r * decay * o.omega2};
  p2cost.error_scale = {queues.d * stats.iota_sum() / (static_cast<double>(kc) * kc)};
  p2cost.noise_mult = 1.0;
  p2cost.sigma_z_sq = noise.sigma_z_sq;
  p2cost.cap_sq = budget.p_max;
  p2cost.budget = budget.p_max;
  p2cost.energy_price = static_cast<double>(queues.d) * queues.e;

  d.b = budget.p_avg.cwiseMin(budget.p_max).cwiseSqrt().cast<Complex>();
  d.m = ReceiverOnline(EffectiveChannels(state, d.phases), d.b, noise.sigma_z_sq);
  double obj = objective();
  res.objective_trace.push_back(obj);

  for (int it = 1; it <= settings.max_iters; ++it) {
    const double prev = obj;
    const CMat h = EffectiveChannels(state, d.phases);
    const CVec chan = (d.m.adjoint() * h).transpose();
    const RVec mags = PowerAllocOnline(chan.cwiseAbs(), queues.e, v_r, o.omega2, decay,
                                       stats.iota_sum(), budget);
    const CVec old_b = d.b;
    for (int k = 0; k < kc; ++k)
      d.b[k] = mags[k] > 0.0 ? AlignPhase(mags[k], chan[k]) : Complex(0.0);
    const double cand = objective();
    if (cand <= obj) obj = cand; else d.b = old_b;

    if (settings.reduced_iters > 0) {
      std::vector<RoundDesign> one{d};
      const bool joint = settings.optimize_phases && !settings.quant_bits &&
                         state.num_elements() > 0;
      double reduced = RoundCost(p2cost, 0, d, state);
      ReducedBlock({state}, p2cost, budget.p_max.cwiseSqrt(), joint, settings.reduced_iters,
                   0.1 * settings.rel_tol, one, reduced);
      d = std::move(one[0]);
    }

    d.m = ReceiverOnline(EffectiveChannels(state, d.phases), d.b, noise.sigma_z_sq);
    if (settings.optimize_phases && state.num_elements() > 0)
      d.phases = RefinePhases(state, d.m, d.b, 0.0, 1.0, d.phases, settings);
    obj = objective();
    res.objective_trace.push_back(obj);
    if (std::abs(prev - obj) <= settings.rel_tol * std::abs(prev)) break;
  }
  res.objective = obj;
  return res;
}

RoundDesign RedesignFixedPower(const ChannelState& state, const RVec& mags,
                               double omega1, double omega2, double noise_mult,
                               double sigma_z_sq, const BcdSettings& settings,
                               std::uint64_t phase_seed) {
  settings.Validate();
  state.Validate();
  const int kc = state.num_devices();
  if (mags.size() != kc) throw DimensionError("need one magnitude per device");
  if ((mags.array() < 0.0).any()) throw DomainError("magnitudes must be >= 0");
  const double kk = static_cast<double>(kc);
  auto cost = [&](const RoundDesign& d) {
    const CVec a = AlignmentFactors(d, state);
    return omega1 * std::norm(a.sum() - kk) +
           omega2 * ((a.array() - 1.0).abs2().sum() +
                     noise_mult * sigma_z_sq * d.m.squaredNorm());
  };
  auto align = [&](RoundDesign& d) {
    const CVec chan = (d.m.adjoint() * EffectiveChannels(state, d.phases)).transpose();
    for (int k = 0; k < kc; ++k)
      d.b[k] = mags[k] > 0.0 && chan[k] != 0.0 ? AlignPhase(mags[k], chan[k])
                                                : Complex(mags[k]);
  };

  RoundDesign d;
  d.phases = RandomPhases(state.num_elements(), phase_seed, settings.quant_bits);
  if (!settings.optimize_phases) d.phases = IrsPhases::Zeros(state.num_elements(), settings.quant_bits);
  d.b = mags.cast<Complex>();
  d.m = ReceiverOffline(EffectiveChannels(state, d.phases), d.b, omega1, omega2, noise_mult,
                        sigma_z_sq);
  double obj = cost(d);
  for (int it = 0; it < settings.max_iters; ++it) {
    const double prev = obj;
    RoundDesign trial = d;
    if (settings.optimize_phases && state.num_elements() > 0)
      trial.phases = RefinePhases(state, trial.m, trial.b, omega1, omega2, trial.phases, settings);
    align(trial);
    trial.m = ReceiverOffline(EffectiveChannels(state, trial.phases), trial.b, omega1, omega2,
                              noise_mult, sigma_z_sq);
    const double f = cost(trial);
    if (f <= obj) {
      d = std::move(trial);
      obj = f;
    }
    if (prev - obj <= settings.rel_tol * std::abs(prev)) break;
  }
  return d;
}

}  // namespace irsfl
