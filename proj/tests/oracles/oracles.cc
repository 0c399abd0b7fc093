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
#include "oracles/oracles.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include <boost/multiprecision/cpp_bin_float.hpp>

#include "irsfl/random.h"

namespace irsfl::oracle {

double GridArgmin(const std::function<double(double)>& f, double lo, double hi,
                  long points) {
  double best_x = lo;
  double best = std::numeric_limits<double>::infinity();
  const double step = (hi - lo) / static_cast<double>(points);
  for (long i = 0; i < points; ++i) {
    const double x = lo + step * static_cast<double>(i);
    const double v = f(x);
    if (v < best) {
      best = v;
      best_x = x;
    }
  }
  return best_x;
}

double GoldenSection(const std::function<double(double)>& f, double lo, double hi,
                     double tol) {
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo, b = hi;
  double c = b - g * (b - a), d = a + g * (b - a);
  double fc = f(c), fd = f(d);
  while (b - a > tol * std::max(1.0, std::abs(a) + std::abs(b))) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - g * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + g * (b - a);
      fd = f(d);
    }
  }
  // Include the endpoints for functions minimized at the boundary.
  double x = 0.5 * (a + b);
  double best = f(x);
  for (double e : {lo, hi}) {
    const double v = f(e);
    if (v < best) {
      best = v;
      x = e;
    }
  }
  return x;
}

CVec DenseEffectiveChannel(const ChannelState& s, const RVec& theta, int k) {
  const int n = s.num_elements();
  CMat big_theta = CMat::Zero(n, n);
  for (int i = 0; i < n; ++i) big_theta(i, i) = std::polar(1.0, theta[i]);
  CVec out = s.h_d.col(k);
  if (n > 0) out += s.g * big_theta * s.h_r.col(k);
  return out;
}

double TwoPassVariance(const RVec& x) {
  double mean = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) mean += x[i];
  mean /= static_cast<double>(x.size());
  double acc = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) acc += (x[i] - mean) * (x[i] - mean);
  return acc / static_cast<double>(x.size());
}

CVec ConjugateGradientQuadratic(const CMat& a, const CVec& r, int iters) {
  CVec x = CVec::Zero(r.size());
  CVec res = r - a * x;
  CVec p = res;
  double rs = res.squaredNorm();
  const double stop = 1e-60 * std::max(r.squaredNorm(), 1e-300);
  for (int i = 0; i < iters && rs > stop; ++i) {
    const CVec ap = a * p;
    const Complex pap = p.dot(ap);
    if (std::abs(pap) == 0.0) break;
    const Complex step = rs / pap;
    x += step * p;
    res -= step * ap;
    const double rs_new = res.squaredNorm();
    p = res + (rs_new / rs) * p;
    rs = rs_new;
    if ((i + 1) % static_cast<int>(std::max<Eigen::Index>(r.size(), 1)) == 0) {
      res = r - a * x;
      p = res;
      rs = res.squaredNorm();
    }
  }
  return x;
}

double OfflineReceiverObjective(const CMat& h, const CVec& b, const CVec& m,
                                double w1, double w2, double nm, double sigma) {
  Complex sum = 0.0;
  double sq = 0.0;
  for (Eigen::Index k = 0; k < b.size(); ++k) {
    const Complex a = m.dot(h.col(k)) * b[k];  // dot conjugates m
    sum += a;
    sq += std::norm(a - 1.0);
  }
  const double kk = static_cast<double>(b.size());
  return w1 * std::norm(sum - kk) + w2 * (sq + nm * sigma * m.squaredNorm());
}

CVec GradientDescentReceiver(const CMat& h, const CVec& b, double w1, double w2,
                             double nm, double sigma, int iters) {
  const Eigen::Index kc = b.size();
  const double kk = static_cast<double>(kc);
  CVec u = CVec::Zero(h.rows());
  for (Eigen::Index k = 0; k < kc; ++k) u += h.col(k) * b[k];
  auto grad = [&](const CVec& m) {
    CVec g = w1 * u * std::conj(m.dot(u) - kk);
    for (Eigen::Index k = 0; k < kc; ++k) {
      const CVec x = h.col(k) * b[k];
      g += w2 * x * std::conj(m.dot(x) - 1.0);
    }
    g += w2 * nm * sigma * m;
    return g;
  };
  // Upper bound on the largest Hessian eigenvalue.
  double lip = w1 * u.squaredNorm() + w2 * nm * sigma;
  for (Eigen::Index k = 0; k < kc; ++k) lip += w2 * std::norm(b[k]) * h.col(k).squaredNorm();
  if (lip <= 0.0) return CVec::Zero(h.rows());
  const double step = 1.0 / lip;
  auto f = [&](const CVec& m) { return OfflineReceiverObjective(h, b, m, w1, w2, nm, sigma); };
  CVec x = CVec::Zero(h.rows());
  CVec y = x;
  double tk = 1.0;
  double fx = f(x);
  int still = 0;
  for (int i = 0; i < iters; ++i) {
    const CVec xn = y - step * grad(y);
    const double fn = f(xn);
    if (fn > fx) {
      y = x;
      tk = 1.0;
      continue;
    }
    // Stop once the iterates no longer move in floating point.
    still = (xn - x).norm() <= 1e-15 * (1.0 + x.norm()) ? still + 1 : 0;
    if (still >= 100) return xn;
    const double tn = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * tk * tk));
    y = xn + ((tk - 1.0) / tn) * (xn - x);
    x = xn;
    fx = fn;
    tk = tn;
  }
  return x;
}

double OnlineReceiverObjective(const CMat& h, const CVec& b, const CVec& m,
                               double sigma) {
  double sq = 0.0;
  for (Eigen::Index k = 0; k < b.size(); ++k) sq += std::norm(m.dot(h.col(k)) * b[k] - 1.0);
  return sq + sigma * m.squaredNorm();
}

RVec ProjectBoxBall(const RVec& y, const RVec& u, double budget) {
  auto clip = [&](double nu) {
    RVec x(y.size());
    for (Eigen::Index i = 0; i < y.size(); ++i)
      x[i] = std::clamp(y[i] / (1.0 + nu), 0.0, u[i]);
    return x;
  };
  RVec x = clip(0.0);
  if (x.squaredNorm() <= budget) return x;
  double lo = 0.0, hi = 1.0;
  while (clip(hi).squaredNorm() > budget) hi *= 2.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (clip(mid).squaredNorm() > budget) lo = mid; else hi = mid;
  }
  return clip(hi);
}

RMat ProjectedGradientPower(const RMat& bar_h, const PeriodCost& cost, int iters) {
  const Eigen::Index rho = bar_h.rows();
  const Eigen::Index kc = bar_h.cols();
  const double k2 = static_cast<double>(kc * kc);
  RVec u(kc);
  for (Eigen::Index k = 0; k < kc; ++k) u[k] = std::sqrt(cost.cap_sq[k]);

  auto objective = [&](const RMat& x) {
    double f = 0.0;
    for (Eigen::Index t = 0; t < rho; ++t) {
      double s = 0.0, q = 0.0;
      for (Eigen::Index k = 0; k < kc; ++k) {
        const double a = bar_h(t, k) * x(t, k);
        s += a;
        q += (a - 1.0) * (a - 1.0);
      }
      f += cost.error_scale[t] / k2 *
           (cost.omega1[t] * (s - kc) * (s - kc) + cost.omega2[t] * q);
    }
    return f;
  };
  auto gradient = [&](const RMat& x) {
    RMat g(rho, kc);
    for (Eigen::Index t = 0; t < rho; ++t) {
      double s = 0.0;
      for (Eigen::Index k = 0; k < kc; ++k) s += bar_h(t, k) * x(t, k);
      const double c1 = cost.error_scale[t] * cost.omega1[t] / k2;
      const double c2 = cost.error_scale[t] * cost.omega2[t] / k2;
      for (Eigen::Index k = 0; k < kc; ++k) {
        g(t, k) = 2.0 * c1 * bar_h(t, k) * (s - kc) +
                  2.0 * c2 * bar_h(t, k) * (bar_h(t, k) * x(t, k) - 1.0);
      }
    }
    return g;
  };
  auto project = [&](const RMat& y) {
    RMat x(rho, kc);
    for (Eigen::Index k = 0; k < kc; ++k)
      x.col(k) = ProjectBoxBall(y.col(k), RVec::Constant(rho, u[k]), cost.budget[k]);
    return x;
  };

  double lip = 0.0;
  for (Eigen::Index t = 0; t < rho; ++t) {
    const double c1 = cost.error_scale[t] * cost.omega1[t] / k2;
    const double c2 = cost.error_scale[t] * cost.omega2[t] / k2;
    lip = std::max(lip, 2.0 * (c1 * bar_h.row(t).squaredNorm() +
                               c2 * bar_h.row(t).cwiseAbs2().maxCoeff()));
  }
  if (lip <= 0.0) return project(RMat::Zero(rho, kc));
  const double step = 1.0 / lip;

  RMat x = project(RMat::Zero(rho, kc));
  RMat y = x;
  double tk = 1.0;
  double fx = objective(x);
  int still = 0;
  for (int i = 0; i < iters; ++i) {
    const RMat xn = project(y - step * gradient(y));
    const double fn = objective(xn);
    if (fn > fx) {  // adaptive restart
      y = x;
      tk = 1.0;
      continue;
    }
    // Stop once the iterates no longer move in floating point.
    still = (xn - x).norm() <= 1e-15 * (1.0 + x.norm()) ? still + 1 : 0;
    if (still >= 100) return xn;
    const double tn = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * tk * tk));
    y = xn + ((tk - 1.0) / tn) * (xn - x);
    x = xn;
    fx = fn;
    tk = tn;
  }
  return x;
}

double DensePhaseObjective(const ChannelState& s, const CVec& m, const CVec& b,
                           double w1, double w2, const RVec& theta) {
  Complex sum = 0.0;
  double sq = 0.0;
  for (int k = 0; k < s.num_devices(); ++k) {
    const Complex a = m.dot(DenseEffectiveChannel(s, theta, k)) * b[k];
    sum += a;
    sq += std::norm(a - 1.0);
  }
  const double kk = static_cast<double>(s.num_devices());
  return w1 * std::norm(sum - kk) + w2 * sq;
}

std::vector<int> ExhaustivePhases(const ChannelState& s, const CVec& m, const CVec& b,
                                  double w1, double w2, int bits, double* best_value) {
  const int n = s.num_elements();
  const int levels = 1 << bits;
  long total = 1;
  for (int i = 0; i < n; ++i) total *= levels;
  std::vector<int> best(n, 0), cur(n, 0);
  double best_v = std::numeric_limits<double>::infinity();
  for (long code = 0; code < total; ++code) {
    long c = code;
    RVec theta(n);
    for (int i = 0; i < n; ++i) {
      cur[i] = static_cast<int>(c % levels);
      c /= levels;
      theta[i] = GridPhase(cur[i], bits);
    }
    const double v = DensePhaseObjective(s, m, b, w1, w2, theta);
    if (v < best_v) {
      best_v = v;
      best = cur;
    }
  }
  if (best_value) *best_value = best_v;
  return best;
}

double ScaledP2Objective(const ChannelState& s, double weight, const RVec& queues,
                         double sigma, const CVec& b, const CVec& m, const RVec& theta) {
  double sq = 0.0, energy = 0.0;
  for (int k = 0; k < s.num_devices(); ++k) {
    const Complex a = m.dot(DenseEffectiveChannel(s, theta, k)) * b[k];
    sq += std::norm(a - 1.0);
    energy += queues[k] * std::norm(b[k]);
  }
  return weight * (sq + sigma * m.squaredNorm()) + energy;
}

double RandomRestartP2(const ChannelState& s, double weight, const RVec& queues,
                       const RVec& p_max, double sigma, int restarts,
                       std::uint64_t seed) {
  const int kc = s.num_devices();
  const int mc = s.num_antennas();
  const int n = s.num_elements();
  Rng rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  double best = std::numeric_limits<double>::infinity();
  for (int rs = 0; rs < restarts; ++rs) {
    RVec theta(n);
    for (int i = 0; i < n; ++i) theta[i] = kTwoPi * unif(rng);
    CVec b(kc);
    for (int k = 0; k < kc; ++k)
      b[k] = std::polar(std::sqrt(p_max[k]) * unif(rng), kTwoPi * unif(rng));
    CVec m = CVec::Zero(mc);
    double prev = std::numeric_limits<double>::infinity();
    for (int pass = 0; pass < 200; ++pass) {
      // m: quadratic solved by conjugate gradient.
      CMat h(mc, kc);
      for (int k = 0; k < kc; ++k) h.col(k) = DenseEffectiveChannel(s, theta, k);
      CMat a = CMat::Zero(mc, mc);
      CVec r = CVec::Zero(mc);
      for (int k = 0; k < kc; ++k) {
        a += std::norm(b[k]) * h.col(k) * h.col(k).adjoint();
        r += h.col(k) * b[k];
      }
      a.diagonal().array() += sigma;
      m = ConjugateGradientQuadratic(a, r);
      // b_k: 2-D search over the disk (radius by golden section, phase by grid
      // refined by golden section).
      for (int k = 0; k < kc; ++k) {
        const Complex c = m.dot(h.col(k));
        auto fb = [&](Complex bk) {
          return weight * std::norm(c * bk - 1.0) + queues[k] * std::norm(bk);
        };
        auto f_phase = [&](double ph) {
          auto fr = [&](double rad) { return fb(std::polar(rad, ph)); };
          return fr(GoldenSection(fr, 0.0, std::sqrt(p_max[k]), 1e-12));
        };
        double ph = GridArgmin(f_phase, 0.0, kTwoPi, 64);
        ph = GoldenSection(f_phase, ph - kTwoPi / 64.0, ph + kTwoPi / 64.0, 1e-12);
        auto fr = [&](double rad) { return fb(std::polar(rad, ph)); };
        b[k] = std::polar(GoldenSection(fr, 0.0, std::sqrt(p_max[k]), 1e-12), ph);
      }
      // theta_n: grid then golden refinement.
      for (int i = 0; i < n; ++i) {
        auto ft = [&](double th) {
          RVec t2 = theta;
          t2[i] = th;
          return ScaledP2Objective(s, weight, queues, sigma, b, m, t2);
        };
        double th = GridArgmin(ft, 0.0, kTwoPi, 360);
        th = GoldenSection(ft, th - kTwoPi / 360.0, th + kTwoPi / 360.0, 1e-12);
        if (ft(th) < ft(theta[i])) theta[i] = th;
      }
      const double cur = ScaledP2Objective(s, weight, queues, sigma, b, m, theta);
      if (prev - cur <= 1e-13 * std::abs(prev)) {
        prev = std::min(prev, cur);
        break;
      }
      prev = cur;
    }
    best = std::min(best, prev);
  }
  return best;
}

std::pair<double, double> HighPrecisionOmega(double mu, double alpha, double l, int n) {
  using boost::multiprecision::cpp_bin_float_50;
  const cpp_bin_float_50 a(alpha), m(mu), ll(l);
  const cpp_bin_float_50 decay = pow(cpp_bin_float_50(1) - m * a, n);
  const cpp_bin_float_50 w1 = decay * a * (cpp_bin_float_50(1) - ll * a) / 2;
  const cpp_bin_float_50 w2 = decay * ll * a * a / 2;
  return {static_cast<double>(w1), static_cast<double>(w2)};
}

}  // namespace irsfl::oracle
