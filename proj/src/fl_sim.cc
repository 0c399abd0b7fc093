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
#include "irsfl/fl_sim.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/Eigenvalues>

#include "irsfl/errors.h"
#include "irsfl/random.h"

namespace irsfl {
namespace {

double Sigmoid(double z) {
  return z >= 0.0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
}

// log(1 + e^{-z}) without overflow.
double LogisticLoss(double z) {
  return z > 0.0 ? std::log1p(std::exp(-z)) : -z + std::log1p(std::exp(z));
}

}  // namespace

LearningTask LearningTask::Synthetic(const TaskParams& params, int num_devices,
                                     std::uint64_t seed) {
  if (num_devices < 1) throw DomainError("need at least one device");
  if (params.model_dim < 1) throw DomainError("model dimension must be >= 1");
  if (params.samples_per_device < 1) throw DomainError("each device needs samples");
  if (!(params.regularizer >= 0.0)) throw DomainError("regularizer must be >= 0");
  if (!(params.feature_spread >= 1.0)) throw DomainError("feature spread must be >= 1");
  if (!(params.feature_scale > 0.0)) throw DomainError("feature scale must be positive");
  if (params.kind == LossKind::kLogistic && !(params.regularizer > 0.0))
    throw DomainError("logistic task needs a positive regularizer for the PL constant");

  LearningTask task;
  task.params_ = params;
  const int d = params.model_dim;
  Rng rng(DeriveSeed(seed, Stream::kTask));
  std::normal_distribution<double> n01(0.0, 1.0);
  std::uniform_real_distribution<double> u01(0.0, 1.0);

  RVec scale(d);
  for (int j = 0; j < d; ++j) {
    const double frac = d > 1 ? static_cast<double>(j) / (d - 1) : 0.0;
    scale[j] = std::sqrt(std::pow(params.feature_spread, -frac));
  }
  RVec w_true(d);
  for (int j = 0; j < d; ++j) w_true[j] = n01(rng) / std::sqrt(static_cast<double>(d)) * 3.0;

  for (int k = 0; k < num_devices; ++k) {
    RMat a(params.samples_per_device, d);
    RVec y(params.samples_per_device);
    for (int i = 0; i < a.rows(); ++i) {
      for (int j = 0; j < d; ++j) a(i, j) = params.feature_scale * scale[j] * n01(rng);
      const double z = a.row(i).dot(w_true);
      if (params.kind == LossKind::kLeastSquares) {
        y[i] = z + params.label_noise * n01(rng);
      } else {
        y[i] = u01(rng) < Sigmoid(z) ? 1.0 : -1.0;
      }
    }
    task.features_.push_back(std::move(a));
    task.labels_.push_back(std::move(y));
  }
  task.ComputeConstants();
  task.SolveOptimum();
  return task;
}

double LearningTask::LocalLoss(int k, const RVec& w) const {
  const RMat& a = features_.at(k);
  const RVec& y = labels_.at(k);
  const RVec z = a * w;
  double s = 0.0;
  if (params_.kind == LossKind::kLeastSquares) {
    s = 0.5 * (z - y).squaredNorm();
  } else {
    for (Eigen::Index i = 0; i < z.size(); ++i) s += LogisticLoss(y[i] * z[i]);
  }
  return s / static_cast<double>(a.rows()) + 0.5 * params_.regularizer * w.squaredNorm();
}

double LearningTask::Loss(const RVec& w) const {
  double s = 0.0;
  for (int k = 0; k < num_devices(); ++k) s += LocalLoss(k, w);
  return s / num_devices();
}

RVec LearningTask::BatchGradient(int k, const RVec& w, const std::vector<int>& rows) const {
  if (rows.empty()) throw DomainError("empty batch");
  const RMat& a = features_.at(k);
  const RVec& y = labels_.at(k);
  RVec g = RVec::Zero(dim());
  for (int i : rows) {
    const double z = a.row(i).dot(w);
    const double coef = params_.kind == LossKind::kLeastSquares
                            ? z - y[i]
                            : -y[i] * Sigmoid(-y[i] * z);
    g.noalias() += coef * a.row(i).transpose();
  }
  g /= static_cast<double>(rows.size());
  g += params_.regularizer * w;
  return g;
}

RVec LearningTask::LocalFullGradient(int k, const RVec& w) const {
  const RMat& a = features_.at(k);
  const RVec& y = labels_.at(k);
  const RVec z = a * w;
  RVec coef(z.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    coef[i] = params_.kind == LossKind::kLeastSquares ? z[i] - y[i]
                                                      : -y[i] * Sigmoid(-y[i] * z[i]);
  }
  return a.transpose() * coef / static_cast<double>(a.rows()) + params_.regularizer * w;
}

RVec LearningTask::FullGradient(const RVec& w) const {
  RVec g = RVec::Zero(dim());
  for (int k = 0; k < num_devices(); ++k) g += LocalFullGradient(k, w);
  return g / num_devices();
}

void LearningTask::ComputeConstants() {
  const int d = dim();
  RMat gram = RMat::Zero(d, d);
  double n = 0.0;
  for (const RMat& a : features_) {
    gram.noalias() += a.transpose() * a / static_cast<double>(a.rows());
    n += 1.0;
  }
  gram /= n;
  Eigen::SelfAdjointEigenSolver<RMat> eig(gram, Eigen::EigenvaluesOnly);
  const double lo = eig.eigenvalues().minCoeff();
  const double hi = eig.eigenvalues().maxCoeff();
  if (params_.kind == LossKind::kLeastSquares) {
    smoothness_ = hi + params_.regularizer;
    pl_ = lo + params_.regularizer;
  } else {
    smoothness_ = 0.25 * hi + params_.regularizer;
    pl_ = params_.regularizer;
  }
  if (!(pl_ > 0.0)) throw DomainError("task has no positive PL constant");
}

// Newton's method on the exact Hessian until ||grad F|| <= 1e-12.
void LearningTask::SolveOptimum() {
  const int d = dim();
  RVec w = RVec::Zero(d);
  for (int it = 0; it < 100; ++it) {
    const RVec g = FullGradient(w);
    if (g.norm() <= 1e-12) break;
    RMat h = RMat::Zero(d, d);
    for (int k = 0; k < num_devices(); ++k) {
      const RMat& a = features_[k];
      if (params_.kind == LossKind::kLeastSquares) {
        h.noalias() += a.transpose() * a / static_cast<double>(a.rows());
      } else {
        const RVec z = a * w;
        RVec c(z.size());
        for (Eigen::Index i = 0; i < z.size(); ++i) {
          const double s = Sigmoid(labels_[k][i] * z[i]);
          c[i] = s * (1.0 - s);
        }
        h.noalias() += a.transpose() * c.asDiagonal() * a / static_cast<double>(a.rows());
      }
    }
    h /= num_devices();
    h.diagonal().array() += params_.regularizer;
    const RVec step = h.ldlt().solve(g);
    // Backtrack on the gradient norm; the full step is taken near w*.
    double tau = 1.0;
    const double gn = g.norm();
    RVec cand = w - step;
    while (tau > 1e-8 && FullGradient(cand).norm() >= gn && Loss(cand) > Loss(w)) {
      tau *= 0.5;
      cand = w - tau * step;
    }
    w = cand;
  }
  if (FullGradient(w).norm() > 1e-12)
    throw DomainError("optimum solve did not reach gradient norm 1e-12");
  w_star_ = w;
  f_star_ = Loss(w);
}

std::vector<int> SampleBatch(int local_size, int batch_size, std::uint64_t seed) {
  if (batch_size < 1) throw DomainError("empty batch");
  if (batch_size > local_size) throw DomainError("batch larger than the local dataset");
  std::vector<int> idx(static_cast<std::size_t>(local_size));
  std::iota(idx.begin(), idx.end(), 0);
  Rng rng(seed);
  // Partial Fisher-Yates: the first batch_size entries are the sample.
  for (int i = 0; i < batch_size; ++i) {
    std::uniform_int_distribution<int> pick(i, local_size - 1);
    std::swap(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(pick(rng))]);
  }
  idx.resize(static_cast<std::size_t>(batch_size));
  return idx;
}

RVec LocalGradient(const LearningTask& task, int device, const RVec& w,
                   std::uint64_t batch_seed, int batch_size) {
  if (device < 0 || device >= task.num_devices())
    throw std::out_of_range("device index out of range");
  if (w.size() != task.dim()) throw DimensionError("model has the wrong dimension");
  return task.BatchGradient(device, w, SampleBatch(task.local_size(device), batch_size, batch_seed));
}

RVec GlobalStep(const RVec& w, const RVec& g_hat, double alpha) {
  if (!(alpha > 0.0)) throw DomainError("learning rate must be positive");
  if (w.size() != g_hat.size()) throw DimensionError("model and gradient differ in size");
  return w - alpha * g_hat;
}

std::string SchemeName(Scheme s) {
  switch (s) {
    case Scheme::kOptimal: return "optimal";
    case Scheme::kOffline: return "offline";
    case Scheme::kIsolated: return "isolated";
    case Scheme::kNoIrs: return "no_irs";
    case Scheme::kOnline: return "online";
    case Scheme::kDescendingOffline: return "descending_offline";
    case Scheme::kDescendingOnline: return "descending_online";
    case Scheme::kEqualOffline: return "equal_offline";
    case Scheme::kEqualOnline: return "equal_online";
  }
  return "unknown";
}

Scheme ParseScheme(const std::string& name) {
  for (Scheme s : {Scheme::kOptimal, Scheme::kOffline, Scheme::kIsolated, Scheme::kNoIrs,
                   Scheme::kOnline, Scheme::kDescendingOffline, Scheme::kDescendingOnline,
                   Scheme::kEqualOffline, Scheme::kEqualOnline}) {
    if (SchemeName(s) == name) return s;
  }
  throw ConfigError("unknown scheme '" + name + "'");
}

void Scenario::Validate() const {
  if (num_devices < 1) throw ConfigError("K must be >= 1");
  if (num_antennas < 1) throw ConfigError("M must be >= 1");
  if (num_elements < 0) throw ConfigError("N must be >= 0");
  if (total_rounds < 1 || num_periods < 1 || period_len < 1)
    throw ConfigError("T, R and rho must be >= 1");
  if (total_rounds != num_periods * period_len)
    throw ConfigError("T must equal R * rho (T=" + std::to_string(total_rounds) +
                      ", R=" + std::to_string(num_periods) +
                      ", rho=" + std::to_string(period_len) + ")");
  if (offline_period_len < 0 || total_rounds % offline_rho() != 0)
    throw ConfigError("offline period length must divide T");
  if (!(p_max_w > 0.0) || !(p_avg_w > 0.0)) throw ConfigError("powers must be positive");
  if (p_avg_w > p_max_w) throw ConfigError("average power exceeds maximum power");
  if (!(noise_w >= 0.0)) throw ConfigError("noise power must be >= 0");
  if (!(device_radius >= 0.0)) throw ConfigError("device radius must be >= 0");
  if (!(rician_k >= 0.0)) throw ConfigError("Rician factor must be >= 0");
  if (!(alpha > 0.0)) throw ConfigError("learning rate must be positive");
  if (batch_size < 1 || batch_size > task.samples_per_device)
    throw ConfigError("batch size must be in 1..samples_per_device");
  if (!(gamma_factor > 0.0)) throw ConfigError("gamma factor must be positive");
  if (!(queue_init_fraction >= 0.0)) throw ConfigError("queue init fraction must be >= 0");
  try {
    path_loss.Validate();
    schedule.Validate();
    bcd.Validate();
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(e.what());
  }
}

GapWeights ExperimentWeights(const Scenario& sc, const LearningTask& task, int period_len) {
  GapWeights w;
  w.mu = task.pl_constant();
  w.lipschitz = task.smoothness();
  w.alpha = sc.alpha;
  w.total_rounds = sc.total_rounds;
  w.period_len = period_len;
  w.num_periods = sc.total_rounds / period_len;
  w.Validate();
  return w;
}

PowerBudget ExperimentBudget(const Scenario& sc) {
  PowerBudget b;
  b.p_max = RVec::Constant(sc.num_devices, sc.p_max_w);
  b.p_avg = RVec::Constant(sc.num_devices, sc.p_avg_w);
  b.d = sc.task.model_dim;
  return b;
}

Geometry ExperimentGeometry(const Scenario& sc, std::uint64_t seed) {
  Geometry geo = SampleGeometry(sc.num_devices, sc.device_center, sc.device_radius, seed);
  geo.bs_position = sc.bs_position;
  geo.irs_position = sc.irs_position;
  return geo;
}

ChannelState ExperimentChannel(const Scenario& sc, const Geometry& geo, int round,
                               std::uint64_t seed) {
  const auto key = static_cast<std::uint64_t>(sc.static_channel ? 0 : round);
  return SampleChannels(geo, sc.path_loss, sc.rician_k, sc.num_antennas, sc.num_elements,
                        DeriveSeed(seed, Stream::kChannel, {key}));
}

namespace {

bool IsOffline(Scheme s) {
  return s == Scheme::kOffline || s == Scheme::kDescendingOffline || s == Scheme::kEqualOffline;
}
bool IsAblation(Scheme s) {
  return s == Scheme::kDescendingOffline || s == Scheme::kEqualOffline ||
         s == Scheme::kDescendingOnline || s == Scheme::kEqualOnline;
}
bool IsOnline(Scheme s) {
  return s == Scheme::kOnline || s == Scheme::kDescendingOnline || s == Scheme::kEqualOnline;
}

// Transmit magnitudes (T x K) replacing those of a finished base run.
RMat AblatedMagnitudes(const RMat& base, Scheme scheme, int window) {
  const Eigen::Index total = base.rows();
  RMat out(base.rows(), base.cols());
  const bool descending =
      scheme == Scheme::kDescendingOffline || scheme == Scheme::kDescendingOnline;
  for (Eigen::Index lo = 0; lo < total; lo += window) {
    const Eigen::Index len = std::min<Eigen::Index>(window, total - lo);
    for (Eigen::Index k = 0; k < base.cols(); ++k) {
      if (descending) {
        for (Eigen::Index i = 0; i < len; ++i) out(lo + i, k) = base(lo + len - 1 - i, k);
      } else {
        const double mean_sq = base.col(k).segment(lo, len).squaredNorm() / len;
        out.col(k).segment(lo, len).setConstant(std::sqrt(mean_sq));
      }
    }
  }
  return out;
}

}  // namespace

ExperimentTrace RunExperiment(const Scenario& sc, const LearningTask& task,
                              std::uint64_t seed) {
  sc.Validate();
  if (task.num_devices() != sc.num_devices) throw ConfigError("task and scenario disagree on K");
  if (task.dim() != sc.task.model_dim) throw ConfigError("task and scenario disagree on d");
  const int total = sc.total_rounds;
  const int kc = sc.num_devices;
  const int d = task.dim();
  const double kk = static_cast<double>(kc);
  const Scheme scheme = sc.scheme;
  const GapWeights w_on = ExperimentWeights(sc, task, sc.period_len);
  const GapWeights w_off = ExperimentWeights(sc, task, sc.offline_rho());
  const GapWeights w_iso = ExperimentWeights(sc, task, 1);
  const PowerBudget budget = ExperimentBudget(sc);
  const NoiseModel noise{sc.noise_w};

  // Ablations replay the base scheme's transmit magnitudes.
  RMat ablated;
  if (IsAblation(scheme)) {
    Scenario base_sc = sc;
    base_sc.scheme = IsOffline(scheme) ? Scheme::kOffline : Scheme::kOnline;
    base_sc.check_comparator = false;
    const ExperimentTrace base = RunExperiment(base_sc, task, seed);
    RMat mags(total, kc);
    for (int t = 0; t < total; ++t) mags.row(t) = base.designs[t].b.cwiseAbs().transpose();
    ablated = AblatedMagnitudes(mags, scheme, IsOffline(scheme) ? sc.offline_rho() : total);
  }

  const Geometry geo = ExperimentGeometry(sc, seed);
  std::vector<ChannelState> states;
  states.reserve(static_cast<std::size_t>(total));
  for (int t = 0; t < total; ++t) states.push_back(ExperimentChannel(sc, geo, t, seed));
  auto phase_seed = [&](int t) {
    return DeriveSeed(seed, Stream::kPhaseInit,
                      {static_cast<std::uint64_t>(sc.static_channel ? 0 : t)});
  };

  OnlineSettings on_settings;
  on_settings.schedule = sc.schedule;
  on_settings.queue_init_fraction = sc.queue_init_fraction;
  on_settings.reset_each_period = sc.queue_reset;
  on_settings.bcd = sc.bcd;
  on_settings.noise = noise;
  std::optional<OnlineController> controller;

  ExperimentTrace trace;
  trace.scheme = SchemeName(scheme);
  trace.seed = seed;
  std::vector<GradientStats> all_stats;

  RVec w = RVec::Zero(d);
  double bound = task.Loss(w) - task.optimal_loss();
  PeriodDesign period;
  PeriodCost period_cost;
  double gamma = 1.0;

  for (int t = 0; t < total; ++t) {
    RoundRecord rec;
    rec.round = t;
    rec.loss = task.Loss(w);
    rec.gap = rec.loss - task.optimal_loss();
    rec.bound = bound;

    RMat grads(kc, d);
    for (int k = 0; k < kc; ++k) {
      grads.row(k) = LocalGradient(task, k, w,
                                   DeriveSeed(seed, Stream::kBatch,
                                              {static_cast<std::uint64_t>(t),
                                               static_cast<std::uint64_t>(k)}),
                                   sc.batch_size)
                         .transpose();
    }
    // Sequential sum so the error-free scheme is reproducible bit for bit.
    RVec g_bar = RVec::Zero(d);
    for (int k = 0; k < kc; ++k) g_bar += grads.row(k).transpose();
    g_bar /= kk;
    rec.grad_sq = g_bar.squaredNorm();
    const GradientStats stats = ComputeStats(grads);
    all_stats.push_back(stats);

    RVec g_hat = g_bar;
    RoundDesign design;
    if (scheme != Scheme::kOptimal) {
      const ChannelState direct = WithoutIrs(states[t]);
      const ChannelState& used = scheme == Scheme::kNoIrs ? direct : states[t];
      const bool online_norm = IsOnline(scheme);
      if (IsOffline(scheme) || scheme == Scheme::kIsolated || scheme == Scheme::kNoIrs) {
        const int rho_s = IsOffline(scheme) ? sc.offline_rho() : 1;
        const int i = t % rho_s;
        if (i == 0) {
          double g_max = 0.0;
          for (int k = 0; k < kc; ++k) g_max = std::max(g_max, grads.row(k).squaredNorm());
          gamma = sc.gamma_factor * std::max(g_max, 1e-300);
          const int r = t / rho_s;
          // Isolated and no-IRS designs are the offline design with rho = 1.
          const GapWeights& wr = IsOffline(scheme) ? w_off : w_iso;
          std::vector<ChannelState> st(states.begin() + t, states.begin() + t + rho_s);
          if (scheme == Scheme::kNoIrs) st = {used};
          std::vector<std::uint64_t> seeds;
          for (int j = 0; j < rho_s; ++j) seeds.push_back(phase_seed(t + j));
          const std::vector<double> gammas(static_cast<std::size_t>(rho_s), gamma);
          period_cost = OfflineCost(gammas, wr, budget, noise, r);
          if (!IsAblation(scheme)) {
            period = SolveP1Period(st, gammas, wr, budget, noise, r, sc.bcd, seeds);
            trace.period_traces.push_back(period.objective_trace);
          }
        }
        if (!IsAblation(scheme)) {
          design = period.rounds[static_cast<std::size_t>(i)];
        } else {
          design = RedesignFixedPower(used, ablated.row(t).transpose(), period_cost.omega1[i],
                                      period_cost.omega2[i], period_cost.noise_mult,
                                      noise.sigma_z_sq, sc.bcd, phase_seed(t));
        }
        rec.design_objective = RoundCost(period_cost, i, design, used);
        rec.power = design.b.cwiseAbs2() / static_cast<double>(d);
      } else if (scheme == Scheme::kOnline) {
        if (!controller) {
          if (sc.v_auto)
            on_settings.schedule.scale *=
                CalibrateVScale(used, stats, w_on, budget, on_settings, seed);
          trace.v_scale = on_settings.schedule.scale;
          controller.emplace(w_on, budget, on_settings, seed);
        }
        const OnlineRound& o = controller->Step(used, stats);
        design = o.design;
        rec.design_objective = o.objective;
        rec.queue = o.queue_before;
        rec.v = o.v;
        rec.power = o.power;
      } else {
        design = RedesignFixedPower(used, ablated.row(t).transpose(), 0.0, 1.0, 1.0,
                                    noise.sigma_z_sq, sc.bcd, phase_seed(t));
        rec.power = design.b.cwiseAbs2();
        rec.design_objective = ErrorTermsOnline(design, used, stats, noise, d);
      }

      // Zero gradient variance: nothing is sent and the server takes the
      // exact constant average, so g_hat stays g_bar and the moments stay 0.
      if (online_norm && !(stats.iota_sum() > 0.0)) {
        design.b.setZero();
        rec.power = RVec::Zero(kc);
      } else {
        // Symbols, uplink, de-normalization, and the exact conditional moments.
        RMat symbols(kc, d);
        double c = 0.0;
        if (online_norm) {
          for (int k = 0; k < kc; ++k)
            symbols.row(k) = NormalizeOnline(grads.row(k).transpose(), stats, kc).transpose();
          c = std::sqrt(stats.iota_sum()) / (kk * kk);
        } else {
          for (int k = 0; k < kc; ++k)
            symbols.row(k) = NormalizeOffline(grads.row(k).transpose(), gamma).transpose();
          c = std::sqrt(gamma) / kk;
        }
        const UplinkResult up = SimulateUplink(
            symbols, design, used, noise,
            DeriveSeed(seed, Stream::kNoise, {static_cast<std::uint64_t>(t)}));
        g_hat = online_norm ? DenormalizeOnline(up.s_hat, stats, kc)
                            : DenormalizeOffline(up.s_hat, gamma, kc);
        const CVec a = AlignmentFactors(design, used);
        RVec bias = RVec::Zero(d);
        for (int k = 0; k < kc; ++k) bias += (a[k].real() - 1.0) * symbols.row(k).transpose();
        rec.bias_sq = c * c * bias.squaredNorm();
        rec.mse = c * c * ExpectedUplinkError(symbols, design, used, noise);
        rec.realized_err_sq = (g_hat - g_bar).squaredNorm();
      }
    } else {
      rec.power = RVec::Zero(kc);
    }
    trace.designs.push_back(design);

    RoundErrorMoments mom;
    mom.bias_sq = rec.bias_sq;
    mom.mse = rec.mse;
    mom.grad_sq = rec.grad_sq;
    bound = GapBoundVaryingRate(bound, {sc.alpha}, {mom}, w_on.mu, w_on.lipschitz);

    trace.gap_curve.push_back(rec.gap);
    trace.bound_curve.push_back(rec.bound);
    trace.rounds.push_back(std::move(rec));
    w = GlobalStep(w, g_hat, sc.alpha);
  }
  trace.final_loss = task.Loss(w);
  trace.final_gap = trace.final_loss - task.optimal_loss();
  trace.gap_curve.push_back(trace.final_gap);
  trace.bound_curve.push_back(bound);

  if (scheme == Scheme::kOnline && sc.check_comparator) {
    trace.omniscient_gaps =
        OmniscientGaps(states, all_stats, w_on, budget, noise, sc.bcd, seed);
    trace.comparator = ComparatorCheck(controller->history(), trace.omniscient_gaps, w_on,
                                   budget, on_settings.schedule);
  }
  return trace;
}

ExperimentTrace RunExperiment(const Scenario& sc, std::uint64_t seed) {
  const LearningTask task = LearningTask::Synthetic(sc.task, sc.num_devices, seed);
  return RunExperiment(sc, task, seed);
}

}  // namespace irsfl
