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
// The learning side: a strongly convex synthetic task with exact smoothness
// and PL constants, mini-batch local gradients, the perturbed global step,
// and end-to-end experiments that push gradients through the simulated
// over-the-air uplink under each design scheme.
#ifndef IRSFL_FL_SIM_H_
#define IRSFL_FL_SIM_H_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "irsfl/aircomp.h"
#include "irsfl/bcd_solver.h"
#include "irsfl/channel_model.h"
#include "irsfl/gap_model.h"
#include "irsfl/linalg.h"
#include "irsfl/lyapunov_online.h"

namespace irsfl {

enum class LossKind { kLeastSquares, kLogistic };

struct TaskParams {
  LossKind kind = LossKind::kLeastSquares;
  int model_dim = 50;
  int samples_per_device = 200;
  double regularizer = 0.05;  // lambda' in (lambda'/2) ||w||^2
  // Feature covariance eigenvalues spread geometrically over [1/spread, 1].
  double feature_spread = 4.0;
  double label_noise = 0.5;  // least squares only
  // Common multiplier on every feature; L and mu scale with its square.
  // 10 puts alpha L near 0.56 and mu alpha near 0.1 at alpha = 0.005.
  double feature_scale = 10.0;
};

// F(w) = (1/K) sum_k F_k(w), F_k the regularized empirical loss on the
// k-th equal-size i.i.d. split of one synthetic source.
class LearningTask {
 public:
  static LearningTask Synthetic(const TaskParams& params, int num_devices,
                                std::uint64_t seed);

  int dim() const { return params_.model_dim; }
  int num_devices() const { return static_cast<int>(features_.size()); }
  int local_size(int k) const { return static_cast<int>(features_.at(k).rows()); }
  LossKind kind() const { return params_.kind; }
  double regularizer() const { return params_.regularizer; }
  const RMat& features(int k) const { return features_.at(k); }
  const RVec& labels(int k) const { return labels_.at(k); }

  double Loss(const RVec& w) const;
  double LocalLoss(int k, const RVec& w) const;
  RVec FullGradient(const RVec& w) const;
  RVec LocalFullGradient(int k, const RVec& w) const;
  // Mean gradient over the rows in `rows`, plus lambda' w.
  RVec BatchGradient(int k, const RVec& w, const std::vector<int>& rows) const;

  // Smoothness L and PL constant mu of F: extreme Hessian eigenvalues for
  // least squares; lambda_max(A^T A)/(4 n) + lambda' and lambda' for
  // logistic.
  double smoothness() const { return smoothness_; }
  double pl_constant() const { return pl_; }
  const RVec& optimum() const { return w_star_; }
  double optimal_loss() const { return f_star_; }

 private:
  TaskParams params_;
  std::vector<RMat> features_;
  std::vector<RVec> labels_;
  double smoothness_ = 0.0;
  double pl_ = 0.0;
  RVec w_star_;
  double f_star_ = 0.0;

  void ComputeConstants();
  void SolveOptimum();
};

// Rows of the mini-batch: `batch_size` distinct indices drawn uniformly
// without replacement. Throws DomainError on an empty or oversized batch.
std::vector<int> SampleBatch(int local_size, int batch_size, std::uint64_t seed);

RVec LocalGradient(const LearningTask& task, int device, const RVec& w,
                   std::uint64_t batch_seed, int batch_size);

// w - alpha g_hat. Throws DomainError unless alpha > 0.
RVec GlobalStep(const RVec& w, const RVec& g_hat, double alpha);

enum class Scheme {
  kOptimal,            // error-free aggregation
  kOffline,            // periodized offline design
  kIsolated,           // per-round design, average power as the cap
  kNoIrs,              // isolated design on the direct links only
  kOnline,             // drift-plus-penalty controller
  kDescendingOffline,  // offline powers reversed within each period
  kDescendingOnline,   // online powers reversed over the whole run
  kEqualOffline,       // offline powers replaced by their period mean
  kEqualOnline,        // online powers replaced by their run mean
};

std::string SchemeName(Scheme s);
// Throws ConfigError on an unknown name.
Scheme ParseScheme(const std::string& name);

// A complete, validated scenario. Powers are in watts.
struct Scenario {
  int num_devices = 20;
  int num_antennas = 5;
  int num_elements = 40;
  int total_rounds = 100;
  int num_periods = 10;
  int period_len = 10;
  // Period length used by the offline schemes; 0 means period_len.
  int offline_period_len = 0;

  double p_max_w = 0.1;
  double p_avg_w = 0.0501187233627272;
  double noise_w = 1e-11;

  Position bs_position{0.0, 0.0, 30.0};
  Position irs_position{0.0, 50.0, 20.0};
  Position device_center{50.0, 40.0, 0.0};
  double device_radius = 20.0;
  PathLossParams path_loss;
  double rician_k = 1.9952623149688795;  // 3 dB
  bool static_channel = false;

  TaskParams task;
  double alpha = 0.005;
  int batch_size = 64;
  // Gradient-norm estimate for the offline normalization is the largest
  // squared local gradient norm at the period start times this factor.
  // The 10% margin covers gradient growth within a period.
  double gamma_factor = 1.1;

  Scheme scheme = Scheme::kOffline;
  // With v_auto, schedule.scale multiplies the CalibrateVScale value found
  // at round 0; 0.1 keeps the time-averaged power inside the budget.
  VSchedule schedule = [] {
    VSchedule v;
    v.scale = 0.1;
    return v;
  }();
  bool v_auto = true;
  double queue_init_fraction = 0.2;
  bool queue_reset = true;
  BcdSettings bcd;

  // Run the omniscient comparator and the performance/backlog check after
  // an online run.
  bool check_comparator = false;

  // Throws ConfigError on any violated invariant.
  void Validate() const;
  int offline_rho() const { return offline_period_len > 0 ? offline_period_len : period_len; }
};

// Per-round record. Moments are conditional on the realized local
// gradients: bias_sq = ||E eps_g||^2, mse = E||eps_g||^2.
struct RoundRecord {
  int round = 0;
  double loss = 0.0;  // F(w_t) before the update
  double gap = 0.0;   // F(w_t) - F*
  double grad_sq = 0.0;
  double bias_sq = 0.0;
  double mse = 0.0;
  double realized_err_sq = 0.0;  // ||eps_g||^2 of this draw
  RVec power;                    // |b_k|^2
  RVec queue;                    // online only, e_k(t) used by the design
  double v = 0.0;
  double design_objective = 0.0;
  double bound = 0.0;  // bound recursion value at round t
};

struct ExperimentTrace {
  std::string scheme;
  std::uint64_t seed = 0;
  std::vector<RoundRecord> rounds;
  // Gap and bound at t = 1 .. T+1.
  std::vector<double> gap_curve;
  std::vector<double> bound_curve;
  double final_loss = 0.0;
  double final_gap = 0.0;
  std::vector<RoundDesign> designs;
  // Objective trace of each offline period solve.
  std::vector<std::vector<double>> period_traces;
  std::vector<double> omniscient_gaps;
  std::optional<ComparatorReport> comparator;
  // Effective VSchedule::scale of an online run.
  double v_scale = 0.0;
};

// Experiment constants derived from a scenario and its task.
GapWeights ExperimentWeights(const Scenario& sc, const LearningTask& task, int period_len);
PowerBudget ExperimentBudget(const Scenario& sc);
Geometry ExperimentGeometry(const Scenario& sc, std::uint64_t seed);
ChannelState ExperimentChannel(const Scenario& sc, const Geometry& geo, int round,
                               std::uint64_t seed);

// Channels, batches, receiver noise and initial phases come from separate
// streams keyed by (seed, round), so schemes run on one seed are paired.
ExperimentTrace RunExperiment(const Scenario& sc, const LearningTask& task,
                              std::uint64_t seed);

// Convenience: builds the task from sc.task and the seed.
ExperimentTrace RunExperiment(const Scenario& sc, std::uint64_t seed);

}  // namespace irsfl

#endif  // IRSFL_FL_SIM_H_
