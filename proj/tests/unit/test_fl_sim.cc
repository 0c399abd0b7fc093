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

#include <cmath>
#include <set>

#include <gtest/gtest.h>

#include "irsfl/errors.h"
#include "irsfl/random.h"

namespace irsfl {
namespace {

TaskParams SmallTask(LossKind kind = LossKind::kLeastSquares) {
  TaskParams p;
  p.kind = kind;
  p.model_dim = 12;
  p.samples_per_device = 60;
  return p;
}

Scenario SmallScenario(Scheme scheme) {
  Scenario sc;
  sc.num_devices = 4;
  sc.num_antennas = 2;
  sc.num_elements = 4;
  sc.total_rounds = 10;
  sc.num_periods = 2;
  sc.period_len = 5;
  sc.task = SmallTask();
  sc.batch_size = 16;
  sc.noise_w = 1e-10;
  sc.scheme = scheme;
  return sc;
}

RVec RandomVec(int n, std::uint64_t seed, double scale = 1.0) {
  Rng rng(seed);
  std::normal_distribution<double> n01(0.0, scale);
  RVec v(n);
  for (int i = 0; i < n; ++i) v[i] = n01(rng);
  return v;
}

TEST(LearningTask, LeastSquaresGradientMatchesClosedForm) {
  const LearningTask task = LearningTask::Synthetic(SmallTask(), 3, 1);
  const RVec w = RandomVec(12, 2);
  RVec expect = RVec::Zero(12);
  for (int k = 0; k < 3; ++k) {
    const RMat& a = task.features(k);
    expect += a.transpose() * (a * w - task.labels(k)) / static_cast<double>(a.rows());
  }
  expect = expect / 3.0 + task.regularizer() * w;
  EXPECT_LE((task.FullGradient(w) - expect).norm(), 1e-12 * expect.norm());
}

TEST(LearningTask, GradientsMatchFiniteDifferences) {
  for (LossKind kind : {LossKind::kLeastSquares, LossKind::kLogistic}) {
    const LearningTask task = LearningTask::Synthetic(SmallTask(kind), 3, 4);
    const RVec w = RandomVec(12, 5, 0.3);
    const RVec g = task.FullGradient(w);
    for (int j = 0; j < 12; ++j) {
      RVec e = RVec::Zero(12);
      e[j] = 1e-5;
      const double fd = (task.Loss(w + e) - task.Loss(w - e)) / 2e-5;
      EXPECT_NEAR(g[j], fd, 1e-6 * std::max(1.0, std::abs(fd)));
    }
  }
}

TEST(LearningTask, FullBatchEqualsLocalGradient) {
  const LearningTask task = LearningTask::Synthetic(SmallTask(LossKind::kLogistic), 2, 6);
  const RVec w = RandomVec(12, 7);
  std::vector<int> all(60);
  for (int i = 0; i < 60; ++i) all[i] = i;
  const RVec a = task.BatchGradient(1, w, all);
  const RVec b = task.LocalFullGradient(1, w);
  EXPECT_LE((a - b).norm(), 1e-12 * b.norm());
}

TEST(LearningTask, OptimumIsStationary) {
  for (LossKind kind : {LossKind::kLeastSquares, LossKind::kLogistic}) {
    const LearningTask task = LearningTask::Synthetic(SmallTask(kind), 4, 8);
    EXPECT_LE(task.FullGradient(task.optimum()).norm(), 1e-12);
    for (int i = 0; i < 10; ++i) {
      const RVec v = task.optimum() + RandomVec(12, 50 + i, 0.1);
      EXPECT_GE(task.Loss(v), task.optimal_loss());
    }
  }
}

// ||grad F||^2 >= 2 mu (F - F*) and the L-smooth upper model, at random points.
TEST(LearningTask, ConstantsSatisfyPlAndSmoothness) {
  for (LossKind kind : {LossKind::kLeastSquares, LossKind::kLogistic}) {
    const LearningTask task = LearningTask::Synthetic(SmallTask(kind), 3, 9);
    const double mu = task.pl_constant();
    const double l = task.smoothness();
    ASSERT_GT(mu, 0.0);
    ASSERT_GE(l, mu);
    for (int i = 0; i < 20; ++i) {
      const RVec w = RandomVec(12, 100 + i);
      const RVec v = RandomVec(12, 200 + i);
      const RVec g = task.FullGradient(w);
      const double gap = task.Loss(w) - task.optimal_loss();
      EXPECT_GE(g.squaredNorm(), 2.0 * mu * gap * (1.0 - 1e-10));
      const double upper = task.Loss(w) + g.dot(v - w) + 0.5 * l * (v - w).squaredNorm();
      EXPECT_LE(task.Loss(v), upper + 1e-10 * std::abs(upper));
    }
  }
}

TEST(LearningTask, RejectsBadParameters) {
  TaskParams p = SmallTask();
  p.model_dim = 0;
  EXPECT_THROW(LearningTask::Synthetic(p, 2, 1), DomainError);
  p = SmallTask(LossKind::kLogistic);
  p.regularizer = 0.0;
  EXPECT_THROW(LearningTask::Synthetic(p, 2, 1), DomainError);
  EXPECT_THROW(LearningTask::Synthetic(SmallTask(), 0, 1), DomainError);
}

TEST(SampleBatch, DistinctInRangeAndSeeded) {
  const std::vector<int> a = SampleBatch(50, 20, 3);
  const std::set<int> s(a.begin(), a.end());
  EXPECT_EQ(s.size(), 20u);
  EXPECT_GE(*s.begin(), 0);
  EXPECT_LT(*s.rbegin(), 50);
  EXPECT_EQ(a, SampleBatch(50, 20, 3));
  EXPECT_NE(a, SampleBatch(50, 20, 4));
  EXPECT_THROW(SampleBatch(50, 0, 1), DomainError);
  EXPECT_THROW(SampleBatch(50, 51, 1), DomainError);
}

// The mean of many mini-batch gradients approaches the local full gradient.
TEST(LocalGradient, UnbiasedOverBatches) {
  const LearningTask task = LearningTask::Synthetic(SmallTask(), 2, 10);
  const RVec w = RandomVec(12, 11);
  const RVec full = task.LocalFullGradient(0, w);
  const int draws = 20000;
  RVec sum = RVec::Zero(12);
  RVec sq = RVec::Zero(12);
  for (int i = 0; i < draws; ++i) {
    const RVec g = LocalGradient(task, 0, w, DeriveSeed(12, Stream::kBatch, {std::uint64_t(i)}), 8);
    sum += g;
    sq += g.cwiseAbs2();
  }
  const RVec mean = sum / draws;
  const RVec var = sq / draws - mean.cwiseAbs2();
  for (int j = 0; j < 12; ++j)
    EXPECT_LE(std::abs(mean[j] - full[j]), 5.0 * std::sqrt(var[j] / draws) + 1e-12);
}

TEST(GlobalStep, Examples) {
  const RVec w = RandomVec(5, 13);
  EXPECT_EQ(GlobalStep(w, RVec::Zero(5), 0.1), w);
  EXPECT_LE(GlobalStep(w, w, 1.0).norm(), 0.0);
  EXPECT_THROW(GlobalStep(w, w, 0.0), DomainError);
  EXPECT_THROW(GlobalStep(w, RVec::Zero(4), 0.1), DimensionError);
}

// Error-free full-gradient descent contracts the gap by at least 1 - mu alpha.
TEST(GlobalStep, ContractsGapOnStronglyConvexTask) {
  const LearningTask task = LearningTask::Synthetic(SmallTask(), 4, 14);
  const double alpha = 1.0 / task.smoothness();
  RVec w = RandomVec(12, 15, 2.0);
  for (int t = 0; t < 50; ++t) {
    const double gap = task.Loss(w) - task.optimal_loss();
    w = GlobalStep(w, task.FullGradient(w), alpha);
    const double next = task.Loss(w) - task.optimal_loss();
    EXPECT_LE(next, (1.0 - task.pl_constant() * alpha) * gap + 1e-13);
  }
}

TEST(Scheme, NamesRoundTrip) {
  for (Scheme s : {Scheme::kOptimal, Scheme::kOffline, Scheme::kIsolated, Scheme::kNoIrs,
                   Scheme::kOnline, Scheme::kDescendingOffline, Scheme::kDescendingOnline,
                   Scheme::kEqualOffline, Scheme::kEqualOnline}) {
    EXPECT_EQ(ParseScheme(SchemeName(s)), s);
  }
  EXPECT_THROW(ParseScheme("best"), ConfigError);
}

TEST(Scenario, RejectsBrokenHorizon) {
  Scenario sc;
  sc.period_len = 7;
  EXPECT_THROW(sc.Validate(), ConfigError);
  sc = Scenario{};
  sc.p_avg_w = 0.2;
  EXPECT_THROW(sc.Validate(), ConfigError);
  sc = Scenario{};
  sc.offline_period_len = 3;
  EXPECT_THROW(sc.Validate(), ConfigError);
  EXPECT_NO_THROW(Scenario{}.Validate());
}

// Error-free aggregation is centralized mini-batch descent, bit for bit.
TEST(RunExperiment, OptimalMatchesCentralizedDescent) {
  const Scenario sc = SmallScenario(Scheme::kOptimal);
  const LearningTask task = LearningTask::Synthetic(sc.task, sc.num_devices, 3);
  const ExperimentTrace tr = RunExperiment(sc, task, 3);
  RVec w = RVec::Zero(12);
  for (int t = 0; t < sc.total_rounds; ++t) {
    ASSERT_EQ(tr.rounds[t].loss, task.Loss(w)) << "round " << t;
    RVec g = RVec::Zero(12);
    for (int k = 0; k < sc.num_devices; ++k) {
      g += LocalGradient(task, k, w,
                         DeriveSeed(3, Stream::kBatch, {std::uint64_t(t), std::uint64_t(k)}),
                         sc.batch_size);
    }
    g /= static_cast<double>(sc.num_devices);
    w = GlobalStep(w, g, sc.alpha);
  }
  EXPECT_EQ(tr.final_loss, task.Loss(w));
}

TEST(RunExperiment, IsolatedEqualsOfflineWithUnitPeriod) {
  Scenario iso = SmallScenario(Scheme::kIsolated);
  Scenario off = SmallScenario(Scheme::kOffline);
  off.offline_period_len = 1;
  const ExperimentTrace a = RunExperiment(iso, 5);
  const ExperimentTrace b = RunExperiment(off, 5);
  ASSERT_EQ(a.designs.size(), b.designs.size());
  for (std::size_t t = 0; t < a.designs.size(); ++t) {
    EXPECT_EQ(a.designs[t].b, b.designs[t].b) << "round " << t;
    EXPECT_EQ(a.designs[t].m, b.designs[t].m) << "round " << t;
    EXPECT_EQ(a.designs[t].phases.theta(), b.designs[t].phases.theta()) << "round " << t;
  }
  EXPECT_EQ(a.final_loss, b.final_loss);
}

TEST(RunExperiment, NoIrsEqualsIsolatedWithoutElements) {
  Scenario iso = SmallScenario(Scheme::kIsolated);
  iso.num_elements = 0;
  Scenario none = iso;
  none.scheme = Scheme::kNoIrs;
  EXPECT_EQ(RunExperiment(iso, 6).final_loss, RunExperiment(none, 6).final_loss);
}

TEST(RunExperiment, DeterministicAndPaired) {
  for (Scheme s : {Scheme::kOffline, Scheme::kOnline, Scheme::kDescendingOffline}) {
    const Scenario sc = SmallScenario(s);
    const ExperimentTrace a = RunExperiment(sc, 7);
    const ExperimentTrace b = RunExperiment(sc, 7);
    ASSERT_EQ(a.rounds.size(), b.rounds.size());
    for (std::size_t t = 0; t < a.rounds.size(); ++t) {
      EXPECT_EQ(a.rounds[t].loss, b.rounds[t].loss);
      EXPECT_EQ(a.rounds[t].power, b.rounds[t].power);
    }
  }
  // Schemes on one seed see the same channels and the same first-round batches.
  const Scenario sc = SmallScenario(Scheme::kOffline);
  const Geometry geo = ExperimentGeometry(sc, 7);
  const ChannelState c1 = ExperimentChannel(sc, geo, 4, 7);
  const ChannelState c2 = ExperimentChannel(sc, ExperimentGeometry(sc, 7), 4, 7);
  EXPECT_EQ(c1.h_d, c2.h_d);
  EXPECT_EQ(c1.g, c2.g);
  EXPECT_EQ(RunExperiment(SmallScenario(Scheme::kOptimal), 7).rounds[0].grad_sq,
            RunExperiment(SmallScenario(Scheme::kIsolated), 7).rounds[0].grad_sq);
}

TEST(RunExperiment, StaticChannelRepeatsRoundZero) {
  Scenario sc = SmallScenario(Scheme::kIsolated);
  sc.static_channel = true;
  const Geometry geo = ExperimentGeometry(sc, 8);
  EXPECT_EQ(ExperimentChannel(sc, geo, 0, 8).h_r, ExperimentChannel(sc, geo, 9, 8).h_r);
  sc.static_channel = false;
  EXPECT_NE(ExperimentChannel(sc, geo, 0, 8).h_r, ExperimentChannel(sc, geo, 9, 8).h_r);
}

TEST(RunExperiment, GapStaysBelowBound) {
  for (Scheme s : {Scheme::kOffline, Scheme::kIsolated, Scheme::kOnline}) {
    const ExperimentTrace tr = RunExperiment(SmallScenario(s), 9);
    ASSERT_EQ(tr.gap_curve.size(), tr.bound_curve.size());
    for (std::size_t t = 0; t < tr.gap_curve.size(); ++t)
      EXPECT_LE(tr.gap_curve[t], tr.bound_curve[t]) << SchemeName(s) << " round " << t;
  }
}

TEST(RunExperiment, OfflineMeetsPeriodBudgets) {
  const Scenario sc = SmallScenario(Scheme::kOffline);
  const ExperimentTrace tr = RunExperiment(sc, 10);
  for (int r = 0; r < sc.num_periods; ++r) {
    RVec e = RVec::Zero(sc.num_devices);
    for (int i = 0; i < sc.period_len; ++i) {
      const RVec& p = tr.rounds[r * sc.period_len + i].power;
      EXPECT_LE(p.maxCoeff(), sc.p_max_w * (1.0 + 1e-9));
      e += p;
    }
    EXPECT_LE(e.maxCoeff(), sc.period_len * sc.p_avg_w * (1.0 + 1e-9));
  }
}

TEST(RunExperiment, AblationsKeepTheBaseEnergy) {
  for (auto [base, abl] : {std::pair{Scheme::kOffline, Scheme::kDescendingOffline},
                           std::pair{Scheme::kOffline, Scheme::kEqualOffline},
                           std::pair{Scheme::kOnline, Scheme::kDescendingOnline},
                           std::pair{Scheme::kOnline, Scheme::kEqualOnline}}) {
    const ExperimentTrace a = RunExperiment(SmallScenario(base), 11);
    const ExperimentTrace b = RunExperiment(SmallScenario(abl), 11);
    RVec ea = RVec::Zero(4), eb = RVec::Zero(4);
    for (std::size_t t = 0; t < a.rounds.size(); ++t) {
      ea += a.rounds[t].power;
      eb += b.rounds[t].power;
    }
    EXPECT_LE((ea - eb).cwiseAbs().maxCoeff(), 1e-12 * ea.maxCoeff()) << SchemeName(abl);
  }
}

TEST(RunExperiment, OnlineComparatorCheckRuns) {
  Scenario sc = SmallScenario(Scheme::kOnline);
  sc.check_comparator = true;
  const ExperimentTrace tr = RunExperiment(sc, 12);
  ASSERT_TRUE(tr.comparator.has_value());
  EXPECT_EQ(tr.omniscient_gaps.size(), 10u);
  EXPECT_GT(tr.v_scale, 0.0);
}

TEST(RunExperiment, ZeroVarianceOnlineRoundsSendNothing) {
  // With one parameter every gradient has zero entry variance.
  Scenario sc = SmallScenario(Scheme::kOnline);
  sc.task.model_dim = 1;
  sc.v_auto = false;
  Scenario opt = sc;
  opt.scheme = Scheme::kOptimal;
  const ExperimentTrace ref = RunExperiment(opt, 4);
  for (Scheme s : {Scheme::kOnline, Scheme::kDescendingOnline, Scheme::kEqualOnline}) {
    sc.scheme = s;
    const ExperimentTrace tr = RunExperiment(sc, 4);
    EXPECT_EQ(tr.final_loss, ref.final_loss) << SchemeName(s);
    for (const RoundRecord& r : tr.rounds) {
      EXPECT_EQ(r.power.maxCoeff(), 0.0);
      EXPECT_EQ(r.mse, 0.0);
      EXPECT_EQ(r.realized_err_sq, 0.0);
    }
  }
  sc.scheme = Scheme::kOnline;
  sc.v_auto = true;
  EXPECT_THROW(RunExperiment(sc, 4), DegenerateInputError);
}

}  // namespace
}  // namespace irsfl
