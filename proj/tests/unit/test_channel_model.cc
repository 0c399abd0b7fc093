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
#include "irsfl/channel_model.h"

#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "irsfl/errors.h"
#include "irsfl/json_io.h"
#include "irsfl/random.h"
#include "oracles/oracles.h"

namespace irsfl {
namespace {

Geometry OneDevice(const Position& p) {
  Geometry g;
  g.device_positions = {p};
  return g;
}

ChannelState RandomState(int m, int n, int k, std::uint64_t seed) {
  Rng rng(seed);
  ChannelState s;
  s.h_d.resize(m, k);
  s.h_r.resize(n, k);
  s.g.resize(m, n);
  for (Eigen::Index i = 0; i < s.h_d.size(); ++i) s.h_d.data()[i] = ComplexGaussian(rng, 1.0);
  for (Eigen::Index i = 0; i < s.h_r.size(); ++i) s.h_r.data()[i] = ComplexGaussian(rng, 1.0);
  for (Eigen::Index i = 0; i < s.g.size(); ++i) s.g.data()[i] = ComplexGaussian(rng, 1.0);
  return s;
}

TEST(PathLoss, ReferenceValues) {
  PathLossParams p;
  EXPECT_NEAR(PathLoss(1.0, 3.5, p), 1e-3, 1e-18);
  EXPECT_DOUBLE_EQ(PathLoss(p.d0, 2.7, p), DbToLinear(p.t0_db));
  EXPECT_NEAR(PathLoss(100.0, 2.2, p), std::pow(10.0, -7.4), 1e-20);
  EXPECT_NEAR(PathLoss(100.0, 2.2, p), 3.981e-8, 1e-11);
}

TEST(PathLoss, RejectsNonPositiveDistance) {
  PathLossParams p;
  EXPECT_THROW(PathLoss(0.0, 3.5, p), DomainError);
  EXPECT_THROW(PathLoss(-1.0, 3.5, p), DomainError);
}

TEST(PathLoss, ParamValidation) {
  PathLossParams p;
  p.exponent_bs_irs = 1.5;
  EXPECT_THROW(p.Validate(), DomainError);
  p = PathLossParams{};
  p.d0 = 0.0;
  EXPECT_THROW(p.Validate(), DomainError);
}

TEST(Geometry, SampleWithinDisk) {
  const Geometry g = SampleGeometry(50, {50, 40, 0}, 20.0, 7);
  ASSERT_EQ(g.num_devices(), 50);
  for (const auto& p : g.device_positions) {
    EXPECT_LE(std::hypot(p[0] - 50.0, p[1] - 40.0), 20.0 + 1e-12);
    EXPECT_EQ(p[2], 0.0);
  }
  EXPECT_EQ(g.bs_position, (Position{0, 0, 30}));
  EXPECT_EQ(g.irs_position, (Position{0, 50, 20}));
}

TEST(Geometry, ClustersShiftCenters) {
  const Geometry g = SampleGeometry(10, {50, 40, 0}, 20.0, 3, 5, 20.0);
  for (int k = 0; k < 10; ++k) {
    const double cx = 50.0 + 20.0 * (k % 5);
    EXPECT_LE(std::hypot(g.device_positions[k][0] - cx, g.device_positions[k][1] - 40.0),
              20.0 + 1e-12);
  }
}

TEST(Geometry, ValidateRejectsBadInput) {
  Geometry g;
  EXPECT_THROW(g.Validate(), DomainError);
  g.device_positions = {{0, 0, std::nan("")}};
  EXPECT_THROW(g.Validate(), DomainError);
}

TEST(SampleChannels, DeterministicForSeed) {
  const Geometry g = SampleGeometry(4, {50, 40, 0}, 20.0, 1);
  const ChannelState a = SampleChannels(g, {}, 2.0, 3, 5, 99);
  const ChannelState b = SampleChannels(g, {}, 2.0, 3, 5, 99);
  EXPECT_TRUE(a == b);
  const ChannelState c = SampleChannels(g, {}, 2.0, 3, 5, 100);
  EXPECT_FALSE(a == c);
  EXPECT_EQ(a.h_d.rows(), 3);
  EXPECT_EQ(a.h_d.cols(), 4);
  EXPECT_EQ(a.h_r.rows(), 5);
  EXPECT_EQ(a.g.cols(), 5);
  EXPECT_NO_THROW(a.Validate());
}

TEST(SampleChannels, DirectLinksIndependentOfIrsSize) {
  const Geometry g = SampleGeometry(4, {50, 40, 0}, 20.0, 1);
  const ChannelState a = SampleChannels(g, {}, 2.0, 3, 5, 5);
  const ChannelState b = SampleChannels(g, {}, 2.0, 3, 12, 5);
  EXPECT_EQ(a.h_d, b.h_d);
}

TEST(SampleChannels, PreconditionViolations) {
  const Geometry g = SampleGeometry(2, {50, 40, 0}, 20.0, 1);
  EXPECT_THROW(SampleChannels(g, {}, -1.0, 2, 2, 1), DomainError);
  EXPECT_THROW(SampleChannels(g, {}, 1.0, 0, 2, 1), DomainError);
}

// Monte-Carlo second moments of each link family.
TEST(SampleChannels, EmpiricalPowerMatchesPathLoss) {
  const Position dev{50, 40, 0};
  const Geometry g = OneDevice(dev);
  const PathLossParams p;
  const int samples = 10000;
  const int m = 2, n = 3;
  double direct = 0.0, hd_norm = 0.0, g_norm = 0.0, hr_norm = 0.0;
  for (int s = 0; s < samples; ++s) {
    const ChannelState st = SampleChannels(g, p, DbToLinear(3.0), m, n, 1000 + s);
    direct += std::norm(st.h_d(0, 0));
    hd_norm += st.h_d.col(0).squaredNorm();
    g_norm += st.g.col(0).squaredNorm();
    hr_norm += st.h_r.col(0).squaredNorm();
  }
  const double pl_d = PathLoss(Distance(g.bs_position, dev), p.exponent_bs_device, p);
  const double pl_g = PathLoss(Distance(g.bs_position, g.irs_position), p.exponent_bs_irs, p);
  const double pl_r = PathLoss(Distance(g.irs_position, dev), p.exponent_irs_device, p);
  EXPECT_NEAR(direct / samples / pl_d, 1.0, 0.05);
  EXPECT_NEAR(hd_norm / samples / (m * pl_d), 1.0, 0.05);
  EXPECT_NEAR(g_norm / samples / (m * pl_g), 1.0, 0.05);
  EXPECT_NEAR(hr_norm / samples / (n * pl_r), 1.0, 0.05);
}

TEST(SampleChannels, ZeroRicianFactorIsZeroMean) {
  const Geometry g = SampleGeometry(1, {50, 40, 0}, 20.0, 1);
  const PathLossParams p;
  const int samples = 10000;
  Complex mean = 0.0;
  double power = 0.0;
  for (int s = 0; s < samples; ++s) {
    const ChannelState st = SampleChannels(g, p, 0.0, 1, 1, 77 + s);
    mean += st.h_r(0, 0);
    power += std::norm(st.h_r(0, 0));
  }
  mean /= samples;
  power /= samples;
  // Standard error of the mean is sqrt(power / samples).
  EXPECT_LT(std::abs(mean), 5.0 * std::sqrt(power / samples));
  // A pure line-of-sight link has |mean|^2 == power.
  const ChannelState los = SampleChannels(g, p, 1e12, 1, 1, 5);
  const double pl = PathLoss(Distance(g.irs_position, g.device_positions[0]),
                             p.exponent_irs_device, p);
  EXPECT_NEAR(std::abs(los.h_r(0, 0)) / std::sqrt(pl), 1.0, 1e-5);
}

TEST(EffectiveChannel, NoElementsGivesDirectLink) {
  ChannelState s = RandomState(3, 0, 2, 4);
  const CVec h = EffectiveChannel(s, IrsPhases::Zeros(0), 1);
  EXPECT_EQ(h, s.h_d.col(1));
}

TEST(EffectiveChannel, ZeroPhaseIsSumOfPaths) {
  ChannelState s = RandomState(3, 4, 2, 5);
  const CVec h = EffectiveChannel(s, IrsPhases::Zeros(4), 0);
  EXPECT_LT((h - (s.h_d.col(0) + s.g * s.h_r.col(0))).norm(), 1e-12);
}

TEST(EffectiveChannel, MatchesDenseOracle) {
  Rng rng(6);
  std::uniform_real_distribution<double> u(0.0, kTwoPi);
  for (int trial = 0; trial < 20; ++trial) {
    ChannelState s = RandomState(3, 4, 3, 100 + trial);
    RVec theta(4);
    for (int i = 0; i < 4; ++i) theta[i] = u(rng);
    const IrsPhases p(theta);
    const CMat all = EffectiveChannels(s, p);
    for (int k = 0; k < 3; ++k) {
      const CVec ref = oracle::DenseEffectiveChannel(s, theta, k);
      EXPECT_LT((EffectiveChannel(s, p, k) - ref).norm(), 1e-12);
      EXPECT_LT((all.col(k) - ref).norm(), 1e-12);
    }
  }
}

TEST(EffectiveChannel, RankOneDecomposition) {
  ChannelState s = RandomState(2, 5, 2, 8);
  RVec theta = RVec::LinSpaced(5, 0.1, 4.0);
  const IrsPhases p(theta);
  for (int k = 0; k < 2; ++k) {
    CVec sum = s.h_d.col(k);
    for (int n = 0; n < 5; ++n)
      sum += std::polar(1.0, theta[n]) * s.g.col(n) * s.h_r(n, k);
    EXPECT_LT((EffectiveChannel(s, p, k) - sum).norm(), 1e-12);
  }
}

TEST(EffectiveChannel, Errors) {
  ChannelState s = RandomState(2, 3, 2, 9);
  EXPECT_THROW(EffectiveChannel(s, IrsPhases::Zeros(3), 2), std::out_of_range);
  EXPECT_THROW(EffectiveChannel(s, IrsPhases::Zeros(3), -1), std::out_of_range);
  EXPECT_THROW(EffectiveChannel(s, IrsPhases::Zeros(2), 0), DimensionError);
}

TEST(IrsPhases, WrapsContinuousValues) {
  RVec t(3);
  t << -0.5, 7.0, kTwoPi;
  const IrsPhases p(t);
  for (int i = 0; i < 3; ++i) {
    EXPECT_GE(p.theta()[i], 0.0);
    EXPECT_LT(p.theta()[i], kTwoPi);
  }
  EXPECT_NEAR(p.theta()[0], kTwoPi - 0.5, 1e-15);
  EXPECT_EQ(p.theta()[2], 0.0);
}

TEST(IrsPhases, QuantizedValuesLieExactlyOnGrid) {
  Rng rng(10);
  std::uniform_real_distribution<double> u(-10.0, 10.0);
  for (int bits = 1; bits <= 8; ++bits) {
    RVec t(50);
    for (int i = 0; i < 50; ++i) t[i] = u(rng);
    const IrsPhases p = IrsPhases::Quantize(t, bits);
    EXPECT_TRUE(p.OnGrid());
    for (int i = 0; i < 50; ++i) {
      EXPECT_EQ(p.theta()[i], GridPhase(p.Level(i), bits));
      // Nearest grid point on the circle.
      const double diff = std::abs(std::remainder(p.theta()[i] - t[i], kTwoPi));
      EXPECT_LE(diff, PhaseStep(bits) / 2.0 + 1e-12);
    }
  }
}

TEST(IrsPhases, QuantizedSetRejectsOffGrid) {
  IrsPhases p = IrsPhases::Zeros(2, 2);
  EXPECT_NO_THROW(p.Set(0, GridPhase(3, 2)));
  EXPECT_EQ(p.Level(0), 3);
  EXPECT_THROW(p.Set(1, 0.3), DomainError);
  EXPECT_THROW(p.SetLevel(1, 4), DomainError);
  EXPECT_THROW(IrsPhases::FromLevels({0, 1}, 0), DomainError);
}

TEST(PerturbCsi, ZeroErrorIsIdentityAndNonzeroChanges) {
  ChannelState s = RandomState(2, 3, 2, 11);
  EXPECT_TRUE(PerturbCsi(s, 0.0, 1) == s);
  const ChannelState p = PerturbCsi(s, 0.1, 1);
  EXPECT_FALSE(p == s);
  EXPECT_LT((p.h_d - s.h_d).norm() / s.h_d.norm(), 0.5);
  EXPECT_THROW(PerturbCsi(s, -0.1, 1), DomainError);
}

TEST(WithoutIrs, DropsReflectedPath) {
  ChannelState s = RandomState(2, 3, 2, 12);
  const ChannelState w = WithoutIrs(s);
  EXPECT_EQ(w.num_elements(), 0);
  EXPECT_EQ(w.h_d, s.h_d);
  EXPECT_NO_THROW(w.Validate());
}

TEST(JsonIo, ChannelRoundTripIsExact) {
  ChannelState s = RandomState(3, 4, 2, 13);
  const auto j = ChannelStateToJson(s);
  EXPECT_EQ(j["h_d"]["rows"], 3);
  EXPECT_EQ(j["h_d"]["cols"], 2);
  // Row-major layout: entry (0, 1) is the second pair.
  EXPECT_EQ(j["h_d"]["data"][1][0].get<double>(), s.h_d(0, 1).real());
  const ChannelState back = ChannelStateFromJson(nlohmann::json::parse(j.dump()));
  EXPECT_TRUE(back == s);
}

TEST(JsonIo, DesignRoundTrip) {
  RoundDesign d;
  d.b = CVec::Constant(2, Complex(0.5, -0.25));
  d.m = CVec::Constant(3, Complex(1.0, 2.0));
  d.phases = IrsPhases::FromLevels({1, 0, 3}, 2);
  const RoundDesign back = RoundDesignFromJson(RoundDesignToJson(d));
  EXPECT_EQ(back.b, d.b);
  EXPECT_EQ(back.m, d.m);
  EXPECT_EQ(back.phases.theta(), d.phases.theta());
  EXPECT_EQ(back.phases.quant_bits(), 2);
  nlohmann::json bad = ComplexMatrixToJson(d.m);
  bad["rows"] = 5;
  EXPECT_THROW(ComplexMatrixFromJson(bad), DimensionError);
}

}  // namespace
}  // namespace irsfl
