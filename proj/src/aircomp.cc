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
#include "irsfl/aircomp.h"

#include <cmath>

#include "irsfl/errors.h"
#include "irsfl/random.h"

namespace irsfl {

CVec AlignmentFactors(const RoundDesign& design, const ChannelState& state) {
  const int k = state.num_devices();
  if (design.b.size() != k) throw DimensionError("b must have K entries");
  if (design.m.size() != state.num_antennas())
    throw DimensionError("m must have M entries");
  const CMat h = EffectiveChannels(state, design.phases);
  // (m^H h~_k) for all k, then times b_k.
  CVec a = (design.m.adjoint() * h).transpose();
  return a.cwiseProduct(design.b);
}

RVec NormalizeOffline(const RVec& g, double gamma) {
  if (!(gamma > 0.0)) throw DomainError("gamma must be positive");
  return g / std::sqrt(gamma);
}

RVec DenormalizeOffline(const RVec& s_hat, double gamma, int k_count) {
  if (!(gamma > 0.0)) throw DomainError("gamma must be positive");
  if (k_count < 1) throw DomainError("need at least one device");
  return s_hat * (std::sqrt(gamma) / k_count);
}

GradientStats ComputeStats(const RMat& gradients) {
  if (gradients.cols() < 1 || gradients.rows() < 1)
    throw DomainError("empty gradient");
  GradientStats s;
  const double d = static_cast<double>(gradients.cols());
  s.xi = gradients.rowwise().sum() / d;
  s.iota_sq.resize(gradients.rows());
  for (Eigen::Index k = 0; k < gradients.rows(); ++k) {
    s.iota_sq[k] = (gradients.row(k).array() - s.xi[k]).square().sum() / d;
  }
  return s;
}

RVec NormalizeOnline(const RVec& g, const GradientStats& stats, int k_count) {
  if (k_count < 1) throw DomainError("need at least one device");
  const double v = stats.iota_sum();
  if (!(v > 0.0)) throw DegenerateInputError("gradient variance sum is zero");
  const double mean = stats.xi_sum() / k_count;
  const double scale = std::sqrt(v) / k_count;
  return (g.array() - mean).matrix() / scale;
}

RVec DenormalizeOnline(const RVec& s_hat, const GradientStats& stats,
                       int k_count) {
  if (k_count < 1) throw DomainError("need at least one device");
  const double v = stats.iota_sum();
  if (!(v > 0.0)) throw DegenerateInputError("gradient variance sum is zero");
  const double scale = std::sqrt(v) / k_count;
  return ((s_hat * scale).array() + stats.xi_sum()).matrix() / k_count;
}

UplinkResult SimulateUplink(const RMat& symbols, const RoundDesign& design,
                            const ChannelState& state, const NoiseModel& noise,
                            std::uint64_t seed) {
  if (symbols.rows() != state.num_devices())
    throw DimensionError("symbols must have K rows");
  if (!(noise.sigma_z_sq >= 0.0)) throw DomainError("noise power must be >= 0");
  const CVec a = AlignmentFactors(design, state);
  const Eigen::Index d = symbols.cols();
  UplinkResult out;
  out.s_hat = RVec::Zero(d);
  for (Eigen::Index k = 0; k < symbols.rows(); ++k) {
    out.s_hat += a[k].real() * symbols.row(k).transpose();
  }
  if (noise.sigma_z_sq > 0.0) {
    Rng rng(seed);
    const Eigen::Index m = design.m.size();
    for (Eigen::Index j = 0; j < d; ++j) {
      Complex acc = 0.0;
      for (Eigen::Index i = 0; i < m; ++i) {
        acc += std::conj(design.m[i]) * ComplexGaussian(rng, noise.sigma_z_sq);
      }
      out.s_hat[j] += acc.real();
    }
  }
  out.eps_s = out.s_hat - symbols.colwise().sum().transpose();
  return out;
}

double ExpectedUplinkError(const RMat& symbols, const RoundDesign& design,
                           const ChannelState& state, const NoiseModel& noise) {
  if (symbols.rows() != state.num_devices())
    throw DimensionError("symbols must have K rows");
  const CVec a = AlignmentFactors(design, state);
  RVec bias = RVec::Zero(symbols.cols());
  for (Eigen::Index k = 0; k < symbols.rows(); ++k) {
    bias += (a[k].real() - 1.0) * symbols.row(k).transpose();
  }
  return bias.squaredNorm() +
         0.5 * static_cast<double>(symbols.cols()) * design.m.squaredNorm() *
             noise.sigma_z_sq;
}

OfflineErrorTerms ErrorTermsOffline(const RoundDesign& design,
                                    const ChannelState& state, double gamma,
                                    const NoiseModel& noise, int d) {
  if (!(gamma > 0.0)) throw DomainError("gamma must be positive");
  const CVec a = AlignmentFactors(design, state);
  const double k = static_cast<double>(state.num_devices());
  Complex sum = 0.0;
  double sq = 0.0;
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    sum += a[i] - 1.0;
    sq += std::norm(a[i] - 1.0);
  }
  OfflineErrorTerms t;
  t.bias_sq = std::norm(sum / k) * gamma;
  t.mse = (sq + design.m.squaredNorm() * d * noise.sigma_z_sq) * gamma / (k * k);
  return t;
}

double ErrorTermsOnline(const RoundDesign& design, const ChannelState& state,
                        const GradientStats& stats, const NoiseModel& noise,
                        int d) {
  const double v = stats.iota_sum();
  if (v == 0.0) return 0.0;
  const CVec a = AlignmentFactors(design, state);
  const double k = static_cast<double>(state.num_devices());
  double sq = 0.0;
  for (Eigen::Index i = 0; i < a.size(); ++i) sq += std::norm(a[i] - 1.0);
  return d * v / (k * k * k * k) *
         (sq + design.m.squaredNorm() * noise.sigma_z_sq);
}

}  // namespace irsfl
