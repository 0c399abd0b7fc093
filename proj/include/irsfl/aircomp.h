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
// Over-the-air aggregation: symbol normalization at the devices, the noisy
// superposition at the multi-antenna receiver, de-normalization at the base
// station, and the closed-form error terms the designers minimize.
#ifndef IRSFL_AIRCOMP_H_
#define IRSFL_AIRCOMP_H_

#include <cstdint>

#include "irsfl/channel_model.h"
#include "irsfl/linalg.h"

namespace irsfl {

// Decision variables of one round: complex transmit factors b (K),
// receive beamformer m (M) and IRS phases.
struct RoundDesign {
  CVec b;
  CVec m;
  IrsPhases phases;
};

// Per-device mean and population variance of the d gradient entries.
struct GradientStats {
  RVec xi;
  RVec iota_sq;

  double iota_sum() const { return iota_sq.sum(); }
  double xi_sum() const { return xi.sum(); }
};

struct NoiseModel {
  double sigma_z_sq = 0.0;  // watts per antenna per symbol
};

// m^H h~_k b_k for every device.
CVec AlignmentFactors(const RoundDesign& design, const ChannelState& state);

RVec NormalizeOffline(const RVec& g, double gamma);
RVec DenormalizeOffline(const RVec& s_hat, double gamma, int k_count);

// `gradients` is K x d, one row per device.
GradientStats ComputeStats(const RMat& gradients);

// Throws DegenerateInputError when the variance sum is zero.
RVec NormalizeOnline(const RVec& g, const GradientStats& stats, int k_count);
RVec DenormalizeOnline(const RVec& s_hat, const GradientStats& stats,
                       int k_count);

struct UplinkResult {
  RVec s_hat;  // Re{ m^H (sum_k h~_k b_k s_k^T + Z) }
  RVec eps_s;  // s_hat - sum_k s_k
};

// `symbols` is K x d. Noise entries are CN(0, sigma_z^2), drawn from `seed`.
UplinkResult SimulateUplink(const RMat& symbols, const RoundDesign& design,
                            const ChannelState& state, const NoiseModel& noise,
                            std::uint64_t seed);

// Exact E||eps_s||^2 over the receiver noise for fixed symbols, for the
// real-part receiver: ||Re sum_k (a_k - 1) s_k||^2 + d ||m||^2 sigma^2 / 2.
double ExpectedUplinkError(const RMat& symbols, const RoundDesign& design,
                           const ChannelState& state, const NoiseModel& noise);

struct OfflineErrorTerms {
  double bias_sq = 0.0;
  double mse = 0.0;
};

// bias^2 = |(1/K) sum_k (a_k - 1)|^2 gamma
// mse    = ((1/K^2) sum_k |a_k - 1|^2 + (1/K^2) ||m||^2 d sigma^2) gamma
OfflineErrorTerms ErrorTermsOffline(const RoundDesign& design,
                                    const ChannelState& state, double gamma,
                                    const NoiseModel& noise, int d);

// (d sum iota^2 / K^4) (sum_k |a_k - 1|^2 + ||m||^2 sigma^2); the bias of the
// online normalization is identically zero.
double ErrorTermsOnline(const RoundDesign& design, const ChannelState& state,
                        const GradientStats& stats, const NoiseModel& noise,
                        int d);

}  // namespace irsfl

#endif  // IRSFL_AIRCOMP_H_
