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
// Wireless channel model of an IRS-assisted uplink: path loss, Rayleigh
// direct links, Rician reflected links, and the composite per-device channel
// seen by the base station for a given IRS configuration.
#ifndef IRSFL_CHANNEL_MODEL_H_
#define IRSFL_CHANNEL_MODEL_H_

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "irsfl/linalg.h"

namespace irsfl {

using Position = std::array<double, 3>;

double Distance(const Position& a, const Position& b);

struct Geometry {
  Position bs_position{0.0, 0.0, 30.0};
  Position irs_position{0.0, 50.0, 20.0};
  std::vector<Position> device_positions;

  int num_devices() const { return static_cast<int>(device_positions.size()); }
  // Throws DomainError on non-finite coordinates or an empty device list.
  void Validate() const;
};

// Devices uniformly distributed (area-uniform) over `clusters` disks of
// `radius` meters; the c-th disk is centered at center + (c * spacing, 0, 0).
// Devices are assigned to clusters round-robin.
Geometry SampleGeometry(int num_devices, const Position& center, double radius,
                        std::uint64_t seed, int clusters = 1,
                        double cluster_spacing = 20.0);

struct PathLossParams {
  double t0_db = -30.0;
  double d0 = 1.0;
  double exponent_bs_device = 3.5;
  double exponent_bs_irs = 2.2;
  double exponent_irs_device = 2.5;

  void Validate() const;
};

// Linear power gain 10^(t0_db/10) * (distance / d0)^(-exponent).
double PathLoss(double distance, double exponent, const PathLossParams& params);

// All channel coefficients of one communication round.
//   h_d: M x K, column k is the direct device-k -> BS channel.
//   h_r: N x K, column k is the device-k -> IRS channel.
//   g:   M x N, IRS -> BS channel.
struct ChannelState {
  CMat h_d;
  CMat h_r;
  CMat g;

  int num_antennas() const { return static_cast<int>(h_d.rows()); }
  int num_devices() const { return static_cast<int>(h_d.cols()); }
  int num_elements() const { return static_cast<int>(h_r.rows()); }

  // Checks shape consistency and finiteness; throws DimensionError/DomainError.
  void Validate() const;
  bool operator==(const ChannelState& other) const;
};

// IRS reflection phases. When quant_bits is set every phase lies exactly on
// the grid {0, D, ..., (2^bits - 1) D} with D = 2 pi / 2^bits.
class IrsPhases {
 public:
  IrsPhases() = default;
  // Continuous phases; each value is wrapped into [0, 2 pi).
  explicit IrsPhases(RVec theta);
  // Grid phases from level indices in [0, 2^bits).
  static IrsPhases FromLevels(const std::vector<int>& levels, int bits);
  // Snaps arbitrary phases to the nearest grid level (circular distance).
  static IrsPhases Quantize(const RVec& theta, int bits);
  static IrsPhases Zeros(int n, std::optional<int> bits = std::nullopt);

  const RVec& theta() const { return theta_; }
  std::optional<int> quant_bits() const { return quant_bits_; }
  int size() const { return static_cast<int>(theta_.size()); }

  // Reflection coefficients e^{j theta_n}.
  CVec Coefficients() const;
  // Level index of element n; requires quant_bits.
  int Level(int n) const;

  // Replaces one phase. In quantized mode `theta` must be a grid value.
  void Set(int n, double theta);
  void SetLevel(int n, int level);

  bool OnGrid() const;

 private:
  RVec theta_;
  std::optional<int> quant_bits_;
};

// Grid step 2 pi / 2^bits and the exact grid value for a level index.
double PhaseStep(int bits);
double GridPhase(int level, int bits);

enum class LinkFading { kRayleigh, kRician };

// Samples one round of channels. Direct links are CN(0, PL); IRS links are
// Rician with K-factor `rician_k` (linear) around a deterministic
// unit-modulus phase ramp, scaled to the link path loss.
ChannelState SampleChannels(const Geometry& geometry,
                            const PathLossParams& params, double rician_k,
                            int num_antennas, int num_elements,
                            std::uint64_t seed);

// Deterministic line-of-sight components used by SampleChannels.
Complex LosIrsToBs(int antenna, int element);
Complex LosDeviceToIrs(int element, int device, int num_devices);

// h_d,k + G diag(e^{j theta}) h_r,k.
CVec EffectiveChannel(const ChannelState& state, const IrsPhases& phases,
                      int device_index);
// All K effective channels as columns of an M x K matrix.
CMat EffectiveChannels(const ChannelState& state, const IrsPhases& phases);

// Copy of `state` with every entry perturbed by CN(0, (rel_std |h|)^2),
// modeling imperfect channel knowledge at the designer.
ChannelState PerturbCsi(const ChannelState& state, double rel_std,
                        std::uint64_t seed);

// Copy with the reflected path removed (G = 0), used for no-IRS baselines.
ChannelState WithoutIrs(const ChannelState& state);

}  // namespace irsfl

#endif  // IRSFL_CHANNEL_MODEL_H_
