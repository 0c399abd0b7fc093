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
#include <string>

#include "irsfl/errors.h"
#include "irsfl/random.h"

namespace irsfl {
namespace {

bool AllFinite(const CMat& m) {
  for (Eigen::Index i = 0; i < m.size(); ++i) {
    if (!std::isfinite(m.data()[i].real()) || !std::isfinite(m.data()[i].imag()))
      return false;
  }
  return true;
}

bool Finite(const Position& p) {
  return std::isfinite(p[0]) && std::isfinite(p[1]) && std::isfinite(p[2]);
}

// Index of the grid level closest to theta on the circle.
int NearestLevel(double theta, int bits) {
  const int levels = 1 << bits;
  const long idx = std::lround(WrapPhase(theta) / PhaseStep(bits));
  return static_cast<int>(((idx % levels) + levels) % levels);
}

}  // namespace

double Distance(const Position& a, const Position& b) {
  const double dx = a[0] - b[0];
  const double dy = a[1] - b[1];
  const double dz = a[2] - b[2];
  return std::sqrt(dx * dx + dy * dy + dz * dz);
}

void Geometry::Validate() const {
  if (device_positions.empty()) throw DomainError("geometry has no devices");
  if (!Finite(bs_position) || !Finite(irs_position))
    throw DomainError("non-finite BS/IRS position");
  for (const auto& p : device_positions) {
    if (!Finite(p)) throw DomainError("non-finite device position");
  }
}

Geometry SampleGeometry(int num_devices, const Position& center, double radius,
                        std::uint64_t seed, int clusters,
                        double cluster_spacing) {
  if (num_devices < 1) throw DomainError("need at least one device");
  if (clusters < 1) throw DomainError("need at least one cluster");
  Geometry geo;
  Rng rng(DeriveSeed(seed, Stream::kGeometry));
  std::uniform_real_distribution<double> u(0.0, 1.0);
  geo.device_positions.reserve(num_devices);
  for (int k = 0; k < num_devices; ++k) {
    const int c = k % clusters;
    const double r = radius * std::sqrt(u(rng));
    const double a = kTwoPi * u(rng);
    geo.device_positions.push_back({center[0] + c * cluster_spacing + r * std::cos(a),
                                    center[1] + r * std::sin(a), center[2]});
  }
  return geo;
}

void PathLossParams::Validate() const {
  if (!(d0 > 0.0)) throw DomainError("reference distance d0 must be positive");
  if (exponent_bs_device < 2.0 || exponent_bs_irs < 2.0 ||
      exponent_irs_device < 2.0)
    throw DomainError("path-loss exponents must be >= 2");
}

double PathLoss(double distance, double exponent, const PathLossParams& params) {
  if (!(distance > 0.0)) throw DomainError("path loss needs a positive distance");
  return DbToLinear(params.t0_db) * std::pow(distance / params.d0, -exponent);
}

void ChannelState::Validate() const {
  const auto m = h_d.rows();
  const auto k = h_d.cols();
  const auto n = h_r.rows();
  if (h_r.cols() != k) throw DimensionError("h_r must have K columns");
  if (g.rows() != m || g.cols() != n) throw DimensionError("G must be M x N");
  if (!AllFinite(h_d) || !AllFinite(h_r) || !AllFinite(g))
    throw DomainError("non-finite channel coefficient");
}

bool ChannelState::operator==(const ChannelState& other) const {
  return h_d.rows() == other.h_d.rows() && h_d.cols() == other.h_d.cols() &&
         h_r.rows() == other.h_r.rows() && g.cols() == other.g.cols() &&
         h_d == other.h_d && h_r == other.h_r && g == other.g;
}

double PhaseStep(int bits) { return kTwoPi / static_cast<double>(1 << bits); }

double GridPhase(int level, int bits) {
  return static_cast<double>(level) * PhaseStep(bits);
}

IrsPhases::IrsPhases(RVec theta) : theta_(std::move(theta)) {
  for (Eigen::Index n = 0; n < theta_.size(); ++n) {
    if (!std::isfinite(theta_[n])) throw DomainError("non-finite phase");
    theta_[n] = WrapPhase(theta_[n]);
  }
}

IrsPhases IrsPhases::FromLevels(const std::vector<int>& levels, int bits) {
  if (bits < 1 || bits > 16) throw DomainError("quantization bits out of range");
  IrsPhases p;
  p.quant_bits_ = bits;
  p.theta_.resize(static_cast<Eigen::Index>(levels.size()));
  for (std::size_t n = 0; n < levels.size(); ++n) {
    if (levels[n] < 0 || levels[n] >= (1 << bits))
      throw DomainError("phase level out of range");
    p.theta_[static_cast<Eigen::Index>(n)] = GridPhase(levels[n], bits);
  }
  return p;
}

IrsPhases IrsPhases::Quantize(const RVec& theta, int bits) {
  std::vector<int> levels(static_cast<std::size_t>(theta.size()));
  for (Eigen::Index n = 0; n < theta.size(); ++n)
    levels[static_cast<std::size_t>(n)] = NearestLevel(theta[n], bits);
  return FromLevels(levels, bits);
}

IrsPhases IrsPhases::Zeros(int n, std::optional<int> bits) {
  if (bits) return FromLevels(std::vector<int>(static_cast<std::size_t>(n), 0), *bits);
  return IrsPhases(RVec::Zero(n));
}

CVec IrsPhases::Coefficients() const {
  CVec v(theta_.size());
  for (Eigen::Index n = 0; n < theta_.size(); ++n) v[n] = std::polar(1.0, theta_[n]);
  return v;
}

int IrsPhases::Level(int n) const {
  if (!quant_bits_) throw DomainError("continuous phases have no level index");
  return NearestLevel(theta_[n], *quant_bits_);
}

void IrsPhases::Set(int n, double theta) {
  if (n < 0 || n >= size()) throw std::out_of_range("phase index out of range");
  const double w = WrapPhase(theta);
  if (quant_bits_) {
    const int level = NearestLevel(w, *quant_bits_);
    if (GridPhase(level, *quant_bits_) != w)
      throw DomainError("phase is not on the quantization grid");
  }
  theta_[n] = w;
}

void IrsPhases::SetLevel(int n, int level) {
  if (!quant_bits_) throw DomainError("continuous phases have no level index");
  if (n < 0 || n >= size()) throw std::out_of_range("phase index out of range");
  if (level < 0 || level >= (1 << *quant_bits_))
    throw DomainError("phase level out of range");
  theta_[n] = GridPhase(level, *quant_bits_);
}

bool IrsPhases::OnGrid() const {
  if (!quant_bits_) return true;
  for (Eigen::Index n = 0; n < theta_.size(); ++n) {
    const int level = NearestLevel(theta_[n], *quant_bits_);
    if (GridPhase(level, *quant_bits_) != theta_[n]) return false;
  }
  return true;
}

Complex LosIrsToBs(int antenna, int element) {
  return std::polar(1.0, kPi * (0.5 * antenna + 0.3 * element));
}

Complex LosDeviceToIrs(int element, int device, int num_devices) {
  const double slope = static_cast<double>(device + 1) / (num_devices + 1);
  return std::polar(1.0, kPi * slope * element);
}

ChannelState SampleChannels(const Geometry& geometry,
                            const PathLossParams& params, double rician_k,
                            int num_antennas, int num_elements,
                            std::uint64_t seed) {
  geometry.Validate();
  params.Validate();
  if (num_antennas < 1) throw DomainError("need at least one BS antenna");
  if (num_elements < 0) throw DomainError("negative IRS element count");
  if (!(rician_k >= 0.0)) throw DomainError("Rician factor must be >= 0");

  const int m = num_antennas;
  const int n = num_elements;
  const int k = geometry.num_devices();
  const double los_w = std::sqrt(rician_k / (1.0 + rician_k));
  const double nlos_var = 1.0 / (1.0 + rician_k);

  // Each link family uses its own stream so that changing N leaves the
  // direct channels untouched.
  ChannelState s;
  s.h_d.resize(m, k);
  s.h_r.resize(n, k);
  s.g.resize(m, n);

  Rng rng_d(DeriveSeed(seed, {11}));
  for (int kk = 0; kk < k; ++kk) {
    const double pl = PathLoss(Distance(geometry.bs_position, geometry.device_positions[kk]),
                               params.exponent_bs_device, params);
    for (int mm = 0; mm < m; ++mm) s.h_d(mm, kk) = ComplexGaussian(rng_d, pl);
  }

  Rng rng_g(DeriveSeed(seed, {12}));
  const double pl_g = n > 0 ? PathLoss(Distance(geometry.bs_position, geometry.irs_position),
                                       params.exponent_bs_irs, params)
                            : 0.0;
  for (int nn = 0; nn < n; ++nn) {
    for (int mm = 0; mm < m; ++mm) {
      const Complex z = ComplexGaussian(rng_g, nlos_var);
      s.g(mm, nn) = std::sqrt(pl_g) * (los_w * LosIrsToBs(mm, nn) + z);
    }
  }

  Rng rng_r(DeriveSeed(seed, {13}));
  for (int kk = 0; kk < k; ++kk) {
    const double pl = n > 0 ? PathLoss(Distance(geometry.irs_position, geometry.device_positions[kk]),
                                       params.exponent_irs_device, params)
                            : 0.0;
    for (int nn = 0; nn < n; ++nn) {
      const Complex z = ComplexGaussian(rng_r, nlos_var);
      s.h_r(nn, kk) = std::sqrt(pl) * (los_w * LosDeviceToIrs(nn, kk, k) + z);
    }
  }
  return s;
}

CVec EffectiveChannel(const ChannelState& state, const IrsPhases& phases,
                      int device_index) {
  if (device_index < 0 || device_index >= state.num_devices())
    throw std::out_of_range("device index out of range");
  if (phases.size() != state.num_elements())
    throw DimensionError("phase vector length must equal N");
  CVec h = state.h_d.col(device_index);
  if (state.num_elements() == 0) return h;
  const CVec reflected =
      phases.Coefficients().cwiseProduct(state.h_r.col(device_index));
  h.noalias() += state.g * reflected;
  return h;
}

CMat EffectiveChannels(const ChannelState& state, const IrsPhases& phases) {
  if (phases.size() != state.num_elements())
    throw DimensionError("phase vector length must equal N");
  CMat h = state.h_d;
  if (state.num_elements() == 0) return h;
  const CVec v = phases.Coefficients();
  h.noalias() += state.g * (v.asDiagonal() * state.h_r);
  return h;
}

ChannelState PerturbCsi(const ChannelState& state, double rel_std,
                        std::uint64_t seed) {
  if (!(rel_std >= 0.0)) throw DomainError("CSI error std must be >= 0");
  ChannelState out = state;
  if (rel_std == 0.0) return out;
  Rng rng(seed);
  auto perturb = [&](CMat& m) {
    for (Eigen::Index i = 0; i < m.size(); ++i) {
      const double var = std::norm(m.data()[i]) * rel_std * rel_std;
      m.data()[i] += ComplexGaussian(rng, var);
    }
  };
  perturb(out.h_d);
  perturb(out.h_r);
  perturb(out.g);
  return out;
}

ChannelState WithoutIrs(const ChannelState& state) {
  ChannelState out;
  out.h_d = state.h_d;
  out.h_r.resize(0, state.num_devices());
  out.g.resize(state.num_antennas(), 0);
  return out;
}

}  // namespace irsfl
