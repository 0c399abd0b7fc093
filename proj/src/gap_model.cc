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
#include "irsfl/gap_model.h"

#include <cmath>
#include <string>

#include "irsfl/errors.h"

namespace irsfl {

void GapWeights::Validate() const {
  if (!(mu > 0.0) || !(lipschitz > 0.0))
    throw ConfigError("mu and L must be positive");
  if (!(alpha > 0.0)) throw ConfigError("learning rate must be positive");
  if (alpha > 1.0 / mu || alpha > 1.0 / lipschitz)
    throw ConfigError("learning rate must satisfy alpha <= min(1/mu, 1/L)");
  if (period_len < 1 || num_periods < 1)
    throw ConfigError("period length and count must be positive");
  if (total_rounds != num_periods * period_len)
    throw ConfigError("T must equal R * rho (T=" + std::to_string(total_rounds) +
                      ", R=" + std::to_string(num_periods) +
                      ", rho=" + std::to_string(period_len) + ")");
}

OmegaPair Omega(int t, int horizon, const GapWeights& w) {
  w.Validate();
  if (t > horizon) throw ConfigError("round index beyond horizon");
  const double decay = std::pow(w.contraction(), horizon - t);
  OmegaPair o;
  o.omega1 = decay * w.alpha * (1.0 - w.lipschitz * w.alpha) / 2.0;
  o.omega2 = decay * w.lipschitz * w.alpha * w.alpha / 2.0;
  // 1 - L alpha may round to a tiny negative at alpha == 1/L.
  if (o.omega1 < 0.0) o.omega1 = 0.0;
  return o;
}

double PeriodDecay(int r, const GapWeights& w) {
  if (r < 0 || r >= w.num_periods) throw DomainError("period index out of range");
  return std::pow(w.contraction(), (w.num_periods - 1 - r) * w.period_len);
}

double LambdaPeriod(int r, const std::vector<RoundDesign>& designs,
                    const std::vector<ChannelState>& states,
                    const std::vector<double>& gammas, const NoiseModel& noise,
                    const GapWeights& w, int d) {
  const auto rho = static_cast<std::size_t>(w.period_len);
  if (designs.size() != rho || states.size() != rho || gammas.size() != rho)
    throw DimensionError("period lists must have length rho");
  double total = 0.0;
  const int horizon = (r + 1) * w.period_len;
  for (std::size_t i = 0; i < rho; ++i) {
    const int t = r * w.period_len + static_cast<int>(i) + 1;
    const OmegaPair o = Omega(t, horizon, w);
    const OfflineErrorTerms e =
        ErrorTermsOffline(designs[i], states[i], gammas[i], noise, d);
    total += o.omega1 * e.bias_sq + o.omega2 * e.mse;
  }
  return total;
}

double GapBound(double initial_gap, const std::vector<double>& lambda_values,
                const GapWeights& w) {
  w.Validate();
  if (lambda_values.size() != static_cast<std::size_t>(w.num_periods))
    throw DimensionError("need one Lambda value per period");
  double out = std::pow(w.contraction(), w.total_rounds) * initial_gap;
  for (int r = 0; r < w.num_periods; ++r) {
    out += PeriodDecay(r, w) * lambda_values[static_cast<std::size_t>(r)];
  }
  return out;
}

double GapBoundVaryingRate(double initial_gap,
                           const std::vector<double>& per_round_alphas,
                           const std::vector<RoundErrorMoments>& moments,
                           double mu, double lipschitz) {
  if (per_round_alphas.size() != moments.size())
    throw DimensionError("one learning rate per round required");
  if (!(mu > 0.0) || !(lipschitz > 0.0)) throw DomainError("mu and L must be positive");
  const double cap = std::min(1.0 / mu, 1.0 / lipschitz);
  double gap = initial_gap;
  for (std::size_t t = 0; t < moments.size(); ++t) {
    const double a = per_round_alphas[t];
    if (!(a >= 0.0) || a > cap) throw DomainError("learning rate not admissible");
    const RoundErrorMoments& e = moments[t];
    gap = (1.0 - mu * a) * gap + a * (1.0 - lipschitz * a) / 2.0 * e.bias_sq +
          lipschitz * a * a / 2.0 * (e.mse + e.grad_sq);
  }
  return gap;
}

std::vector<double> LambdaFromMoments(const std::vector<RoundErrorMoments>& moments,
                                      const GapWeights& w) {
  w.Validate();
  if (moments.size() != static_cast<std::size_t>(w.total_rounds))
    throw DimensionError("need one moment record per round");
  std::vector<double> out(static_cast<std::size_t>(w.num_periods), 0.0);
  for (int t = 1; t <= w.total_rounds; ++t) {
    const int r = (t - 1) / w.period_len;
    const OmegaPair o = Omega(t, (r + 1) * w.period_len, w);
    const RoundErrorMoments& e = moments[static_cast<std::size_t>(t - 1)];
    out[static_cast<std::size_t>(r)] +=
        o.omega1 * e.bias_sq + o.omega2 * (e.mse + e.grad_sq);
  }
  return out;
}

}  // namespace irsfl
