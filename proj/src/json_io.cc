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
#include "irsfl/json_io.h"

#include <vector>

#include "irsfl/errors.h"

namespace irsfl {

using nlohmann::json;

json ComplexMatrixToJson(const CMat& m) {
  json data = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      data.push_back({m(r, c).real(), m(r, c).imag()});
    }
  }
  return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", data}};
}

CMat ComplexMatrixFromJson(const json& j) {
  const auto rows = j.at("rows").get<Eigen::Index>();
  const auto cols = j.at("cols").get<Eigen::Index>();
  const json& data = j.at("data");
  if (rows < 0 || cols < 0 || data.size() != static_cast<std::size_t>(rows * cols))
    throw DimensionError("complex matrix JSON has inconsistent size");
  CMat m(rows, cols);
  std::size_t i = 0;
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c, ++i) {
      m(r, c) = Complex(data[i].at(0).get<double>(), data[i].at(1).get<double>());
    }
  }
  return m;
}

json ChannelStateToJson(const ChannelState& s) {
  return {{"h_d", ComplexMatrixToJson(s.h_d)},
          {"h_r", ComplexMatrixToJson(s.h_r)},
          {"g", ComplexMatrixToJson(s.g)}};
}

ChannelState ChannelStateFromJson(const json& j) {
  ChannelState s;
  s.h_d = ComplexMatrixFromJson(j.at("h_d"));
  s.h_r = ComplexMatrixFromJson(j.at("h_r"));
  s.g = ComplexMatrixFromJson(j.at("g"));
  s.Validate();
  return s;
}

json PhasesToJson(const IrsPhases& p) {
  json out;
  if (p.quant_bits()) {
    std::vector<int> levels(static_cast<std::size_t>(p.size()));
    for (int n = 0; n < p.size(); ++n) levels[static_cast<std::size_t>(n)] = p.Level(n);
    out["quant_bits"] = *p.quant_bits();
    out["levels"] = levels;
  } else {
    out["quant_bits"] = nullptr;
    out["theta"] = std::vector<double>(p.theta().data(), p.theta().data() + p.size());
  }
  return out;
}

IrsPhases PhasesFromJson(const json& j) {
  if (j.contains("quant_bits") && !j.at("quant_bits").is_null()) {
    return IrsPhases::FromLevels(j.at("levels").get<std::vector<int>>(),
                                 j.at("quant_bits").get<int>());
  }
  const auto v = j.at("theta").get<std::vector<double>>();
  return IrsPhases(Eigen::Map<const RVec>(v.data(), static_cast<Eigen::Index>(v.size())));
}

json RoundDesignToJson(const RoundDesign& d) {
  return {{"b", ComplexMatrixToJson(d.b)},
          {"m", ComplexMatrixToJson(d.m)},
          {"phases", PhasesToJson(d.phases)}};
}

RoundDesign RoundDesignFromJson(const json& j) {
  RoundDesign d;
  const CMat b = ComplexMatrixFromJson(j.at("b"));
  const CMat m = ComplexMatrixFromJson(j.at("m"));
  if (b.cols() != 1 || m.cols() != 1) throw DimensionError("b and m must be vectors");
  d.b = b.col(0);
  d.m = m.col(0);
  d.phases = PhasesFromJson(j.at("phases"));
  return d;
}

}  // namespace irsfl
