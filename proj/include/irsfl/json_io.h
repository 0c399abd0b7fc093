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
// JSON fixtures for channel snapshots and solver inputs/outputs.
//
// A complex matrix is stored as
//   {"rows": R, "cols": C, "data": [[re, im], ...]}
// with `data` in row-major order (R * C pairs). A complex vector is a
// matrix with cols == 1. ChannelState is {"h_d": ..., "h_r": ..., "g": ...}.
#ifndef IRSFL_JSON_IO_H_
#define IRSFL_JSON_IO_H_

#include <string>

#include "json.hpp"

#include "irsfl/aircomp.h"
#include "irsfl/channel_model.h"

namespace irsfl {

nlohmann::json ComplexMatrixToJson(const CMat& m);
CMat ComplexMatrixFromJson(const nlohmann::json& j);

nlohmann::json ChannelStateToJson(const ChannelState& s);
ChannelState ChannelStateFromJson(const nlohmann::json& j);

nlohmann::json PhasesToJson(const IrsPhases& p);
IrsPhases PhasesFromJson(const nlohmann::json& j);

nlohmann::json RoundDesignToJson(const RoundDesign& d);
RoundDesign RoundDesignFromJson(const nlohmann::json& j);

}  // namespace irsfl

#endif  // IRSFL_JSON_IO_H_
