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
// Named sweeps over the reduced scenario. Each preset writes plot-ready CSV
// files, a summary.json and a manifest.json (canonical base config, its
// hash, sweep values, seeds and a checksum of every file) into
// <out_dir>/<preset>/. Outputs depend only on the base config and seeds.
#ifndef IRSFL_PRESETS_H_
#define IRSFL_PRESETS_H_

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"

#include "irsfl/config.h"
#include "irsfl/fl_sim.h"

namespace irsfl {

// K=20, N=40, T=100, R=10 on top of `desk`.
ScenarioConfig FullScale(ScenarioConfig desk);

// Objective traces of the offline BCD on the first period of `sc` (unit
// gamma) for the direct links only ("no_irs"), phases frozen at their random
// start ("fixed_phase"), 1-bit and 3-bit phases and continuous phases.
struct ConvergenceCurves {
  std::map<std::string, std::vector<double>> traces;
  std::map<std::string, bool> converged;
};
ConvergenceCurves ConvergenceStudy(const Scenario& sc, std::uint64_t seed);

struct PresetOptions {
  ScenarioConfig base = DeskDefaults();
  std::string out_dir = "out";
  // Concurrent runs; 0 uses the hardware concurrency.
  int threads = 0;
};

struct PresetOutput {
  std::string dir;
  std::vector<std::string> files;  // relative to dir, manifest excluded
  nlohmann::json manifest;
  nlohmann::json summary;
};

std::vector<std::string> PresetNames();

// Throws ConfigError on an unknown name.
PresetOutput RunPreset(const std::string& name, const PresetOptions& options);

// Runs every seed of `config` and writes trace_seed<S>.csv,
// power_seed<S>.csv, summary.json and manifest.json into out_dir.
PresetOutput RunConfig(const ScenarioConfig& config, const std::string& out_dir,
                       int threads = 0);

// Runs fn(0) .. fn(n-1) on up to `threads` workers; the first exception is
// rethrown after all workers stop.
void ParallelFor(int n, int threads, const std::function<void(int)>& fn);

}  // namespace irsfl

#endif  // IRSFL_PRESETS_H_
