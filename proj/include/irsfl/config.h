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
// Flat key = value scenario files.
//
// One assignment per line; '#' starts a comment. Keys are fixed by the
// schema in config.cc and unknown keys are rejected. Power levels carry an
// explicit unit (dBm, mW or W) and gains in decibels carry a dB suffix, so
// a bare number is never silently read as a logarithmic value. Every value
// is converted to linear units once, at parse time.
#ifndef IRSFL_CONFIG_H_
#define IRSFL_CONFIG_H_

#include <cstdint>
#include <string>
#include <vector>

#include "irsfl/errors.h"
#include "irsfl/fl_sim.h"

namespace irsfl {

// The file could not be opened or read.
class ConfigFileError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

// A line is malformed, a key is unknown or repeated, or a value does not
// have the declared type or unit.
class ConfigSchemaError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

// Every value parsed but the combination violates a scenario invariant.
class ConfigInvariantError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

struct ScenarioConfig {
  Scenario scenario;
  std::vector<std::uint64_t> seeds{1};
};

// Values listed with their deployment defaults: K=20, M=5, N=40, T=100,
// R=10, rho=10, 20 dBm peak, 17 dBm average and -80 dBm noise.
ScenarioConfig FullDefaults();

// Reduced sweep base: K=10, M=4, N=16, T=60, d=100, noise -70 dBm, seeds
// 1..5. The larger noise floor keeps the design differences visible after
// the model dimension shrinks the per-symbol budget.
ScenarioConfig DeskDefaults();

// Parses `text` on top of `base` and validates the result.
ScenarioConfig ParseConfigText(const std::string& text,
                               const ScenarioConfig& base = FullDefaults());

// Reads and parses a file. Throws ConfigFileError if it cannot be read.
ScenarioConfig ParseConfigFile(const std::string& path,
                               const ScenarioConfig& base = FullDefaults());

// Canonical text listing every key in schema order, linear units only.
// ParseConfigText(ConfigToText(c)) reproduces c exactly.
std::string ConfigToText(const ScenarioConfig& config);

// FNV-1a 64 of a byte string, as 16 hex digits.
std::string Fnv1aHex(const std::string& bytes);

// Fnv1aHex of ConfigToText.
std::string ConfigHash(const ScenarioConfig& config);

// Comma separated seeds; "a-b" expands to the inclusive range.
std::vector<std::uint64_t> ParseSeedList(const std::string& text);

// Schema keys in canonical order.
std::vector<std::string> ConfigKeys();

}  // namespace irsfl

#endif  // IRSFL_CONFIG_H_
