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
#include "irsfl/config.h"

#include <algorithm>
#include <cctype>
#include <cerrno>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include "irsfl/linalg.h"

namespace irsfl {
namespace {

std::string Trim(const std::string& s) {
  const auto lo = s.find_first_not_of(" \t\r");
  if (lo == std::string::npos) return "";
  const auto hi = s.find_last_not_of(" \t\r");
  return s.substr(lo, hi - lo + 1);
}

std::string Real(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

int ToInt(const std::string& s) {
  int v = 0;
  const char* end = s.data() + s.size();
  auto [p, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || p != end) throw ConfigSchemaError("expected an integer, got '" + s + "'");
  return v;
}

double ToReal(const std::string& s) {
  if (s.empty()) throw ConfigSchemaError("expected a number, got nothing");
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size() || errno == ERANGE || !std::isfinite(v))
    throw ConfigSchemaError("expected a finite number, got '" + s + "'");
  return v;
}

bool ToBool(const std::string& s) {
  if (s == "true") return true;
  if (s == "false") return false;
  throw ConfigSchemaError("expected true or false, got '" + s + "'");
}

// Splits "20 dBm" / "20dBm" into number and unit.
std::pair<double, std::string> NumberWithUnit(const std::string& s) {
  std::size_t i = 0;
  while (i < s.size() && (std::isdigit(static_cast<unsigned char>(s[i])) || s[i] == '.' ||
                          s[i] == '-' || s[i] == '+' || s[i] == 'e' || s[i] == 'E')) {
    // Stop before a unit that starts with 'e'/'E' only when no digit follows.
    if ((s[i] == 'e' || s[i] == 'E') &&
        !(i + 1 < s.size() && (std::isdigit(static_cast<unsigned char>(s[i + 1])) ||
                               s[i + 1] == '-' || s[i + 1] == '+')))
      break;
    ++i;
  }
  return {ToReal(Trim(s.substr(0, i))), Trim(s.substr(i))};
}

double ToPowerW(const std::string& s) {
  const auto [v, unit] = NumberWithUnit(s);
  if (unit == "dBm") return DbmToWatts(v);
  if (unit == "mW" && v >= 0.0) return v * 1e-3;
  if (unit == "W" && v >= 0.0) return v;
  if (unit.empty()) throw ConfigSchemaError("power '" + s + "' needs a unit: dBm, mW or W");
  throw ConfigSchemaError("bad power '" + s + "'; units are dBm, mW or W");
}

// "3 dB" in decibels, a bare number as a linear ratio.
double ToGain(const std::string& s) {
  const auto [v, unit] = NumberWithUnit(s);
  if (unit == "dB") return DbToLinear(v);
  if (unit.empty()) return v;
  throw ConfigSchemaError("bad gain '" + s + "'; use a linear ratio or a dB suffix");
}

double ToDb(const std::string& s) {
  const auto [v, unit] = NumberWithUnit(s);
  if (unit != "dB") throw ConfigSchemaError("'" + s + "' must carry a dB suffix");
  return v;
}

Position ToPosition(const std::string& s) {
  std::vector<double> xs;
  std::stringstream in(s);
  std::string part;
  while (std::getline(in, part, ',')) xs.push_back(ToReal(Trim(part)));
  if (xs.size() != 3) throw ConfigSchemaError("position needs x, y, z, got '" + s + "'");
  return {xs[0], xs[1], xs[2]};
}

std::string FromPosition(const Position& p) {
  return Real(p[0]) + ", " + Real(p[1]) + ", " + Real(p[2]);
}

struct Field {
  std::string key;
  std::function<void(ScenarioConfig&, const std::string&)> set;
  std::function<std::string(const ScenarioConfig&)> get;
};

#define IRSFL_INT(name, member)                                                  \
  Field{name, [](ScenarioConfig& c, const std::string& v) { c.member = ToInt(v); }, \
        [](const ScenarioConfig& c) { return std::to_string(c.member); }}
#define IRSFL_REAL(name, member)                                                   \
  Field{name, [](ScenarioConfig& c, const std::string& v) { c.member = ToReal(v); }, \
        [](const ScenarioConfig& c) { return Real(c.member); }}
#define IRSFL_BOOL(name, member)                                                   \
  Field{name, [](ScenarioConfig& c, const std::string& v) { c.member = ToBool(v); }, \
        [](const ScenarioConfig& c) { return std::string(c.member ? "true" : "false"); }}
#define IRSFL_POWER(name, member)                                                     \
  Field{name, [](ScenarioConfig& c, const std::string& v) { c.member = ToPowerW(v); }, \
        [](const ScenarioConfig& c) { return Real(c.member) + " W"; }}
#define IRSFL_POS(name, member)                                                         \
  Field{name, [](ScenarioConfig& c, const std::string& v) { c.member = ToPosition(v); }, \
        [](const ScenarioConfig& c) { return FromPosition(c.member); }}

const std::vector<Field>& Schema() {
  static const std::vector<Field> fields = {
      IRSFL_INT("num_devices", scenario.num_devices),
      IRSFL_INT("num_antennas", scenario.num_antennas),
      IRSFL_INT("num_elements", scenario.num_elements),
      IRSFL_INT("total_rounds", scenario.total_rounds),
      IRSFL_INT("num_periods", scenario.num_periods),
      IRSFL_INT("period_len", scenario.period_len),
      IRSFL_INT("offline_period_len", scenario.offline_period_len),
      IRSFL_POWER("p_max", scenario.p_max_w),
      IRSFL_POWER("p_avg", scenario.p_avg_w),
      IRSFL_POWER("noise", scenario.noise_w),
      IRSFL_POS("bs_position", scenario.bs_position),
      IRSFL_POS("irs_position", scenario.irs_position),
      IRSFL_POS("device_center", scenario.device_center),
      IRSFL_REAL("device_radius", scenario.device_radius),
      Field{"path_loss_t0",
            [](ScenarioConfig& c, const std::string& v) { c.scenario.path_loss.t0_db = ToDb(v); },
            [](const ScenarioConfig& c) { return Real(c.scenario.path_loss.t0_db) + " dB"; }},
      IRSFL_REAL("path_loss_d0", scenario.path_loss.d0),
      IRSFL_REAL("exponent_bs_device", scenario.path_loss.exponent_bs_device),
      IRSFL_REAL("exponent_bs_irs", scenario.path_loss.exponent_bs_irs),
      IRSFL_REAL("exponent_irs_device", scenario.path_loss.exponent_irs_device),
      Field{"rician_k",
            [](ScenarioConfig& c, const std::string& v) { c.scenario.rician_k = ToGain(v); },
            [](const ScenarioConfig& c) { return Real(c.scenario.rician_k); }},
      IRSFL_BOOL("static_channel", scenario.static_channel),
      Field{"loss",
            [](ScenarioConfig& c, const std::string& v) {
              if (v == "least_squares") c.scenario.task.kind = LossKind::kLeastSquares;
              else if (v == "logistic") c.scenario.task.kind = LossKind::kLogistic;
              else throw ConfigSchemaError("loss must be least_squares or logistic, got '" + v + "'");
            },
            [](const ScenarioConfig& c) {
              return std::string(c.scenario.task.kind == LossKind::kLogistic ? "logistic"
                                                                             : "least_squares");
            }},
      IRSFL_INT("model_dim", scenario.task.model_dim),
      IRSFL_INT("samples_per_device", scenario.task.samples_per_device),
      IRSFL_REAL("regularizer", scenario.task.regularizer),
      IRSFL_REAL("feature_spread", scenario.task.feature_spread),
      IRSFL_REAL("label_noise", scenario.task.label_noise),
      IRSFL_REAL("feature_scale", scenario.task.feature_scale),
      IRSFL_REAL("alpha", scenario.alpha),
      IRSFL_INT("batch_size", scenario.batch_size),
      IRSFL_REAL("gamma_factor", scenario.gamma_factor),
      Field{"scheme",
            [](ScenarioConfig& c, const std::string& v) {
              try {
                c.scenario.scheme = ParseScheme(v);
              } catch (const ConfigError& e) {
                throw ConfigSchemaError(e.what());
              }
            },
            [](const ScenarioConfig& c) { return SchemeName(c.scenario.scheme); }},
      Field{"v_mode",
            [](ScenarioConfig& c, const std::string& v) {
              if (v == "fixed") c.scenario.schedule.mode = VSchedule::Mode::kFixed;
              else if (v == "varying") c.scenario.schedule.mode = VSchedule::Mode::kVarying;
              else throw ConfigSchemaError("v_mode must be fixed or varying, got '" + v + "'");
            },
            [](const ScenarioConfig& c) {
              return std::string(c.scenario.schedule.mode == VSchedule::Mode::kFixed ? "fixed"
                                                                                     : "varying");
            }},
      IRSFL_REAL("v_fixed", scenario.schedule.fixed_value),
      IRSFL_REAL("v_coeff", scenario.schedule.varying_coeff),
      IRSFL_REAL("v_slope", scenario.schedule.inner_slope),
      IRSFL_REAL("v_offset", scenario.schedule.inner_offset),
      IRSFL_REAL("v_scale", scenario.schedule.scale),
      IRSFL_BOOL("v_auto", scenario.v_auto),
      IRSFL_REAL("queue_init_fraction", scenario.queue_init_fraction),
      IRSFL_BOOL("queue_reset", scenario.queue_reset),
      Field{"phase_bits",
            [](ScenarioConfig& c, const std::string& v) {
              if (v == "continuous") {
                c.scenario.bcd.quant_bits.reset();
                return;
              }
              const int b = ToInt(v);
              if (b < 1 || b > 8)
                throw ConfigSchemaError("phase_bits must be 1..8 or continuous, got '" + v + "'");
              c.scenario.bcd.quant_bits = b;
            },
            [](const ScenarioConfig& c) {
              return c.scenario.bcd.quant_bits ? std::to_string(*c.scenario.bcd.quant_bits)
                                               : std::string("continuous");
            }},
      IRSFL_INT("bcd_max_iters", scenario.bcd.max_iters),
      IRSFL_REAL("bcd_rel_tol", scenario.bcd.rel_tol),
      IRSFL_BOOL("check_comparator", scenario.check_comparator),
      Field{"seeds",
            [](ScenarioConfig& c, const std::string& v) { c.seeds = ParseSeedList(v); },
            [](const ScenarioConfig& c) {
              std::string out;
              for (std::size_t i = 0; i < c.seeds.size(); ++i)
                out += (i ? "," : "") + std::to_string(c.seeds[i]);
              return out;
            }},
  };
  return fields;
}

#undef IRSFL_INT
#undef IRSFL_REAL
#undef IRSFL_BOOL
#undef IRSFL_POWER
#undef IRSFL_POS

void ValidateConfig(const ScenarioConfig& c) {
  if (c.seeds.empty()) throw ConfigInvariantError("at least one seed is required");
  try {
    c.scenario.Validate();
  } catch (const ConfigError& e) {
    throw ConfigInvariantError(e.what());
  }
}

}  // namespace

ScenarioConfig FullDefaults() { return ScenarioConfig{}; }

ScenarioConfig DeskDefaults() {
  ScenarioConfig c;
  Scenario& s = c.scenario;
  s.num_devices = 10;
  s.num_antennas = 4;
  s.num_elements = 16;
  s.total_rounds = 60;
  s.num_periods = 6;
  s.period_len = 10;
  s.task.model_dim = 100;
  s.noise_w = DbmToWatts(-70.0);
  c.seeds = {1, 2, 3, 4, 5};
  return c;
}

std::vector<std::uint64_t> ParseSeedList(const std::string& text) {
  std::vector<std::uint64_t> out;
  std::stringstream in(text);
  std::string part;
  auto to_u64 = [](const std::string& s) {
    std::uint64_t v = 0;
    const char* end = s.data() + s.size();
    auto [p, ec] = std::from_chars(s.data(), end, v);
    if (s.empty() || ec != std::errc() || p != end)
      throw ConfigSchemaError("bad seed '" + s + "'");
    return v;
  };
  while (std::getline(in, part, ',')) {
    part = Trim(part);
    const auto dash = part.find('-');
    if (dash == std::string::npos) {
      out.push_back(to_u64(part));
      continue;
    }
    const std::uint64_t lo = to_u64(Trim(part.substr(0, dash)));
    const std::uint64_t hi = to_u64(Trim(part.substr(dash + 1)));
    if (hi < lo || hi - lo > 100000) throw ConfigSchemaError("bad seed range '" + part + "'");
    for (std::uint64_t s = lo; s <= hi; ++s) out.push_back(s);
  }
  if (out.empty()) throw ConfigSchemaError("empty seed list");
  return out;
}

ScenarioConfig ParseConfigText(const std::string& text, const ScenarioConfig& base) {
  ScenarioConfig c = base;
  std::set<std::string> seen;
  std::stringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string where = "line " + std::to_string(line_no) + ": ";
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = Trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigSchemaError(where + "expected key = value");
    const std::string key = Trim(line.substr(0, eq));
    const std::string value = Trim(line.substr(eq + 1));
    const auto& schema = Schema();
    auto it = std::find_if(schema.begin(), schema.end(),
                           [&](const Field& f) { return f.key == key; });
    if (it == schema.end()) throw ConfigSchemaError(where + "unknown key '" + key + "'");
    if (!seen.insert(key).second) throw ConfigSchemaError(where + "key '" + key + "' repeated");
    try {
      it->set(c, value);
    } catch (const ConfigSchemaError& e) {
      throw ConfigSchemaError(where + key + ": " + e.what());
    }
  }
  ValidateConfig(c);
  return c;
}

ScenarioConfig ParseConfigFile(const std::string& path, const ScenarioConfig& base) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigFileError("cannot open config file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw ConfigFileError("cannot read config file '" + path + "'");
  return ParseConfigText(buf.str(), base);
}

std::string ConfigToText(const ScenarioConfig& config) {
  std::string out;
  for (const Field& f : Schema()) out += f.key + " = " + f.get(config) + "\n";
  return out;
}

std::string ConfigHash(const ScenarioConfig& config) { return Fnv1aHex(ConfigToText(config)); }

std::string Fnv1aHex(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : bytes) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::vector<std::string> ConfigKeys() {
  std::vector<std::string> keys;
  for (const Field& f : Schema()) keys.push_back(f.key);
  return keys;
}

}  // namespace irsfl
