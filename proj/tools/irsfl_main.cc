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
// irsfl run | preset | check.
//
// Exit codes: 0 ok, 1 configuration error, 2 failed check, 3 runtime error.
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"

#include "irsfl/config.h"
#include "irsfl/errors.h"
#include "irsfl/presets.h"
#include "irsfl/report.h"

namespace {

constexpr int kOk = 0;
constexpr int kConfigError = 1;
constexpr int kCheckFailed = 2;
constexpr int kRuntimeError = 3;

struct Common {
  std::string config;
  std::string seeds;
  std::string scheme;
  std::string out = "out";
  bool desk = false;
  bool full_scale = false;
  int threads = 0;
};

void AddCommon(CLI::App* app, Common& c, bool with_scheme) {
  app->add_option("--config", c.config, "key = value scenario file");
  app->add_option("--seeds", c.seeds, "seed list, e.g. 1,2,7 or 1-5");
  if (with_scheme) app->add_option("--scheme", c.scheme, "design scheme");
  app->add_option("--out", c.out, "output directory");
  app->add_flag("--full-scale", c.full_scale, "K=20, N=40, T=100, R=10");
  app->add_option("--threads", c.threads, "concurrent runs (0 = all cores)");
}

irsfl::ScenarioConfig Resolve(const Common& c, irsfl::ScenarioConfig base) {
  if (c.full_scale) base = irsfl::FullScale(base);
  irsfl::ScenarioConfig cfg =
      c.config.empty() ? base : irsfl::ParseConfigFile(c.config, base);
  if (!c.seeds.empty()) cfg.seeds = irsfl::ParseSeedList(c.seeds);
  if (!c.scheme.empty()) cfg.scenario.scheme = irsfl::ParseScheme(c.scheme);
  cfg.scenario.Validate();
  return cfg;
}

void PrintSummary(const nlohmann::json& s) {
  std::printf("%s: %zu trace(s), mean final gap %.6g, mean final loss %.6g\n",
              s.at("scheme").get<std::string>().c_str(), s.at("num_traces").get<std::size_t>(),
              s.at("final_gap").at("mean").get<double>(),
              s.at("final_loss").at("mean").get<double>());
}

std::string Slurp(const std::filesystem::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream b;
  b << f.rdbuf();
  return b.str();
}

int Main(int argc, char** argv) {
  CLI::App app{"Simulated over-the-air federated learning with an IRS-assisted uplink"};
  app.require_subcommand(1);

  Common run_opts;
  CLI::App* run = app.add_subcommand("run", "run one scenario for every seed");
  AddCommon(run, run_opts, true);
  run->add_flag("--desk", run_opts.desk, "start from the reduced defaults instead of the full ones");

  Common preset_opts;
  std::string preset_name;
  bool list = false;
  CLI::App* preset = app.add_subcommand("preset", "run a named sweep on the reduced defaults");
  preset->add_option("name", preset_name, "preset name");
  preset->add_flag("--list", list, "print the preset names");
  AddCommon(preset, preset_opts, false);

  Common check_opts;
  CLI::App* check = app.add_subcommand(
      "check", "run a scenario and test bounds, queues, power and determinism");
  AddCommon(check, check_opts, true);
  check->add_flag("--desk", check_opts.desk, "start from the reduced defaults");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }

  try {
    if (run->parsed()) {
      const irsfl::ScenarioConfig cfg =
          Resolve(run_opts, run_opts.desk ? irsfl::DeskDefaults() : irsfl::FullDefaults());
      const irsfl::PresetOutput out = irsfl::RunConfig(cfg, run_opts.out, run_opts.threads);
      PrintSummary(out.summary);
      std::printf("wrote %zu files to %s\n", out.files.size() + 1, out.dir.c_str());
      return kOk;
    }
    if (preset->parsed()) {
      if (list) {
        for (const auto& n : irsfl::PresetNames()) std::printf("%s\n", n.c_str());
        return kOk;
      }
      if (preset_name.empty()) throw irsfl::ConfigError("preset name required (see --list)");
      irsfl::PresetOptions opt;
      opt.base = Resolve(preset_opts, irsfl::DeskDefaults());
      opt.out_dir = preset_opts.out;
      opt.threads = preset_opts.threads;
      const irsfl::PresetOutput out = irsfl::RunPreset(preset_name, opt);
      std::printf("%s: wrote %zu files to %s (config %s)\n", preset_name.c_str(),
                  out.files.size() + 1, out.dir.c_str(),
                  out.manifest.at("config_hash").get<std::string>().c_str());
      return kOk;
    }
    if (check->parsed()) {
      const irsfl::ScenarioConfig cfg =
          Resolve(check_opts, check_opts.desk ? irsfl::DeskDefaults() : irsfl::FullDefaults());
      const std::filesystem::path root(check_opts.out);
      const irsfl::PresetOutput a = irsfl::RunConfig(cfg, (root / "first").string(), check_opts.threads);
      const irsfl::PresetOutput b = irsfl::RunConfig(cfg, (root / "second").string(), check_opts.threads);
      bool ok = true;
      for (const auto& seed : a.summary.at("per_seed")) {
        for (const auto& c : seed.at("checks")) {
          const bool passed = c.at("passed").get<bool>();
          ok = ok && passed;
          std::printf("%s seed %llu %s value %.6g limit %.6g\n", passed ? "PASS" : "FAIL",
                      static_cast<unsigned long long>(seed.at("seed").get<std::uint64_t>()),
                      c.at("name").get<std::string>().c_str(), c.at("value").get<double>(),
                      c.at("limit").get<double>());
        }
      }
      bool same = a.files == b.files;
      for (std::size_t i = 0; same && i < a.files.size(); ++i)
        same = Slurp(std::filesystem::path(a.dir) / a.files[i]) ==
               Slurp(std::filesystem::path(b.dir) / b.files[i]);
      std::printf("%s repeated run byte-identical\n", same ? "PASS" : "FAIL");
      ok = ok && same;
      PrintSummary(a.summary);
      return ok ? kOk : kCheckFailed;
    }
  } catch (const irsfl::ConfigFileError& e) {
    std::fprintf(stderr, "config file error: %s\n", e.what());
    return kConfigError;
  } catch (const irsfl::ConfigSchemaError& e) {
    std::fprintf(stderr, "config schema error: %s\n", e.what());
    return kConfigError;
  } catch (const irsfl::ConfigInvariantError& e) {
    std::fprintf(stderr, "config invariant error: %s\n", e.what());
    return kConfigError;
  } catch (const irsfl::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kConfigError;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "runtime error: %s\n", e.what());
    return kRuntimeError;
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) { return Main(argc, argv); }
