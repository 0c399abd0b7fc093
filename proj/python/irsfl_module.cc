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
// Python bindings: configuration, single runs, presets and a few core
// helpers. Results come back as dicts of numpy arrays and plain values.
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <string>
#include <vector>

#include "irsfl/config.h"
#include "irsfl/energy_queues.h"
#include "irsfl/errors.h"
#include "irsfl/fl_sim.h"
#include "irsfl/linalg.h"
#include "irsfl/lyapunov_online.h"
#include "irsfl/presets.h"
#include "irsfl/report.h"

namespace py = pybind11;

namespace {

irsfl::ScenarioConfig Config(const std::string& text, bool desk) {
  return irsfl::ParseConfigText(text, desk ? irsfl::DeskDefaults() : irsfl::FullDefaults());
}

py::object FromJson(const nlohmann::json& j) {
  return py::module_::import("json").attr("loads")(j.dump());
}

py::dict TraceDict(const irsfl::ExperimentTrace& tr) {
  const std::size_t t = tr.rounds.size();
  const Eigen::Index k = t ? tr.rounds.front().power.size() : 0;
  irsfl::RMat power(static_cast<Eigen::Index>(t), k), queue(static_cast<Eigen::Index>(t), k);
  irsfl::RVec loss(static_cast<Eigen::Index>(t)), mse(static_cast<Eigen::Index>(t)),
      v(static_cast<Eigen::Index>(t));
  bool has_queue = true;
  for (std::size_t i = 0; i < t; ++i) {
    const auto& r = tr.rounds[i];
    const auto row = static_cast<Eigen::Index>(i);
    power.row(row) = r.power.transpose();
    if (r.queue.size() == k) queue.row(row) = r.queue.transpose();
    else has_queue = false;
    loss[row] = r.loss;
    mse[row] = r.mse;
    v[row] = r.v;
  }
  py::dict d;
  d["scheme"] = tr.scheme;
  d["seed"] = tr.seed;
  d["loss"] = loss;
  d["gap"] = irsfl::RVec(Eigen::Map<const irsfl::RVec>(tr.gap_curve.data(),
                                                       static_cast<Eigen::Index>(tr.gap_curve.size())));
  d["bound"] = irsfl::RVec(Eigen::Map<const irsfl::RVec>(tr.bound_curve.data(),
                                                         static_cast<Eigen::Index>(tr.bound_curve.size())));
  d["mse"] = mse;
  d["v"] = v;
  d["power"] = power;
  d["queue"] = has_queue ? py::object(py::cast(queue)) : py::object(py::none());
  d["final_loss"] = tr.final_loss;
  d["final_gap"] = tr.final_gap;
  d["v_scale"] = tr.v_scale;
  return d;
}

}  // namespace

PYBIND11_MODULE(irsfl, m) {
  m.doc() = "Simulated over-the-air federated learning with an IRS-assisted uplink";

  static py::exception<irsfl::ConfigError> config_error(m, "ConfigError", PyExc_ValueError);
  static py::exception<irsfl::ConfigFileError> file_error(m, "ConfigFileError", config_error.ptr());
  static py::exception<irsfl::ConfigSchemaError> schema_error(m, "ConfigSchemaError", config_error.ptr());
  static py::exception<irsfl::ConfigInvariantError> invariant_error(m, "ConfigInvariantError",
                                                                    config_error.ptr());
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const irsfl::ConfigFileError& e) {
      py::set_error(file_error, e.what());
    } catch (const irsfl::ConfigSchemaError& e) {
      py::set_error(schema_error, e.what());
    } catch (const irsfl::ConfigInvariantError& e) {
      py::set_error(invariant_error, e.what());
    } catch (const irsfl::ConfigError& e) {
      py::set_error(config_error, e.what());
    } catch (const irsfl::DomainError& e) {
      py::set_error(PyExc_ValueError, e.what());
    } catch (const irsfl::DimensionError& e) {
      py::set_error(PyExc_ValueError, e.what());
    } catch (const irsfl::DegenerateInputError& e) {
      py::set_error(PyExc_ValueError, e.what());
    }
  });

  m.def("config_text", [](const std::string& text, bool desk) { return irsfl::ConfigToText(Config(text, desk)); },
        py::arg("text") = "", py::arg("desk") = false,
        "Canonical text of a parsed, validated configuration.");
  m.def("config_hash", [](const std::string& text, bool desk) { return irsfl::ConfigHash(Config(text, desk)); },
        py::arg("text") = "", py::arg("desk") = false);
  m.def("config_file_text",
        [](const std::string& path, bool desk) {
          return irsfl::ConfigToText(irsfl::ParseConfigFile(
              path, desk ? irsfl::DeskDefaults() : irsfl::FullDefaults()));
        },
        py::arg("path"), py::arg("desk") = false);
  m.def("config_keys", &irsfl::ConfigKeys);

  m.def("run",
        [](const std::string& text, std::uint64_t seed, bool desk, std::optional<std::string> scheme) {
          irsfl::ScenarioConfig c = Config(text, desk);
          if (scheme) c.scenario.scheme = irsfl::ParseScheme(*scheme);
          irsfl::ExperimentTrace tr;
          {
            py::gil_scoped_release release;
            tr = irsfl::RunExperiment(c.scenario, seed);
          }
          py::dict d = TraceDict(tr);
          d["summary"] = FromJson(irsfl::EmitSummary({tr}, c.scenario));
          return d;
        },
        py::arg("text") = "", py::arg("seed") = 1, py::arg("desk") = true,
        py::arg("scheme") = py::none(), "Runs one seed and returns its trace.");

  m.def("summary",
        [](const std::string& text, bool desk, std::optional<std::string> scheme) {
          irsfl::ScenarioConfig c = Config(text, desk);
          if (scheme) c.scenario.scheme = irsfl::ParseScheme(*scheme);
          std::vector<irsfl::ExperimentTrace> traces(c.seeds.size());
          {
            py::gil_scoped_release release;
            irsfl::ParallelFor(static_cast<int>(c.seeds.size()), 0, [&](int i) {
              traces[static_cast<std::size_t>(i)] =
                  irsfl::RunExperiment(c.scenario, c.seeds[static_cast<std::size_t>(i)]);
            });
          }
          return FromJson(irsfl::EmitSummary(traces, c.scenario));
        },
        py::arg("text") = "", py::arg("desk") = true, py::arg("scheme") = py::none(),
        "Runs every configured seed and returns the cross-seed summary.");

  m.def("preset_names", &irsfl::PresetNames);
  m.def("run_preset",
        [](const std::string& name, const std::string& out_dir, const std::string& text,
           bool full_scale, int threads) {
          irsfl::PresetOptions opt;
          irsfl::ScenarioConfig base = irsfl::DeskDefaults();
          if (full_scale) base = irsfl::FullScale(base);
          opt.base = irsfl::ParseConfigText(text, base);
          opt.out_dir = out_dir;
          opt.threads = threads;
          irsfl::PresetOutput out;
          {
            py::gil_scoped_release release;
            out = irsfl::RunPreset(name, opt);
          }
          py::dict d;
          d["dir"] = out.dir;
          d["manifest"] = FromJson(out.manifest);
          d["summary"] = FromJson(out.summary);
          return d;
        },
        py::arg("name"), py::arg("out_dir"), py::arg("text") = "", py::arg("full_scale") = false,
        py::arg("threads") = 0, "Runs a preset; returns its output directory, manifest and summary.");

  m.def("spearman", &irsfl::Spearman, py::arg("x"), py::arg("y"));
  m.def("dbm_to_watts", &irsfl::DbmToWatts);
  m.def("v_value",
        [](int r, const std::string& mode, double fixed_value, double scale) {
          irsfl::VSchedule s;
          if (mode == "fixed") s.mode = irsfl::VSchedule::Mode::kFixed;
          else if (mode != "varying") throw irsfl::ConfigError("mode must be fixed or varying");
          s.fixed_value = fixed_value;
          s.scale = scale;
          return irsfl::VValue(r, s);
        },
        py::arg("r"), py::arg("mode") = "varying", py::arg("fixed_value") = 90.0,
        py::arg("scale") = 1.0);
  m.def("queue_update",
        [](const irsfl::RVec& e, const irsfl::RVec& p_avg, int d, const irsfl::RVec& b_mags) {
          irsfl::EnergyQueues q{e, p_avg, d};
          return irsfl::QueueUpdate(q, b_mags).e;
        },
        py::arg("e"), py::arg("p_avg"), py::arg("d"), py::arg("b_mags"),
        "One step of e <- max(e + d |b|^2 - d p_avg, 0).");
  m.attr("__version__") = "0.1.0";
}
