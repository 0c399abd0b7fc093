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
#include "irsfl/presets.h"

#include <atomic>
#include <exception>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include "irsfl/bcd_solver.h"
#include "irsfl/errors.h"
#include "irsfl/random.h"
#include "irsfl/report.h"

namespace irsfl {
namespace {

namespace fs = std::filesystem;

// One run of a sweep: a labelled scenario variant and a seed.
struct Job {
  std::string curve;
  std::vector<std::pair<std::string, std::string>> tags;
  Scenario sc;
  std::uint64_t seed = 0;
};

// A labelled scenario variant, expanded over the seed list.
struct Variant {
  std::string curve;
  std::vector<std::pair<std::string, std::string>> tags;
  Scenario sc;
};

std::vector<Job> Expand(const std::vector<Variant>& variants,
                        const std::vector<std::uint64_t>& seeds) {
  std::vector<Job> jobs;
  for (const Variant& v : variants)
    for (std::uint64_t s : seeds) jobs.push_back({v.curve, v.tags, v.sc, s});
  return jobs;
}

std::vector<ExperimentTrace> RunJobs(const std::vector<Job>& jobs, int threads) {
  std::vector<ExperimentTrace> out(jobs.size());
  ParallelFor(static_cast<int>(jobs.size()), threads, [&](int i) {
    out[static_cast<std::size_t>(i)] = RunExperiment(jobs[static_cast<std::size_t>(i)].sc,
                                                     jobs[static_cast<std::size_t>(i)].seed);
  });
  return out;
}

Variant Make(const std::string& curve, const Scenario& base, Scheme scheme,
             std::vector<std::pair<std::string, std::string>> tags = {}) {
  Variant v{curve, std::move(tags), base};
  v.sc.scheme = scheme;
  v.sc.Validate();
  return v;
}

// Lines of the canonical config that differ from the base, seeds excluded.
std::vector<std::string> Overrides(const Scenario& sc, const ScenarioConfig& base) {
  ScenarioConfig c = base;
  c.scenario = sc;
  std::stringstream a(ConfigToText(base)), b(ConfigToText(c));
  std::vector<std::string> out;
  std::string la, lb;
  while (std::getline(a, la) && std::getline(b, lb))
    if (la != lb) out.push_back(lb);
  return out;
}

class Writer {
 public:
  explicit Writer(fs::path dir) : dir_(std::move(dir)) { fs::create_directories(dir_); }

  void Write(const std::string& name, const std::string& content) {
    std::ofstream f(dir_ / name, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot write " + (dir_ / name).string());
    f << content;
    f.close();
    if (!f) throw std::runtime_error("write failed for " + (dir_ / name).string());
    files_.push_back(name);
    sums_.push_back({{"name", name}, {"bytes", content.size()}, {"fnv1a", Fnv1aHex(content)}});
  }

  const std::vector<std::string>& files() const { return files_; }
  const nlohmann::json& sums() const { return sums_; }
  const fs::path& dir() const { return dir_; }

 private:
  fs::path dir_;
  std::vector<std::string> files_;
  nlohmann::json sums_ = nlohmann::json::array();
};

std::string TagHeader(const std::vector<Job>& jobs) {
  std::string h = "curve";
  if (!jobs.empty())
    for (const auto& [k, v] : jobs.front().tags) h += "," + k;
  return h;
}

std::string TagValues(const Job& j) {
  std::string s = j.curve;
  for (const auto& [k, v] : j.tags) s += "," + v;
  return s;
}

// Final-value table plus a per-curve mean / standard-error table; returns
// the JSON summary keyed by curve.
nlohmann::json WriteTables(Writer& w, const std::vector<Job>& jobs,
                           const std::vector<ExperimentTrace>& traces) {
  std::string table = TagHeader(jobs) + ",seed,final_loss,final_gap,mean_power\n";
  std::string summary =
      TagHeader(jobs) + ",seeds,mean_final_loss,stderr_final_loss,mean_final_gap,stderr_final_gap\n";
  nlohmann::json js = nlohmann::json::object();
  std::vector<std::string> order;
  std::map<std::string, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    const ExperimentTrace& tr = traces[i];
    table += TagValues(jobs[i]) + "," + std::to_string(jobs[i].seed) + "," +
             FormatReal(tr.final_loss) + "," + FormatReal(tr.final_gap) + "," +
             FormatReal(AveragePower(tr).mean()) + "\n";
    if (!groups.count(jobs[i].curve)) order.push_back(jobs[i].curve);
    groups[jobs[i].curve].push_back(i);
  }
  auto opt = [](const std::optional<double>& x) { return x ? FormatReal(*x) : std::string(); };
  for (const std::string& curve : order) {
    const auto& idx = groups[curve];
    std::vector<ExperimentTrace> group;
    for (std::size_t i : idx) group.push_back(traces[i]);
    nlohmann::json s = EmitSummary(group, jobs[idx.front()].sc);
    std::vector<double> loss, gap;
    for (const auto& t : group) {
      loss.push_back(t.final_loss);
      gap.push_back(t.final_gap);
    }
    const MeanStdErr ml = Summarize(loss), mg = Summarize(gap);
    summary += TagValues(jobs[idx.front()]) + "," + std::to_string(idx.size()) + "," +
               FormatReal(ml.mean) + "," + opt(ml.std_err) + "," + FormatReal(mg.mean) + "," +
               opt(mg.std_err) + "\n";
    js[curve] = s;
  }
  w.Write("table.csv", table);
  w.Write("summary.csv", summary);
  return js;
}

// Per-round curves of every job.
void WriteCurves(Writer& w, const std::vector<Job>& jobs,
                 const std::vector<ExperimentTrace>& traces) {
  std::string out = TagHeader(jobs) + ",seed,round,loss,gap,bound,mean_power\n";
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    const ExperimentTrace& tr = traces[i];
    const std::string pre = TagValues(jobs[i]) + "," + std::to_string(jobs[i].seed) + ",";
    for (std::size_t t = 0; t < tr.gap_curve.size(); ++t) {
      const bool last = t == tr.rounds.size();
      out += pre + std::to_string(t) + "," +
             FormatReal(last ? tr.final_loss : tr.rounds[t].loss) + "," +
             FormatReal(tr.gap_curve[t]) + "," + FormatReal(tr.bound_curve[t]) + "," +
             (last ? std::string() : FormatReal(tr.rounds[t].power.mean())) + "\n";
    }
  }
  w.Write("curves.csv", out);
}

void WritePower(Writer& w, const std::vector<Job>& jobs,
                const std::vector<ExperimentTrace>& traces) {
  std::string out = TagHeader(jobs) + ",seed,round,device,power,queue\n";
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    const std::string pre = TagValues(jobs[i]) + "," + std::to_string(jobs[i].seed) + ",";
    std::stringstream rows(PowerCsv(traces[i]));
    std::string line;
    std::getline(rows, line);  // header
    while (std::getline(rows, line)) out += pre + line + "\n";
  }
  w.Write("power.csv", out);
}

nlohmann::json Manifest(const std::string& name, const PresetOptions& opt,
                        const std::vector<Job>& jobs, const Writer& w) {
  nlohmann::json m;
  m["preset"] = name;
  m["version"] = "0.1.0";
  m["config_hash"] = ConfigHash(opt.base);
  m["config"] = ConfigToText(opt.base);
  m["seeds"] = opt.base.seeds;
  nlohmann::json curves = nlohmann::json::array();
  std::vector<std::string> seen;
  for (const Job& j : jobs) {
    if (std::find(seen.begin(), seen.end(), j.curve) != seen.end()) continue;
    seen.push_back(j.curve);
    nlohmann::json tags = nlohmann::json::object();
    for (const auto& [k, v] : j.tags) tags[k] = v;
    curves.push_back({{"curve", j.curve}, {"tags", tags}, {"overrides", Overrides(j.sc, opt.base)}});
  }
  m["curves"] = curves;
  m["files"] = w.sums();
  return m;
}

std::vector<int> Divisors(int total, std::initializer_list<int> wanted) {
  std::vector<int> out;
  for (int r : wanted)
    if (r <= total && total % r == 0) out.push_back(r);
  return out;
}

std::string Num(double x) { return FormatReal(x); }

}  // namespace

void ParallelFor(int n, int threads, const std::function<void(int)>& fn) {
  if (n <= 0) return;
  int workers = threads > 0 ? threads : static_cast<int>(std::thread::hardware_concurrency());
  workers = std::clamp(workers, 1, n);
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex mu;
  auto work = [&] {
    for (;;) {
      const int i = next.fetch_add(1);
      if (i >= n) return;
      {
        std::lock_guard<std::mutex> lock(mu);
        if (error) return;
      }
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(mu);
        if (!error) error = std::current_exception();
      }
    }
  };
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < workers; ++i) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  if (error) std::rethrow_exception(error);
}

ScenarioConfig FullScale(ScenarioConfig desk) {
  Scenario& s = desk.scenario;
  s.num_devices = 20;
  s.num_elements = 40;
  s.total_rounds = 100;
  s.num_periods = 10;
  s.period_len = 10;
  s.Validate();
  return desk;
}

ConvergenceCurves ConvergenceStudy(const Scenario& sc, std::uint64_t seed) {
  sc.Validate();
  const LearningTask task = LearningTask::Synthetic(sc.task, sc.num_devices, seed);
  const int rho = sc.offline_rho();
  const GapWeights w = ExperimentWeights(sc, task, rho);
  const PowerBudget budget = ExperimentBudget(sc);
  const NoiseModel noise{sc.noise_w};
  const Geometry geo = ExperimentGeometry(sc, seed);
  std::vector<ChannelState> states, direct;
  std::vector<std::uint64_t> seeds;
  for (int t = 0; t < rho; ++t) {
    states.push_back(ExperimentChannel(sc, geo, t, seed));
    direct.push_back(WithoutIrs(states.back()));
    seeds.push_back(DeriveSeed(seed, Stream::kPhaseInit,
                               {static_cast<std::uint64_t>(sc.static_channel ? 0 : t)}));
  }
  const std::vector<double> gammas(static_cast<std::size_t>(rho), 1.0);
  ConvergenceCurves out;
  auto record = [&](const std::string& name, const PeriodDesign& pd) {
    out.traces[name] = pd.objective_trace;
    out.converged[name] = pd.converged;
  };
  BcdSettings cont = sc.bcd;
  cont.quant_bits.reset();
  record("no_irs", SolveP1Period(direct, gammas, w, budget, noise, 0, cont, seeds));
  {
    BcdSettings fixed = cont;
    fixed.optimize_phases = false;
    std::vector<IrsPhases> init;
    for (int t = 0; t < rho; ++t) init.push_back(RandomPhases(sc.num_elements, seeds[t], std::nullopt));
    const PeriodCost cost = OfflineCost(gammas, w, budget, noise, 0);
    record("fixed_phase", SolvePeriod(states, cost, fixed, seeds, &init));
  }
  for (int bits : {1, 3}) {
    BcdSettings q = cont;
    q.quant_bits = bits;
    record("delta" + std::to_string(bits),
           SolveP1Period(states, gammas, w, budget, noise, 0, q, seeds));
  }
  record("continuous", SolveP1Period(states, gammas, w, budget, noise, 0, cont, seeds));
  return out;
}

PresetOutput RunConfig(const ScenarioConfig& config, const std::string& out_dir, int threads) {
  config.scenario.Validate();
  if (config.seeds.empty()) throw ConfigError("run needs at least one seed");
  Writer w{fs::path(out_dir)};
  std::vector<Job> jobs;
  for (std::uint64_t s : config.seeds) jobs.push_back({SchemeName(config.scenario.scheme), {}, config.scenario, s});
  const std::vector<ExperimentTrace> traces = RunJobs(jobs, threads);
  for (const ExperimentTrace& tr : traces) {
    w.Write("trace_seed" + std::to_string(tr.seed) + ".csv", TraceCsv(tr));
    w.Write("power_seed" + std::to_string(tr.seed) + ".csv", PowerCsv(tr));
  }
  PresetOutput out;
  out.dir = w.dir().string();
  out.summary = EmitSummary(traces, config.scenario);
  w.Write("summary.json", out.summary.dump(2) + "\n");
  out.files = w.files();
  PresetOptions opt;
  opt.base = config;
  out.manifest = Manifest("run", opt, jobs, w);
  std::ofstream mf(w.dir() / "manifest.json", std::ios::binary | std::ios::trunc);
  mf << out.manifest.dump(2) << "\n";
  if (!mf) throw std::runtime_error("cannot write manifest");
  return out;
}

std::vector<std::string> PresetNames() {
  return {"fig2_convergence", "fig3_offline_rho", "fig3_online_V",  "fig3_power_trace",
          "table1_rho_grid",  "table2_power_order", "fig6_vs_N", "fig6_vs_K"};
}

PresetOutput RunPreset(const std::string& name, const PresetOptions& opt) {
  const auto names = PresetNames();
  if (std::find(names.begin(), names.end(), name) == names.end())
    throw ConfigError("unknown preset '" + name + "'");
  opt.base.scenario.Validate();
  if (opt.base.seeds.empty()) throw ConfigError("preset needs at least one seed");
  const Scenario& base = opt.base.scenario;
  const auto& seeds = opt.base.seeds;
  Writer w(fs::path(opt.out_dir) / name);
  PresetOutput out;
  out.dir = w.dir().string();
  std::vector<Job> jobs;

  if (name == "fig2_convergence") {
    std::vector<ConvergenceCurves> res(seeds.size());
    ParallelFor(static_cast<int>(seeds.size()), opt.threads,
                [&](int i) { res[static_cast<std::size_t>(i)] = ConvergenceStudy(base, seeds[static_cast<std::size_t>(i)]); });
    out.summary = nlohmann::json::object();
    for (const std::string curve : {"no_irs", "fixed_phase", "delta1", "delta3", "continuous"}) {
      std::string csv = "seed,iter,objective\n";
      std::vector<double> finals;
      for (std::size_t i = 0; i < seeds.size(); ++i) {
        const auto& tr = res[i].traces.at(curve);
        for (std::size_t it = 0; it < tr.size(); ++it)
          csv += std::to_string(seeds[i]) + "," + std::to_string(it) + "," + FormatReal(tr[it]) + "\n";
        finals.push_back(tr.back());
      }
      w.Write(curve + ".csv", csv);
      const MeanStdErr s = Summarize(finals);
      out.summary[curve] = {{"final_objective",
                             {{"mean", s.mean},
                              {"std_err", s.std_err ? nlohmann::json(*s.std_err) : nlohmann::json(nullptr)}}}};
    }
    for (const std::string curve : {"no_irs", "fixed_phase", "delta1", "delta3", "continuous"})
      jobs.push_back({curve, {}, base, 0});
  } else {
    std::vector<Variant> vars;
    const bool curves = name.rfind("fig3_", 0) == 0;
    if (name == "fig3_offline_rho") {
      vars.push_back(Make("optimal", base, Scheme::kOptimal, {{"rho", ""}}));
      vars.push_back(Make("isolated", base, Scheme::kIsolated, {{"rho", "1"}}));
      for (int rho : Divisors(base.total_rounds, {5, 10, 20})) {
        Scenario s = base;
        s.offline_period_len = rho;
        vars.push_back(Make("offline_rho" + std::to_string(rho), s, Scheme::kOffline,
                            {{"rho", std::to_string(rho)}}));
      }
      vars.push_back(Make("no_irs", base, Scheme::kNoIrs, {{"rho", "1"}}));
    } else if (name == "fig3_online_V") {
      for (double scale : {0.03, 0.1, 0.3}) {
        Scenario s = base;
        s.schedule.mode = VSchedule::Mode::kVarying;
        s.schedule.scale = scale;
        vars.push_back(Make("online_varying_" + Num(scale), s, Scheme::kOnline,
                            {{"v_mode", "varying"}, {"v_scale", Num(scale)}}));
      }
      Scenario s = base;
      s.schedule.mode = VSchedule::Mode::kFixed;
      vars.push_back(Make("online_fixed_" + Num(s.schedule.scale), s, Scheme::kOnline,
                          {{"v_mode", "fixed"}, {"v_scale", Num(s.schedule.scale)}}));
      vars.push_back(Make("offline", base, Scheme::kOffline, {{"v_mode", ""}, {"v_scale", ""}}));
    } else if (name == "fig3_power_trace") {
      Scenario s = base;
      s.static_channel = true;
      vars.push_back(Make("offline", s, Scheme::kOffline));
      vars.push_back(Make("online", s, Scheme::kOnline));
      vars.push_back(Make("isolated", s, Scheme::kIsolated));
    } else if (name == "table1_rho_grid") {
      for (int rho : Divisors(base.total_rounds, {1, 2, 5, 10, 20})) {
        Scenario s = base;
        s.offline_period_len = rho;
        vars.push_back(Make("offline_rho" + std::to_string(rho), s, Scheme::kOffline,
                            {{"rho", std::to_string(rho)}}));
      }
    } else if (name == "table2_power_order") {
      const std::vector<std::tuple<std::string, std::string, Scheme>> grid = {
          {"descending", "offline", Scheme::kDescendingOffline},
          {"equal", "offline", Scheme::kEqualOffline},
          {"proposed", "offline", Scheme::kOffline},
          {"descending", "online", Scheme::kDescendingOnline},
          {"equal", "online", Scheme::kEqualOnline},
          {"proposed", "online", Scheme::kOnline}};
      for (const auto& [order, family, scheme] : grid)
        vars.push_back(Make(order + "_" + family, base, scheme,
                            {{"power_order", order}, {"design", family}}));
    } else if (name == "fig6_vs_N") {
      for (int n : {0, 8, 16, 24, 32}) {
        Scenario s = base;
        s.num_elements = n;
        for (Scheme sch : {Scheme::kOffline, Scheme::kOnline, Scheme::kIsolated})
          vars.push_back(Make(SchemeName(sch) + "_N" + std::to_string(n), s, sch,
                              {{"scheme", SchemeName(sch)}, {"N", std::to_string(n)}}));
      }
      Scenario s = base;
      s.num_elements = 0;
      vars.push_back(Make("no_irs", s, Scheme::kNoIrs, {{"scheme", "no_irs"}, {"N", "0"}}));
    } else if (name == "fig6_vs_K") {
      for (int k : {4, 6, 8, 10, 12}) {
        Scenario s = base;
        s.num_devices = k;
        for (Scheme sch : {Scheme::kOptimal, Scheme::kOffline, Scheme::kOnline, Scheme::kIsolated,
                           Scheme::kNoIrs})
          vars.push_back(Make(SchemeName(sch) + "_K" + std::to_string(k), s, sch,
                              {{"scheme", SchemeName(sch)}, {"K", std::to_string(k)}}));
      }
    }
    jobs = Expand(vars, seeds);
    const std::vector<ExperimentTrace> traces = RunJobs(jobs, opt.threads);
    out.summary = WriteTables(w, jobs, traces);
    if (curves) WriteCurves(w, jobs, traces);
    if (name == "fig3_power_trace") WritePower(w, jobs, traces);
  }

  w.Write("summary.json", out.summary.dump(2) + "\n");
  out.files = w.files();
  out.manifest = Manifest(name, opt, jobs, w);
  std::ofstream mf(w.dir() / "manifest.json", std::ios::binary | std::ios::trunc);
  mf << out.manifest.dump(2) << "\n";
  if (!mf) throw std::runtime_error("cannot write manifest");
  return out;
}

}  // namespace irsfl
