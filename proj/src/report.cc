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
#include "irsfl/report.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <numeric>

#include "irsfl/errors.h"

namespace irsfl {
namespace {

std::vector<double> Ranks(const std::vector<double>& x) {
  std::vector<std::size_t> idx(x.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
  std::vector<double> r(x.size());
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    while (j + 1 < idx.size() && x[idx[j + 1]] == x[idx[i]]) ++j;
    const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t l = i; l <= j; ++l) r[idx[l]] = avg;
    i = j + 1;
  }
  return r;
}

nlohmann::json ToJson(const MeanStdErr& s) {
  nlohmann::json j;
  j["mean"] = s.mean;
  j["std_err"] = s.std_err ? nlohmann::json(*s.std_err) : nlohmann::json(nullptr);
  return j;
}

}  // namespace

MeanStdErr Summarize(const std::vector<double>& xs) {
  if (xs.empty()) throw DomainError("cannot summarize an empty sample");
  MeanStdErr s;
  double sum = 0.0;
  for (double x : xs) sum += x;
  s.mean = sum / static_cast<double>(xs.size());
  if (xs.size() > 1) {
    double ss = 0.0;
    for (double x : xs) ss += (x - s.mean) * (x - s.mean);
    const double n = static_cast<double>(xs.size());
    s.std_err = std::sqrt(ss / (n - 1.0) / n);
  }
  return s;
}

double Spearman(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2)
    throw DimensionError("rank correlation needs two equal series of length >= 2");
  const std::vector<double> rx = Ranks(x), ry = Ranks(y);
  const double n = static_cast<double>(x.size());
  const double mean = 0.5 * (n + 1.0);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mean) * (ry[i] - mean);
    sxx += (rx[i] - mean) * (rx[i] - mean);
    syy += (ry[i] - mean) * (ry[i] - mean);
  }
  if (sxx == 0.0 || syy == 0.0) throw DegenerateInputError("rank correlation of a constant series");
  return sxy / std::sqrt(sxx * syy);
}

RVec AveragePower(const ExperimentTrace& trace) {
  if (trace.rounds.empty()) throw DomainError("empty trace");
  RVec sum = RVec::Zero(trace.rounds.front().power.size());
  for (const RoundRecord& r : trace.rounds) sum += r.power;
  return sum / static_cast<double>(trace.rounds.size());
}

std::vector<CheckResult> TraceChecks(const ExperimentTrace& trace, const Scenario& sc) {
  std::vector<CheckResult> out;
  const int total = sc.total_rounds;
  CheckResult len{"trace_length", false, 0.0, 0.0};
  len.value = std::abs(static_cast<double>(trace.rounds.size()) - total) +
              std::abs(static_cast<double>(trace.gap_curve.size()) - (total + 1)) +
              std::abs(static_cast<double>(trace.bound_curve.size()) - (total + 1));
  len.passed = len.value == 0.0;
  out.push_back(len);
  if (!len.passed) return out;

  CheckResult bound{"gap_within_bound", true, -std::numeric_limits<double>::infinity(), 0.0};
  for (std::size_t t = 0; t < trace.gap_curve.size(); ++t)
    bound.value = std::max(bound.value, trace.gap_curve[t] - trace.bound_curve[t]);
  bound.passed = bound.value <= 0.0;
  out.push_back(bound);

  bool has_queue = false;
  double min_queue = std::numeric_limits<double>::infinity();
  for (const RoundRecord& r : trace.rounds) {
    if (r.queue.size() == 0) continue;
    has_queue = true;
    min_queue = std::min(min_queue, r.queue.minCoeff());
  }
  if (has_queue) out.push_back({"queues_nonnegative", min_queue >= 0.0, -min_queue, 0.0});

  if (sc.scheme == Scheme::kOnline) {
    const double ratio = AveragePower(trace).maxCoeff() / sc.p_avg_w;
    out.push_back({"average_power_ratio", ratio <= 1.05, ratio, 1.05});
  }
  if (trace.comparator) {
    const ComparatorReport& t2 = *trace.comparator;
    out.push_back({"comparator_gap_inequality", t2.gap_holds, -t2.gap_slack, 0.0});
    out.push_back({"comparator_energy_inequality", t2.energy_holds,
                   -t2.energy_slack.minCoeff(), 0.0});
  }
  return out;
}

nlohmann::json EmitSummary(const std::vector<ExperimentTrace>& traces, const Scenario& sc) {
  if (traces.empty()) throw DomainError("summary needs at least one trace");
  std::vector<double> losses, gaps, powers;
  nlohmann::json per_seed = nlohmann::json::array();
  bool all_ok = true;
  for (const ExperimentTrace& tr : traces) {
    losses.push_back(tr.final_loss);
    gaps.push_back(tr.final_gap);
    powers.push_back(AveragePower(tr).mean());
    nlohmann::json checks = nlohmann::json::array();
    for (const CheckResult& c : TraceChecks(tr, sc)) {
      all_ok = all_ok && c.passed;
      checks.push_back({{"name", c.name}, {"passed", c.passed}, {"value", c.value}, {"limit", c.limit}});
    }
    per_seed.push_back({{"seed", tr.seed},
                        {"final_loss", tr.final_loss},
                        {"final_gap", tr.final_gap},
                        {"mean_power", powers.back()},
                        {"checks", checks}});
  }
  nlohmann::json j;
  j["scheme"] = traces.front().scheme;
  j["num_traces"] = traces.size();
  nlohmann::json seeds = nlohmann::json::array();
  for (const ExperimentTrace& tr : traces) seeds.push_back(tr.seed);
  j["seeds"] = seeds;
  j["final_loss"] = ToJson(Summarize(losses));
  j["final_gap"] = ToJson(Summarize(gaps));
  j["mean_power"] = ToJson(Summarize(powers));
  j["per_seed"] = per_seed;
  j["checks_passed"] = all_ok;
  return j;
}

std::string FormatReal(double x) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), x);
  if (ec != std::errc()) throw DomainError("number formatting failed");
  return std::string(buf, p);
}

std::string TraceCsv(const ExperimentTrace& trace) {
  std::string out =
      "round,loss,gap,bound,grad_sq,bias_sq,mse,realized_err_sq,v,design_objective,"
      "mean_power,max_power\n";
  for (const RoundRecord& r : trace.rounds) {
    out += std::to_string(r.round) + "," + FormatReal(r.loss) + "," + FormatReal(r.gap) + "," +
           FormatReal(r.bound) + "," + FormatReal(r.grad_sq) + "," + FormatReal(r.bias_sq) + "," +
           FormatReal(r.mse) + "," + FormatReal(r.realized_err_sq) + "," + FormatReal(r.v) + "," +
           FormatReal(r.design_objective) + "," + FormatReal(r.power.mean()) + "," +
           FormatReal(r.power.maxCoeff()) + "\n";
  }
  if (!trace.bound_curve.empty())
    out += std::to_string(trace.rounds.size()) + "," + FormatReal(trace.final_loss) + "," +
           FormatReal(trace.final_gap) + "," + FormatReal(trace.bound_curve.back()) +
           ",,,,,,,,\n";
  return out;
}

std::string PowerCsv(const ExperimentTrace& trace) {
  std::string out = "round,device,power,queue\n";
  for (const RoundRecord& r : trace.rounds) {
    for (Eigen::Index k = 0; k < r.power.size(); ++k) {
      out += std::to_string(r.round) + "," + std::to_string(k) + "," + FormatReal(r.power[k]) + ",";
      if (r.queue.size() == r.power.size()) out += FormatReal(r.queue[k]);
      out += "\n";
    }
  }
  return out;
}

}  // namespace irsfl
