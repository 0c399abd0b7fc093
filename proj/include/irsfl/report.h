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
// Trace serialization and cross-seed summaries. Column layouts are listed
// in docs/csv_schemas.md.
#ifndef IRSFL_REPORT_H_
#define IRSFL_REPORT_H_

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "irsfl/fl_sim.h"

namespace irsfl {

struct MeanStdErr {
  double mean = 0.0;
  // Sample standard deviation over sqrt(n); empty for a single value.
  std::optional<double> std_err;
};

// Throws DomainError on an empty sample.
MeanStdErr Summarize(const std::vector<double>& xs);

// Rank correlation with tied values given their average rank. Throws
// DimensionError on a length mismatch or fewer than two points and
// DegenerateInputError when either series is constant.
double Spearman(const std::vector<double>& x, const std::vector<double>& y);

// Checks one trace against the run-level properties that hold for every
// scheme: trace length, realized gap <= recursion bound on every round, and
// for online schemes nonnegative queues, per-device time-averaged power
// within 1.05 p_avg and, when computed, both comparator inequalities.
struct CheckResult {
  std::string name;
  bool passed = false;
  double value = 0.0;  // worst observed value
  double limit = 0.0;  // passes when value <= limit
};
std::vector<CheckResult> TraceChecks(const ExperimentTrace& trace, const Scenario& sc);

// Per-device time-averaged |b|^2 in watts.
RVec AveragePower(const ExperimentTrace& trace);

// {"scheme", "num_traces", "seeds", "final_loss": {"mean", "std_err"},
//  "final_gap": {...}, "mean_power": {...}, "per_seed": [...],
//  "checks_passed"}. std_err is null for one trace. Throws DomainError on
// an empty list.
nlohmann::json EmitSummary(const std::vector<ExperimentTrace>& traces, const Scenario& sc);

// Per-round metrics, one row per round plus a final row for w_{T+1}.
std::string TraceCsv(const ExperimentTrace& trace);

// One row per (round, device): power and, for online schemes, queue.
std::string PowerCsv(const ExperimentTrace& trace);

// Shortest round-trip decimal form used in every CSV.
std::string FormatReal(double x);

}  // namespace irsfl

#endif  // IRSFL_REPORT_H_
