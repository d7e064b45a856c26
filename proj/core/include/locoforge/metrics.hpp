/*
 Copyright 2026 The Locoforge Authors

 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

      https://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/
#ifndef LOCOFORGE_METRICS_HPP
#define LOCOFORGE_METRICS_HPP

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "locoforge/acppo.hpp"

namespace locoforge {

/// One metrics line: iter, mean_reward, J_c_arm, J_c_gripper, J_c_force,
/// kl, entropy, sigma_level, wallclock, plus the optimizer diagnostics.
/// The barrier keys are present only when include_barrier is set; a run
/// with constraints ablated has no barrier to report.
std::string metrics_to_json_line(const IterationMetrics& m, bool include_barrier);

struct MetricsRow {
  int64_t line = 0;  // 1-based position in the file
  std::map<std::string, double> values;

  double at(const std::string& key) const;
  bool has(const std::string& key) const { return values.count(key) != 0; }
};

/// Reads a newline-delimited JSON metrics file. Malformed lines throw a
/// std::runtime_error carrying "path:line".
std::vector<MetricsRow> load_metrics(const std::string& path);

/// Column names matching EvalTraceCol, in order.
std::vector<std::string> eval_trace_columns();

/// Writes a numeric table as CSV with a header row.
void save_trace_csv(const std::string& path, const Eigen::MatrixXd& table,
                    const std::vector<std::string>& columns);

struct TraceTable {
  std::vector<std::string> columns;
  Eigen::MatrixXd data;

  int column_index(const std::string& name) const;  // -1 when absent
};

/// Reads a CSV written by save_trace_csv. Malformed rows throw a
/// std::runtime_error carrying "path:line".
TraceTable load_trace_csv(const std::string& path);

}  // namespace locoforge

#endif  // LOCOFORGE_METRICS_HPP
