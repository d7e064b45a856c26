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
#include "locoforge/metrics.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace locoforge {

namespace {

using Json = nlohmann::ordered_json;

[[noreturn]] void line_error(const std::string& path, int64_t line, const std::string& msg) {
  throw std::runtime_error(path + ":" + std::to_string(line) + ": " + msg);
}

std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

}  // namespace

double MetricsRow::at(const std::string& key) const {
  const auto it = values.find(key);
  if (it == values.end())
    throw std::runtime_error("metrics line " + std::to_string(line) + " has no key '" + key +
                             "'");
  return it->second;
}

std::string metrics_to_json_line(const IterationMetrics& m, bool include_barrier) {
  Json j;
  j["iter"] = m.iter;
  j["mean_reward"] = m.mean_reward;
  j["J_c_arm"] = m.j_cost[0];
  j["J_c_gripper"] = m.j_cost[1];
  j["J_c_force"] = m.j_cost[2];
  j["kl"] = m.kl;
  j["entropy"] = m.entropy;
  j["sigma_level"] = m.sigma_level;
  j["wallclock"] = m.wallclock;
  j["surrogate"] = m.surrogate;
  j["value_loss"] = m.value_loss;
  if (include_barrier) {
    j["barrier_arm"] = m.barrier[0];
    j["barrier_gripper"] = m.barrier[1];
    j["barrier_force"] = m.barrier[2];
  }
  j["beta"] = m.beta;
  j["action_std"] = m.action_std;
  j["episodes"] = m.episodes;
  j["aborted"] = m.aborted;
  return j.dump();
}

std::vector<MetricsRow> load_metrics(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("metrics: cannot read '" + path + "'");

  std::vector<MetricsRow> rows;
  std::string text;
  int64_t line_no = 0;
  while (std::getline(in, text)) {
    ++line_no;
    if (text.empty()) continue;
    Json j;
    try {
      j = Json::parse(text);
    } catch (const Json::parse_error&) {
      line_error(path, line_no, "malformed metrics line");
    }
    if (!j.is_object()) line_error(path, line_no, "metrics line must be a JSON object");
    MetricsRow row;
    row.line = line_no;
    for (const auto& item : j.items()) {
      const Json& v = item.value();
      if (v.is_number())
        row.values[item.key()] = v.get<double>();
      else if (v.is_boolean())
        row.values[item.key()] = v.get<bool>() ? 1.0 : 0.0;
      else
        line_error(path, line_no, "non-numeric value for key '" + item.key() + "'");
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<std::string> eval_trace_columns() {
  return {"step",     "v_x",       "v_x_cmd",    "ee_x",      "ee_y",
          "ee_cmd_x", "ee_cmd_y",  "c_arm",      "c_gripper", "c_force",
          "arm1_over", "arm2_over", "arm3_over"};
}

void save_trace_csv(const std::string& path, const Eigen::MatrixXd& table,
                    const std::vector<std::string>& columns) {
  if (static_cast<Eigen::Index>(columns.size()) != table.cols())
    throw std::invalid_argument("trace: column name count must match the table width");
  std::ofstream out(path);
  if (!out) throw std::runtime_error("trace: cannot write '" + path + "'");
  for (size_t c = 0; c < columns.size(); ++c) {
    if (c) out << ',';
    out << columns[c];
  }
  out << '\n';
  for (Eigen::Index r = 0; r < table.rows(); ++r) {
    for (Eigen::Index c = 0; c < table.cols(); ++c) {
      if (c) out << ',';
      out << format_double(table(r, c));
    }
    out << '\n';
  }
  if (!out) throw std::runtime_error("trace: cannot write '" + path + "'");
}

int TraceTable::column_index(const std::string& name) const {
  for (size_t c = 0; c < columns.size(); ++c)
    if (columns[c] == name) return static_cast<int>(c);
  return -1;
}

TraceTable load_trace_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("trace: cannot read '" + path + "'");

  TraceTable table;
  std::string text;
  int64_t line_no = 0;

  if (!std::getline(in, text)) line_error(path, 1, "missing header row");
  ++line_no;
  {
    std::stringstream ss(text);
    std::string cell;
    while (std::getline(ss, cell, ',')) table.columns.push_back(cell);
  }
  if (table.columns.empty()) line_error(path, 1, "missing header row");

  std::vector<double> values;
  int64_t n_rows = 0;
  while (std::getline(in, text)) {
    ++line_no;
    if (text.empty()) continue;
    size_t pos = 0;
    size_t cells = 0;
    while (true) {
      const size_t next = text.find(',', pos);
      const std::string_view cell(text.data() + pos,
                                  (next == std::string::npos ? text.size() : next) - pos);
      double v = 0.0;
      const auto res = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (res.ec != std::errc() || res.ptr != cell.data() + cell.size())
        line_error(path, line_no, "malformed number '" + std::string(cell) + "'");
      values.push_back(v);
      ++cells;
      if (next == std::string::npos) break;
      pos = next + 1;
    }
    if (cells != table.columns.size())
      line_error(path, line_no,
                 "expected " + std::to_string(table.columns.size()) + " columns, found " +
                     std::to_string(cells));
    ++n_rows;
  }

  table.data.resize(n_rows, static_cast<Eigen::Index>(table.columns.size()));
  for (int64_t r = 0; r < n_rows; ++r)
    for (size_t c = 0; c < table.columns.size(); ++c)
      table.data(r, static_cast<Eigen::Index>(c)) =
          values[static_cast<size_t>(r) * table.columns.size() + c];
  return table;
}

}  // namespace locoforge
