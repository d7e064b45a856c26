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
#ifndef LOCOFORGE_CONFIG_HPP
#define LOCOFORGE_CONFIG_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "locoforge/acppo.hpp"
#include "locoforge/bc.hpp"
#include "locoforge/curriculum.hpp"
#include "locoforge/sim.hpp"
#include "locoforge/task.hpp"

namespace locoforge {

/// Behavior cloning settings: the pretraining hyperparameters plus the
/// demonstration budget handed to the expert.
struct BcSettings {
  BcConfig train;
  int demo_steps = 20000;

  void validate() const;
};

/// Evaluation protocol: each entry of v_x_cases becomes one case run for
/// `episodes` episodes of at most `max_steps` control steps, with the
/// gripper target random-walking inside the reachable workspace.
struct EvalConfig {
  int episodes = 64;
  int max_steps = 500;
  double walk_step = 0.005;
  uint64_t walk_seed = 9001;
  std::vector<double> v_x_cases{0.5};

  void validate() const;
};

/// Run bookkeeping: seeding, rollout shape, and output cadence.
struct RunSettings {
  uint64_t seed = 1;
  int n_envs = 64;
  int horizon = 64;
  int iterations = 300;
  int checkpoint_every = 50;
  std::string output_dir = "runs/default";

  void validate() const;
};

/// Everything one training, evaluation, or cloning run needs, grouped the
/// way the JSON config file is. A single file drives every command.
struct RunConfig {
  ModelSpec model;
  TaskConfig task;
  CurriculumConfig curriculum;
  UpdateConfig acppo;
  TrainerInit net;  // parsed from the acppo section's network keys
  BcSettings bc;
  EvalConfig eval;
  RunSettings run;

  /// Validates every section plus the cross-section requirements.
  /// Throws std::invalid_argument naming the offending field.
  void validate() const;
};

/// Parses a JSON document into a RunConfig. Absent keys keep their
/// defaults. Unknown keys, wrong types, wrong array lengths, and
/// out-of-range values all throw with the dotted key path in the message;
/// `origin` names the source in those messages.
RunConfig parse_run_config(const std::string& text, const std::string& origin = "config");

/// Reads and parses a JSON config file.
RunConfig load_run_config(const std::string& path);

/// Serializes every field of every section. Parsing the result reproduces
/// the input exactly.
std::string run_config_to_json(const RunConfig& cfg);

void save_run_config(const std::string& path, const RunConfig& cfg);

}  // namespace locoforge

#endif  // LOCOFORGE_CONFIG_HPP
