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
#ifndef LOCOFORGE_PIPELINE_HPP
#define LOCOFORGE_PIPELINE_HPP

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "locoforge/acppo.hpp"
#include "locoforge/bc.hpp"
#include "locoforge/checkpoint.hpp"
#include "locoforge/config.hpp"

namespace locoforge {

/// Drivers shared by the command-line tool and the test suite. Everything
/// here is deterministic for a fixed RunConfig: environment streams are
/// derived from run.seed, and the thread count never changes results.

struct TrainSession {
  RunConfig cfg;
  bool ablate_constraints = false;
  bool ablate_curriculum = false;
  int n_threads = 1;

  /// Copied over the freshly initialized actor before iteration 0.
  /// Rejected when the layout hash or architecture does not match.
  std::optional<ActorCheckpoint> warm_start;

  /// Continues a saved run; overrides all initialization above.
  std::optional<TrainCheckpoint> resume;

  /// Invoked once per finished iteration.
  std::function<void(const IterationMetrics&)> on_iteration;

  /// Invoked when a periodic or final checkpoint is due; receives the
  /// iteration count completed so far.
  std::function<void(const TrainCheckpoint&, int64_t)> on_checkpoint;
};

struct TrainOutcome {
  TrainerState trainer;
  CurriculumState curriculum;
  std::vector<EnvSnapshot> envs;
  std::vector<IterationMetrics> metrics;  // iterations run by this call
};

/// Runs the training loop from its current position (0 for a fresh
/// session, the stored iteration when resuming) to cfg.run.iterations.
TrainOutcome run_training(const TrainSession& session);

/// Assembles a checkpoint from a finished or in-flight training state.
TrainCheckpoint make_checkpoint(const RunConfig& cfg, const TrainerState& trainer,
                                const CurriculumState& curriculum,
                                const std::vector<EnvSnapshot>& envs);

struct EvalCaseResult {
  double v_x_cmd = 0.0;
  EvalReport report;
};

/// Runs every eval case in cfg.eval against the actor: fixed velocity
/// command, random-walking gripper target, traces recorded.
std::vector<EvalCaseResult> run_evaluation(const RunConfig& cfg, const TrainerState& trainer);

struct BcOutcome {
  DemoSet demos;
  DemoStats stats;
  NetParams actor;
  BcReport report;
};

/// Collects expert demonstrations and pretrains an actor with the exact
/// architecture and initialization the trainer would use, so the result
/// can warm-start training.
BcOutcome run_bc(const RunConfig& cfg);

/// Rollout worker count: LOCOFORGE_THREADS when set, otherwise the
/// hardware count, capped at 8 and at n_envs.
int resolve_threads(int n_envs);

}  // namespace locoforge

#endif  // LOCOFORGE_PIPELINE_HPP
