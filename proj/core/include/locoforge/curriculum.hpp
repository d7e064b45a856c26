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
#ifndef LOCOFORGE_CURRICULUM_HPP
#define LOCOFORGE_CURRICULUM_HPP

#include <Eigen/Dense>
#include <vector>

#include "locoforge/rng.hpp"

namespace locoforge {

/// Whether the schedule clock t advances per training iteration or per
/// finished episode.
enum class ProgressMode { kIteration, kEpisode };

struct CurriculumConfig {
  // Box the gripper goal is drawn from, base frame.
  Eigen::Vector2d goal_lo{0.125, -0.025};
  Eigen::Vector2d goal_hi{0.375, 0.325};

  // Starting per-axis standard deviations of the reset distribution and the
  // per-expansion increments.
  Eigen::Vector2d base_sigma{0.5, 0.2};
  Eigen::Vector2d step_sigma{0.5, 0.1};

  double threshold_fraction = 0.9;  // expand when reward_ma crosses this times max
  double d_max = 1.0;               // desired maximum target distance D
  int t_horizon = 150;              // schedule horizon T
  int max_level = 4;
  int reward_window = 10;           // moving-average length
  double max_reward_estimate = 3.0; // analytic max of the three tracking terms
  double sigma_max = 2.0;           // hard cap per axis
  ProgressMode progress_mode = ProgressMode::kIteration;

  // Acceptance region for sampled initial gripper positions: workspace box
  // intersected with the arm's reachable annulus around the mount.
  Eigen::Vector2d workspace_lo{0.02, -0.15};
  Eigen::Vector2d workspace_hi{0.60, 0.45};
  double reach_min = 0.12;
  double reach_max = 0.72;
  Eigen::Vector2d arm_mount{0.0, 0.10};

  void validate() const;
};

struct CurriculumState {
  int level = 0;
  int progress = 0;  // schedule clock t
  double reward_ma = 0.0;
  double max_reward_estimate = 3.0;
  std::vector<double> window;  // recent per-step mean rewards
};

CurriculumState init_curriculum(const CurriculumConfig& cfg);

/// Frozen end-of-schedule state used by the no-curriculum ablation: the
/// spread sits at its t = T width from the start and never changes.
CurriculumState frozen_final_curriculum(const CurriculumConfig& cfg);

/// Per-axis sigma: sqrt(base^2 * (1 + (t/T) D^2)) plus level * step, capped.
Eigen::Vector2d current_sigma(const CurriculumState& cstate, const CurriculumConfig& cfg);

struct InitialEe {
  Eigen::Vector2d goal;  // command target, base frame
  Eigen::Vector2d init;  // initial gripper position, base frame
};

/// Goal uniform in the goal box; initial position normal around the goal with
/// the current sigma, resampled into the acceptance region (20 tries, then
/// the mean itself).
InitialEe sample_initial_ee(const CurriculumState& cstate, const CurriculumConfig& cfg, Rng& rng);

bool in_reachable_workspace(const Eigen::Vector2d& p, const CurriculumConfig& cfg);

/// Advances the schedule clock, folds the iteration's mean per-step reward
/// into the moving average, and expands the level when the average crosses
/// threshold_fraction * max_reward_estimate.
CurriculumState update_on_iteration(CurriculumState cstate, const CurriculumConfig& cfg,
                                    double mean_step_reward, int episodes_elapsed);

}  // namespace locoforge

#endif  // LOCOFORGE_CURRICULUM_HPP
