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
#include "locoforge/curriculum.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace locoforge {

void CurriculumConfig::validate() const {
  if (!(goal_lo.x() < goal_hi.x()) || !(goal_lo.y() < goal_hi.y()))
    throw std::invalid_argument("curriculum: goal box is empty");
  if (!(base_sigma.minCoeff() > 0.0)) throw std::invalid_argument("curriculum: base_sigma must be positive");
  if (step_sigma.minCoeff() < 0.0) throw std::invalid_argument("curriculum: step_sigma must be non-negative");
  if (!(threshold_fraction > 0.0 && threshold_fraction <= 1.0))
    throw std::invalid_argument("curriculum: threshold_fraction must be in (0, 1]");
  if (d_max < 0.0) throw std::invalid_argument("curriculum: d_max must be non-negative");
  if (t_horizon <= 0) throw std::invalid_argument("curriculum: t_horizon must be positive");
  if (max_level < 0) throw std::invalid_argument("curriculum: max_level must be non-negative");
  if (reward_window <= 0) throw std::invalid_argument("curriculum: reward_window must be positive");
  if (!(max_reward_estimate > 0.0))
    throw std::invalid_argument("curriculum: max_reward_estimate must be positive");
  if (!(sigma_max > 0.0)) throw std::invalid_argument("curriculum: sigma_max must be positive");
  if (!(workspace_lo.x() < workspace_hi.x()) || !(workspace_lo.y() < workspace_hi.y()))
    throw std::invalid_argument("curriculum: workspace box is empty");
  if (!(reach_min >= 0.0 && reach_min < reach_max))
    throw std::invalid_argument("curriculum: need 0 <= reach_min < reach_max");
  // Goals double as the resampling fallback, so the whole goal box must sit
  // inside the acceptance region. Nearest point of the box to the mount is
  // the mount clamped into the box; farthest is one of the corners.
  if (goal_lo.x() < workspace_lo.x() || goal_lo.y() < workspace_lo.y() ||
      goal_hi.x() > workspace_hi.x() || goal_hi.y() > workspace_hi.y())
    throw std::invalid_argument("curriculum: goal box leaves the workspace box");
  const Eigen::Vector2d nearest{std::clamp(arm_mount.x(), goal_lo.x(), goal_hi.x()),
                                std::clamp(arm_mount.y(), goal_lo.y(), goal_hi.y())};
  if ((nearest - arm_mount).norm() < reach_min)
    throw std::invalid_argument("curriculum: goal box enters the unreachable inner disk");
  const Eigen::Vector2d corners[4] = {
      {goal_lo.x(), goal_lo.y()}, {goal_lo.x(), goal_hi.y()},
      {goal_hi.x(), goal_lo.y()}, {goal_hi.x(), goal_hi.y()}};
  for (const auto& c : corners) {
    if ((c - arm_mount).norm() > reach_max)
      throw std::invalid_argument("curriculum: goal box leaves the reachable annulus");
  }
}

CurriculumState init_curriculum(const CurriculumConfig& cfg) {
  cfg.validate();
  CurriculumState s;
  s.max_reward_estimate = cfg.max_reward_estimate;
  return s;
}

CurriculumState frozen_final_curriculum(const CurriculumConfig& cfg) {
  CurriculumState s = init_curriculum(cfg);
  s.progress = cfg.t_horizon;
  return s;
}

Eigen::Vector2d current_sigma(const CurriculumState& cstate, const CurriculumConfig& cfg) {
  const double t = std::clamp(static_cast<double>(cstate.progress), 0.0,
                              static_cast<double>(cfg.t_horizon));
  const double growth = 1.0 + (t / cfg.t_horizon) * cfg.d_max * cfg.d_max;
  Eigen::Vector2d sigma;
  for (int a = 0; a < 2; ++a) {
    const double base = cfg.base_sigma[a];
    sigma[a] = std::sqrt(base * base * growth) + cstate.level * cfg.step_sigma[a];
    sigma[a] = std::min(sigma[a], cfg.sigma_max);
  }
  return sigma;
}

bool in_reachable_workspace(const Eigen::Vector2d& p, const CurriculumConfig& cfg) {
  if (p.x() < cfg.workspace_lo.x() || p.x() > cfg.workspace_hi.x()) return false;
  if (p.y() < cfg.workspace_lo.y() || p.y() > cfg.workspace_hi.y()) return false;
  const double r = (p - cfg.arm_mount).norm();
  return r >= cfg.reach_min && r <= cfg.reach_max;
}

InitialEe sample_initial_ee(const CurriculumState& cstate, const CurriculumConfig& cfg, Rng& rng) {
  InitialEe out;
  out.goal.x() = rng.uniform(cfg.goal_lo.x(), cfg.goal_hi.x());
  out.goal.y() = rng.uniform(cfg.goal_lo.y(), cfg.goal_hi.y());
  const Eigen::Vector2d sigma = current_sigma(cstate, cfg);
  for (int attempt = 0; attempt < 20; ++attempt) {
    Eigen::Vector2d cand{rng.normal(out.goal.x(), sigma.x()),
                         rng.normal(out.goal.y(), sigma.y())};
    if (in_reachable_workspace(cand, cfg)) {
      out.init = cand;
      return out;
    }
  }
  out.init = out.goal;
  return out;
}

CurriculumState update_on_iteration(CurriculumState cstate, const CurriculumConfig& cfg,
                                    double mean_step_reward, int episodes_elapsed) {
  cstate.progress += cfg.progress_mode == ProgressMode::kIteration ? 1 : episodes_elapsed;
  cstate.progress = std::min(cstate.progress, cfg.t_horizon);

  cstate.window.push_back(mean_step_reward);
  while (static_cast<int>(cstate.window.size()) > cfg.reward_window)
    cstate.window.erase(cstate.window.begin());
  cstate.reward_ma = std::accumulate(cstate.window.begin(), cstate.window.end(), 0.0) /
                     static_cast<double>(cstate.window.size());

  if (cstate.level < cfg.max_level &&
      cstate.reward_ma >= cfg.threshold_fraction * cstate.max_reward_estimate) {
    cstate.level += 1;
    cstate.window.clear();
    cstate.reward_ma = 0.0;
  }
  return cstate;
}

}  // namespace locoforge
