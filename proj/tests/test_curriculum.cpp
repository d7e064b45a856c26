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
#include <algorithm>
#include <cmath>
#include <vector>

#include <doctest.h>

#include "locoforge/curriculum.hpp"

using namespace locoforge;

namespace {

CurriculumConfig wide_config() {
  CurriculumConfig cfg;
  cfg.workspace_lo = {-50.0, -50.0};
  cfg.workspace_hi = {50.0, 50.0};
  cfg.reach_min = 0.0;
  cfg.reach_max = 1000.0;
  cfg.sigma_max = 100.0;
  return cfg;
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double ks_statistic(std::vector<double> samples) {
  std::sort(samples.begin(), samples.end());
  const int n = static_cast<int>(samples.size());
  double d = 0.0;
  for (int i = 0; i < n; ++i) {
    const double f = normal_cdf(samples[i]);
    d = std::max(d, std::abs(f - static_cast<double>(i) / n));
    d = std::max(d, std::abs(static_cast<double>(i + 1) / n - f));
  }
  return d;
}

}  // namespace

TEST_CASE("sigma schedule endpoints") {
  CurriculumConfig cfg = wide_config();
  cfg.base_sigma = {1.0, 0.2};
  cfg.step_sigma = {0.5, 0.1};
  cfg.d_max = 2.0;
  cfg.t_horizon = 100;

  CurriculumState s = init_curriculum(cfg);
  Eigen::Vector2d sigma = current_sigma(s, cfg);
  CHECK(sigma.x() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(sigma.y() == doctest::Approx(0.2).epsilon(1e-12));

  s.progress = cfg.t_horizon;
  sigma = current_sigma(s, cfg);
  // sqrt(1 + D^2) with D = 2.
  CHECK(sigma.x() == doctest::Approx(std::sqrt(5.0)).epsilon(1e-12));
  CHECK(sigma.x() == doctest::Approx(2.2360679774997896).epsilon(1e-12));
  CHECK(sigma.y() == doctest::Approx(0.2 * std::sqrt(5.0)).epsilon(1e-12));

  s.level = 3;
  sigma = current_sigma(s, cfg);
  CHECK(sigma.x() == doctest::Approx(std::sqrt(5.0) + 1.5).epsilon(1e-12));
  CHECK(sigma.y() == doctest::Approx(0.2 * std::sqrt(5.0) + 0.3).epsilon(1e-12));
}

TEST_CASE("sigma is monotone in progress and level, and capped") {
  CurriculumConfig cfg = wide_config();
  cfg.d_max = 1.5;
  CurriculumState s = init_curriculum(cfg);
  double prev = 0.0;
  for (int t = 0; t <= cfg.t_horizon; t += 10) {
    s.progress = t;
    const double v = current_sigma(s, cfg).x();
    CHECK(v >= prev);
    prev = v;
  }
  s.progress = 50;
  prev = 0.0;
  for (int level = 0; level <= cfg.max_level; ++level) {
    s.level = level;
    const double v = current_sigma(s, cfg).y();
    CHECK(v >= prev);
    prev = v;
  }

  cfg.sigma_max = 0.3;
  s.level = cfg.max_level;
  s.progress = cfg.t_horizon;
  const Eigen::Vector2d capped = current_sigma(s, cfg);
  CHECK(capped.x() == doctest::Approx(0.3).epsilon(1e-12));
  CHECK(capped.maxCoeff() <= 0.3 + 1e-15);
}

TEST_CASE("progress clock clamps at the horizon and can count episodes") {
  CurriculumConfig cfg = wide_config();
  cfg.t_horizon = 5;
  CurriculumState s = init_curriculum(cfg);
  for (int i = 0; i < 9; ++i) s = update_on_iteration(s, cfg, 0.0, 1);
  CHECK(s.progress == 5);

  cfg.progress_mode = ProgressMode::kEpisode;
  cfg.t_horizon = 100;
  s = init_curriculum(cfg);
  s = update_on_iteration(s, cfg, 0.0, 7);
  CHECK(s.progress == 7);
  s = update_on_iteration(s, cfg, 0.0, 3);
  CHECK(s.progress == 10);
}

TEST_CASE("moving average window") {
  CurriculumConfig cfg = wide_config();
  cfg.reward_window = 3;
  cfg.max_reward_estimate = 100.0;  // keep expansions out of the way
  CurriculumState s = init_curriculum(cfg);
  s = update_on_iteration(s, cfg, 0.5, 1);
  CHECK(s.reward_ma == doctest::Approx(0.5).epsilon(1e-12));
  s = update_on_iteration(s, cfg, 0.7, 1);
  CHECK(s.reward_ma == doctest::Approx(0.6).epsilon(1e-12));
  s = update_on_iteration(s, cfg, 0.9, 1);
  CHECK(s.reward_ma == doctest::Approx(0.7).epsilon(1e-12));
  s = update_on_iteration(s, cfg, 1.1, 1);
  CHECK(s.reward_ma == doctest::Approx(0.9).epsilon(1e-12));
}

TEST_CASE("expansion triggers exactly at the threshold and resets the average") {
  CurriculumConfig cfg = wide_config();
  cfg.max_reward_estimate = 1.0;
  cfg.threshold_fraction = 0.9;
  cfg.reward_window = 1;
  CurriculumState s = init_curriculum(cfg);

  s = update_on_iteration(s, cfg, 0.9 - 1e-9, 1);
  CHECK(s.level == 0);
  s = update_on_iteration(s, cfg, 0.9, 1);
  CHECK(s.level == 1);
  CHECK(s.reward_ma == 0.0);
  CHECK(s.window.empty());

  cfg.max_level = 1;
  s = update_on_iteration(s, cfg, 5.0, 1);
  CHECK(s.level == 1);  // capped
}

TEST_CASE("expansion repeats once the refilled average recovers") {
  CurriculumConfig cfg = wide_config();
  cfg.max_reward_estimate = 1.0;
  cfg.reward_window = 4;
  cfg.max_level = 20;
  CurriculumState s = init_curriculum(cfg);
  for (int i = 0; i < 8; ++i) s = update_on_iteration(s, cfg, 1.0, 1);
  CHECK(s.level == 8);

  // A poor iteration right after an expansion drags the fresh average down.
  s = update_on_iteration(s, cfg, 0.0, 1);
  CHECK(s.level == 8);
  s = update_on_iteration(s, cfg, 1.0, 1);  // mean 0.5, still below
  CHECK(s.level == 8);
}

TEST_CASE("frozen final state sits at the schedule endpoint") {
  CurriculumConfig cfg = wide_config();
  cfg.d_max = 2.0;
  cfg.base_sigma = {1.0, 1.0};
  const CurriculumState frozen = frozen_final_curriculum(cfg);
  CHECK(frozen.level == 0);
  CHECK(current_sigma(frozen, cfg).x() == doctest::Approx(std::sqrt(5.0)).epsilon(1e-12));
}

TEST_CASE("goals stay in the goal box and inits stay in the acceptance region") {
  CurriculumConfig cfg;  // default workspace, tighter than the wide one
  CurriculumState s = init_curriculum(cfg);
  s.progress = cfg.t_horizon;
  s.level = cfg.max_level;
  Rng rng(101, 0);
  for (int i = 0; i < 5000; ++i) {
    const InitialEe draw = sample_initial_ee(s, cfg, rng);
    CHECK(draw.goal.x() >= cfg.goal_lo.x());
    CHECK(draw.goal.x() <= cfg.goal_hi.x());
    CHECK(draw.goal.y() >= cfg.goal_lo.y());
    CHECK(draw.goal.y() <= cfg.goal_hi.y());
    CHECK(in_reachable_workspace(draw.init, cfg));
  }
}

TEST_CASE("fallback lands on the goal when nothing is accepted") {
  CurriculumConfig cfg;
  // Workspace exactly the goal box with an enormous sigma: essentially every
  // draw lands outside and the mean is returned.
  cfg.workspace_lo = cfg.goal_lo;
  cfg.workspace_hi = cfg.goal_hi;
  cfg.base_sigma = {50.0, 50.0};
  cfg.sigma_max = 100.0;
  CurriculumState s = init_curriculum(cfg);
  Rng rng(7, 0);
  int fell_back = 0;
  for (int i = 0; i < 200; ++i) {
    const InitialEe draw = sample_initial_ee(s, cfg, rng);
    CHECK(in_reachable_workspace(draw.init, cfg));
    if (draw.init == draw.goal) ++fell_back;
  }
  CHECK(fell_back > 100);
}

TEST_CASE("initial positions are normal around the goal") {
  CurriculumConfig cfg = wide_config();
  cfg.base_sigma = {0.5, 0.2};
  CurriculumState s = init_curriculum(cfg);
  s.progress = 40;
  s.level = 2;
  const Eigen::Vector2d sigma = current_sigma(s, cfg);

  Rng rng(20260822, 1);
  const int n = 4000;
  std::vector<double> zx, zy;
  zx.reserve(n);
  zy.reserve(n);
  for (int i = 0; i < n; ++i) {
    const InitialEe draw = sample_initial_ee(s, cfg, rng);
    zx.push_back((draw.init.x() - draw.goal.x()) / sigma.x());
    zy.push_back((draw.init.y() - draw.goal.y()) / sigma.y());
  }
  // Kolmogorov-Smirnov against the standard normal at alpha = 0.01.
  for (auto* z : {&zx, &zy}) {
    const double d = ks_statistic(*z);
    const double stat = d * (std::sqrt(static_cast<double>(n)) + 0.12 +
                             0.11 / std::sqrt(static_cast<double>(n)));
    CHECK(stat < 1.628);
  }
}

TEST_CASE("sampling is deterministic in the rng") {
  CurriculumConfig cfg;
  CurriculumState s = init_curriculum(cfg);
  Rng a(99, 5), b(99, 5);
  for (int i = 0; i < 50; ++i) {
    const InitialEe da = sample_initial_ee(s, cfg, a);
    const InitialEe db = sample_initial_ee(s, cfg, b);
    CHECK(da.goal == db.goal);
    CHECK(da.init == db.init);
  }
}

TEST_CASE("config validation") {
  CurriculumConfig cfg;
  CHECK_NOTHROW(cfg.validate());

  CurriculumConfig bad = cfg;
  bad.goal_lo.x() = bad.goal_hi.x();
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);

  bad = cfg;
  bad.threshold_fraction = 0.0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);

  bad = cfg;
  bad.t_horizon = 0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);

  bad = cfg;
  bad.goal_hi = {10.0, 10.0};  // leaves the workspace
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);

  bad = cfg;
  bad.reach_max = 0.1;  // goal box outside the annulus
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}
