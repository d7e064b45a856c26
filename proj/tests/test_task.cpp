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
#include <cmath>

#include <doctest.h>

#include "locoforge/task.hpp"

using namespace locoforge;

namespace {

SimState still_state() {
  SimState s;
  s.q.setZero();
  s.qd.setZero();
  return s;
}

}  // namespace

TEST_CASE("velocity tracking reward fixture") {
  ModelSpec model;
  TaskConfig cfg;
  SimState s = still_state();
  s.qd[kBaseX] = 0.5;
  KinematicsResult kin = forward_kinematics(model, s.q);
  CommandSet cmd;
  cmd.v_x_cmd = 1.0;
  const RewardTerms r = compute_rewards(cfg, model, s, kin, cmd, s.qd[kBaseX],
                                        Eigen::Vector2d::Zero(), Vec6::Zero());
  CHECK(r.lin_vel == doctest::Approx(std::exp(-1.875)).epsilon(1e-12));
  CHECK(r.lin_vel == doctest::Approx(0.15335496684492847).epsilon(1e-12));
  CHECK(r.accel_limit == 0.0);
}

TEST_CASE("energy penalty fixture") {
  ModelSpec model;
  TaskConfig cfg;
  SimState s = still_state();
  KinematicsResult kin = forward_kinematics(model, s.q);
  CommandSet cmd;
  Vec6 tau;
  tau << 10.0, 10.0, 10.0, 0.0, 0.0, 0.0;
  const RewardTerms r =
      compute_rewards(cfg, model, s, kin, cmd, 0.0, Eigen::Vector2d::Zero(), tau);
  CHECK(r.energy == doctest::Approx(-0.003).epsilon(1e-12));
}

TEST_CASE("acceleration and orientation penalties") {
  ModelSpec model;
  TaskConfig cfg;
  SimState s = still_state();
  s.qd[kBaseX] = 0.5;
  s.q[kPitch] = 0.5;
  KinematicsResult kin = forward_kinematics(model, s.q);
  CommandSet cmd;
  cmd.v_x_cmd = 0.5;
  const RewardTerms r =
      compute_rewards(cfg, model, s, kin, cmd, 1.0, Eigen::Vector2d::Zero(), Vec6::Zero());
  CHECK(r.accel_limit == doctest::Approx(-0.025).epsilon(1e-12));
  CHECK(r.orientation == doctest::Approx(-0.3).epsilon(1e-12));
}

TEST_CASE("arm limit reward fixture") {
  ModelSpec model;
  TaskConfig cfg;
  SimState s = still_state();
  s.q[kArm1] = model.q_upper[2] + 0.1;
  KinematicsResult kin = forward_kinematics(model, s.q);
  CommandSet cmd;
  const RewardTerms r =
      compute_rewards(cfg, model, s, kin, cmd, 0.0, Eigen::Vector2d::Zero(), Vec6::Zero());
  CHECK(r.arm_limit_upper == doctest::Approx(-0.1).epsilon(1e-12));
  CHECK(r.arm_limit_lower == 0.0);

  s.q[kArm1] = 0.0;
  s.q[kArm2] = model.q_lower[3] - 0.2;
  kin = forward_kinematics(model, s.q);
  const RewardTerms r2 =
      compute_rewards(cfg, model, s, kin, cmd, 0.0, Eigen::Vector2d::Zero(), Vec6::Zero());
  CHECK(r2.arm_limit_lower == doctest::Approx(-0.4).epsilon(1e-12));
  CHECK(r2.arm_limit_upper == 0.0);
}

TEST_CASE("tracking terms respond to kinematic errors") {
  ModelSpec model;
  TaskConfig cfg;
  SimState s = still_state();
  KinematicsResult kin = forward_kinematics(model, s.q);
  CommandSet cmd;
  cmd.p_ee_cmd = kin.p_ee_base + Eigen::Vector2d{0.3, 0.4};  // squared error 0.25
  cmd.p_base_cmd_x = s.q[kBaseX] - 2.0;
  const RewardTerms r =
      compute_rewards(cfg, model, s, kin, cmd, 0.0, Eigen::Vector2d::Zero(), Vec6::Zero());
  CHECK(r.gripper_pos == doctest::Approx(std::exp(-1.25)).epsilon(1e-12));
  CHECK(r.body_pos == doctest::Approx(std::exp(-0.2)).epsilon(1e-12));

  // Perfect tracking gives exactly 1.
  cmd.p_ee_cmd = kin.p_ee_base;
  cmd.p_base_cmd_x = s.q[kBaseX];
  const RewardTerms r2 =
      compute_rewards(cfg, model, s, kin, cmd, 0.0, Eigen::Vector2d::Zero(), Vec6::Zero());
  CHECK(r2.gripper_pos == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(r2.body_pos == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("leg motion term in both sign conventions") {
  ModelSpec model;
  TaskConfig cfg;
  SimState s = still_state();
  s.qd[kHip] = 1.0;
  s.qd[kKnee] = 1.0;
  KinematicsResult kin = forward_kinematics(model, s.q);
  CommandSet cmd;
  // Previous leg rates chosen so the finite-difference acceleration is (2, 2).
  const Eigen::Vector2d qd_prev =
      Eigen::Vector2d{1.0, 1.0} - Eigen::Vector2d{2.0, 2.0} * cfg.dt_control();

  const RewardTerms r = compute_rewards(cfg, model, s, kin, cmd, 0.0, qd_prev, Vec6::Zero());
  CHECK(r.leg_motion == doctest::Approx(-1e-7 * (2.0 + 2.5 * 8.0)).epsilon(1e-9));

  TaskConfig flipped = cfg;
  flipped.leg_motion_published_sign = true;
  const RewardTerms rf =
      compute_rewards(flipped, model, s, kin, cmd, 0.0, qd_prev, Vec6::Zero());
  CHECK(rf.leg_motion == doctest::Approx(-1e-7 * (2.0 - 2.5 * 8.0)).epsilon(1e-9));
  CHECK(rf.leg_motion > 0.0);
}

TEST_CASE("reward total is the plain sum") {
  ModelSpec model;
  TaskConfig cfg;
  SimState s = still_state();
  s.qd[kBaseX] = 0.3;
  s.q[kPitch] = 0.2;
  s.q[kArm1] = 2.0;
  KinematicsResult kin = forward_kinematics(model, s.q);
  CommandSet cmd;
  cmd.v_x_cmd = 1.0;
  cmd.p_ee_cmd = {0.2, 0.2};
  Vec6 tau;
  tau << 5.0, -3.0, 2.0, 1.0, 0.0, -1.0;
  const RewardTerms r =
      compute_rewards(cfg, model, s, kin, cmd, 0.1, Eigen::Vector2d{0.2, -0.1}, tau);
  const double manual = r.lin_vel + r.accel_limit + r.orientation + r.energy + r.leg_motion +
                        r.gripper_pos + r.body_pos + r.arm_limit_upper + r.arm_limit_lower;
  CHECK(r.total() == doctest::Approx(manual).epsilon(1e-15));
}

TEST_CASE("arm limit cost fixture") {
  ModelSpec model;
  SimState s = still_state();
  s.q[kArm1] = model.q_upper[2] + 0.2;
  s.q[kArm2] = model.q_lower[3] - 0.3;
  const KinematicsResult kin = forward_kinematics(model, s.q);
  const CostVector c = compute_costs(model, s, kin);
  CHECK(c.arm_limit == doctest::Approx(0.5).epsilon(1e-12));

  SimState inside = still_state();
  inside.q[kArm1] = 1.0;
  const CostVector c2 = compute_costs(model, inside, forward_kinematics(model, inside.q));
  CHECK(c2.arm_limit == 0.0);
}

TEST_CASE("gripper distance cost is the centroid separation") {
  ModelSpec model;
  SimState s = still_state();
  KinematicsResult kin = forward_kinematics(model, s.q);
  kin.arm_centroid = Eigen::Vector2d{0.5, 0.9};
  kin.base_centroid = Eigen::Vector2d{0.2, 0.5};  // offset (0.3, 0.4)
  const CostVector c = compute_costs(model, s, kin);
  CHECK(c.gripper_distance == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("contact force cost sums arm link force magnitudes") {
  ModelSpec model;
  SimState s = still_state();
  s.link_forces[0] = {3.0, 4.0};
  s.link_forces[1] = {0.0, 1.0};
  s.link_forces[2] = {2.0, 0.0};
  const KinematicsResult kin = forward_kinematics(model, s.q);
  const CostVector c = compute_costs(model, s, kin);
  CHECK(c.contact_force == doctest::Approx(8.0).epsilon(1e-12));
}

TEST_CASE("observation layout and scales") {
  ModelSpec model;
  TaskConfig cfg;
  cfg.obs_scale = Eigen::VectorXd::Ones(kObsDim);
  SimState s = still_state();
  s.q[kBaseZ] = 0.61;
  s.qd[kBaseX] = 0.3;
  s.qd[kBaseZ] = -0.1;
  s.qd[kPitch] = 0.7;
  s.q[kPitch] = 0.05;
  s.q[kHip] = 0.4;
  s.q[kKnee] = -0.8;
  s.qd[kHip] = 0.11;
  s.qd[kKnee] = 0.22;
  s.qd[kWheel] = 3.0;
  s.q[kArm1] = 0.5;
  s.q[kArm2] = -0.6;
  s.q[kArm3] = 0.7;
  s.qd[kArm1] = 0.01;
  s.qd[kArm2] = 0.02;
  s.qd[kArm3] = 0.03;
  const KinematicsResult kin = forward_kinematics(model, s.q);
  CommandSet cmd;
  cmd.v_x_cmd = 1.5;
  cmd.p_ee_cmd = {0.3, 0.2};
  cmd.ee_angle_cmd = 0.25;

  const Eigen::VectorXd o = build_observation(cfg, s, kin, cmd);
  REQUIRE(o.size() == kObsDim);
  CHECK(o[kObsHeight] == 0.61);
  CHECK(o[kObsVx] == 0.3);
  CHECK(o[kObsVz] == -0.1);
  CHECK(o[kObsPitchRate] == 0.7);
  CHECK(o[kObsPitch] == 0.05);
  CHECK(o[kObsQHip] == 0.4);
  CHECK(o[kObsQKnee] == -0.8);
  CHECK(o[kObsQdHip] == 0.11);
  CHECK(o[kObsQdKnee] == 0.22);
  CHECK(o[kObsQdWheel] == 3.0);
  CHECK(o[kObsQArm + 0] == 0.5);
  CHECK(o[kObsQArm + 1] == -0.6);
  CHECK(o[kObsQArm + 2] == 0.7);
  CHECK(o[kObsQdArm + 2] == 0.03);
  CHECK(o[kObsEePos + 0] == doctest::Approx(kin.p_ee_base.x()).epsilon(1e-15));
  CHECK(o[kObsEePos + 1] == doctest::Approx(kin.p_ee_base.y()).epsilon(1e-15));
  CHECK(o[kObsEeAngle] == doctest::Approx(kin.ee_angle_base).epsilon(1e-15));
  CHECK(kObsVxCmd == 19);
  CHECK(o[19] == 1.5);
  CHECK(o[kObsEePosCmd + 0] == 0.3);
  CHECK(o[kObsEePosCmd + 1] == 0.2);
  CHECK(o[kObsEeAngleCmd] == 0.25);

  // Scales multiply entrywise.
  const Eigen::VectorXd scaled = build_observation(TaskConfig{}, s, kin, cmd);
  const Eigen::VectorXd def = default_obs_scale();
  CHECK(scaled[kObsQdWheel] == doctest::Approx(3.0 * def[kObsQdWheel]).epsilon(1e-15));
  CHECK(scaled[kObsQdHip] == doctest::Approx(0.11 * def[kObsQdHip]).epsilon(1e-15));
  CHECK(scaled[kObsVx] == doctest::Approx(0.3).epsilon(1e-15));
}

TEST_CASE("nominal observation golden fixture") {
  ModelSpec model;
  TaskConfig cfg;
  const SimState s = nominal_state(model, cfg);
  const KinematicsResult kin = forward_kinematics(model, s.q);
  const CommandSet cmd;  // zero velocity command, default gripper goal
  const Eigen::VectorXd o = build_observation(cfg, s, kin, cmd);

  // Height: wheel radius plus hip drop plus symmetric crouch minus the
  // static contact settle. Independent trig recomputation.
  const double total_mass = 10.0 + 1.0 + 1.0 + 1.0 + 3 * 0.5;
  const double h = 0.1 + 0.08 + 0.5 * std::cos(0.4) - total_mass * 9.81 / 4e4;
  CHECK(o[kObsHeight] == doctest::Approx(h).epsilon(1e-12));
  CHECK(o[kObsHeight] == doctest::Approx(0.6369743720).epsilon(1e-9));

  CHECK(o[kObsVx] == 0.0);
  CHECK(o[kObsVz] == 0.0);
  CHECK(o[kObsPitchRate] == 0.0);
  CHECK(o[kObsPitch] == 0.0);
  CHECK(o[kObsQHip] == doctest::Approx(0.4).epsilon(1e-15));
  CHECK(o[kObsQKnee] == doctest::Approx(-0.8).epsilon(1e-15));
  CHECK(o[kObsQArm + 0] == doctest::Approx(1.77).epsilon(1e-15));
  CHECK(o[kObsQArm + 1] == doctest::Approx(-1.57).epsilon(1e-15));
  CHECK(o[kObsQArm + 2] == doctest::Approx(-1.55).epsilon(1e-15));

  // Gripper position by direct trig down the arm chain.
  const double c1 = 1.77, c2 = 1.77 - 1.57, c3 = 1.77 - 1.57 - 1.55;
  const double px = 0.25 * (std::cos(c1) + std::cos(c2) + std::cos(c3));
  const double pz = 0.1 + 0.25 * (std::sin(c1) + std::sin(c2) + std::sin(c3));
  CHECK(o[kObsEePos + 0] == doctest::Approx(px).epsilon(1e-12));
  CHECK(o[kObsEePos + 1] == doctest::Approx(pz).epsilon(1e-12));
  CHECK(o[kObsEeAngle] == doctest::Approx(c3).epsilon(1e-12));

  // The nominal arm parks the gripper near the goal box center.
  CHECK(px == doctest::Approx(0.25).epsilon(0.02));
  CHECK(pz == doctest::Approx(0.15).epsilon(0.05));

  CHECK(o[kObsVxCmd] == 0.0);
}

TEST_CASE("termination rules") {
  ModelSpec model;
  TaskConfig cfg;
  SimState s = nominal_state(model, cfg);

  TerminationResult t = check_termination(cfg, s, 10);
  CHECK_FALSE(t.terminated);
  CHECK_FALSE(t.truncated);

  s.q[kPitch] = 1.01;
  CHECK(check_termination(cfg, s, 10).terminated);
  s.q[kPitch] = -1.01;
  CHECK(check_termination(cfg, s, 10).terminated);
  s.q[kPitch] = 0.99;
  CHECK_FALSE(check_termination(cfg, s, 10).terminated);

  s.q[kPitch] = 0.0;
  s.q[kBaseZ] = cfg.h_min - 0.01;
  CHECK(check_termination(cfg, s, 10).terminated);

  s = nominal_state(model, cfg);
  s.qd[kWheel] = std::numeric_limits<double>::quiet_NaN();
  CHECK(check_termination(cfg, s, 10).terminated);

  s = nominal_state(model, cfg);
  t = check_termination(cfg, s, cfg.t_max);
  CHECK_FALSE(t.terminated);
  CHECK(t.truncated);
}

TEST_CASE("command sampling respects configured ranges") {
  TaskConfig cfg;
  cfg.vx_cmd_lo = -1.25;
  cfg.vx_cmd_hi = 0.75;
  Rng rng(3, 0);
  double lo = 1e9, hi = -1e9, sum = 0.0;
  for (int i = 0; i < 4000; ++i) {
    const CommandSet cmd = sample_command(rng, cfg, {0.3, 0.1}, 1.5);
    CHECK(cmd.v_x_cmd >= cfg.vx_cmd_lo);
    CHECK(cmd.v_x_cmd <= cfg.vx_cmd_hi);
    CHECK(cmd.ee_angle_cmd >= cfg.ee_angle_cmd_lo);
    CHECK(cmd.ee_angle_cmd <= cfg.ee_angle_cmd_hi);
    CHECK(cmd.p_ee_cmd == Eigen::Vector2d{0.3, 0.1});
    CHECK(cmd.p_base_cmd_x == 1.5);
    lo = std::min(lo, cmd.v_x_cmd);
    hi = std::max(hi, cmd.v_x_cmd);
    sum += cmd.v_x_cmd;
  }
  CHECK(lo < -1.2);
  CHECK(hi > 0.7);
  CHECK(sum / 4000.0 == doctest::Approx(-0.25).epsilon(0.2));
}

TEST_CASE("episode resets place the robot consistently") {
  ModelSpec model;
  TaskConfig cfg;
  CurriculumConfig ccfg;
  const CurriculumState cstate = init_curriculum(ccfg);
  Rng rng(42, 0);

  for (int i = 0; i < 300; ++i) {
    const ResetResult rr = reset_episode(model, cfg, cstate, ccfg, rng);
    const SimState& s = rr.state;
    for (int a = 0; a < 3; ++a) {
      CHECK(s.q[kArm1 + a] >= model.q_lower[2 + a] - 1e-12);
      CHECK(s.q[kArm1 + a] <= model.q_upper[2 + a] + 1e-12);
    }
    CHECK(std::abs(s.q[kPitch]) <= cfg.reset_noise);
    CHECK(std::abs(s.q[kHip] - cfg.nominal_hip) <= cfg.reset_noise);
    CHECK(std::abs(s.q[kKnee] - cfg.nominal_knee) <= cfg.reset_noise);
    CHECK(s.qd.norm() == 0.0);

    // Wheel rests essentially on the ground.
    const KinematicsResult kin = forward_kinematics(model, s.q);
    const double clearance = kin.wheel_center().y() - model.wheel_radius;
    CHECK(clearance > -0.01);
    CHECK(clearance < 0.001);

    CHECK(rr.cmd.v_x_cmd >= cfg.vx_cmd_lo);
    CHECK(rr.cmd.v_x_cmd <= cfg.vx_cmd_hi);
    CHECK(rr.cmd.p_base_cmd_x == s.q[kBaseX]);
  }

  Rng a(5, 1), b(5, 1);
  const ResetResult ra = reset_episode(model, cfg, cstate, ccfg, a);
  const ResetResult rb = reset_episode(model, cfg, cstate, ccfg, b);
  CHECK(ra.state.q == rb.state.q);
  CHECK(ra.cmd.v_x_cmd == rb.cmd.v_x_cmd);
  CHECK(ra.cmd.p_ee_cmd == rb.cmd.p_ee_cmd);
}

TEST_CASE("action mapping") {
  ModelSpec model;
  Eigen::Matrix<double, 6, 1> a;
  a << 1.0, -0.5, 0.25, 0.0, 1.0, -1.0;
  const ActuationInput in = action_to_actuation(model, a);
  CHECK(in.leg_torques[0] == doctest::Approx(40.0).epsilon(1e-15));
  CHECK(in.leg_torques[1] == doctest::Approx(-20.0).epsilon(1e-15));
  CHECK(in.leg_torques[2] == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(in.arm_targets[0] == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(in.arm_targets[1] == doctest::Approx(model.q_upper[3]).epsilon(1e-15));
  CHECK(in.arm_targets[2] == doctest::Approx(model.q_lower[4]).epsilon(1e-15));

  // Out-of-range entries clamp.
  Eigen::Matrix<double, 6, 1> big;
  big << 3.0, -3.0, 10.0, 2.0, -2.0, 0.5;
  const ActuationInput clamped = action_to_actuation(model, big);
  CHECK(clamped.leg_torques[0] == doctest::Approx(40.0).epsilon(1e-15));
  CHECK(clamped.leg_torques[1] == doctest::Approx(-40.0).epsilon(1e-15));
  CHECK(clamped.leg_torques[2] == doctest::Approx(8.0).epsilon(1e-15));
  CHECK(clamped.arm_targets[0] == doctest::Approx(model.q_upper[2]).epsilon(1e-15));

  // Round trip inside the box.
  Rng rng(9, 0);
  for (int i = 0; i < 200; ++i) {
    Eigen::Matrix<double, 6, 1> x;
    for (int k = 0; k < 6; ++k) x[k] = rng.uniform(-1.0, 1.0);
    const Eigen::Matrix<double, 6, 1> back = actuation_to_action(model, action_to_actuation(model, x));
    CHECK((back - x).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("env stepping, command integration, determinism") {
  ModelSpec model;
  TaskConfig cfg;
  CurriculumConfig ccfg;
  const CurriculumState cstate = init_curriculum(ccfg);

  Env env(model, cfg, 77, 0);
  env.reset(cstate, ccfg);
  CHECK(env.observation().size() == kObsDim);
  CHECK(env.observation().allFinite());

  CommandSet cmd = env.command();
  cmd.v_x_cmd = 1.5;
  env.set_command(cmd);
  const double x0 = cmd.p_base_cmd_x;
  Eigen::Matrix<double, 6, 1> zero = Eigen::Matrix<double, 6, 1>::Zero();
  for (int i = 0; i < 3; ++i) env.step(zero);
  CHECK(env.command().p_base_cmd_x ==
        doctest::Approx(x0 + 3 * 1.5 * cfg.dt_control()).epsilon(1e-12));
  CHECK(env.status().steps == 3);

  // Observation command slots update through set_command.
  CHECK(env.observation()[kObsVxCmd] == doctest::Approx(1.5).epsilon(1e-15));

  Env e1(model, cfg, 123, 4), e2(model, cfg, 123, 4);
  e1.reset(cstate, ccfg);
  e2.reset(cstate, ccfg);
  Rng arng(55, 0);
  for (int i = 0; i < 40 && !e1.done(); ++i) {
    Eigen::Matrix<double, 6, 1> a;
    for (int k = 0; k < 6; ++k) a[k] = arng.uniform(-0.3, 0.3);
    const EnvStep r1 = e1.step(a);
    const EnvStep r2 = e2.step(a);
    CHECK(r1.obs == r2.obs);
    CHECK(r1.reward == r2.reward);
    CHECK(r1.costs.vec() == r2.costs.vec());
    CHECK(r1.terminated == r2.terminated);
  }
}

TEST_CASE("env snapshot and restore resume bit exactly") {
  ModelSpec model;
  TaskConfig cfg;
  CurriculumConfig ccfg;
  const CurriculumState cstate = init_curriculum(ccfg);

  Env env(model, cfg, 2024, 3);
  env.reset(cstate, ccfg);
  Eigen::Matrix<double, 6, 1> a;
  a << 0.1, -0.1, 0.05, 0.0, 0.2, -0.2;
  for (int i = 0; i < 5; ++i) env.step(a);

  const EnvSnapshot snap = env.snapshot();
  std::vector<Eigen::VectorXd> first;
  for (int i = 0; i < 5; ++i) first.push_back(env.step(a).obs);

  env.restore(snap);
  for (int i = 0; i < 5; ++i) {
    const EnvStep r = env.step(a);
    CHECK(r.obs == first[static_cast<size_t>(i)]);
  }
}

TEST_CASE("env failure applies the penalty and refuses further steps") {
  ModelSpec model;
  TaskConfig cfg;
  CurriculumConfig ccfg;
  const CurriculumState cstate = init_curriculum(ccfg);

  Env env(model, cfg, 1, 0);
  env.reset(cstate, ccfg);
  EnvSnapshot snap = env.snapshot();
  snap.sim.q[kPitch] = 1.2;  // beyond theta_max after any step
  env.restore(snap);
  const EnvStep r = env.step(Eigen::Matrix<double, 6, 1>::Zero());
  CHECK(r.terminated);
  CHECK(r.reward < cfg.failure_penalty + 2.0);
  CHECK(env.done());
  CHECK_THROWS_AS(env.step(Eigen::Matrix<double, 6, 1>::Zero()), std::runtime_error);
}

TEST_CASE("env truncates at the horizon") {
  ModelSpec model;
  TaskConfig cfg;
  cfg.t_max = 3;
  CurriculumConfig ccfg;
  const CurriculumState cstate = init_curriculum(ccfg);

  Env env(model, cfg, 8, 0);
  env.reset(cstate, ccfg);
  EnvStep last;
  for (int i = 0; i < 3; ++i) last = env.step(Eigen::Matrix<double, 6, 1>::Zero());
  CHECK(last.truncated);
  CHECK_FALSE(last.terminated);
  CHECK(env.done());
}

TEST_CASE("task config validation") {
  TaskConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  TaskConfig bad = cfg;
  bad.decimation = 0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = cfg;
  bad.obs_scale = Eigen::VectorXd::Ones(5);
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = cfg;
  bad.obs_scale[3] = 0.0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}
