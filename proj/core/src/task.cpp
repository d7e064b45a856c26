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
#include "locoforge/task.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "locoforge/bc.hpp"

namespace locoforge {
namespace {

// Table coefficients for the shaping terms.
constexpr double kLinVelScale = 7.5;
constexpr double kAccelWeight = 0.1;
constexpr double kOrientWeight = 1.2;
constexpr double kEnergyWeight = 1e-5;
constexpr double kLegMotionWeight = 1e-7;
constexpr double kLegAccelRatio = 2.5;
constexpr double kGripperScale = 5.0;
constexpr double kBodyScale = 0.05;
constexpr double kArmLimitWeight = 10.0;

double total_mass(const ModelSpec& m) {
  double s = m.base_mass + m.thigh_mass + m.shank_mass + m.wheel_mass;
  for (double am : m.arm_mass) s += am;
  return s;
}

}  // namespace

TaskConfig::TaskConfig() : obs_scale(default_obs_scale()) {}

void TaskConfig::validate() const {
  if (!(vx_cmd_lo <= vx_cmd_hi)) throw std::invalid_argument("task: vx command range inverted");
  if (!(ee_angle_cmd_lo <= ee_angle_cmd_hi))
    throw std::invalid_argument("task: ee angle command range inverted");
  if (!(theta_max > 0.0)) throw std::invalid_argument("task: theta_max must be positive");
  if (!(h_min > 0.0)) throw std::invalid_argument("task: h_min must be positive");
  if (t_max <= 0) throw std::invalid_argument("task: t_max must be positive");
  if (decimation <= 0) throw std::invalid_argument("task: decimation must be positive");
  if (!(dt_physics > 0.0 && dt_physics <= 0.01))
    throw std::invalid_argument("task: dt_physics out of range");
  if (!(reset_noise >= 0.0)) throw std::invalid_argument("task: reset_noise must be non-negative");
  if (obs_scale.size() != kObsDim) throw std::invalid_argument("task: obs_scale must have 23 entries");
  if (!obs_scale.allFinite() || obs_scale.minCoeff() <= 0.0)
    throw std::invalid_argument("task: obs_scale entries must be positive");
}

Eigen::VectorXd default_obs_scale() {
  Eigen::VectorXd s = Eigen::VectorXd::Ones(kObsDim);
  s[kObsQdHip] = 0.5;
  s[kObsQdKnee] = 0.5;
  s[kObsQdWheel] = 0.1;
  s[kObsQdArm + 0] = 0.5;
  s[kObsQdArm + 1] = 0.5;
  s[kObsQdArm + 2] = 0.5;
  return s;
}

Eigen::VectorXd build_observation(const TaskConfig& cfg, const SimState& state,
                                  const KinematicsResult& kin, const CommandSet& cmd) {
  Eigen::VectorXd o(kObsDim);
  o[kObsHeight] = state.q[kBaseZ];
  o[kObsVx] = state.qd[kBaseX];
  o[kObsVz] = state.qd[kBaseZ];
  o[kObsPitchRate] = state.qd[kPitch];
  o[kObsPitch] = state.q[kPitch];
  o[kObsQHip] = state.q[kHip];
  o[kObsQKnee] = state.q[kKnee];
  o[kObsQdHip] = state.qd[kHip];
  o[kObsQdKnee] = state.qd[kKnee];
  o[kObsQdWheel] = state.qd[kWheel];
  for (int i = 0; i < 3; ++i) {
    o[kObsQArm + i] = state.q[kArm1 + i];
    o[kObsQdArm + i] = state.qd[kArm1 + i];
  }
  o[kObsEePos + 0] = kin.p_ee_base.x();
  o[kObsEePos + 1] = kin.p_ee_base.y();
  o[kObsEeAngle] = kin.ee_angle_base;
  o[kObsVxCmd] = cmd.v_x_cmd;
  o[kObsEePosCmd + 0] = cmd.p_ee_cmd.x();
  o[kObsEePosCmd + 1] = cmd.p_ee_cmd.y();
  o[kObsEeAngleCmd] = cmd.ee_angle_cmd;
  return o.cwiseProduct(cfg.obs_scale);
}

RewardTerms compute_rewards(const TaskConfig& cfg, const ModelSpec& model,
                            const SimState& state, const KinematicsResult& kin,
                            const CommandSet& cmd, double v_x_prev,
                            const Eigen::Vector2d& qd_leg_prev, const Vec6& torques) {
  RewardTerms r;
  const double v_x = state.qd[kBaseX];

  const double ev = cmd.v_x_cmd - v_x;
  r.lin_vel = std::exp(-kLinVelScale * ev * ev);

  const double dv = v_x_prev - v_x;
  r.accel_limit = -kAccelWeight * dv * dv;

  const double theta = state.q[kPitch];
  r.orientation = -kOrientWeight * theta * theta;

  r.energy = -kEnergyWeight * torques.squaredNorm();

  const Eigen::Vector2d qd_leg{state.qd[kHip], state.qd[kKnee]};
  const Eigen::Vector2d qdd_leg = (qd_leg - qd_leg_prev) / cfg.dt_control();
  const double vel_sq = qd_leg.squaredNorm();
  const double acc_sq = qdd_leg.squaredNorm();
  r.leg_motion = cfg.leg_motion_published_sign
                     ? -kLegMotionWeight * (vel_sq - kLegAccelRatio * acc_sq)
                     : -kLegMotionWeight * (vel_sq + kLegAccelRatio * acc_sq);

  const double ee_err = (kin.p_ee_base - cmd.p_ee_cmd).squaredNorm();
  r.gripper_pos = std::exp(-kGripperScale * ee_err);

  const double bx = state.q[kBaseX] - cmd.p_base_cmd_x;
  r.body_pos = std::exp(-kBodyScale * bx * bx);

  double up_sq = 0.0, lo_sq = 0.0;
  for (int i = 0; i < 3; ++i) {
    const double q = state.q[kArm1 + i];
    const double over = std::max(q - model.q_upper[2 + i], 0.0);
    const double under = std::max(model.q_lower[2 + i] - q, 0.0);
    up_sq += over * over;
    lo_sq += under * under;
  }
  r.arm_limit_upper = -kArmLimitWeight * up_sq;
  r.arm_limit_lower = -kArmLimitWeight * lo_sq;
  return r;
}

CostVector compute_costs(const ModelSpec& model, const SimState& state,
                         const KinematicsResult& kin) {
  CostVector c;
  for (int i = 0; i < 3; ++i) {
    const double q = state.q[kArm1 + i];
    c.arm_limit += std::max(q - model.q_upper[2 + i], 0.0);
    c.arm_limit += std::max(model.q_lower[2 + i] - q, 0.0);
  }
  c.gripper_distance = (kin.arm_centroid - kin.base_centroid).norm();
  for (const auto& f : state.link_forces) c.contact_force += f.norm();
  return c;
}

CommandSet sample_command(Rng& rng, const TaskConfig& cfg, const Eigen::Vector2d& goal,
                          double base_x) {
  CommandSet cmd;
  cmd.p_ee_cmd = goal;
  cmd.v_x_cmd = rng.uniform(cfg.vx_cmd_lo, cfg.vx_cmd_hi);
  cmd.ee_angle_cmd = rng.uniform(cfg.ee_angle_cmd_lo, cfg.ee_angle_cmd_hi);
  cmd.p_base_cmd_x = base_x;
  return cmd;
}

TerminationResult check_termination(const TaskConfig& cfg, const SimState& state, int steps) {
  TerminationResult t;
  if (!state.all_finite() || std::abs(state.q[kPitch]) > cfg.theta_max ||
      state.q[kBaseZ] < cfg.h_min) {
    t.terminated = true;
    return t;
  }
  if (steps >= cfg.t_max) t.truncated = true;
  return t;
}

namespace {

// Base height that rests the wheel at its static ground penetration for the
// given joint configuration.
double settled_base_z(const ModelSpec& model, const SimState& probe) {
  SimState s = probe;
  s.q[kBaseZ] = 0.0;
  const KinematicsResult kin = forward_kinematics(model, s.q);
  const double settle = total_mass(model) * model.gravity / model.contact_stiffness;
  return model.wheel_radius - settle - kin.wheel_center().y();
}

}  // namespace

SimState nominal_state(const ModelSpec& model, const TaskConfig& cfg) {
  SimState s;
  s.q.setZero();
  s.qd.setZero();
  s.q[kHip] = cfg.nominal_hip;
  s.q[kKnee] = cfg.nominal_knee;
  for (int i = 0; i < 3; ++i) s.q[kArm1 + i] = cfg.nominal_arm[i];
  s.q[kBaseZ] = settled_base_z(model, s);
  return s;
}

ResetResult reset_episode(const ModelSpec& model, const TaskConfig& cfg,
                          const CurriculumState& cstate, const CurriculumConfig& ccfg,
                          Rng& rng) {
  ResetResult out;
  SimState& s = out.state;
  s.q.setZero();
  s.qd.setZero();
  s.q[kPitch] = rng.uniform(-cfg.reset_noise, cfg.reset_noise);
  s.q[kHip] = cfg.nominal_hip + rng.uniform(-cfg.reset_noise, cfg.reset_noise);
  s.q[kKnee] = cfg.nominal_knee + rng.uniform(-cfg.reset_noise, cfg.reset_noise);

  Eigen::Vector2d goal = Eigen::Vector2d::Zero();
  Eigen::Vector3d q_arm = cfg.nominal_arm;
  bool placed = false;
  for (int attempt = 0; attempt < 10 && !placed; ++attempt) {
    const InitialEe draw = sample_initial_ee(cstate, ccfg, rng);
    goal = draw.goal;
    const IkResult ik = arm_ik(model, draw.init, cfg.nominal_arm);
    if (ik.success) {
      q_arm = ik.q;
      placed = true;
    }
  }
  for (int i = 0; i < 3; ++i) s.q[kArm1 + i] = q_arm[i];

  s.q[kBaseZ] = settled_base_z(model, s);
  out.cmd = sample_command(rng, cfg, goal, s.q[kBaseX]);
  return out;
}

ActuationInput action_to_actuation(const ModelSpec& model,
                                   const Eigen::Matrix<double, 6, 1>& action) {
  const Eigen::Matrix<double, 6, 1> a = action.cwiseMax(-1.0).cwiseMin(1.0);
  ActuationInput in;
  for (int i = 0; i < 3; ++i) in.leg_torques[i] = a[i] * model.torque_limit[i];
  for (int i = 0; i < 3; ++i) {
    const double lo = model.q_lower[2 + i];
    const double hi = model.q_upper[2 + i];
    in.arm_targets[i] = 0.5 * (lo + hi) + a[3 + i] * 0.5 * (hi - lo);
  }
  return in;
}

Eigen::Matrix<double, 6, 1> actuation_to_action(const ModelSpec& model,
                                                const ActuationInput& input) {
  Eigen::Matrix<double, 6, 1> a;
  for (int i = 0; i < 3; ++i) a[i] = input.leg_torques[i] / model.torque_limit[i];
  for (int i = 0; i < 3; ++i) {
    const double lo = model.q_lower[2 + i];
    const double hi = model.q_upper[2 + i];
    a[3 + i] = (input.arm_targets[i] - 0.5 * (lo + hi)) / (0.5 * (hi - lo));
  }
  return a.cwiseMax(-1.0).cwiseMin(1.0);
}

Env::Env(const ModelSpec& model, const TaskConfig& cfg, uint64_t seed, uint64_t stream)
    : model_(model), cfg_(cfg), seed_(seed), stream_(stream), rng_(seed, stream),
      obs_(Eigen::VectorXd::Zero(kObsDim)) {
  model_.validate();
  cfg_.validate();
}

void Env::refresh_observation() {
  kin_ = forward_kinematics(model_, sim_.q);
  obs_ = build_observation(cfg_, sim_, kin_, cmd_);
}

const Eigen::VectorXd& Env::reset(const CurriculumState& cstate, const CurriculumConfig& ccfg) {
  ResetResult rr = reset_episode(model_, cfg_, cstate, ccfg, rng_);
  sim_ = rr.state;
  cmd_ = rr.cmd;
  status_ = EpisodeStatus{};
  refresh_observation();
  return obs_;
}

EnvStep Env::step(const Eigen::Matrix<double, 6, 1>& action) {
  if (done()) throw std::runtime_error("Env::step called on a finished episode");

  const double v_x_prev = sim_.qd[kBaseX];
  const Eigen::Vector2d qd_leg_prev{sim_.qd[kHip], sim_.qd[kKnee]};
  const ActuationInput input = action_to_actuation(model_, action);

  bool diverged = false;
  for (int k = 0; k < cfg_.decimation; ++k) {
    try {
      sim_ = locoforge::step(model_, sim_, input, cfg_.dt_physics);
    } catch (const SimDivergence&) {
      diverged = true;
      break;
    }
  }

  status_.steps += 1;
  cmd_.p_base_cmd_x += cmd_.v_x_cmd * cfg_.dt_control();

  EnvStep result;
  if (diverged) {
    status_.terminated = true;
    status_.diverged = true;
    result.obs = obs_;  // last finite observation
    result.reward = cfg_.failure_penalty;
    result.terminated = true;
    return result;
  }

  refresh_observation();
  const TerminationResult term = check_termination(cfg_, sim_, status_.steps);
  status_.terminated = term.terminated;
  status_.truncated = term.truncated;

  result.obs = obs_;
  result.rewards =
      compute_rewards(cfg_, model_, sim_, kin_, cmd_, v_x_prev, qd_leg_prev, sim_.applied_torques);
  result.costs = compute_costs(model_, sim_, kin_);
  result.reward = result.rewards.total() + (term.terminated ? cfg_.failure_penalty : 0.0);
  result.terminated = term.terminated;
  result.truncated = term.truncated;
  return result;
}

void Env::set_command(const CommandSet& cmd) {
  cmd_ = cmd;
  obs_ = build_observation(cfg_, sim_, kin_, cmd_);
}

EnvSnapshot Env::snapshot() const {
  EnvSnapshot snap;
  snap.sim = sim_;
  snap.cmd = cmd_;
  snap.status = status_;
  snap.rng_state = rng_.state();
  return snap;
}

void Env::restore(const EnvSnapshot& snap) {
  sim_ = snap.sim;
  cmd_ = snap.cmd;
  status_ = snap.status;
  rng_.set_state(snap.rng_state);
  refresh_observation();
}

}  // namespace locoforge
