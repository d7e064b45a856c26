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
#ifndef LOCOFORGE_TASK_HPP
#define LOCOFORGE_TASK_HPP

#include <array>
#include <cstdint>

#include <Eigen/Dense>

#include "locoforge/curriculum.hpp"
#include "locoforge/rng.hpp"
#include "locoforge/sim.hpp"

namespace locoforge {

inline constexpr int kObsDim = 23;
inline constexpr int kActionDim = 6;
inline constexpr int kNumCosts = 3;

// Observation layout. Base block, then arm block, then commands.
// All positions and angles in the arm block are base-frame.
inline constexpr int kObsHeight = 0;
inline constexpr int kObsVx = 1;
inline constexpr int kObsVz = 2;
inline constexpr int kObsPitchRate = 3;
inline constexpr int kObsPitch = 4;
inline constexpr int kObsQHip = 5;
inline constexpr int kObsQKnee = 6;
inline constexpr int kObsQdHip = 7;
inline constexpr int kObsQdKnee = 8;
inline constexpr int kObsQdWheel = 9;
inline constexpr int kObsQArm = 10;      // 3 entries
inline constexpr int kObsQdArm = 13;     // 3 entries
inline constexpr int kObsEePos = 16;     // 2 entries
inline constexpr int kObsEeAngle = 18;
inline constexpr int kObsVxCmd = 19;
inline constexpr int kObsEePosCmd = 20;  // 2 entries
inline constexpr int kObsEeAngleCmd = 22;

struct TaskConfig {
  double vx_cmd_lo = -2.0;
  double vx_cmd_hi = 2.0;
  double ee_angle_cmd_lo = -0.5;
  double ee_angle_cmd_hi = 0.5;

  double theta_max = 1.0;  // pitch failure threshold
  double h_min = 0.35;     // base height failure threshold
  int t_max = 500;         // control steps until truncation

  int decimation = 20;
  double dt_physics = 1e-3;

  // Added to the scalar step reward when the episode ends in failure.
  double failure_penalty = -5.0;

  // The leg_motion term sums the squared joint velocity and acceleration
  // magnitudes. The published table carries a minus between them; flipping
  // this reproduces that variant.
  bool leg_motion_published_sign = false;

  double reset_noise = 0.05;
  double nominal_hip = 0.4;
  double nominal_knee = -0.8;
  Eigen::Vector3d nominal_arm{1.77, -1.57, -1.55};

  // Per-entry multiplicative observation scales.
  Eigen::VectorXd obs_scale;

  TaskConfig();
  double dt_control() const { return dt_physics * decimation; }
  void validate() const;
};

Eigen::VectorXd default_obs_scale();

struct CommandSet {
  double v_x_cmd = 0.0;
  Eigen::Vector2d p_ee_cmd{0.25, 0.15};  // base frame
  double ee_angle_cmd = 0.0;
  double p_base_cmd_x = 0.0;  // world frame, integrated from v_x_cmd
};

struct RewardTerms {
  double lin_vel = 0.0;
  double accel_limit = 0.0;
  double orientation = 0.0;
  double energy = 0.0;
  double leg_motion = 0.0;
  double gripper_pos = 0.0;
  double body_pos = 0.0;
  double arm_limit_upper = 0.0;
  double arm_limit_lower = 0.0;

  double total() const {
    return lin_vel + accel_limit + orientation + energy + leg_motion + gripper_pos +
           body_pos + arm_limit_upper + arm_limit_lower;
  }
};

struct CostVector {
  double arm_limit = 0.0;        // summed arm joint overshoot, L1
  double gripper_distance = 0.0; // arm centroid to base centroid distance
  double contact_force = 0.0;    // summed arm link contact force magnitudes

  Eigen::Vector3d vec() const { return {arm_limit, gripper_distance, contact_force}; }
};

struct EpisodeStatus {
  int steps = 0;
  bool terminated = false;  // failure
  bool truncated = false;   // time limit
  bool diverged = false;
};

Eigen::VectorXd build_observation(const TaskConfig& cfg, const SimState& state,
                                  const KinematicsResult& kin, const CommandSet& cmd);

/// Table of shaping terms. v_x_prev and qd_leg_prev are the values at the
/// start of the control step; torques are the applied actuator torques.
RewardTerms compute_rewards(const TaskConfig& cfg, const ModelSpec& model,
                            const SimState& state, const KinematicsResult& kin,
                            const CommandSet& cmd, double v_x_prev,
                            const Eigen::Vector2d& qd_leg_prev,
                            const Vec6& torques);

CostVector compute_costs(const ModelSpec& model, const SimState& state,
                         const KinematicsResult& kin);

/// Fills v_x_cmd and ee_angle_cmd from their configured ranges; the gripper
/// goal comes from the caller and the base position command starts at the
/// current base x.
CommandSet sample_command(Rng& rng, const TaskConfig& cfg, const Eigen::Vector2d& goal,
                          double base_x);

struct TerminationResult {
  bool terminated = false;
  bool truncated = false;
};

TerminationResult check_termination(const TaskConfig& cfg, const SimState& state, int steps);

/// Exact nominal standing state: symmetric leg crouch, nominal arm, wheel
/// resting at its static ground penetration. No randomness.
SimState nominal_state(const ModelSpec& model, const TaskConfig& cfg);

struct ResetResult {
  SimState state;
  CommandSet cmd;
};

/// Noisy nominal base pose with the arm placed by inverse kinematics at a
/// curriculum-drawn initial gripper position. IK failures redraw the target,
/// up to 10 attempts, then fall back to the nominal arm pose.
ResetResult reset_episode(const ModelSpec& model, const TaskConfig& cfg,
                          const CurriculumState& cstate, const CurriculumConfig& ccfg,
                          Rng& rng);

/// Action layout: entries 0..2 are hip, knee, wheel torques as fractions of
/// the torque limits; entries 3..5 are arm position targets mapped affinely
/// from [-1, 1] onto the joint ranges. Everything is clamped to [-1, 1]
/// before use.
ActuationInput action_to_actuation(const ModelSpec& model,
                                   const Eigen::Matrix<double, 6, 1>& action);
Eigen::Matrix<double, 6, 1> actuation_to_action(const ModelSpec& model,
                                                const ActuationInput& input);

struct EnvStep {
  Eigen::VectorXd obs;
  RewardTerms rewards;
  double reward = 0.0;  // rewards.total() plus any failure penalty
  CostVector costs;
  bool terminated = false;
  bool truncated = false;
};

/// Everything an environment needs to continue a run bit-exactly.
struct EnvSnapshot {
  SimState sim;
  CommandSet cmd;
  EpisodeStatus status;
  std::array<uint64_t, 4> rng_state{};
};

class Env {
 public:
  Env(const ModelSpec& model, const TaskConfig& cfg, uint64_t seed, uint64_t stream);

  const Eigen::VectorXd& reset(const CurriculumState& cstate, const CurriculumConfig& ccfg);
  EnvStep step(const Eigen::Matrix<double, 6, 1>& action);

  const Eigen::VectorXd& observation() const { return obs_; }
  const SimState& state() const { return sim_; }
  const KinematicsResult& kinematics() const { return kin_; }
  const EpisodeStatus& status() const { return status_; }
  const CommandSet& command() const { return cmd_; }
  void set_command(const CommandSet& cmd);
  const ModelSpec& model() const { return model_; }
  const TaskConfig& config() const { return cfg_; }
  uint64_t seed() const { return seed_; }
  uint64_t stream() const { return stream_; }

  bool done() const { return status_.terminated || status_.truncated; }

  EnvSnapshot snapshot() const;
  void restore(const EnvSnapshot& snap);

 private:
  void refresh_observation();

  ModelSpec model_;
  TaskConfig cfg_;
  uint64_t seed_ = 0;
  uint64_t stream_ = 0;
  Rng rng_;
  SimState sim_;
  KinematicsResult kin_;
  CommandSet cmd_;
  EpisodeStatus status_;
  Eigen::VectorXd obs_;
};

}  // namespace locoforge

#endif  // LOCOFORGE_TASK_HPP
