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
#ifndef LOCOFORGE_BC_HPP
#define LOCOFORGE_BC_HPP

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "locoforge/net.hpp"
#include "locoforge/task.hpp"

namespace locoforge {

struct IkOptions {
  int max_iters = 100;
  double tol = 1e-6;        // position residual norm
  double damping = 1e-2;
  double step_clamp = 0.3;  // per-iteration joint step bound, rad
  bool use_angle = false;   // also match the end effector angle
  double target_angle = 0.0;
};

struct IkResult {
  bool success = false;
  Eigen::Vector3d q{0.0, 0.0, 0.0};
  double residual = 0.0;
};

/// Damped least-squares IK for the arm chain, base frame target. Joints are
/// projected into their limits every iteration; success requires the
/// residual tolerance at an in-limit configuration.
IkResult arm_ik(const ModelSpec& model, const Eigen::Vector2d& target_base,
                const Eigen::Vector3d& q_seed, const IkOptions& opts = {});

struct ExpertConfig {
  // Wheel torque from a PD on the tilt of the total center of mass over the
  // wheel contact, with a setpoint that leans into velocity error. The tilt
  // variable absorbs the forward mass of the carried arm, which raw pitch
  // does not; its rate comes from differencing across control steps so the
  // wheel running under the body is seen by the damping term.
  double balance_kp = 60.0;
  double balance_kd = 4.0;
  double vel_gain = 0.1;
  // First order slew of the internal velocity reference toward the command,
  // so a fresh command steps the lean setpoint gently. Zero tracks the raw
  // command.
  double vel_ref_tau = 0.3;
  // Leans toward the commanded base station, which also damps the slow
  // drift mode a velocity loop alone leaves untouched.
  double pos_gain = 0.03;
  // Pulls the tilt setpoint with body pitch. Tilt alone leaves pitch a free
  // variable, since the legs let the base rotate while the center of mass
  // stays over the contact; this term leans the setpoint so gravity walks
  // the pitch back to zero.
  double pitch_gain = 0.2;
  double lean_limit = 0.1;
  // One-pole smoothing of the differenced tilt rate, in [0, 1). The raw
  // difference carries the wheel scrubbing under the body at tens of rad/s,
  // and fed back a control step late that content drives a scrub cycle
  // instead of damping it, chattering against the wheel torque limit. The
  // pole has to sit well below the cycle frequency while sparing the
  // pendulum frequency.
  double rate_filter = 0.9;
  // Optional one-pole smoothing of the wheel torque itself, in [0, 1).
  // Zero applies the torque as computed.
  double torque_filter = 0.0;
  // Damps wheel surface speed relative to the base so the wheel cannot
  // free-spin through traction loss.
  double slip_damping = 1.0;

  // Hip and knee posture servo around the nominal crouch. Gains must stay
  // low because torques are held for a whole control step; the static gravity
  // load is carried by the feedforward terms instead.
  double leg_kp = 80.0;
  double leg_kd = 1.5;
  double hip_ff = 0.0;
  double knee_ff = 14.0;
  // The wheel motor reacts on the shank, and that load runs up the chain.
  // Feeding the commanded wheel torque into the knee keeps it from
  // breathing with every balance correction. Negative because the wheel
  // coordinate spins about the negated axis.
  double hip_couple = 0.0;
  double knee_couple = -1.0;

  // First order filter time constant for walking the commanded arm pose from
  // the pose at reset to the reach target, so the arm does not slam the base
  // with a reaction torque step. Zero applies the target immediately.
  double arm_tau = 0.25;

  // Arm IK solve settings used when a new gripper command arrives.
  double ik_tol = 1e-6;
  int ik_max_iters = 100;

  void validate() const;
};

/// Deterministic scripted controller. Caches the arm IK solution per gripper
/// command so the solve runs once per episode, not per step, and keeps the
/// previous tilt for its finite-difference rate.
class ScriptedExpert {
 public:
  /// Throws std::invalid_argument when the config fails validation.
  explicit ScriptedExpert(const ExpertConfig& cfg = {});

  Eigen::Matrix<double, 6, 1> action(const Env& env);
  void reset();

 private:
  ExpertConfig cfg_;
  bool have_ik_ = false;
  Eigen::Vector2d ik_target_{0.0, 0.0};
  Eigen::Vector3d ik_q_{0.0, 0.0, 0.0};
  bool have_tilt_ = false;
  double tilt_prev_ = 0.0;
  double tilt_rate_f_ = 0.0;
  bool have_torque_ = false;
  double wheel_tau_f_ = 0.0;
  bool have_arm_cmd_ = false;
  Eigen::Vector3d arm_cmd_{0.0, 0.0, 0.0};
  bool have_vref_ = false;
  double v_ref_ = 0.0;
};

struct DemoSet {
  uint64_t layout_hash = 0;
  uint64_t seed = 0;        // reset stream the collecting env was built with
  Eigen::MatrixXd obs;      // obs_dim x count
  Eigen::MatrixXd actions;  // action_dim x count
};

/// Hash covering the observation and action layout plus normalization
/// scales, so stale demo files are rejected on load.
uint64_t demo_layout_hash(const TaskConfig& cfg);

struct DemoStats {
  int episodes_kept = 0;
  int episodes_failed = 0;
  int transitions = 0;
};

/// Runs the expert over curriculum-reset episodes until a budget of n_steps
/// env steps is spent, keeping the (observation, action) pairs of episodes
/// that did not end in failure. The returned set holds at most n_steps
/// pairs; fewer when episodes were discarded. Throws if more than 20
/// percent of the attempted episodes fail. Stored observations are the
/// normalized vectors the policy would see.
DemoSet collect_demos(Env& env, ScriptedExpert& expert, const CurriculumState& cstate,
                      const CurriculumConfig& ccfg, int n_steps,
                      DemoStats* stats = nullptr);

void save_demos(const std::string& path, const DemoSet& demos);

/// A nonzero expected hash makes loading fail on layout mismatch.
DemoSet load_demos(const std::string& path, uint64_t expected_layout_hash = 0);

struct BcConfig {
  int epochs = 20;
  int batch_size = 256;
  double learning_rate = 1e-3;
  double val_fraction = 0.1;  // must stay inside (0, 0.5)
  double grad_clip_norm = 0.5;
  // Final validation MSE a healthy pretraining run is expected to beat.
  double target_val_mse = 0.05;
};

struct BcReport {
  std::vector<double> train_mse;  // one entry per epoch
  std::vector<double> val_mse;
  int train_count = 0;
  int val_count = 0;
  // True when no epoch improved validation MSE over its predecessor. A
  // warning signal, not an error.
  bool val_never_improved = false;

  double final_train_mse() const { return train_mse.empty() ? 0.0 : train_mse.back(); }
  double final_val_mse() const { return val_mse.empty() ? 0.0 : val_mse.back(); }
};

/// Behavior-cloning regression of the actor mean head onto demo actions.
/// log_std is left untouched. MSE values are per transition, summed over
/// action entries.
BcReport pretrain_actor(NetParams& actor, const DemoSet& demos, const BcConfig& cfg, Rng& rng);

}  // namespace locoforge

#endif  // LOCOFORGE_BC_HPP
