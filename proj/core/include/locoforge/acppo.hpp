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
#ifndef LOCOFORGE_ACPPO_HPP
#define LOCOFORGE_ACPPO_HPP

#include <array>
#include <cstdint>
#include <limits>
#include <vector>

#include <Eigen/Dense>

#include "locoforge/curriculum.hpp"
#include "locoforge/net.hpp"
#include "locoforge/rng.hpp"
#include "locoforge/task.hpp"

namespace locoforge {

/// Policy surrogate: KL-penalty with an adaptive weight, or the clipped
/// ratio objective.
enum class SurrogateMode { kKlPenalty, kClip };

/// How the behavior-policy cost return J_Ck is estimated from a buffer.
/// kMeanStep averages the raw per-step cost, which keeps J_Ck on the same
/// scale as the per-step cost limits below. kDiscountedEpisode averages the
/// discounted per-episode cost sums instead.
enum class CostReturnMode { kMeanStep, kDiscountedEpisode };

struct UpdateConfig {
  double gamma = 0.99;
  double lambda = 0.95;

  SurrogateMode surrogate_mode = SurrogateMode::kKlPenalty;
  double beta = 1.0;        // initial KL penalty weight
  double kl_target = 0.01;  // adaptation reference: beta doubles above 2x, halves below 0.5x
  double clip_epsilon = 0.2;

  // Constraint thresholds per cost channel (arm overshoot, centroid
  // distance, contact force) and the barrier stiffness 1/t.
  Eigen::Vector3d cost_limits{0.05, 0.6, 5.0};
  double t_barrier = 20.0;
  double t_barrier_final = 20.0;    // anneal endpoint
  int t_barrier_anneal_iters = 0;   // 0 keeps t_barrier constant
  double delta_feas = 1e-3;         // margin below which the barrier goes linear
  CostReturnMode cost_return_mode = CostReturnMode::kMeanStep;
  bool constraints_enabled = true;  // false drops every barrier term

  int epochs = 4;
  int minibatches = 4;
  double actor_lr = 3e-4;
  double critic_lr = 1e-3;
  double entropy_weight = 0.0;
  double value_weight = 0.5;
  double grad_clip_norm = 0.5;

  /// Throws std::invalid_argument on out-of-range values.
  void validate() const;
};

/// Transitions from one collection pass, laid out as horizon x n_envs with
/// column t + e * horizon, so each environment owns a contiguous slice.
struct RolloutBuffer {
  int horizon = 0;
  int n_envs = 0;

  Eigen::MatrixXd obs;             // (obs_dim x size)
  Eigen::MatrixXd actions;         // (action_dim x size)
  Eigen::MatrixXd behavior_means;  // actor mean head at collection time
  Eigen::VectorXd behavior_log_std;
  Eigen::VectorXd log_probs;       // behavior-policy log densities
  Eigen::VectorXd rewards;
  Eigen::MatrixXd costs;           // (kNumCosts x size), non-negative
  Eigen::VectorXd values;          // reward critic V(s_t)
  Eigen::MatrixXd cost_values;     // (kNumCosts x size)

  // Episode-boundary flags, 0.0 or 1.0, at most one set per step.
  Eigen::VectorXd terminated;      // failure
  Eigen::VectorXd truncated;       // time limit

  // Successor values for steps that closed an episode: the critic estimate
  // of the terminal observation on truncation, zero on failure.
  Eigen::VectorXd final_values;
  Eigen::MatrixXd final_cost_values;

  // Critic estimates of each environment's observation after the last step,
  // used to bootstrap slices the horizon cut mid-episode.
  Eigen::VectorXd tail_values;           // (n_envs)
  Eigen::MatrixXd tail_cost_values;      // (kNumCosts x n_envs)

  int64_t episodes = 0;  // episodes that finished during collection

  int size() const { return horizon * n_envs; }
  int col(int t, int e) const { return t + e * horizon; }

  /// Throws std::invalid_argument on shape mismatch, non-finite log
  /// densities, or inconsistent flags.
  void validate() const;
};

/// Advantage estimates over one buffer. Reward advantages are normalized to
/// zero mean and unit variance; cost advantages are left on the raw cost
/// scale so the surrogate cost return stays comparable to its limit.
struct AdvantageSet {
  Eigen::VectorXd advantages;
  Eigen::VectorXd returns;
  Eigen::MatrixXd cost_advantages;  // (kNumCosts x size)
  Eigen::MatrixXd cost_returns;
  double raw_mean = 0.0;            // normalization stats of the reward advantages
  double raw_std = 0.0;
};

struct GaeResult {
  Eigen::VectorXd advantages;
  Eigen::VectorXd returns;
};

/// Generalized advantage estimation over a single trajectory slice:
/// delta_t = r_t + gamma * next_t - v_t, A_t = delta_t + gamma * lambda *
/// (1 - done_t) * A_{t+1}, returns = A + v. `next_values[t]` holds the value
/// of the successor state: the critic estimate when the episode continues or
/// was cut by a time limit, zero when it failed.
GaeResult compute_gae(const Eigen::VectorXd& rewards, const Eigen::VectorXd& values,
                      const Eigen::VectorXd& done, const Eigen::VectorXd& next_values,
                      double gamma, double lambda);

/// Runs compute_gae per environment slice for the reward stream and each
/// cost stream, then normalizes the reward advantages.
AdvantageSet compute_advantages(const RolloutBuffer& buffer, double gamma, double lambda);

/// Behavior-policy cost return for channel k. kDiscountedEpisode averages
/// sum_t gamma^t c_{k,t} over the episode segments in the buffer (segments
/// cut by the buffer boundary count as episodes); kMeanStep is the plain
/// per-step mean.
double estimate_cost_return(const RolloutBuffer& buffer, int k, double gamma,
                            CostReturnMode mode);

/// First-order surrogate for the cost return under the updated policy:
/// J_old + ratio_adv_mean / (1 - gamma), where ratio_adv_mean is
/// E[(pi_theta / pi_i) * A_Ck] over the minibatch. In kMeanStep mode the
/// horizon factor 1 / (1 - gamma) drops out because the estimate already
/// lives on the per-step scale.
double surrogate_cost(double j_old, double ratio_adv_mean, double gamma,
                      CostReturnMode mode);

/// log(margin) / t_barrier above delta_feas, continued below it by the
/// tangent line at delta_feas. Concave and increasing everywhere, so the
/// gradient always points back toward feasibility and stays finite.
double log_barrier(double margin, double t_barrier, double delta_feas = 1e-3);

struct TrainerInit {
  int obs_dim = kObsDim;
  int action_dim = kActionDim;
  std::vector<int> actor_hidden{64, 64};
  std::vector<int> critic_hidden{64, 64};
  double actor_final_gain = 0.01;
  double log_std_init = -0.5;
};

/// Everything the optimizer loop mutates: the four networks, their
/// optimizer states, the adaptive KL weight, and the sampling rng.
struct TrainerState {
  NetParams actor;
  NetParams critic;
  std::array<NetParams, kNumCosts> cost_critics;
  OptimizerState actor_opt;
  OptimizerState critic_opt;
  std::array<OptimizerState, kNumCosts> cost_critic_opts;
  double beta = 1.0;
  int64_t iteration = 0;
  Rng rng;
};

TrainerState init_trainer(const TrainerInit& init, const UpdateConfig& cfg, uint64_t seed);

/// Steps every environment `horizon` times under the current stochastic
/// policy and records the transitions. Environments that finish an episode
/// (including simulator divergence, which the environment reports as a
/// failure with its penalty already applied) are reset through the
/// curriculum and keep collecting. With n_threads > 1 the physics stepping
/// fans out over disjoint environment chunks; all sampling stays on the
/// trainer rng in a fixed order, so the result is thread-count invariant.
RolloutBuffer collect_rollouts(TrainerState& trainer, std::vector<Env>& envs, int horizon,
                               const CurriculumState& cstate, const CurriculumConfig& ccfg,
                               int n_threads = 1);

/// One gradient batch: transitions gathered by index plus the advantage
/// slices and the buffer-level behavior cost returns.
struct Minibatch {
  Eigen::MatrixXd obs;
  Eigen::MatrixXd actions;
  Eigen::MatrixXd behavior_means;
  Eigen::VectorXd behavior_log_std;
  Eigen::VectorXd old_log_probs;
  Eigen::VectorXd advantages;
  Eigen::VectorXd returns;
  Eigen::MatrixXd cost_advantages;
  Eigen::MatrixXd cost_returns;
  Eigen::Vector3d j_old = Eigen::Vector3d::Zero();
};

Minibatch gather_minibatch(const RolloutBuffer& buffer, const AdvantageSet& adv,
                           const Eigen::Vector3d& j_old, const std::vector<int>& indices);

struct LossBreakdown {
  double total = 0.0;
  double surrogate = 0.0;    // policy objective before the barriers
  double kl = 0.0;           // minibatch mean KL(pi_theta || pi_i)
  double entropy = 0.0;
  double mean_ratio = 0.0;
  double value_loss = 0.0;
  Eigen::Vector3d cost_value_loss = Eigen::Vector3d::Zero();
  Eigen::Vector3d barrier = Eigen::Vector3d::Zero();
  Eigen::Vector3d j_cost = Eigen::Vector3d::Zero();  // surrogate cost returns
};

struct P3oGradients {
  GradBuffer actor;
  GradBuffer critic;
  std::array<GradBuffer, kNumCosts> cost_critics;
};

/// Evaluates the full objective on one minibatch:
///   loss = -(L_PPO + sum_k barrier_k) - entropy_weight * entropy
///          + value_weight * (critic and cost-critic squared errors)
/// where L_PPO is E[ratio * A] - beta * KL in KL mode or the clipped-ratio
/// objective in clip mode, and barrier_k = log_barrier applied to
/// cost_limits[k] minus the surrogate cost return. Analytic gradients for
/// all four networks land in `grads` when given. Throws std::runtime_error
/// if the loss comes out non-finite.
LossBreakdown p3o_loss(const Minibatch& mb, const TrainerState& trainer,
                       const UpdateConfig& cfg, P3oGradients* grads);

/// t_barrier after the optional linear anneal, evaluated at `iteration`.
double effective_t_barrier(const UpdateConfig& cfg, int64_t iteration);

struct IterationMetrics {
  int64_t iter = 0;
  double mean_reward = 0.0;  // per-step mean over the buffer
  Eigen::Vector3d j_cost = Eigen::Vector3d::Zero();
  double kl = 0.0;           // measured after the epoch loop
  double entropy = 0.0;
  double surrogate = 0.0;
  double value_loss = 0.0;
  Eigen::Vector3d barrier = Eigen::Vector3d::Zero();
  double beta = 0.0;
  double action_std = 0.0;   // mean policy standard deviation
  int sigma_level = 0;
  int64_t episodes = 0;
  double wallclock = 0.0;    // filled by the caller owning the loop timer
  bool aborted = false;
};

/// One optimization iteration over a collected buffer: advantages, then
/// `epochs` passes of shuffled minibatch gradient steps, then the KL
/// measurement that adapts beta (doubling above twice the target, halving
/// below half of it). A non-finite loss anywhere rolls the trainer back to
/// its pre-update state and flags the metrics as aborted; the iteration
/// counter still advances. Folds the buffer's mean step reward into the
/// curriculum.
IterationMetrics update(TrainerState& trainer, const RolloutBuffer& buffer,
                        const UpdateConfig& cfg, CurriculumState& cstate,
                        const CurriculumConfig& ccfg);

/// Evaluation episode shaping. A finite fixed_v_x overrides the sampled
/// velocity command; walk_target drifts the gripper command each step by a
/// normal draw of scale walk_step, rejecting proposals that leave the
/// reachable workspace.
struct EvalProtocol {
  int max_steps = 500;
  double fixed_v_x = std::numeric_limits<double>::quiet_NaN();
  bool walk_target = false;
  double walk_step = 0.005;
  uint64_t walk_seed = 0;
  bool record_trace = false;
};

/// Per-step trace columns when record_trace is set. The last three carry
/// each arm joint's excursion beyond its position limits in radians, zero
/// while inside them.
enum EvalTraceCol {
  kTraceStep = 0,
  kTraceVx,
  kTraceVxCmd,
  kTraceEeX,
  kTraceEeY,
  kTraceEeCmdX,
  kTraceEeCmdY,
  kTraceCostArm,
  kTraceCostGripper,
  kTraceCostForce,
  kTraceArm1Over,
  kTraceArm2Over,
  kTraceArm3Over,
  kTraceCols,
};

struct EvalReport {
  int episodes = 0;
  double mean_vx_error = 0.0;  // mean |v_x - v_x_cmd| over all steps
  double mean_ee_error = 0.0;  // mean gripper-to-command distance, base frame
  double mean_reward = 0.0;
  Eigen::Vector3d mean_cost = Eigen::Vector3d::Zero();
  Eigen::Vector3d violation_fraction = Eigen::Vector3d::Zero();  // steps with c_k > 0
  std::vector<int> episode_lengths;
  std::vector<Eigen::MatrixXd> traces;  // one (steps x kTraceCols) block per episode
};

/// Runs the deterministic policy (mean action) for n_episodes and
/// aggregates tracking errors, per-channel cost statistics, and episode
/// lengths.
EvalReport evaluate(const TrainerState& trainer, Env& env, int n_episodes,
                    const EvalProtocol& protocol, const CurriculumState& cstate,
                    const CurriculumConfig& ccfg);

}  // namespace locoforge

#endif  // LOCOFORGE_ACPPO_HPP
