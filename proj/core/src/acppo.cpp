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
#include "locoforge/acppo.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <thread>

namespace locoforge {
namespace {

constexpr uint64_t kTrainerRngStream = 0x70a9d5;

template <typename Fn>
void for_each_env(int n_envs, int n_threads, Fn&& fn) {
  if (n_threads <= 1 || n_envs <= 1) {
    for (int e = 0; e < n_envs; ++e) fn(e);
    return;
  }
  const int workers = std::min(n_threads, n_envs);
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w)
    pool.emplace_back([&fn, w, workers, n_envs] {
      for (int e = w; e < n_envs; e += workers) fn(e);
    });
  for (auto& t : pool) t.join();
}

double barrier_slope(double margin, double t_barrier, double delta_feas) {
  return margin > delta_feas ? 1.0 / (margin * t_barrier) : 1.0 / (delta_feas * t_barrier);
}

bool is_flag_vector(const Eigen::VectorXd& v) {
  return ((v.array() == 0.0) || (v.array() == 1.0)).all();
}

}  // namespace

void UpdateConfig::validate() const {
  if (!(gamma > 0.0 && gamma < 1.0))
    throw std::invalid_argument("UpdateConfig: gamma must be in (0, 1)");
  if (!(lambda >= 0.0 && lambda <= 1.0))
    throw std::invalid_argument("UpdateConfig: lambda must be in [0, 1]");
  if (!(beta > 0.0)) throw std::invalid_argument("UpdateConfig: beta must be positive");
  if (!(kl_target > 0.0)) throw std::invalid_argument("UpdateConfig: kl_target must be positive");
  if (!(clip_epsilon > 0.0))
    throw std::invalid_argument("UpdateConfig: clip_epsilon must be positive");
  if (!(cost_limits.array() > 0.0).all())
    throw std::invalid_argument("UpdateConfig: cost limits must be positive");
  if (!(t_barrier > 0.0)) throw std::invalid_argument("UpdateConfig: t_barrier must be positive");
  if (t_barrier_anneal_iters < 0)
    throw std::invalid_argument("UpdateConfig: t_barrier_anneal_iters must be non-negative");
  if (t_barrier_anneal_iters > 0 && !(t_barrier_final > 0.0))
    throw std::invalid_argument("UpdateConfig: t_barrier_final must be positive");
  if (!(delta_feas > 0.0)) throw std::invalid_argument("UpdateConfig: delta_feas must be positive");
  if (epochs < 1) throw std::invalid_argument("UpdateConfig: epochs must be at least 1");
  if (minibatches < 1) throw std::invalid_argument("UpdateConfig: minibatches must be at least 1");
  if (!(actor_lr > 0.0) || !(critic_lr > 0.0))
    throw std::invalid_argument("UpdateConfig: learning rates must be positive");
  if (!(entropy_weight >= 0.0) || !(value_weight >= 0.0))
    throw std::invalid_argument("UpdateConfig: loss weights must be non-negative");
  if (!(grad_clip_norm >= 0.0))
    throw std::invalid_argument("UpdateConfig: grad_clip_norm must be non-negative");
}

void RolloutBuffer::validate() const {
  if (horizon < 1 || n_envs < 1)
    throw std::invalid_argument("RolloutBuffer: empty buffer");
  const int n = size();
  const auto want = [n](const char* name, Eigen::Index got, Eigen::Index expect) {
    if (got != expect) throw std::invalid_argument(std::string("RolloutBuffer: bad shape for ") + name);
  };
  want("obs", obs.cols(), n);
  want("actions", actions.cols(), n);
  want("behavior_means", behavior_means.cols(), n);
  want("behavior_means rows", behavior_means.rows(), actions.rows());
  want("behavior_log_std", behavior_log_std.size(), actions.rows());
  want("log_probs", log_probs.size(), n);
  want("rewards", rewards.size(), n);
  want("costs", costs.rows(), kNumCosts);
  want("costs cols", costs.cols(), n);
  want("values", values.size(), n);
  want("cost_values", cost_values.rows(), kNumCosts);
  want("cost_values cols", cost_values.cols(), n);
  want("terminated", terminated.size(), n);
  want("truncated", truncated.size(), n);
  want("final_values", final_values.size(), n);
  want("final_cost_values", final_cost_values.rows(), kNumCosts);
  want("final_cost_values cols", final_cost_values.cols(), n);
  want("tail_values", tail_values.size(), n_envs);
  want("tail_cost_values", tail_cost_values.rows(), kNumCosts);
  want("tail_cost_values cols", tail_cost_values.cols(), n_envs);
  if (!log_probs.allFinite())
    throw std::invalid_argument("RolloutBuffer: non-finite log probabilities");
  if (!is_flag_vector(terminated) || !is_flag_vector(truncated))
    throw std::invalid_argument("RolloutBuffer: flags must be 0 or 1");
  if (((terminated + truncated).array() > 1.0).any())
    throw std::invalid_argument("RolloutBuffer: a step cannot both fail and truncate");
}

GaeResult compute_gae(const Eigen::VectorXd& rewards, const Eigen::VectorXd& values,
                      const Eigen::VectorXd& done, const Eigen::VectorXd& next_values,
                      double gamma, double lambda) {
  const Eigen::Index n = rewards.size();
  if (values.size() != n || done.size() != n || next_values.size() != n)
    throw std::invalid_argument("compute_gae: length mismatch");
  GaeResult out;
  out.advantages.resize(n);
  out.returns.resize(n);
  double running = 0.0;
  for (Eigen::Index t = n - 1; t >= 0; --t) {
    const double delta = rewards[t] + gamma * next_values[t] - values[t];
    running = delta + gamma * lambda * (1.0 - done[t]) * running;
    out.advantages[t] = running;
    out.returns[t] = running + values[t];
  }
  return out;
}

AdvantageSet compute_advantages(const RolloutBuffer& buffer, double gamma, double lambda) {
  buffer.validate();
  const int n = buffer.size();
  const int h = buffer.horizon;
  AdvantageSet set;
  set.advantages.resize(n);
  set.returns.resize(n);
  set.cost_advantages.resize(kNumCosts, n);
  set.cost_returns.resize(kNumCosts, n);

  Eigen::VectorXd next(h);
  for (int e = 0; e < buffer.n_envs; ++e) {
    const int base = e * h;
    const Eigen::VectorXd done =
        buffer.terminated.segment(base, h) + buffer.truncated.segment(base, h);

    // A step's successor value: zero after a failure, the recorded terminal
    // estimate after a time limit, the stored V(s_{t+1}) mid-slice, and the
    // tail estimate at the horizon cut.
    const auto successor = [&](const Eigen::VectorXd& vals, const Eigen::VectorXd& finals,
                               double tail) {
      for (int t = 0; t < h; ++t) {
        const int c = base + t;
        if (buffer.terminated[c] > 0.5)
          next[t] = 0.0;
        else if (buffer.truncated[c] > 0.5)
          next[t] = finals[c];
        else if (t + 1 < h)
          next[t] = vals[c + 1];
        else
          next[t] = tail;
      }
    };

    successor(buffer.values, buffer.final_values, buffer.tail_values[e]);
    GaeResult g = compute_gae(buffer.rewards.segment(base, h), buffer.values.segment(base, h),
                              done, next, gamma, lambda);
    set.advantages.segment(base, h) = g.advantages;
    set.returns.segment(base, h) = g.returns;

    for (int k = 0; k < kNumCosts; ++k) {
      const Eigen::VectorXd cvals = buffer.cost_values.row(k).transpose();
      const Eigen::VectorXd cfinals = buffer.final_cost_values.row(k).transpose();
      successor(cvals, cfinals, buffer.tail_cost_values(k, e));
      g = compute_gae(buffer.costs.row(k).segment(base, h).transpose(),
                      cvals.segment(base, h), done, next, gamma, lambda);
      set.cost_advantages.row(k).segment(base, h) = g.advantages.transpose();
      set.cost_returns.row(k).segment(base, h) = g.returns.transpose();
    }
  }

  set.raw_mean = set.advantages.mean();
  set.raw_std = std::sqrt((set.advantages.array() - set.raw_mean).square().mean());
  set.advantages = ((set.advantages.array() - set.raw_mean) / (set.raw_std + 1e-8)).matrix();
  return set;
}

double estimate_cost_return(const RolloutBuffer& buffer, int k, double gamma,
                            CostReturnMode mode) {
  if (k < 0 || k >= kNumCosts)
    throw std::invalid_argument("estimate_cost_return: cost index out of range");
  if (mode == CostReturnMode::kMeanStep) return buffer.costs.row(k).mean();

  double total = 0.0;
  int segments = 0;
  for (int e = 0; e < buffer.n_envs; ++e) {
    double sum = 0.0;
    double disc = 1.0;
    bool open = false;
    for (int t = 0; t < buffer.horizon; ++t) {
      const int c = buffer.col(t, e);
      sum += disc * buffer.costs(k, c);
      disc *= gamma;
      open = true;
      if (buffer.terminated[c] > 0.5 || buffer.truncated[c] > 0.5) {
        total += sum;
        ++segments;
        sum = 0.0;
        disc = 1.0;
        open = false;
      }
    }
    if (open) {
      total += sum;
      ++segments;
    }
  }
  return segments > 0 ? total / segments : 0.0;
}

double surrogate_cost(double j_old, double ratio_adv_mean, double gamma, CostReturnMode mode) {
  const double scale =
      mode == CostReturnMode::kDiscountedEpisode ? 1.0 / (1.0 - gamma) : 1.0;
  return j_old + scale * ratio_adv_mean;
}

double log_barrier(double margin, double t_barrier, double delta_feas) {
  if (margin > delta_feas) return std::log(margin) / t_barrier;
  return std::log(delta_feas) / t_barrier + (margin - delta_feas) / (delta_feas * t_barrier);
}

TrainerState init_trainer(const TrainerInit& init, const UpdateConfig& cfg, uint64_t seed) {
  cfg.validate();
  if (init.obs_dim < 1 || init.action_dim < 1)
    throw std::invalid_argument("init_trainer: dimensions must be positive");

  TrainerState t;
  NetSpec actor_spec{init.obs_dim, init.actor_hidden, init.action_dim, Activation::Tanh};
  NetInitOptions actor_opts;
  actor_opts.final_layer_gain = init.actor_final_gain;
  actor_opts.gaussian_head = true;
  actor_opts.log_std_init = init.log_std_init;
  t.actor = net_init(actor_spec, seed, actor_opts);

  NetSpec critic_spec{init.obs_dim, init.critic_hidden, 1, Activation::Tanh};
  t.critic = net_init(critic_spec, seed + 1);
  for (int k = 0; k < kNumCosts; ++k)
    t.cost_critics[k] = net_init(critic_spec, seed + 2 + static_cast<uint64_t>(k));

  AdamConfig actor_adam;
  actor_adam.learning_rate = cfg.actor_lr;
  actor_adam.grad_clip_norm = cfg.grad_clip_norm;
  AdamConfig critic_adam;
  critic_adam.learning_rate = cfg.critic_lr;
  critic_adam.grad_clip_norm = cfg.grad_clip_norm;
  t.actor_opt = OptimizerState::zeros_like(t.actor, actor_adam);
  t.critic_opt = OptimizerState::zeros_like(t.critic, critic_adam);
  for (int k = 0; k < kNumCosts; ++k)
    t.cost_critic_opts[k] = OptimizerState::zeros_like(t.cost_critics[k], critic_adam);

  t.beta = cfg.beta;
  t.iteration = 0;
  t.rng = Rng(seed, kTrainerRngStream);
  return t;
}

RolloutBuffer collect_rollouts(TrainerState& trainer, std::vector<Env>& envs, int horizon,
                               const CurriculumState& cstate, const CurriculumConfig& ccfg,
                               int n_threads) {
  if (horizon < 1) throw std::invalid_argument("collect_rollouts: horizon must be at least 1");
  if (envs.empty()) throw std::invalid_argument("collect_rollouts: no environments");
  if (!trainer.actor.has_gaussian_head())
    throw std::invalid_argument("collect_rollouts: actor needs a gaussian head");
  if (trainer.actor.spec.output_dim != kActionDim)
    throw std::invalid_argument("collect_rollouts: actor output must match the action space");

  const int n_envs = static_cast<int>(envs.size());
  const int obs_dim = trainer.actor.spec.input_dim;
  const int action_dim = trainer.actor.spec.output_dim;

  // A freshly constructed environment reports an all-zero observation, which
  // no reachable state produces (the height entry is always positive).
  for (auto& env : envs)
    if (env.done() || env.observation().isZero(0.0)) env.reset(cstate, ccfg);
  if (envs.front().observation().size() != obs_dim)
    throw std::invalid_argument("collect_rollouts: observation size mismatch");

  RolloutBuffer b;
  b.horizon = horizon;
  b.n_envs = n_envs;
  const int n = b.size();
  b.obs.resize(obs_dim, n);
  b.actions.resize(action_dim, n);
  b.behavior_means.resize(action_dim, n);
  b.behavior_log_std = trainer.actor.log_std;
  b.log_probs.resize(n);
  b.rewards.resize(n);
  b.costs.resize(kNumCosts, n);
  b.values.resize(n);
  b.cost_values.resize(kNumCosts, n);
  b.terminated.setZero(n);
  b.truncated.setZero(n);
  b.final_values.setZero(n);
  b.final_cost_values.setZero(kNumCosts, n);
  b.tail_values.resize(n_envs);
  b.tail_cost_values.resize(kNumCosts, n_envs);

  Eigen::MatrixXd obs_batch(obs_dim, n_envs);
  Eigen::MatrixXd action_batch(action_dim, n_envs);
  Eigen::VectorXd logp_batch(n_envs);
  std::vector<int> episode_counts(n_envs, 0);

  for (int t = 0; t < horizon; ++t) {
    for (int e = 0; e < n_envs; ++e) obs_batch.col(e) = envs[e].observation();
    const Eigen::MatrixXd means = net_forward(trainer.actor, obs_batch);
    const Eigen::MatrixXd vals = net_forward(trainer.critic, obs_batch);
    std::array<Eigen::MatrixXd, kNumCosts> cvals;
    for (int k = 0; k < kNumCosts; ++k)
      cvals[k] = net_forward(trainer.cost_critics[k], obs_batch);

    // All stochastic draws come off the trainer rng here, in environment
    // order, before any parallel stepping.
    for (int e = 0; e < n_envs; ++e) {
      action_batch.col(e) = gaussian_sample(means.col(e), trainer.actor.log_std, trainer.rng);
      logp_batch[e] =
          gaussian_logprob(means.col(e), trainer.actor.log_std, action_batch.col(e));
    }

    for_each_env(n_envs, n_threads, [&](int e) {
      const int c = b.col(t, e);
      b.obs.col(c) = obs_batch.col(e);
      b.actions.col(c) = action_batch.col(e);
      b.behavior_means.col(c) = means.col(e);
      b.log_probs[c] = logp_batch[e];
      b.values[c] = vals(0, e);
      for (int k = 0; k < kNumCosts; ++k) b.cost_values(k, c) = cvals[k](0, e);

      const Vec6 action = action_batch.col(e);
      const EnvStep st = envs[e].step(action);
      b.rewards[c] = st.reward;
      b.costs.col(c) = st.costs.vec();
      const bool failed = st.terminated;
      const bool timed_out = st.truncated && !st.terminated;
      b.terminated[c] = failed ? 1.0 : 0.0;
      b.truncated[c] = timed_out ? 1.0 : 0.0;
      if (timed_out) {
        b.final_values[c] = net_forward(trainer.critic, st.obs)[0];
        for (int k = 0; k < kNumCosts; ++k)
          b.final_cost_values(k, c) = net_forward(trainer.cost_critics[k], st.obs)[0];
      }
      if (failed || timed_out) {
        envs[e].reset(cstate, ccfg);
        ++episode_counts[e];
      }
    });
  }

  for (int e = 0; e < n_envs; ++e) obs_batch.col(e) = envs[e].observation();
  b.tail_values = net_forward(trainer.critic, obs_batch).row(0).transpose();
  for (int k = 0; k < kNumCosts; ++k)
    b.tail_cost_values.row(k) = net_forward(trainer.cost_critics[k], obs_batch).row(0);

  b.episodes = std::accumulate(episode_counts.begin(), episode_counts.end(), int64_t{0});
  return b;
}

Minibatch gather_minibatch(const RolloutBuffer& buffer, const AdvantageSet& adv,
                           const Eigen::Vector3d& j_old, const std::vector<int>& indices) {
  const int m = static_cast<int>(indices.size());
  if (m == 0) throw std::invalid_argument("gather_minibatch: empty index set");
  Minibatch mb;
  mb.obs.resize(buffer.obs.rows(), m);
  mb.actions.resize(buffer.actions.rows(), m);
  mb.behavior_means.resize(buffer.actions.rows(), m);
  mb.behavior_log_std = buffer.behavior_log_std;
  mb.old_log_probs.resize(m);
  mb.advantages.resize(m);
  mb.returns.resize(m);
  mb.cost_advantages.resize(kNumCosts, m);
  mb.cost_returns.resize(kNumCosts, m);
  mb.j_old = j_old;
  for (int j = 0; j < m; ++j) {
    const int c = indices[j];
    if (c < 0 || c >= buffer.size())
      throw std::invalid_argument("gather_minibatch: index out of range");
    mb.obs.col(j) = buffer.obs.col(c);
    mb.actions.col(j) = buffer.actions.col(c);
    mb.behavior_means.col(j) = buffer.behavior_means.col(c);
    mb.old_log_probs[j] = buffer.log_probs[c];
    mb.advantages[j] = adv.advantages[c];
    mb.returns[j] = adv.returns[c];
    mb.cost_advantages.col(j) = adv.cost_advantages.col(c);
    mb.cost_returns.col(j) = adv.cost_returns.col(c);
  }
  return mb;
}

LossBreakdown p3o_loss(const Minibatch& mb, const TrainerState& trainer,
                       const UpdateConfig& cfg, P3oGradients* grads) {
  const int m = static_cast<int>(mb.obs.cols());
  if (m == 0) throw std::invalid_argument("p3o_loss: empty minibatch");
  const int d = trainer.actor.spec.output_dim;
  if (mb.actions.rows() != d || mb.behavior_means.rows() != d ||
      mb.behavior_log_std.size() != d)
    throw std::invalid_argument("p3o_loss: action dimension mismatch");
  if (mb.old_log_probs.size() != m || mb.advantages.size() != m || mb.returns.size() != m ||
      mb.cost_advantages.cols() != m || mb.cost_returns.cols() != m)
    throw std::invalid_argument("p3o_loss: batch size mismatch");

  ForwardTrace actor_trace;
  const Eigen::MatrixXd means =
      net_forward(trainer.actor, mb.obs, grads ? &actor_trace : nullptr);
  const Eigen::VectorXd& log_std = trainer.actor.log_std;
  const Eigen::ArrayXd sigma2 = (2.0 * log_std.array()).exp();
  const Eigen::ArrayXd old_sigma2 = (2.0 * mb.behavior_log_std.array()).exp();

  const Eigen::VectorXd logp = gaussian_logprob_batch(means, log_std, mb.actions);
  const Eigen::ArrayXd ratio = (logp - mb.old_log_probs).array().exp();
  const Eigen::ArrayXd adv = mb.advantages.array();

  Eigen::VectorXd kls(m);
  for (int j = 0; j < m; ++j)
    kls[j] = gaussian_kl(means.col(j), log_std, mb.behavior_means.col(j), mb.behavior_log_std);
  const double kl_mean = kls.mean();

  LossBreakdown out;
  out.kl = kl_mean;
  out.mean_ratio = ratio.mean();
  out.entropy = gaussian_entropy(log_std);

  Eigen::ArrayXd dloss_dratio = Eigen::ArrayXd::Zero(m);
  if (cfg.surrogate_mode == SurrogateMode::kKlPenalty) {
    out.surrogate = (ratio * adv).mean() - trainer.beta * kl_mean;
    dloss_dratio = -adv / m;
  } else {
    const Eigen::ArrayXd clipped =
        ratio.min(1.0 + cfg.clip_epsilon).max(1.0 - cfg.clip_epsilon);
    const Eigen::ArrayXd unclipped_term = ratio * adv;
    const Eigen::ArrayXd clipped_term = clipped * adv;
    out.surrogate = unclipped_term.min(clipped_term).mean();
    for (int j = 0; j < m; ++j)
      dloss_dratio[j] = unclipped_term[j] <= clipped_term[j] ? -adv[j] / m : 0.0;
  }

  for (int k = 0; k < kNumCosts; ++k) {
    if (!cfg.constraints_enabled) {
      out.j_cost[k] = mb.j_old[k];
      continue;
    }
    const Eigen::ArrayXd cost_adv = mb.cost_advantages.row(k).transpose().array();
    const double ratio_adv_mean = (ratio * cost_adv).mean();
    out.j_cost[k] =
        surrogate_cost(mb.j_old[k], ratio_adv_mean, cfg.gamma, cfg.cost_return_mode);
    const double margin = cfg.cost_limits[k] - out.j_cost[k];
    out.barrier[k] = log_barrier(margin, cfg.t_barrier, cfg.delta_feas);
    const double scale =
        cfg.cost_return_mode == CostReturnMode::kDiscountedEpisode ? 1.0 / (1.0 - cfg.gamma)
                                                                   : 1.0;
    dloss_dratio +=
        (barrier_slope(margin, cfg.t_barrier, cfg.delta_feas) * scale / m) * cost_adv;
  }

  ForwardTrace critic_trace;
  const Eigen::MatrixXd v = net_forward(trainer.critic, mb.obs, grads ? &critic_trace : nullptr);
  const Eigen::ArrayXd v_err = v.row(0).transpose().array() - mb.returns.array();
  out.value_loss = v_err.square().mean();

  std::array<ForwardTrace, kNumCosts> cost_traces;
  std::array<Eigen::ArrayXd, kNumCosts> cost_errs;
  for (int k = 0; k < kNumCosts; ++k) {
    const Eigen::MatrixXd vk =
        net_forward(trainer.cost_critics[k], mb.obs, grads ? &cost_traces[k] : nullptr);
    cost_errs[k] = vk.row(0).transpose().array() - mb.cost_returns.row(k).transpose().array();
    out.cost_value_loss[k] = cost_errs[k].square().mean();
  }

  out.total = -(out.surrogate + out.barrier.sum()) - cfg.entropy_weight * out.entropy +
              cfg.value_weight * (out.value_loss + out.cost_value_loss.sum());
  if (!std::isfinite(out.total)) throw std::runtime_error("p3o_loss: non-finite loss");

  if (grads) {
    grads->actor = GradBuffer::zeros_like(trainer.actor);
    grads->critic = GradBuffer::zeros_like(trainer.critic);
    for (int k = 0; k < kNumCosts; ++k)
      grads->cost_critics[k] = GradBuffer::zeros_like(trainer.cost_critics[k]);

    const Eigen::ArrayXd dlogp = dloss_dratio * ratio;
    Eigen::MatrixXd dmean(d, m);
    Eigen::ArrayXd dls = Eigen::ArrayXd::Zero(d);
    const bool kl_mode = cfg.surrogate_mode == SurrogateMode::kKlPenalty;
    for (int j = 0; j < m; ++j) {
      const Eigen::ArrayXd residual = mb.actions.col(j).array() - means.col(j).array();
      dmean.col(j) = (dlogp[j] * residual / sigma2).matrix();
      if (kl_mode)
        dmean.col(j) +=
            ((trainer.beta / m) *
             (means.col(j).array() - mb.behavior_means.col(j).array()) / old_sigma2)
                .matrix();
      dls += dlogp[j] * (residual.square() / sigma2 - 1.0);
    }
    if (kl_mode) dls += trainer.beta * (sigma2 / old_sigma2 - 1.0);
    dls -= cfg.entropy_weight;
    net_backward(trainer.actor, actor_trace, dmean, grads->actor);
    grads->actor.d_log_std = dls.matrix();

    Eigen::MatrixXd dv(1, m);
    dv.row(0) = (cfg.value_weight * 2.0 / m) * v_err.matrix().transpose();
    net_backward(trainer.critic, critic_trace, dv, grads->critic);
    for (int k = 0; k < kNumCosts; ++k) {
      dv.row(0) = (cfg.value_weight * 2.0 / m) * cost_errs[k].matrix().transpose();
      net_backward(trainer.cost_critics[k], cost_traces[k], dv, grads->cost_critics[k]);
    }
  }
  return out;
}

double effective_t_barrier(const UpdateConfig& cfg, int64_t iteration) {
  if (cfg.t_barrier_anneal_iters <= 0) return cfg.t_barrier;
  const double frac = std::min(
      1.0, static_cast<double>(iteration) / static_cast<double>(cfg.t_barrier_anneal_iters));
  return cfg.t_barrier + frac * (cfg.t_barrier_final - cfg.t_barrier);
}

IterationMetrics update(TrainerState& trainer, const RolloutBuffer& buffer,
                        const UpdateConfig& cfg, CurriculumState& cstate,
                        const CurriculumConfig& ccfg) {
  cfg.validate();
  buffer.validate();
  const int n = buffer.size();
  if (n < cfg.minibatches)
    throw std::invalid_argument("update: buffer smaller than the minibatch count");

  const TrainerState snapshot = trainer;
  UpdateConfig eff = cfg;
  eff.t_barrier = effective_t_barrier(cfg, trainer.iteration);

  IterationMetrics met;
  met.iter = trainer.iteration + 1;
  met.mean_reward = buffer.rewards.mean();
  met.episodes = buffer.episodes;

  const AdvantageSet adv = compute_advantages(buffer, cfg.gamma, cfg.lambda);
  Eigen::Vector3d j_old;
  for (int k = 0; k < kNumCosts; ++k)
    j_old[k] = estimate_cost_return(buffer, k, cfg.gamma, cfg.cost_return_mode);
  met.j_cost = j_old;

  double surrogate_acc = 0.0;
  double value_acc = 0.0;
  Eigen::Vector3d barrier_acc = Eigen::Vector3d::Zero();
  int batches = 0;

  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  try {
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
      trainer.rng.shuffle(order);
      for (int bi = 0; bi < cfg.minibatches; ++bi) {
        const int lo = bi * n / cfg.minibatches;
        const int hi = (bi + 1) * n / cfg.minibatches;
        const std::vector<int> idx(order.begin() + lo, order.begin() + hi);
        const Minibatch mb = gather_minibatch(buffer, adv, j_old, idx);
        P3oGradients grads;
        const LossBreakdown lb = p3o_loss(mb, trainer, eff, &grads);
        surrogate_acc += lb.surrogate;
        value_acc += lb.value_loss + lb.cost_value_loss.sum();
        barrier_acc += lb.barrier;
        ++batches;
        opt_step(trainer.actor, grads.actor, trainer.actor_opt);
        opt_step(trainer.critic, grads.critic, trainer.critic_opt);
        for (int k = 0; k < kNumCosts; ++k)
          opt_step(trainer.cost_critics[k], grads.cost_critics[k],
                   trainer.cost_critic_opts[k]);
      }
    }
  } catch (const std::runtime_error&) {
    trainer = snapshot;
    met.aborted = true;
  }

  if (!met.aborted && batches > 0) {
    met.surrogate = surrogate_acc / batches;
    met.value_loss = value_acc / batches;
    met.barrier = barrier_acc / batches;
  }

  const Eigen::MatrixXd new_means = net_forward(trainer.actor, buffer.obs);
  double kl = 0.0;
  for (int c = 0; c < n; ++c)
    kl += gaussian_kl(new_means.col(c), trainer.actor.log_std, buffer.behavior_means.col(c),
                      buffer.behavior_log_std);
  met.kl = kl / n;

  if (!met.aborted && cfg.surrogate_mode == SurrogateMode::kKlPenalty) {
    if (met.kl > 2.0 * cfg.kl_target)
      trainer.beta *= 2.0;
    else if (met.kl < 0.5 * cfg.kl_target)
      trainer.beta *= 0.5;
  }
  met.beta = trainer.beta;
  met.entropy = gaussian_entropy(trainer.actor.log_std);
  met.action_std = trainer.actor.log_std.array().exp().mean();

  cstate = update_on_iteration(std::move(cstate), ccfg, met.mean_reward,
                               static_cast<int>(buffer.episodes));
  met.sigma_level = cstate.level;

  trainer.iteration = snapshot.iteration + 1;
  return met;
}

EvalReport evaluate(const TrainerState& trainer, Env& env, int n_episodes,
                    const EvalProtocol& protocol, const CurriculumState& cstate,
                    const CurriculumConfig& ccfg) {
  if (n_episodes < 1) throw std::invalid_argument("evaluate: n_episodes must be at least 1");
  if (protocol.max_steps < 1)
    throw std::invalid_argument("evaluate: max_steps must be at least 1");
  if (trainer.actor.spec.output_dim != kActionDim)
    throw std::invalid_argument("evaluate: actor output must match the action space");

  EvalReport rep;
  rep.episodes = n_episodes;
  int64_t total_steps = 0;
  double vx_acc = 0.0;
  double ee_acc = 0.0;
  double reward_acc = 0.0;
  Eigen::Vector3d cost_acc = Eigen::Vector3d::Zero();
  Eigen::Vector3d violations = Eigen::Vector3d::Zero();

  for (int ep = 0; ep < n_episodes; ++ep) {
    env.reset(cstate, ccfg);
    if (std::isfinite(protocol.fixed_v_x)) {
      CommandSet cmd = env.command();
      cmd.v_x_cmd = protocol.fixed_v_x;
      env.set_command(cmd);
    }
    Rng walk(protocol.walk_seed, static_cast<uint64_t>(ep) + 1);

    Eigen::MatrixXd trace;
    if (protocol.record_trace) trace.resize(protocol.max_steps, kTraceCols);

    int steps = 0;
    for (; steps < protocol.max_steps && !env.done(); ++steps) {
      if (protocol.walk_target) {
        CommandSet cmd = env.command();
        const Eigen::Vector2d proposal =
            cmd.p_ee_cmd +
            protocol.walk_step * Eigen::Vector2d(walk.normal(), walk.normal());
        if (in_reachable_workspace(proposal, ccfg)) {
          cmd.p_ee_cmd = proposal;
          env.set_command(cmd);
        }
      }

      const Vec6 action = net_forward(trainer.actor, env.observation());
      const EnvStep st = env.step(action);

      const SimState& s = env.state();
      const KinematicsResult& kin = env.kinematics();
      const CommandSet& cmd = env.command();
      const Eigen::Vector3d costs = st.costs.vec();
      vx_acc += std::abs(s.qd[kBaseX] - cmd.v_x_cmd);
      ee_acc += (kin.p_ee_base - cmd.p_ee_cmd).norm();
      reward_acc += st.reward;
      cost_acc += costs;
      for (int k = 0; k < kNumCosts; ++k)
        if (costs[k] > 0.0) violations[k] += 1.0;

      if (protocol.record_trace) {
        trace(steps, kTraceStep) = steps;
        trace(steps, kTraceVx) = s.qd[kBaseX];
        trace(steps, kTraceVxCmd) = cmd.v_x_cmd;
        trace(steps, kTraceEeX) = kin.p_ee_base.x();
        trace(steps, kTraceEeY) = kin.p_ee_base.y();
        trace(steps, kTraceEeCmdX) = cmd.p_ee_cmd.x();
        trace(steps, kTraceEeCmdY) = cmd.p_ee_cmd.y();
        trace(steps, kTraceCostArm) = costs[0];
        trace(steps, kTraceCostGripper) = costs[1];
        trace(steps, kTraceCostForce) = costs[2];
        const ModelSpec& model = env.model();
        for (int j = 0; j < 3; ++j) {
          const double q = s.q[kArm1 + j];
          const double over = std::max(0.0, q - model.q_upper[2 + j]) +
                              std::max(0.0, model.q_lower[2 + j] - q);
          trace(steps, kTraceArm1Over + j) = over;
        }
      }
    }
    rep.episode_lengths.push_back(steps);
    total_steps += steps;
    if (protocol.record_trace) rep.traces.push_back(trace.topRows(steps));
  }

  if (total_steps > 0) {
    const double inv = 1.0 / static_cast<double>(total_steps);
    rep.mean_vx_error = vx_acc * inv;
    rep.mean_ee_error = ee_acc * inv;
    rep.mean_reward = reward_acc * inv;
    rep.mean_cost = cost_acc * inv;
    rep.violation_fraction = violations * inv;
  }
  return rep;
}

}  // namespace locoforge
