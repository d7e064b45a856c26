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
#include "locoforge/bc.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace locoforge {
namespace {

struct ArmFk {
  Eigen::Vector2d p;
  double angle;
  Eigen::Matrix<double, 2, 3> jac;
};

ArmFk arm_fk(const ModelSpec& model, const Eigen::Vector3d& q) {
  ArmFk out;
  out.p = model.arm_offset;
  out.angle = 0.0;
  out.jac.setZero();
  double cum = 0.0;
  Eigen::Vector2d tip[3];
  for (int i = 0; i < 3; ++i) {
    cum += q[i];
    out.p += model.arm_length[i] * Eigen::Vector2d{std::cos(cum), std::sin(cum)};
    tip[i] = out.p;
  }
  out.angle = cum;
  // Column j rotates every link at or beyond joint j about that joint.
  Eigen::Vector2d joint = model.arm_offset;
  cum = 0.0;
  for (int j = 0; j < 3; ++j) {
    const Eigen::Vector2d r = out.p - joint;
    out.jac.col(j) = Eigen::Vector2d{-r.y(), r.x()};
    cum += q[j];
    joint += model.arm_length[j] * Eigen::Vector2d{std::cos(cum), std::sin(cum)};
  }
  return out;
}

double wrap_angle(double a) {
  while (a > M_PI) a -= 2.0 * M_PI;
  while (a <= -M_PI) a += 2.0 * M_PI;
  return a;
}

constexpr char kDemoMagic[8] = {'L', 'F', 'D', 'E', 'M', 'O', 'S', '\0'};
constexpr uint32_t kDemoVersion = 1;

uint64_t fnv1a64(const void* data, size_t len, uint64_t h) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (size_t i = 0; i < len; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

template <typename T>
void write_pod(std::ofstream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
void read_pod(std::ifstream& in, T& v) {
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw std::runtime_error("demo file truncated");
}

}  // namespace

IkResult arm_ik(const ModelSpec& model, const Eigen::Vector2d& target_base,
                const Eigen::Vector3d& q_seed, const IkOptions& opts) {
  IkResult res;
  Eigen::Vector3d q = q_seed;
  const auto clamp_limits = [&](Eigen::Vector3d& v) {
    for (int i = 0; i < 3; ++i)
      v[i] = std::clamp(v[i], model.q_lower[2 + i], model.q_upper[2 + i]);
  };
  clamp_limits(q);

  const double lambda_sq = opts.damping * opts.damping;
  for (int it = 0; it < opts.max_iters; ++it) {
    const ArmFk fk = arm_fk(model, q);
    if (opts.use_angle) {
      Eigen::Vector3d e;
      e.head<2>() = target_base - fk.p;
      e[2] = wrap_angle(opts.target_angle - fk.angle);
      res.residual = e.norm();
      if (res.residual < opts.tol) break;
      Eigen::Matrix3d jac;
      jac.topRows<2>() = fk.jac;
      jac.row(2).setOnes();
      const Eigen::Matrix3d a = jac * jac.transpose() + lambda_sq * Eigen::Matrix3d::Identity();
      Eigen::Vector3d dq = jac.transpose() * a.ldlt().solve(e);
      dq = dq.cwiseMax(-opts.step_clamp).cwiseMin(opts.step_clamp);
      q += dq;
    } else {
      const Eigen::Vector2d e = target_base - fk.p;
      res.residual = e.norm();
      if (res.residual < opts.tol) break;
      const Eigen::Matrix2d a =
          fk.jac * fk.jac.transpose() + lambda_sq * Eigen::Matrix2d::Identity();
      Eigen::Vector3d dq = fk.jac.transpose() * a.ldlt().solve(e);
      dq = dq.cwiseMax(-opts.step_clamp).cwiseMin(opts.step_clamp);
      q += dq;
    }
    clamp_limits(q);
  }

  const ArmFk fk = arm_fk(model, q);
  if (opts.use_angle) {
    Eigen::Vector3d e;
    e.head<2>() = target_base - fk.p;
    e[2] = wrap_angle(opts.target_angle - fk.angle);
    res.residual = e.norm();
  } else {
    res.residual = (target_base - fk.p).norm();
  }
  res.q = q;
  res.success = res.residual < opts.tol;
  return res;
}

void ExpertConfig::validate() const {
  if (balance_kp <= 0.0 || balance_kd <= 0.0 || vel_gain <= 0.0 || leg_kp <= 0.0 ||
      leg_kd <= 0.0)
    throw std::invalid_argument("ExpertConfig: gains must be positive");
  if (pos_gain < 0.0) throw std::invalid_argument("ExpertConfig: pos_gain must be non-negative");
  if (pitch_gain < 0.0 || rate_filter < 0.0 || rate_filter >= 1.0 || torque_filter < 0.0 ||
      torque_filter >= 1.0)
    throw std::invalid_argument("ExpertConfig: pitch_gain must be non-negative and filters in [0, 1)");
  if (lean_limit <= 0.0) throw std::invalid_argument("ExpertConfig: lean_limit must be positive");
  if (slip_damping < 0.0 || arm_tau < 0.0 || vel_ref_tau < 0.0)
    throw std::invalid_argument("ExpertConfig: damping terms must be non-negative");
  if (ik_tol <= 0.0) throw std::invalid_argument("ExpertConfig: ik_tol must be positive");
  if (ik_max_iters <= 0) throw std::invalid_argument("ExpertConfig: ik_max_iters must be positive");
}

ScriptedExpert::ScriptedExpert(const ExpertConfig& cfg) : cfg_(cfg) { cfg_.validate(); }

void ScriptedExpert::reset() {
  have_ik_ = false;
  have_tilt_ = false;
  have_arm_cmd_ = false;
  have_torque_ = false;
  have_vref_ = false;
}

Eigen::Matrix<double, 6, 1> ScriptedExpert::action(const Env& env) {
  const SimState& s = env.state();
  const CommandSet& cmd = env.command();
  const ModelSpec& model = env.model();
  const TaskConfig& task = env.config();

  if (!have_ik_ || (cmd.p_ee_cmd - ik_target_).norm() > 1e-12) {
    const Eigen::Vector3d seed = have_ik_ ? ik_q_ : task.nominal_arm;
    IkOptions opts;
    opts.tol = cfg_.ik_tol;
    opts.max_iters = cfg_.ik_max_iters;
    const IkResult ik = arm_ik(model, cmd.p_ee_cmd, seed, opts);
    ik_q_ = ik.success ? ik.q : Eigen::Vector3d{s.q[kArm1], s.q[kArm2], s.q[kArm3]};
    ik_target_ = cmd.p_ee_cmd;
    have_ik_ = true;
  }

  const KinematicsResult& kin = env.kinematics();
  const double m_arm = model.arm_mass[0] + model.arm_mass[1] + model.arm_mass[2];
  const double m_rest = model.base_mass + model.thigh_mass + model.shank_mass + model.wheel_mass;
  const Eigen::Vector2d com =
      (m_arm * kin.arm_centroid + m_rest * kin.base_centroid) / (m_arm + m_rest);

  // Tilt of the center of mass over the wheel contact, positive leaning
  // forward.
  const Eigen::Vector2d rel = com - kin.wheel_center();
  const double tilt = std::atan2(rel.x(), std::max(rel.y(), 0.1));
  const double tilt_rate = have_tilt_ ? (tilt - tilt_prev_) / task.dt_control() : 0.0;
  tilt_rate_f_ = have_tilt_ ? cfg_.rate_filter * tilt_rate_f_ + (1.0 - cfg_.rate_filter) * tilt_rate
                            : 0.0;
  tilt_prev_ = tilt;
  have_tilt_ = true;

  const double v_x = s.qd[kBaseX];
  if (!have_vref_) {
    v_ref_ = v_x;
    have_vref_ = true;
  }
  if (cfg_.vel_ref_tau > 0.0) {
    const double alpha = std::min(1.0, task.dt_control() / cfg_.vel_ref_tau);
    v_ref_ += alpha * (cmd.v_x_cmd - v_ref_);
  } else {
    v_ref_ = cmd.v_x_cmd;
  }
  const double tilt_ref =
      std::clamp(cfg_.vel_gain * (v_ref_ - v_x) +
                     cfg_.pos_gain * (cmd.p_base_cmd_x - s.q[kBaseX]) +
                     cfg_.pitch_gain * s.q[kPitch],
                 -cfg_.lean_limit, cfg_.lean_limit);

  const double slip = model.wheel_radius * s.qd[kWheel] - v_x;
  const double wheel_raw = cfg_.balance_kp * (tilt - tilt_ref) +
                           cfg_.balance_kd * tilt_rate_f_ - cfg_.slip_damping * slip;
  wheel_tau_f_ = have_torque_
                     ? cfg_.torque_filter * wheel_tau_f_ + (1.0 - cfg_.torque_filter) * wheel_raw
                     : wheel_raw;
  have_torque_ = true;
  const double wheel_tau =
      std::clamp(wheel_tau_f_, -model.torque_limit[2], model.torque_limit[2]);

  ActuationInput input;
  input.leg_torques[0] = cfg_.hip_ff + cfg_.hip_couple * wheel_tau +
                         cfg_.leg_kp * (task.nominal_hip - s.q[kHip]) - cfg_.leg_kd * s.qd[kHip];
  input.leg_torques[1] = cfg_.knee_ff + cfg_.knee_couple * wheel_tau +
                         cfg_.leg_kp * (task.nominal_knee - s.q[kKnee]) - cfg_.leg_kd * s.qd[kKnee];
  input.leg_torques[2] = wheel_tau;

  if (!have_arm_cmd_) {
    arm_cmd_ = Eigen::Vector3d{s.q[kArm1], s.q[kArm2], s.q[kArm3]};
    have_arm_cmd_ = true;
  }
  if (cfg_.arm_tau > 0.0) {
    const double alpha = std::min(1.0, task.dt_control() / cfg_.arm_tau);
    arm_cmd_ += alpha * (ik_q_ - arm_cmd_);
  } else {
    arm_cmd_ = ik_q_;
  }
  input.arm_targets = arm_cmd_;
  return actuation_to_action(model, input);
}

uint64_t demo_layout_hash(const TaskConfig& cfg) {
  uint64_t h = 0xcbf29ce484222325ULL;
  const char tag[] = "locoforge-demo-v1";
  h = fnv1a64(tag, sizeof(tag), h);
  const uint32_t dims[2] = {kObsDim, kActionDim};
  h = fnv1a64(dims, sizeof(dims), h);
  for (int i = 0; i < cfg.obs_scale.size(); ++i) {
    const double d = cfg.obs_scale[i];
    h = fnv1a64(&d, sizeof(d), h);
  }
  return h;
}

DemoSet collect_demos(Env& env, ScriptedExpert& expert, const CurriculumState& cstate,
                      const CurriculumConfig& ccfg, int n_steps, DemoStats* stats) {
  if (n_steps <= 0) throw std::invalid_argument("collect_demos: n_steps must be positive");

  std::vector<Eigen::VectorXd> obs;
  std::vector<Eigen::Matrix<double, 6, 1>> act;
  int kept = 0, failed = 0, budget = n_steps;

  while (budget > 0) {
    expert.reset();
    env.reset(cstate, ccfg);
    std::vector<Eigen::VectorXd> ep_obs;
    std::vector<Eigen::Matrix<double, 6, 1>> ep_act;
    bool ok = true;
    while (!env.done() && budget > 0) {
      const Eigen::Matrix<double, 6, 1> a = expert.action(env);
      ep_obs.push_back(env.observation());
      ep_act.push_back(a);
      --budget;
      const EnvStep r = env.step(a);
      if (r.terminated) {
        ok = false;
        break;
      }
    }
    if (ok) {
      ++kept;
      obs.insert(obs.end(), ep_obs.begin(), ep_obs.end());
      act.insert(act.end(), ep_act.begin(), ep_act.end());
    } else {
      ++failed;
    }
  }

  if (stats) {
    stats->episodes_kept = kept;
    stats->episodes_failed = failed;
    stats->transitions = static_cast<int>(obs.size());
  }
  if (failed > 0.2 * (kept + failed))
    throw std::runtime_error("collect_demos: expert failure rate above 20 percent");

  DemoSet demos;
  demos.layout_hash = demo_layout_hash(env.config());
  demos.seed = env.seed();
  demos.obs.resize(kObsDim, static_cast<int>(obs.size()));
  demos.actions.resize(kActionDim, static_cast<int>(act.size()));
  for (size_t i = 0; i < obs.size(); ++i) {
    demos.obs.col(static_cast<int>(i)) = obs[i];
    demos.actions.col(static_cast<int>(i)) = act[i];
  }
  return demos;
}

void save_demos(const std::string& path, const DemoSet& demos) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open demo file for writing: " + path);
  out.write(kDemoMagic, sizeof(kDemoMagic));
  write_pod(out, kDemoVersion);
  write_pod(out, demos.layout_hash);
  write_pod(out, demos.seed);
  const uint64_t count = static_cast<uint64_t>(demos.obs.cols());
  write_pod(out, count);
  const uint32_t obs_dim = static_cast<uint32_t>(demos.obs.rows());
  const uint32_t action_dim = static_cast<uint32_t>(demos.actions.rows());
  write_pod(out, obs_dim);
  write_pod(out, action_dim);
  out.write(reinterpret_cast<const char*>(demos.obs.data()),
            static_cast<std::streamsize>(sizeof(double) * demos.obs.size()));
  out.write(reinterpret_cast<const char*>(demos.actions.data()),
            static_cast<std::streamsize>(sizeof(double) * demos.actions.size()));
  if (!out) throw std::runtime_error("demo file write failed: " + path);
}

DemoSet load_demos(const std::string& path, uint64_t expected_layout_hash) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open demo file: " + path);
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kDemoMagic, sizeof(magic)) != 0)
    throw std::runtime_error("not a demo file: " + path);
  uint32_t version = 0;
  read_pod(in, version);
  if (version != kDemoVersion) throw std::runtime_error("unsupported demo file version");
  DemoSet demos;
  read_pod(in, demos.layout_hash);
  if (expected_layout_hash != 0 && demos.layout_hash != expected_layout_hash)
    throw std::runtime_error("demo file layout does not match the current configuration");
  read_pod(in, demos.seed);
  uint64_t count = 0;
  uint32_t obs_dim = 0, action_dim = 0;
  read_pod(in, count);
  read_pod(in, obs_dim);
  read_pod(in, action_dim);
  demos.obs.resize(obs_dim, static_cast<int>(count));
  demos.actions.resize(action_dim, static_cast<int>(count));
  in.read(reinterpret_cast<char*>(demos.obs.data()),
          static_cast<std::streamsize>(sizeof(double) * demos.obs.size()));
  in.read(reinterpret_cast<char*>(demos.actions.data()),
          static_cast<std::streamsize>(sizeof(double) * demos.actions.size()));
  if (!in) throw std::runtime_error("demo file truncated: " + path);
  return demos;
}

BcReport pretrain_actor(NetParams& actor, const DemoSet& demos, const BcConfig& cfg, Rng& rng) {
  if (!actor.has_gaussian_head())
    throw std::invalid_argument("pretrain_actor: actor needs a gaussian head");
  if (actor.spec.input_dim != demos.obs.rows() || actor.spec.output_dim != demos.actions.rows())
    throw std::invalid_argument("pretrain_actor: actor dimensions do not match demos");
  const int n = static_cast<int>(demos.obs.cols());
  if (n < 10) throw std::invalid_argument("pretrain_actor: too few transitions");
  if (cfg.epochs <= 0 || cfg.batch_size <= 0)
    throw std::invalid_argument("pretrain_actor: bad epoch or batch settings");
  if (cfg.val_fraction <= 0.0 || cfg.val_fraction >= 0.5)
    throw std::invalid_argument("pretrain_actor: val_fraction must lie in (0, 0.5)");

  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  rng.shuffle(order);
  const int val_n = std::max(1, static_cast<int>(std::lround(cfg.val_fraction * n)));
  const int train_n = n - val_n;
  if (train_n < 1) throw std::invalid_argument("pretrain_actor: validation split too large");
  std::vector<int> train_idx(order.begin(), order.begin() + train_n);
  const std::vector<int> val_idx(order.begin() + train_n, order.end());

  AdamConfig adam;
  adam.learning_rate = cfg.learning_rate;
  adam.grad_clip_norm = cfg.grad_clip_norm;
  OptimizerState opt = OptimizerState::zeros_like(actor, adam);
  GradBuffer grads = GradBuffer::zeros_like(actor);

  const auto gather = [&](const std::vector<int>& idx, int begin, int count,
                          Eigen::MatrixXd& x, Eigen::MatrixXd& y) {
    x.resize(demos.obs.rows(), count);
    y.resize(demos.actions.rows(), count);
    for (int k = 0; k < count; ++k) {
      x.col(k) = demos.obs.col(idx[begin + k]);
      y.col(k) = demos.actions.col(idx[begin + k]);
    }
  };

  const auto mse_over = [&](const std::vector<int>& idx) {
    if (idx.empty()) return 0.0;
    Eigen::MatrixXd x, y;
    gather(idx, 0, static_cast<int>(idx.size()), x, y);
    const Eigen::MatrixXd mu = net_forward(actor, x, nullptr);
    return (mu - y).squaredNorm() / static_cast<double>(idx.size());
  };

  BcReport report;
  report.train_count = train_n;
  report.val_count = val_n;
  report.train_mse.reserve(cfg.epochs);
  report.val_mse.reserve(cfg.epochs);

  Eigen::MatrixXd x, y;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    rng.shuffle(train_idx);
    for (int begin = 0; begin < train_n; begin += cfg.batch_size) {
      const int count = std::min(cfg.batch_size, train_n - begin);
      gather(train_idx, begin, count, x, y);
      ForwardTrace trace;
      const Eigen::MatrixXd mu = net_forward(actor, x, &trace);
      const Eigen::MatrixXd out_grad = 2.0 * (mu - y) / static_cast<double>(count);
      grads.set_zero();
      net_backward(actor, trace, out_grad, grads);
      opt_step(actor, grads, opt);
    }
    report.train_mse.push_back(mse_over(train_idx));
    report.val_mse.push_back(mse_over(val_idx));
  }

  report.val_never_improved = report.val_mse.size() > 1;
  for (size_t i = 1; i < report.val_mse.size(); ++i)
    if (report.val_mse[i] < report.val_mse[i - 1]) report.val_never_improved = false;
  return report;
}

}  // namespace locoforge
