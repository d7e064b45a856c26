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
#include "locoforge/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace locoforge {

namespace {

using Json = nlohmann::ordered_json;

[[noreturn]] void fail(const std::string& origin, const std::string& msg) {
  throw std::invalid_argument(origin + ": " + msg);
}

/// Typed accessor over one JSON object. Every key that is read gets marked;
/// finish() rejects whatever was not, so misspelled keys never pass
/// silently.
class Section {
 public:
  Section(const Json& j, std::string path, const std::string& origin)
      : j_(j), path_(std::move(path)), origin_(origin) {
    if (!j_.is_object()) fail(origin_, "section '" + path_ + "' must be an object");
  }

  void get(const std::string& key, double& out) {
    const Json* v = take(key);
    if (!v) return;
    if (!v->is_number()) type_error(key, "a number");
    out = v->get<double>();
  }

  void get(const std::string& key, int& out) {
    const Json* v = take(key);
    if (!v) return;
    if (!v->is_number_integer()) type_error(key, "an integer");
    out = v->get<int>();
  }

  void get(const std::string& key, bool& out) {
    const Json* v = take(key);
    if (!v) return;
    if (!v->is_boolean()) type_error(key, "a boolean");
    out = v->get<bool>();
  }

  void get(const std::string& key, uint64_t& out) {
    const Json* v = take(key);
    if (!v) return;
    if (!v->is_number_integer() || (v->is_number_integer() && !v->is_number_unsigned() &&
                                    v->get<int64_t>() < 0))
      type_error(key, "a non-negative integer");
    out = v->get<uint64_t>();
  }

  void get(const std::string& key, uint16_t& out) {
    const Json* v = take(key);
    if (!v) return;
    if (!v->is_number_integer()) type_error(key, "an integer");
    const int64_t raw = v->get<int64_t>();
    if (raw < 0 || raw > 0xffff) type_error(key, "an integer in [0, 65535]");
    out = static_cast<uint16_t>(raw);
  }

  void get(const std::string& key, std::string& out) {
    const Json* v = take(key);
    if (!v) return;
    if (!v->is_string()) type_error(key, "a string");
    out = v->get<std::string>();
  }

  void get(const std::string& key, Eigen::Vector2d& out) { fixed_vector(key, out.data(), 2); }
  void get(const std::string& key, Eigen::Vector3d& out) { fixed_vector(key, out.data(), 3); }

  /// Fixed-length: the value must match the current size of `out`.
  void get(const std::string& key, Eigen::VectorXd& out) {
    fixed_vector(key, out.data(), out.size());
  }

  template <size_t N>
  void get(const std::string& key, std::array<double, N>& out) {
    fixed_vector(key, out.data(), static_cast<Eigen::Index>(N));
  }

  void get(const std::string& key, std::vector<double>& out) {
    const Json* v = take(key);
    if (!v) return;
    if (!v->is_array()) type_error(key, "an array of numbers");
    std::vector<double> parsed;
    parsed.reserve(v->size());
    for (const Json& e : *v) {
      if (!e.is_number()) type_error(key, "an array of numbers");
      parsed.push_back(e.get<double>());
    }
    out = std::move(parsed);
  }

  void get(const std::string& key, std::vector<int>& out) {
    const Json* v = take(key);
    if (!v) return;
    if (!v->is_array()) type_error(key, "an array of integers");
    std::vector<int> parsed;
    parsed.reserve(v->size());
    for (const Json& e : *v) {
      if (!e.is_number_integer()) type_error(key, "an array of integers");
      parsed.push_back(e.get<int>());
    }
    out = std::move(parsed);
  }

  template <typename Enum>
  void get_enum(const std::string& key, Enum& out,
                const std::vector<std::pair<std::string, Enum>>& names) {
    const Json* v = take(key);
    if (!v) return;
    if (v->is_string()) {
      const std::string s = v->get<std::string>();
      for (const auto& [name, value] : names) {
        if (s == name) {
          out = value;
          return;
        }
      }
    }
    std::string options;
    for (size_t i = 0; i < names.size(); ++i) {
      if (i) options += i + 1 == names.size() ? " or " : ", ";
      options += "\"" + names[i].first + "\"";
    }
    type_error(key, options);
  }

  /// Rejects every key that was never read.
  void finish() const {
    for (const auto& item : j_.items()) {
      if (!seen_.count(item.key()))
        fail(origin_, "unknown key '" + path_ + "." + item.key() + "'");
    }
  }

 private:
  const Json* take(const std::string& key) {
    seen_.insert(key);
    const auto it = j_.find(key);
    if (it == j_.end()) return nullptr;
    return &*it;
  }

  [[noreturn]] void type_error(const std::string& key, const std::string& expected) {
    fail(origin_, "key '" + path_ + "." + key + "' must be " + expected);
  }

  void fixed_vector(const std::string& key, double* out, Eigen::Index n) {
    const Json* v = take(key);
    if (!v) return;
    if (!v->is_array() || static_cast<Eigen::Index>(v->size()) != n)
      type_error(key, "an array of " + std::to_string(n) + " numbers");
    for (Eigen::Index i = 0; i < n; ++i) {
      const Json& e = (*v)[static_cast<size_t>(i)];
      if (!e.is_number()) type_error(key, "an array of " + std::to_string(n) + " numbers");
      out[i] = e.get<double>();
    }
  }

  const Json& j_;
  std::string path_;
  const std::string& origin_;
  std::set<std::string> seen_;
};

void parse_model(const Json& j, ModelSpec& m, const std::string& origin) {
  Section s(j, "model", origin);
  s.get("base_mass", m.base_mass);
  s.get("base_inertia", m.base_inertia);
  s.get("base_com", m.base_com);
  s.get("thigh_mass", m.thigh_mass);
  s.get("thigh_length", m.thigh_length);
  s.get("thigh_com", m.thigh_com);
  s.get("thigh_inertia", m.thigh_inertia);
  s.get("shank_mass", m.shank_mass);
  s.get("shank_length", m.shank_length);
  s.get("shank_com", m.shank_com);
  s.get("shank_inertia", m.shank_inertia);
  s.get("wheel_mass", m.wheel_mass);
  s.get("wheel_radius", m.wheel_radius);
  s.get("wheel_inertia", m.wheel_inertia);
  s.get("arm_mass", m.arm_mass);
  s.get("arm_length", m.arm_length);
  s.get("arm_com", m.arm_com);
  s.get("arm_inertia", m.arm_inertia);
  s.get("hip_offset", m.hip_offset);
  s.get("arm_offset", m.arm_offset);
  s.get("q_lower", m.q_lower);
  s.get("q_upper", m.q_upper);
  s.get("torque_limit", m.torque_limit);
  s.get("contact_stiffness", m.contact_stiffness);
  s.get("contact_damping", m.contact_damping);
  s.get("friction_coeff", m.friction_coeff);
  s.get("tangential_gain", m.tangential_gain);
  s.get("base_capsule_radius", m.base_capsule_radius);
  s.get("base_capsule_halflen", m.base_capsule_halflen);
  s.get("arm_link_radius", m.arm_link_radius);
  s.get("arm_kp", m.arm_kp);
  s.get("arm_kd", m.arm_kd);
  s.get("gravity", m.gravity);
  s.get("contacts_enabled", m.contacts_enabled);
  s.get("locked_joints", m.locked_joints);
  s.finish();
}

void parse_task(const Json& j, TaskConfig& t, const std::string& origin) {
  Section s(j, "task", origin);
  s.get("vx_cmd_lo", t.vx_cmd_lo);
  s.get("vx_cmd_hi", t.vx_cmd_hi);
  s.get("ee_angle_cmd_lo", t.ee_angle_cmd_lo);
  s.get("ee_angle_cmd_hi", t.ee_angle_cmd_hi);
  s.get("theta_max", t.theta_max);
  s.get("h_min", t.h_min);
  s.get("t_max", t.t_max);
  s.get("decimation", t.decimation);
  s.get("dt_physics", t.dt_physics);
  s.get("failure_penalty", t.failure_penalty);
  s.get("leg_motion_published_sign", t.leg_motion_published_sign);
  s.get("reset_noise", t.reset_noise);
  s.get("nominal_hip", t.nominal_hip);
  s.get("nominal_knee", t.nominal_knee);
  s.get("nominal_arm", t.nominal_arm);
  s.get("obs_scale", t.obs_scale);
  s.finish();
}

void parse_curriculum(const Json& j, CurriculumConfig& c, const std::string& origin) {
  Section s(j, "curriculum", origin);
  s.get("goal_lo", c.goal_lo);
  s.get("goal_hi", c.goal_hi);
  s.get("base_sigma", c.base_sigma);
  s.get("step_sigma", c.step_sigma);
  s.get("threshold_fraction", c.threshold_fraction);
  s.get("d_max", c.d_max);
  s.get("t_horizon", c.t_horizon);
  s.get("max_level", c.max_level);
  s.get("reward_window", c.reward_window);
  s.get("max_reward_estimate", c.max_reward_estimate);
  s.get("sigma_max", c.sigma_max);
  s.get_enum("progress_mode", c.progress_mode,
             {{"iteration", ProgressMode::kIteration}, {"episode", ProgressMode::kEpisode}});
  s.get("workspace_lo", c.workspace_lo);
  s.get("workspace_hi", c.workspace_hi);
  s.get("reach_min", c.reach_min);
  s.get("reach_max", c.reach_max);
  s.get("arm_mount", c.arm_mount);
  s.finish();
}

void parse_acppo(const Json& j, UpdateConfig& u, TrainerInit& n, const std::string& origin) {
  Section s(j, "acppo", origin);
  s.get("gamma", u.gamma);
  s.get("lambda", u.lambda);
  s.get_enum("surrogate_mode", u.surrogate_mode,
             {{"kl_penalty", SurrogateMode::kKlPenalty}, {"clip", SurrogateMode::kClip}});
  s.get("beta", u.beta);
  s.get("kl_target", u.kl_target);
  s.get("clip_epsilon", u.clip_epsilon);
  s.get("cost_limits", u.cost_limits);
  s.get("t_barrier", u.t_barrier);
  s.get("t_barrier_final", u.t_barrier_final);
  s.get("t_barrier_anneal_iters", u.t_barrier_anneal_iters);
  s.get("delta_feas", u.delta_feas);
  s.get_enum("cost_return_mode", u.cost_return_mode,
             {{"mean_step", CostReturnMode::kMeanStep},
              {"discounted_episode", CostReturnMode::kDiscountedEpisode}});
  s.get("constraints_enabled", u.constraints_enabled);
  s.get("epochs", u.epochs);
  s.get("minibatches", u.minibatches);
  s.get("actor_lr", u.actor_lr);
  s.get("critic_lr", u.critic_lr);
  s.get("entropy_weight", u.entropy_weight);
  s.get("value_weight", u.value_weight);
  s.get("grad_clip_norm", u.grad_clip_norm);
  s.get("actor_hidden", n.actor_hidden);
  s.get("critic_hidden", n.critic_hidden);
  s.get("actor_final_gain", n.actor_final_gain);
  s.get("log_std_init", n.log_std_init);
  s.finish();
}

void parse_bc(const Json& j, BcSettings& b, const std::string& origin) {
  Section s(j, "bc", origin);
  s.get("epochs", b.train.epochs);
  s.get("batch_size", b.train.batch_size);
  s.get("learning_rate", b.train.learning_rate);
  s.get("val_fraction", b.train.val_fraction);
  s.get("grad_clip_norm", b.train.grad_clip_norm);
  s.get("target_val_mse", b.train.target_val_mse);
  s.get("demo_steps", b.demo_steps);
  s.finish();
}

void parse_eval(const Json& j, EvalConfig& e, const std::string& origin) {
  Section s(j, "eval", origin);
  s.get("episodes", e.episodes);
  s.get("max_steps", e.max_steps);
  s.get("walk_step", e.walk_step);
  s.get("walk_seed", e.walk_seed);
  s.get("v_x_cases", e.v_x_cases);
  s.finish();
}

void parse_run(const Json& j, RunSettings& r, const std::string& origin) {
  Section s(j, "run", origin);
  s.get("seed", r.seed);
  s.get("n_envs", r.n_envs);
  s.get("horizon", r.horizon);
  s.get("iterations", r.iterations);
  s.get("checkpoint_every", r.checkpoint_every);
  s.get("output_dir", r.output_dir);
  s.finish();
}

Json to_array(const double* data, Eigen::Index n) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < n; ++i) a.push_back(data[i]);
  return a;
}

}  // namespace

void BcSettings::validate() const {
  if (train.epochs < 1) throw std::invalid_argument("bc: epochs must be at least 1");
  if (train.batch_size < 1) throw std::invalid_argument("bc: batch_size must be at least 1");
  if (!(train.learning_rate > 0.0) || !std::isfinite(train.learning_rate))
    throw std::invalid_argument("bc: learning_rate must be positive");
  if (!(train.val_fraction > 0.0 && train.val_fraction < 0.5))
    throw std::invalid_argument("bc: val_fraction must be in (0, 0.5)");
  if (train.grad_clip_norm < 0.0)
    throw std::invalid_argument("bc: grad_clip_norm must be non-negative");
  if (!(train.target_val_mse > 0.0))
    throw std::invalid_argument("bc: target_val_mse must be positive");
  if (demo_steps < 1) throw std::invalid_argument("bc: demo_steps must be at least 1");
}

void EvalConfig::validate() const {
  if (episodes < 1) throw std::invalid_argument("eval: episodes must be at least 1");
  if (max_steps < 1) throw std::invalid_argument("eval: max_steps must be at least 1");
  if (!(walk_step >= 0.0) || !std::isfinite(walk_step))
    throw std::invalid_argument("eval: walk_step must be non-negative");
  if (v_x_cases.empty()) throw std::invalid_argument("eval: v_x_cases must not be empty");
  for (const double v : v_x_cases)
    if (!std::isfinite(v)) throw std::invalid_argument("eval: v_x_cases must be finite");
}

void RunSettings::validate() const {
  if (n_envs < 1) throw std::invalid_argument("run: n_envs must be at least 1");
  if (horizon < 1) throw std::invalid_argument("run: horizon must be at least 1");
  if (iterations < 0) throw std::invalid_argument("run: iterations must be non-negative");
  if (checkpoint_every < 1)
    throw std::invalid_argument("run: checkpoint_every must be at least 1");
  if (output_dir.empty()) throw std::invalid_argument("run: output_dir must not be empty");
}

void RunConfig::validate() const {
  model.validate();
  task.validate();
  curriculum.validate();
  acppo.validate();
  if (net.obs_dim != kObsDim || net.action_dim != kActionDim)
    throw std::invalid_argument("net: dimensions must match the task interface");
  if (net.actor_hidden.empty() || net.critic_hidden.empty())
    throw std::invalid_argument("acppo: hidden layer lists must not be empty");
  for (const int h : net.actor_hidden)
    if (h < 1) throw std::invalid_argument("acppo: actor_hidden sizes must be at least 1");
  for (const int h : net.critic_hidden)
    if (h < 1) throw std::invalid_argument("acppo: critic_hidden sizes must be at least 1");
  if (!(net.actor_final_gain > 0.0) || !std::isfinite(net.actor_final_gain))
    throw std::invalid_argument("acppo: actor_final_gain must be positive");
  if (!std::isfinite(net.log_std_init))
    throw std::invalid_argument("acppo: log_std_init must be finite");
  bc.validate();
  eval.validate();
  run.validate();
  if (run.n_envs * run.horizon < acppo.minibatches)
    throw std::invalid_argument("run: n_envs * horizon must cover acppo.minibatches");
}

RunConfig parse_run_config(const std::string& text, const std::string& origin) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw std::invalid_argument(origin + ": " + e.what());
  }
  if (!j.is_object()) fail(origin, "top level must be an object");

  static const std::set<std::string> kSections{"model",  "task", "curriculum", "acppo",
                                              "bc",     "eval", "run"};
  for (const auto& item : j.items())
    if (!kSections.count(item.key())) fail(origin, "unknown section '" + item.key() + "'");

  RunConfig cfg;
  if (j.contains("model")) parse_model(j["model"], cfg.model, origin);
  if (j.contains("task")) parse_task(j["task"], cfg.task, origin);
  if (j.contains("curriculum")) parse_curriculum(j["curriculum"], cfg.curriculum, origin);
  if (j.contains("acppo")) parse_acppo(j["acppo"], cfg.acppo, cfg.net, origin);
  if (j.contains("bc")) parse_bc(j["bc"], cfg.bc, origin);
  if (j.contains("eval")) parse_eval(j["eval"], cfg.eval, origin);
  if (j.contains("run")) parse_run(j["run"], cfg.run, origin);

  cfg.validate();
  return cfg;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("config: cannot read '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_run_config(buf.str(), path);
}

std::string run_config_to_json(const RunConfig& cfg) {
  Json j;
  {
    const ModelSpec& m = cfg.model;
    Json s;
    s["base_mass"] = m.base_mass;
    s["base_inertia"] = m.base_inertia;
    s["base_com"] = to_array(m.base_com.data(), 2);
    s["thigh_mass"] = m.thigh_mass;
    s["thigh_length"] = m.thigh_length;
    s["thigh_com"] = m.thigh_com;
    s["thigh_inertia"] = m.thigh_inertia;
    s["shank_mass"] = m.shank_mass;
    s["shank_length"] = m.shank_length;
    s["shank_com"] = m.shank_com;
    s["shank_inertia"] = m.shank_inertia;
    s["wheel_mass"] = m.wheel_mass;
    s["wheel_radius"] = m.wheel_radius;
    s["wheel_inertia"] = m.wheel_inertia;
    s["arm_mass"] = to_array(m.arm_mass.data(), 3);
    s["arm_length"] = to_array(m.arm_length.data(), 3);
    s["arm_com"] = to_array(m.arm_com.data(), 3);
    s["arm_inertia"] = to_array(m.arm_inertia.data(), 3);
    s["hip_offset"] = to_array(m.hip_offset.data(), 2);
    s["arm_offset"] = to_array(m.arm_offset.data(), 2);
    s["q_lower"] = to_array(m.q_lower.data(), 5);
    s["q_upper"] = to_array(m.q_upper.data(), 5);
    s["torque_limit"] = to_array(m.torque_limit.data(), 6);
    s["contact_stiffness"] = m.contact_stiffness;
    s["contact_damping"] = m.contact_damping;
    s["friction_coeff"] = m.friction_coeff;
    s["tangential_gain"] = m.tangential_gain;
    s["base_capsule_radius"] = m.base_capsule_radius;
    s["base_capsule_halflen"] = m.base_capsule_halflen;
    s["arm_link_radius"] = m.arm_link_radius;
    s["arm_kp"] = m.arm_kp;
    s["arm_kd"] = m.arm_kd;
    s["gravity"] = m.gravity;
    s["contacts_enabled"] = m.contacts_enabled;
    s["locked_joints"] = m.locked_joints;
    j["model"] = s;
  }
  {
    const TaskConfig& t = cfg.task;
    Json s;
    s["vx_cmd_lo"] = t.vx_cmd_lo;
    s["vx_cmd_hi"] = t.vx_cmd_hi;
    s["ee_angle_cmd_lo"] = t.ee_angle_cmd_lo;
    s["ee_angle_cmd_hi"] = t.ee_angle_cmd_hi;
    s["theta_max"] = t.theta_max;
    s["h_min"] = t.h_min;
    s["t_max"] = t.t_max;
    s["decimation"] = t.decimation;
    s["dt_physics"] = t.dt_physics;
    s["failure_penalty"] = t.failure_penalty;
    s["leg_motion_published_sign"] = t.leg_motion_published_sign;
    s["reset_noise"] = t.reset_noise;
    s["nominal_hip"] = t.nominal_hip;
    s["nominal_knee"] = t.nominal_knee;
    s["nominal_arm"] = to_array(t.nominal_arm.data(), 3);
    s["obs_scale"] = to_array(t.obs_scale.data(), t.obs_scale.size());
    j["task"] = s;
  }
  {
    const CurriculumConfig& c = cfg.curriculum;
    Json s;
    s["goal_lo"] = to_array(c.goal_lo.data(), 2);
    s["goal_hi"] = to_array(c.goal_hi.data(), 2);
    s["base_sigma"] = to_array(c.base_sigma.data(), 2);
    s["step_sigma"] = to_array(c.step_sigma.data(), 2);
    s["threshold_fraction"] = c.threshold_fraction;
    s["d_max"] = c.d_max;
    s["t_horizon"] = c.t_horizon;
    s["max_level"] = c.max_level;
    s["reward_window"] = c.reward_window;
    s["max_reward_estimate"] = c.max_reward_estimate;
    s["sigma_max"] = c.sigma_max;
    s["progress_mode"] = c.progress_mode == ProgressMode::kIteration ? "iteration" : "episode";
    s["workspace_lo"] = to_array(c.workspace_lo.data(), 2);
    s["workspace_hi"] = to_array(c.workspace_hi.data(), 2);
    s["reach_min"] = c.reach_min;
    s["reach_max"] = c.reach_max;
    s["arm_mount"] = to_array(c.arm_mount.data(), 2);
    j["curriculum"] = s;
  }
  {
    const UpdateConfig& u = cfg.acppo;
    const TrainerInit& n = cfg.net;
    Json s;
    s["gamma"] = u.gamma;
    s["lambda"] = u.lambda;
    s["surrogate_mode"] = u.surrogate_mode == SurrogateMode::kKlPenalty ? "kl_penalty" : "clip";
    s["beta"] = u.beta;
    s["kl_target"] = u.kl_target;
    s["clip_epsilon"] = u.clip_epsilon;
    s["cost_limits"] = to_array(u.cost_limits.data(), 3);
    s["t_barrier"] = u.t_barrier;
    s["t_barrier_final"] = u.t_barrier_final;
    s["t_barrier_anneal_iters"] = u.t_barrier_anneal_iters;
    s["delta_feas"] = u.delta_feas;
    s["cost_return_mode"] =
        u.cost_return_mode == CostReturnMode::kMeanStep ? "mean_step" : "discounted_episode";
    s["constraints_enabled"] = u.constraints_enabled;
    s["epochs"] = u.epochs;
    s["minibatches"] = u.minibatches;
    s["actor_lr"] = u.actor_lr;
    s["critic_lr"] = u.critic_lr;
    s["entropy_weight"] = u.entropy_weight;
    s["value_weight"] = u.value_weight;
    s["grad_clip_norm"] = u.grad_clip_norm;
    s["actor_hidden"] = n.actor_hidden;
    s["critic_hidden"] = n.critic_hidden;
    s["actor_final_gain"] = n.actor_final_gain;
    s["log_std_init"] = n.log_std_init;
    j["acppo"] = s;
  }
  {
    Json s;
    s["epochs"] = cfg.bc.train.epochs;
    s["batch_size"] = cfg.bc.train.batch_size;
    s["learning_rate"] = cfg.bc.train.learning_rate;
    s["val_fraction"] = cfg.bc.train.val_fraction;
    s["grad_clip_norm"] = cfg.bc.train.grad_clip_norm;
    s["target_val_mse"] = cfg.bc.train.target_val_mse;
    s["demo_steps"] = cfg.bc.demo_steps;
    j["bc"] = s;
  }
  {
    Json s;
    s["episodes"] = cfg.eval.episodes;
    s["max_steps"] = cfg.eval.max_steps;
    s["walk_step"] = cfg.eval.walk_step;
    s["walk_seed"] = cfg.eval.walk_seed;
    s["v_x_cases"] = cfg.eval.v_x_cases;
    j["eval"] = s;
  }
  {
    Json s;
    s["seed"] = cfg.run.seed;
    s["n_envs"] = cfg.run.n_envs;
    s["horizon"] = cfg.run.horizon;
    s["iterations"] = cfg.run.iterations;
    s["checkpoint_every"] = cfg.run.checkpoint_every;
    s["output_dir"] = cfg.run.output_dir;
    j["run"] = s;
  }
  return j.dump(2) + "\n";
}

void save_run_config(const std::string& path, const RunConfig& cfg) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("config: cannot write '" + path + "'");
  out << run_config_to_json(cfg);
  if (!out) throw std::runtime_error("config: cannot write '" + path + "'");
}

}  // namespace locoforge
