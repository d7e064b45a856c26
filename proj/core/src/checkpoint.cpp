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
#include "locoforge/checkpoint.hpp"

#include <cstring>
#include <fstream>
#include <stdexcept>

namespace locoforge {

namespace {

constexpr uint32_t kTrainMagic = 0x4b43464c;  // "LFCK" little-endian
constexpr uint32_t kActorMagic = 0x4341464c;  // "LFAC"
constexpr uint32_t kVersion = 1;

class Writer {
 public:
  explicit Writer(const std::string& path) : out_(path, std::ios::binary), path_(path) {
    if (!out_) throw std::runtime_error("checkpoint: cannot write '" + path + "'");
  }

  void u32(uint32_t v) { raw(&v, sizeof v); }
  void u64(uint64_t v) { raw(&v, sizeof v); }
  void i64(int64_t v) { raw(&v, sizeof v); }
  void i32(int32_t v) { raw(&v, sizeof v); }
  void f64(double v) { raw(&v, sizeof v); }
  void u8(uint8_t v) { raw(&v, sizeof v); }

  void str(const std::string& s) {
    u64(s.size());
    raw(s.data(), s.size());
  }

  void doubles(const double* data, size_t n) { raw(data, n * sizeof(double)); }

  void matrix(const Eigen::MatrixXd& m) {
    u32(static_cast<uint32_t>(m.rows()));
    u32(static_cast<uint32_t>(m.cols()));
    doubles(m.data(), static_cast<size_t>(m.size()));
  }

  void vector(const Eigen::VectorXd& v) {
    u32(static_cast<uint32_t>(v.size()));
    doubles(v.data(), static_cast<size_t>(v.size()));
  }

  void close() {
    out_.flush();
    if (!out_) throw std::runtime_error("checkpoint: cannot write '" + path_ + "'");
  }

 private:
  void raw(const void* data, size_t n) {
    out_.write(static_cast<const char*>(data), static_cast<std::streamsize>(n));
  }

  std::ofstream out_;
  std::string path_;
};

class Reader {
 public:
  explicit Reader(const std::string& path) : in_(path, std::ios::binary), path_(path) {
    if (!in_) throw std::runtime_error("checkpoint: cannot read '" + path + "'");
  }

  uint32_t u32() { return read<uint32_t>(); }
  uint64_t u64() { return read<uint64_t>(); }
  int64_t i64() { return read<int64_t>(); }
  int32_t i32() { return read<int32_t>(); }
  double f64() { return read<double>(); }
  uint8_t u8() { return read<uint8_t>(); }

  std::string str() {
    const uint64_t n = u64();
    check_count(n);
    std::string s(n, '\0');
    raw(s.data(), n);
    return s;
  }

  void doubles(double* data, size_t n) { raw(data, n * sizeof(double)); }

  Eigen::MatrixXd matrix() {
    const uint32_t rows = u32();
    const uint32_t cols = u32();
    check_count(static_cast<uint64_t>(rows) * cols);
    Eigen::MatrixXd m(rows, cols);
    doubles(m.data(), static_cast<size_t>(m.size()));
    return m;
  }

  Eigen::VectorXd vector() {
    const uint32_t n = u32();
    check_count(n);
    Eigen::VectorXd v(n);
    doubles(v.data(), static_cast<size_t>(v.size()));
    return v;
  }

  void expect_eof() {
    in_.peek();
    if (!in_.eof())
      throw std::runtime_error("checkpoint: trailing bytes in '" + path_ + "'");
  }

 private:
  template <typename T>
  T read() {
    T v{};
    raw(&v, sizeof v);
    return v;
  }

  void raw(void* data, size_t n) {
    in_.read(static_cast<char*>(data), static_cast<std::streamsize>(n));
    if (static_cast<size_t>(in_.gcount()) != n)
      throw std::runtime_error("checkpoint: truncated file '" + path_ + "'");
  }

  void check_count(uint64_t n) {
    // A corrupted length field would otherwise turn into a giant allocation.
    if (n > (1ULL << 32))
      throw std::runtime_error("checkpoint: corrupt length field in '" + path_ + "'");
  }

  std::ifstream in_;
  std::string path_;
};

void write_params(Writer& w, const NetParams& p) {
  w.u32(static_cast<uint32_t>(p.spec.input_dim));
  w.u32(static_cast<uint32_t>(p.spec.hidden_dims.size()));
  for (const int h : p.spec.hidden_dims) w.u32(static_cast<uint32_t>(h));
  w.u32(static_cast<uint32_t>(p.spec.output_dim));
  w.u8(p.spec.activation == Activation::Tanh ? 0 : 1);
  w.u32(static_cast<uint32_t>(p.weights.size()));
  for (const auto& m : p.weights) w.matrix(m);
  for (const auto& b : p.biases) w.vector(b);
  w.vector(p.log_std);
}

NetParams read_params(Reader& r) {
  NetParams p;
  p.spec.input_dim = static_cast<int>(r.u32());
  const uint32_t n_hidden = r.u32();
  p.spec.hidden_dims.resize(n_hidden);
  for (auto& h : p.spec.hidden_dims) h = static_cast<int>(r.u32());
  p.spec.output_dim = static_cast<int>(r.u32());
  p.spec.activation = r.u8() == 0 ? Activation::Tanh : Activation::Relu;
  const uint32_t n_layers = r.u32();
  p.weights.resize(n_layers);
  for (auto& m : p.weights) m = r.matrix();
  p.biases.resize(n_layers);
  for (auto& b : p.biases) b = r.vector();
  p.log_std = r.vector();
  return p;
}

void write_opt(Writer& w, const OptimizerState& o) {
  w.u32(static_cast<uint32_t>(o.m_weights.size()));
  for (const auto& m : o.m_weights) w.matrix(m);
  for (const auto& m : o.v_weights) w.matrix(m);
  for (const auto& b : o.m_biases) w.vector(b);
  for (const auto& b : o.v_biases) w.vector(b);
  w.vector(o.m_log_std);
  w.vector(o.v_log_std);
  w.i64(o.step);
  w.f64(o.config.learning_rate);
  w.f64(o.config.beta1);
  w.f64(o.config.beta2);
  w.f64(o.config.epsilon);
  w.f64(o.config.grad_clip_norm);
  w.f64(o.config.log_std_lo);
  w.f64(o.config.log_std_hi);
}

OptimizerState read_opt(Reader& r) {
  OptimizerState o;
  const uint32_t n = r.u32();
  o.m_weights.resize(n);
  for (auto& m : o.m_weights) m = r.matrix();
  o.v_weights.resize(n);
  for (auto& m : o.v_weights) m = r.matrix();
  o.m_biases.resize(n);
  for (auto& b : o.m_biases) b = r.vector();
  o.v_biases.resize(n);
  for (auto& b : o.v_biases) b = r.vector();
  o.m_log_std = r.vector();
  o.v_log_std = r.vector();
  o.step = r.i64();
  o.config.learning_rate = r.f64();
  o.config.beta1 = r.f64();
  o.config.beta2 = r.f64();
  o.config.epsilon = r.f64();
  o.config.grad_clip_norm = r.f64();
  o.config.log_std_lo = r.f64();
  o.config.log_std_hi = r.f64();
  return o;
}

void write_trainer(Writer& w, const TrainerState& t) {
  write_params(w, t.actor);
  write_params(w, t.critic);
  for (const auto& c : t.cost_critics) write_params(w, c);
  write_opt(w, t.actor_opt);
  write_opt(w, t.critic_opt);
  for (const auto& o : t.cost_critic_opts) write_opt(w, o);
  w.f64(t.beta);
  w.i64(t.iteration);
  for (const uint64_t word : t.rng.state()) w.u64(word);
}

TrainerState read_trainer(Reader& r) {
  TrainerState t;
  t.actor = read_params(r);
  t.critic = read_params(r);
  for (auto& c : t.cost_critics) c = read_params(r);
  t.actor_opt = read_opt(r);
  t.critic_opt = read_opt(r);
  for (auto& o : t.cost_critic_opts) o = read_opt(r);
  t.beta = r.f64();
  t.iteration = r.i64();
  std::array<uint64_t, 4> state{};
  for (auto& word : state) word = r.u64();
  t.rng.set_state(state);
  return t;
}

void write_curriculum(Writer& w, const CurriculumState& c) {
  w.i32(c.level);
  w.i32(c.progress);
  w.f64(c.reward_ma);
  w.f64(c.max_reward_estimate);
  w.u32(static_cast<uint32_t>(c.window.size()));
  w.doubles(c.window.data(), c.window.size());
}

CurriculumState read_curriculum(Reader& r) {
  CurriculumState c;
  c.level = r.i32();
  c.progress = r.i32();
  c.reward_ma = r.f64();
  c.max_reward_estimate = r.f64();
  c.window.resize(r.u32());
  r.doubles(c.window.data(), c.window.size());
  return c;
}

void write_env(Writer& w, const EnvSnapshot& e) {
  w.doubles(e.sim.q.data(), 9);
  w.doubles(e.sim.qd.data(), 9);
  w.f64(e.sim.time);
  for (const auto& f : e.sim.link_forces) w.doubles(f.data(), 2);
  w.doubles(e.sim.applied_torques.data(), 6);
  w.f64(e.cmd.v_x_cmd);
  w.doubles(e.cmd.p_ee_cmd.data(), 2);
  w.f64(e.cmd.ee_angle_cmd);
  w.f64(e.cmd.p_base_cmd_x);
  w.i32(e.status.steps);
  w.u8(e.status.terminated ? 1 : 0);
  w.u8(e.status.truncated ? 1 : 0);
  w.u8(e.status.diverged ? 1 : 0);
  for (const uint64_t word : e.rng_state) w.u64(word);
}

EnvSnapshot read_env(Reader& r) {
  EnvSnapshot e;
  r.doubles(e.sim.q.data(), 9);
  r.doubles(e.sim.qd.data(), 9);
  e.sim.time = r.f64();
  for (auto& f : e.sim.link_forces) r.doubles(f.data(), 2);
  r.doubles(e.sim.applied_torques.data(), 6);
  e.cmd.v_x_cmd = r.f64();
  r.doubles(e.cmd.p_ee_cmd.data(), 2);
  e.cmd.ee_angle_cmd = r.f64();
  e.cmd.p_base_cmd_x = r.f64();
  e.status.steps = r.i32();
  e.status.terminated = r.u8() != 0;
  e.status.truncated = r.u8() != 0;
  e.status.diverged = r.u8() != 0;
  for (auto& word : e.rng_state) word = r.u64();
  return e;
}

void check_header(Reader& r, uint32_t magic, const std::string& path, const char* kind) {
  if (r.u32() != magic)
    throw std::runtime_error(std::string("checkpoint: '") + path + "' is not a " + kind +
                             " file");
  const uint32_t version = r.u32();
  if (version != kVersion)
    throw std::runtime_error("checkpoint: '" + path + "' has format version " +
                             std::to_string(version) + ", expected " + std::to_string(kVersion));
}

}  // namespace

void save_checkpoint(const std::string& path, const TrainCheckpoint& ckpt) {
  Writer w(path);
  w.u32(kTrainMagic);
  w.u32(kVersion);
  w.str(ckpt.config_json);
  write_trainer(w, ckpt.trainer);
  write_curriculum(w, ckpt.curriculum);
  w.u32(static_cast<uint32_t>(ckpt.envs.size()));
  for (const auto& e : ckpt.envs) write_env(w, e);
  w.close();
}

TrainCheckpoint load_checkpoint(const std::string& path) {
  Reader r(path);
  check_header(r, kTrainMagic, path, "training checkpoint");
  TrainCheckpoint ckpt;
  ckpt.config_json = r.str();
  ckpt.trainer = read_trainer(r);
  ckpt.curriculum = read_curriculum(r);
  ckpt.envs.resize(r.u32());
  for (auto& e : ckpt.envs) e = read_env(r);
  r.expect_eof();
  return ckpt;
}

void save_actor_checkpoint(const std::string& path, const ActorCheckpoint& ckpt) {
  Writer w(path);
  w.u32(kActorMagic);
  w.u32(kVersion);
  w.u64(ckpt.layout_hash);
  write_params(w, ckpt.actor);
  w.close();
}

ActorCheckpoint load_actor_checkpoint(const std::string& path) {
  Reader r(path);
  check_header(r, kActorMagic, path, "actor checkpoint");
  ActorCheckpoint ckpt;
  ckpt.layout_hash = r.u64();
  ckpt.actor = read_params(r);
  r.expect_eof();
  return ckpt;
}

bool is_train_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("checkpoint: cannot read '" + path + "'");
  uint32_t magic = 0;
  in.read(reinterpret_cast<char*>(&magic), sizeof magic);
  if (in.gcount() != sizeof magic)
    throw std::runtime_error("checkpoint: truncated file '" + path + "'");
  if (magic == kTrainMagic) return true;
  if (magic == kActorMagic) return false;
  throw std::runtime_error("checkpoint: '" + path + "' is not a checkpoint file");
}

}  // namespace locoforge
