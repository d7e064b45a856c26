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
#include <cstdio>
#include <fstream>
#include <iterator>
#include <stdexcept>
#include <string>
#include <vector>

#include <doctest.h>

#include "locoforge/bc.hpp"
#include "locoforge/curriculum.hpp"
#include "locoforge/net.hpp"
#include "locoforge/task.hpp"

using namespace locoforge;

namespace {

// Plain cumulative-angle chain, written out as the oracle for IK round trips.
Eigen::Vector2d chain_tip(const ModelSpec& model, const Eigen::Vector3d& q) {
  Eigen::Vector2d p = model.arm_offset;
  double cum = 0.0;
  for (int i = 0; i < 3; ++i) {
    cum += q[i];
    p += model.arm_length[i] * Eigen::Vector2d{std::cos(cum), std::sin(cum)};
  }
  return p;
}

// Puts the env exactly at the noiseless standing state with a hold-still
// command set, keeping whatever rng position the reset left behind.
void rest_at_nominal(Env& env, const CurriculumState& cstate, const CurriculumConfig& ccfg) {
  env.reset(cstate, ccfg);
  EnvSnapshot snap = env.snapshot();
  snap.sim = nominal_state(env.model(), env.config());
  snap.status = {};
  env.restore(snap);
  CommandSet cmd;
  cmd.v_x_cmd = 0.0;
  cmd.p_ee_cmd = env.kinematics().p_ee_base;
  cmd.ee_angle_cmd = env.kinematics().ee_angle_base;
  cmd.p_base_cmd_x = env.state().q[kBaseX];
  env.set_command(cmd);
}

// Tips the current state by dth about the wheel contact so the wheel stays
// grounded where it was.
void tip_about_contact(Env& env, double dth) {
  const Eigen::Vector2d contact = env.kinematics().wheel_center();
  EnvSnapshot snap = env.snapshot();
  const double c = std::cos(dth), s = std::sin(dth);
  const Eigen::Vector2d rel{snap.sim.q[kBaseX] - contact.x(), snap.sim.q[kBaseZ] - contact.y()};
  snap.sim.q[kBaseX] = contact.x() + c * rel.x() - s * rel.y();
  snap.sim.q[kBaseZ] = contact.y() + s * rel.x() + c * rel.y();
  snap.sim.q[kPitch] += dth;
  env.restore(snap);
}

DemoSet tiny_demo_set(int n, uint64_t seed) {
  Env env(ModelSpec{}, TaskConfig{}, seed, 0);
  ScriptedExpert expert;
  CurriculumConfig ccfg;
  const CurriculumState cstate = init_curriculum(ccfg);
  return collect_demos(env, expert, cstate, ccfg, n);
}

NetSpec actor_spec() {
  NetSpec spec;
  spec.input_dim = kObsDim;
  spec.hidden_dims = {64, 64};
  spec.output_dim = kActionDim;
  return spec;
}

NetParams fresh_actor(uint64_t seed) {
  NetInitOptions opts;
  opts.gaussian_head = true;
  opts.final_layer_gain = 0.01;
  return net_init(actor_spec(), seed, opts);
}

}  // namespace

TEST_CASE("arm ik round trips random in-limit poses") {
  ModelSpec model;
  Rng rng(31, 0);
  for (int trial = 0; trial < 20; ++trial) {
    Eigen::Vector3d q;
    for (int i = 0; i < 3; ++i)
      q[i] = rng.uniform(0.7 * model.q_lower[2 + i], 0.7 * model.q_upper[2 + i]);
    const Eigen::Vector2d target = chain_tip(model, q);
    if (target.norm() < 0.1) continue;
    const IkResult res = arm_ik(model, target, TaskConfig{}.nominal_arm);
    CHECK(res.success);
    CHECK((chain_tip(model, res.q) - target).norm() < 1e-5);
    for (int i = 0; i < 3; ++i) {
      CHECK(res.q[i] >= model.q_lower[2 + i] - 1e-12);
      CHECK(res.q[i] <= model.q_upper[2 + i] + 1e-12);
    }
  }
}

TEST_CASE("arm ik rejects targets beyond total reach") {
  ModelSpec model;
  const double reach = model.arm_length[0] + model.arm_length[1] + model.arm_length[2];
  Eigen::Vector2d dir{1.0, 0.4};
  dir.normalize();
  const IkResult res =
      arm_ik(model, model.arm_offset + (reach + 0.01) * dir, Eigen::Vector3d{0.3, 0.1, 0.1});
  CHECK_FALSE(res.success);
  CHECK(res.residual > 1e-3);
}

TEST_CASE("arm ik reaches the boundary minus one millimeter nearly straight") {
  ModelSpec model;
  const double reach = model.arm_length[0] + model.arm_length[1] + model.arm_length[2];
  Eigen::Vector2d dir{1.0, 0.3};
  dir.normalize();
  IkOptions opts;
  opts.max_iters = 2000;
  const IkResult res =
      arm_ik(model, model.arm_offset + (reach - 1e-3) * dir, Eigen::Vector3d{0.3, 0.1, 0.1}, opts);
  CHECK(res.success);
  // Elbow and wrist bends collapse as the chain straightens out.
  CHECK(std::abs(res.q[1]) < 0.15);
  CHECK(std::abs(res.q[2]) < 0.15);
}

TEST_CASE("arm ik angle mode matches a full pose") {
  ModelSpec model;
  const Eigen::Vector3d q_true{0.9, -0.7, -0.4};
  IkOptions opts;
  opts.use_angle = true;
  opts.target_angle = q_true.sum();
  opts.max_iters = 500;
  const IkResult res = arm_ik(model, chain_tip(model, q_true), TaskConfig{}.nominal_arm, opts);
  CHECK(res.success);
  CHECK((chain_tip(model, res.q) - chain_tip(model, q_true)).norm() < 1e-5);
  CHECK(std::abs(res.q.sum() - q_true.sum()) < 1e-5);
}

TEST_CASE("expert config validation") {
  ExpertConfig good;
  good.validate();
  ExpertConfig c = good;
  c.balance_kp = 0.0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = good;
  c.rate_filter = 1.0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = good;
  c.torque_filter = -0.1;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = good;
  c.lean_limit = 0.0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = good;
  c.arm_tau = -1.0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = good;
  c.ik_max_iters = 0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  CHECK_THROWS_AS(ScriptedExpert{c}, std::invalid_argument);
}

TEST_CASE("expert holds equilibrium with near-zero wheel torque") {
  ModelSpec model;
  TaskConfig cfg;
  CurriculumConfig ccfg;
  const CurriculumState cstate = init_curriculum(ccfg);
  Env env(model, cfg, 7, 0);
  rest_at_nominal(env, cstate, ccfg);
  ScriptedExpert expert;
  double late_tau = 0.0, late_arm_gap = 0.0;
  for (int t = 0; t < 400; ++t) {
    const auto a = expert.action(env);
    if (t >= 250) {
      late_tau = std::max(late_tau, std::abs(a[2]) * model.torque_limit[2]);
      const ActuationInput in = action_to_actuation(model, a);
      const Eigen::Vector3d q_arm{env.state().q[kArm1], env.state().q[kArm2],
                                  env.state().q[kArm3]};
      late_arm_gap = std::max(late_arm_gap, (in.arm_targets - q_arm).cwiseAbs().maxCoeff());
    }
    const EnvStep r = env.step(a);
    REQUIRE_FALSE(r.terminated);
  }
  CHECK(late_tau < 0.5);
  CHECK(late_arm_gap < 0.05);
}

TEST_CASE("expert wheel torque restores a pitch perturbation") {
  ModelSpec model;
  TaskConfig cfg;
  CurriculumConfig ccfg;
  const CurriculumState cstate = init_curriculum(ccfg);
  for (const double dth : {0.1, -0.1}) {
    CAPTURE(dth);
    Env env(model, cfg, 7, 0);
    rest_at_nominal(env, cstate, ccfg);
    const CommandSet hold = env.command();
    tip_about_contact(env, dth);
    env.set_command(hold);
    ScriptedExpert expert;
    const auto a0 = expert.action(env);
    // Positive pitch tips the body top toward -x, putting the mass behind
    // the contact; the restoring drive runs the base under it, so the first
    // wheel torque carries the opposite sign of the tip.
    if (dth > 0.0) CHECK(a0[2] < 0.0);
    if (dth < 0.0) CHECK(a0[2] > 0.0);
    expert.reset();
    for (int t = 0; t < 150; ++t) {
      const EnvStep r = env.step(expert.action(env));
      REQUIRE_FALSE(r.terminated);
    }
    CHECK(std::abs(env.state().q[kPitch]) < 0.02);
  }
}

TEST_CASE("expert keeps pitch inside 0.3 rad for 500 steps from nominal resets") {
  ModelSpec model;
  TaskConfig cfg;
  CurriculumConfig ccfg;
  const CurriculumState cstate = init_curriculum(ccfg);
  Env env(model, cfg, 101, 0);
  ScriptedExpert expert;
  int clean = 0;
  double worst = 0.0;
  for (int ep = 0; ep < 100; ++ep) {
    expert.reset();
    // The reset draws the episode's commands; only the state is pinned back
    // to the exact standing pose.
    env.reset(cstate, ccfg);
    EnvSnapshot snap = env.snapshot();
    snap.sim = nominal_state(model, cfg);
    snap.status = {};
    env.restore(snap);
    bool ok = true;
    while (!env.done()) {
      const EnvStep r = env.step(expert.action(env));
      worst = std::max(worst, std::abs(env.state().q[kPitch]));
      if (r.terminated) {
        ok = false;
        break;
      }
    }
    if (ok && env.status().steps == cfg.t_max) ++clean;
  }
  CHECK(clean == 100);
  CHECK(worst < 0.3);
}

TEST_CASE("collect_demos respects the step budget and pairs up") {
  ModelSpec model;
  TaskConfig cfg;
  CurriculumConfig ccfg;
  const CurriculumState cstate = init_curriculum(ccfg);
  Env env(model, cfg, 5, 0);
  ScriptedExpert expert;
  DemoStats stats;
  const DemoSet demos = collect_demos(env, expert, cstate, ccfg, 1000, &stats);
  CHECK(demos.obs.cols() <= 1000);
  CHECK(demos.obs.cols() == demos.actions.cols());
  CHECK(demos.obs.rows() == kObsDim);
  CHECK(demos.actions.rows() == kActionDim);
  CHECK(demos.seed == 5);
  CHECK(stats.transitions == demos.obs.cols());
  CHECK(stats.episodes_kept > 0);
  CHECK(demos.layout_hash == demo_layout_hash(cfg));
}

TEST_CASE("collect_demos is deterministic for a fixed seed") {
  const DemoSet a = tiny_demo_set(600, 12);
  const DemoSet b = tiny_demo_set(600, 12);
  REQUIRE(a.obs.cols() == b.obs.cols());
  CHECK(a.obs == b.obs);
  CHECK(a.actions == b.actions);
  const DemoSet c = tiny_demo_set(600, 13);
  CHECK(a.obs != c.obs);
}

TEST_CASE("collected observations stay finite and inside ten times the normalized range") {
  const DemoSet demos = tiny_demo_set(1500, 2);
  REQUIRE(demos.obs.cols() > 0);
  CHECK(demos.obs.allFinite());
  CHECK(demos.actions.allFinite());
  CHECK(demos.obs.cwiseAbs().maxCoeff() < 10.0);
  CHECK(demos.actions.cwiseAbs().maxCoeff() <= 1.0 + 1e-12);
}

TEST_CASE("collect_demos flags a broken expert") {
  ModelSpec model;
  TaskConfig cfg;
  CurriculumConfig ccfg;
  const CurriculumState cstate = init_curriculum(ccfg);
  Env env(model, cfg, 5, 0);
  ExpertConfig weak;
  weak.balance_kp = 1e-3;
  weak.balance_kd = 1e-3;
  ScriptedExpert expert(weak);
  CHECK_THROWS_AS(collect_demos(env, expert, cstate, ccfg, 2000), std::runtime_error);
  CHECK_THROWS_AS(collect_demos(env, expert, cstate, ccfg, 0), std::invalid_argument);
}

TEST_CASE("demo files round trip and reject mismatches") {
  const DemoSet demos = tiny_demo_set(400, 9);
  const std::string path = "test_demos.bin";
  save_demos(path, demos);
  const DemoSet back = load_demos(path, demos.layout_hash);
  CHECK(back.layout_hash == demos.layout_hash);
  CHECK(back.seed == demos.seed);
  CHECK(back.obs == demos.obs);
  CHECK(back.actions == demos.actions);

  CHECK_THROWS_AS(load_demos(path, demos.layout_hash + 1), std::runtime_error);
  CHECK_THROWS_AS(load_demos("no_such_demo_file.bin"), std::runtime_error);

  // Truncate and corrupt copies.
  {
    std::ifstream in(path, std::ios::binary);
    std::vector<char> bytes((std::istreambuf_iterator<char>(in)),
                            std::istreambuf_iterator<char>());
    std::ofstream cut("test_demos_cut.bin", std::ios::binary);
    cut.write(bytes.data(), static_cast<std::streamsize>(bytes.size() / 2));
  }
  CHECK_THROWS_AS(load_demos("test_demos_cut.bin"), std::runtime_error);
  {
    std::ofstream bad("test_demos_bad.bin", std::ios::binary);
    bad.write("NOTDEMOS", 8);
    const char zero[64] = {};
    bad.write(zero, sizeof(zero));
  }
  CHECK_THROWS_AS(load_demos("test_demos_bad.bin"), std::runtime_error);
  std::remove(path.c_str());
  std::remove("test_demos_cut.bin");
  std::remove("test_demos_bad.bin");
}

TEST_CASE("pretraining on the actor's own mean is a fixed point") {
  const DemoSet raw = tiny_demo_set(800, 21);
  NetParams actor = fresh_actor(55);
  DemoSet self = raw;
  self.actions = net_forward(actor, raw.obs, nullptr);
  BcConfig cfg;
  cfg.epochs = 1;
  Rng rng(3, 0);
  const BcReport rep = pretrain_actor(actor, self, cfg, rng);
  REQUIRE(rep.train_mse.size() == 1);
  CHECK(rep.train_mse[0] < 1e-12);
  CHECK(rep.val_mse[0] < 1e-12);
}

TEST_CASE("pretraining on constant actions converges to that constant") {
  DemoSet demos = tiny_demo_set(600, 8);
  Eigen::VectorXd c(kActionDim);
  c << 0.3, -0.2, 0.1, 0.5, -0.4, 0.25;
  demos.actions = c.replicate(1, demos.actions.cols());
  NetParams actor = fresh_actor(77);
  BcConfig cfg;
  cfg.epochs = 60;
  cfg.learning_rate = 3e-3;
  Rng rng(4, 0);
  const BcReport rep = pretrain_actor(actor, demos, cfg, rng);
  CHECK(rep.final_val_mse() < 1e-3);
  const Eigen::MatrixXd mu = net_forward(actor, demos.obs.leftCols(32), nullptr);
  CHECK((mu.colwise() - c).cwiseAbs().maxCoeff() < 0.05);
}

TEST_CASE("pretraining reports per-epoch losses and leaves log_std alone") {
  const DemoSet demos = tiny_demo_set(900, 33);
  NetParams actor = fresh_actor(99);
  const Eigen::VectorXd log_std_before = actor.log_std;
  BcConfig cfg;
  cfg.epochs = 8;
  Rng rng(6, 0);
  const BcReport rep = pretrain_actor(actor, demos, cfg, rng);
  CHECK(rep.train_mse.size() == 8);
  CHECK(rep.val_mse.size() == 8);
  CHECK(rep.train_count + rep.val_count == demos.obs.cols());
  CHECK(rep.val_count == std::lround(cfg.val_fraction * demos.obs.cols()));
  CHECK(actor.log_std == log_std_before);
  CHECK(rep.final_val_mse() < rep.val_mse.front());
  CHECK_FALSE(rep.val_never_improved);

  NetParams actor2 = fresh_actor(99);
  Rng rng2(6, 0);
  const BcReport rep2 = pretrain_actor(actor2, demos, cfg, rng2);
  CHECK(rep2.final_val_mse() == rep.final_val_mse());
  for (size_t l = 0; l < actor.weights.size(); ++l) CHECK(actor2.weights[l] == actor.weights[l]);
}

TEST_CASE("pretraining validates its inputs") {
  const DemoSet demos = tiny_demo_set(200, 44);
  NetParams actor = fresh_actor(1);
  Rng rng(1, 0);
  BcConfig cfg;
  cfg.val_fraction = 0.9;
  CHECK_THROWS_AS(pretrain_actor(actor, demos, cfg, rng), std::invalid_argument);
  cfg = BcConfig{};
  cfg.epochs = 0;
  CHECK_THROWS_AS(pretrain_actor(actor, demos, cfg, rng), std::invalid_argument);
  cfg = BcConfig{};
  NetParams no_head = net_init(actor_spec(), 2, NetInitOptions{});
  CHECK_THROWS_AS(pretrain_actor(no_head, demos, cfg, rng), std::invalid_argument);
  DemoSet small = demos;
  small.obs = demos.obs.leftCols(4);
  small.actions = demos.actions.leftCols(4);
  CHECK_THROWS_AS(pretrain_actor(actor, small, cfg, rng), std::invalid_argument);
}
