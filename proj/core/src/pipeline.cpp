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
#include "locoforge/pipeline.hpp"

#include <chrono>
#include <cstdlib>
#include <stdexcept>
#include <thread>

namespace locoforge {

namespace {

// Environment streams 0..n_envs-1 belong to training; everything else gets
// a stream far above any plausible env count.
constexpr uint64_t kEvalStreamBase = 1'000'000;
constexpr uint64_t kDemoStream = 2'000'000;
constexpr uint64_t kBcRngStream = 3'000'000;

std::vector<Env> build_envs(const RunConfig& cfg) {
  std::vector<Env> envs;
  envs.reserve(static_cast<size_t>(cfg.run.n_envs));
  for (int e = 0; e < cfg.run.n_envs; ++e)
    envs.emplace_back(cfg.model, cfg.task, cfg.run.seed, static_cast<uint64_t>(e));
  return envs;
}

}  // namespace

int resolve_threads(int n_envs) {
  int threads = 0;
  if (const char* env = std::getenv("LOCOFORGE_THREADS")) {
    char* end = nullptr;
    const long parsed = std::strtol(env, &end, 10);
    if (end == env || *end != '\0' || parsed < 1)
      throw std::runtime_error("LOCOFORGE_THREADS must be a positive integer");
    threads = static_cast<int>(parsed);
  } else {
    const unsigned hw = std::thread::hardware_concurrency();
    threads = static_cast<int>(hw == 0 ? 1 : hw);
    threads = std::min(threads, 8);
  }
  return std::max(1, std::min(threads, n_envs));
}

TrainCheckpoint make_checkpoint(const RunConfig& cfg, const TrainerState& trainer,
                                const CurriculumState& curriculum,
                                const std::vector<EnvSnapshot>& envs) {
  TrainCheckpoint ckpt;
  ckpt.config_json = run_config_to_json(cfg);
  ckpt.trainer = trainer;
  ckpt.curriculum = curriculum;
  ckpt.envs = envs;
  return ckpt;
}

TrainOutcome run_training(const TrainSession& session) {
  RunConfig cfg = session.cfg;
  if (session.ablate_constraints) cfg.acppo.constraints_enabled = false;
  cfg.validate();

  const auto start = std::chrono::steady_clock::now();

  std::vector<Env> envs = build_envs(cfg);
  TrainerState trainer;
  CurriculumState cstate;

  if (session.resume) {
    const TrainCheckpoint& ckpt = *session.resume;
    if (ckpt.envs.size() != envs.size())
      throw std::runtime_error("resume: checkpoint holds " + std::to_string(ckpt.envs.size()) +
                               " environments, run expects " + std::to_string(envs.size()));
    trainer = ckpt.trainer;
    cstate = ckpt.curriculum;
    for (size_t e = 0; e < envs.size(); ++e) envs[e].restore(ckpt.envs[e]);
  } else {
    trainer = init_trainer(cfg.net, cfg.acppo, cfg.run.seed);
    cstate = session.ablate_curriculum ? frozen_final_curriculum(cfg.curriculum)
                                       : init_curriculum(cfg.curriculum);
    if (session.warm_start) {
      const ActorCheckpoint& warm = *session.warm_start;
      if (warm.layout_hash != demo_layout_hash(cfg.task))
        throw std::runtime_error(
            "warm start: actor was trained against a different observation/action layout");
      if (!(warm.actor.spec == trainer.actor.spec))
        throw std::runtime_error("warm start: actor architecture does not match the config");
      trainer.actor = warm.actor;
    }
  }

  TrainOutcome outcome;
  while (trainer.iteration < cfg.run.iterations) {
    RolloutBuffer buffer = collect_rollouts(trainer, envs, cfg.run.horizon, cstate,
                                            cfg.curriculum, session.n_threads);
    IterationMetrics met = update(trainer, buffer, cfg.acppo, cstate, cfg.curriculum);
    if (session.ablate_curriculum) cstate = frozen_final_curriculum(cfg.curriculum);
    met.wallclock =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    outcome.metrics.push_back(met);
    if (session.on_iteration) session.on_iteration(met);

    const bool due = trainer.iteration % cfg.run.checkpoint_every == 0 ||
                     trainer.iteration == cfg.run.iterations;
    if (due && session.on_checkpoint) {
      std::vector<EnvSnapshot> snaps;
      snaps.reserve(envs.size());
      for (const Env& env : envs) snaps.push_back(env.snapshot());
      session.on_checkpoint(make_checkpoint(cfg, trainer, cstate, snaps), trainer.iteration);
    }
  }

  outcome.trainer = std::move(trainer);
  outcome.curriculum = cstate;
  outcome.envs.reserve(envs.size());
  for (const Env& env : envs) outcome.envs.push_back(env.snapshot());
  return outcome;
}

std::vector<EvalCaseResult> run_evaluation(const RunConfig& cfg, const TrainerState& trainer) {
  cfg.eval.validate();
  std::vector<EvalCaseResult> results;
  const CurriculumState cstate = init_curriculum(cfg.curriculum);
  for (size_t i = 0; i < cfg.eval.v_x_cases.size(); ++i) {
    Env env(cfg.model, cfg.task, cfg.run.seed, kEvalStreamBase + i);
    EvalProtocol protocol;
    protocol.max_steps = cfg.eval.max_steps;
    protocol.fixed_v_x = cfg.eval.v_x_cases[i];
    protocol.walk_target = true;
    protocol.walk_step = cfg.eval.walk_step;
    protocol.walk_seed = cfg.eval.walk_seed + i;
    protocol.record_trace = true;

    EvalCaseResult r;
    r.v_x_cmd = cfg.eval.v_x_cases[i];
    r.report = evaluate(trainer, env, cfg.eval.episodes, protocol, cstate, cfg.curriculum);
    results.push_back(std::move(r));
  }
  return results;
}

BcOutcome run_bc(const RunConfig& cfg) {
  cfg.validate();
  BcOutcome outcome;

  Env env(cfg.model, cfg.task, cfg.run.seed, kDemoStream);
  ScriptedExpert expert;
  const CurriculumState cstate = init_curriculum(cfg.curriculum);
  outcome.demos =
      collect_demos(env, expert, cstate, cfg.curriculum, cfg.bc.demo_steps, &outcome.stats);

  // Start from the exact network the trainer would build, so the cloned
  // actor drops into a fresh trainer without touching anything else.
  outcome.actor = init_trainer(cfg.net, cfg.acppo, cfg.run.seed).actor;
  Rng rng(cfg.run.seed, kBcRngStream);
  outcome.report = pretrain_actor(outcome.actor, outcome.demos, cfg.bc.train, rng);
  return outcome;
}

}  // namespace locoforge
