#include <cstdio>
#include <cmath>
#include "locoforge/bc.hpp"

using namespace locoforge;

int main(int argc, char** argv) {
  ModelSpec model;
  TaskConfig cfg;
  CurriculumConfig ccfg;
  const CurriculumState cstate = init_curriculum(ccfg);

  ExpertConfig ec;
  if (argc > 1) ec.balance_kp = std::atof(argv[1]);
  if (argc > 2) ec.balance_kd = std::atof(argv[2]);
  if (argc > 3) ec.vel_gain = std::atof(argv[3]);
  if (argc > 4) ec.leg_kp = std::atof(argv[4]);
  if (argc > 5) ec.leg_kd = std::atof(argv[5]);
  if (argc > 6) ec.lean_limit = std::atof(argv[6]);
  if (argc > 7) ec.rate_filter = std::atof(argv[7]);
  if (argc > 8) ec.vel_ref_tau = std::atof(argv[8]);

  Env env(model, cfg, 7, 0);
  ScriptedExpert expert(ec);

  int episodes = 100, survived = 0;
  double worst_pitch = 0.0, sum_abs_verr = 0.0, sum_ee_err = 0.0;
  long steps_total = 0;
  for (int ep = 0; ep < episodes; ++ep) {
    expert.reset();
    env.reset(cstate, ccfg);
    double ep_worst = 0.0;
    int ep_worst_t = 0;
    bool ok = true;
    while (!env.done()) {
      const auto a = expert.action(env);
      const EnvStep r = env.step(a);
      const double th = std::abs(env.state().q[kPitch]);
      if (th > ep_worst) { ep_worst = th; ep_worst_t = env.status().steps; }
      sum_abs_verr += std::abs(env.state().qd[kBaseX] - env.command().v_x_cmd);
      sum_ee_err += (env.kinematics().p_ee_base - env.command().p_ee_cmd).norm();
      ++steps_total;
      if (r.terminated) { ok = false; break; }
    }
    if (ok) ++survived;
    if (ep_worst > 0.28)
      std::printf("  ep %d worst %.3f at t=%d vcmd=%+.2f goal=(%.2f,%.2f)\n", ep, ep_worst,
                  ep_worst_t, env.command().v_x_cmd, env.command().p_ee_cmd.x(),
                  env.command().p_ee_cmd.y());
    worst_pitch = std::max(worst_pitch, ep_worst);
    if (!ok && ep < 5)
      std::printf("  ep %d FAILED at step %d pitch %.3f h %.3f\n", ep, env.status().steps,
                  env.state().q[kPitch], env.state().q[kBaseZ]);
  }
  std::printf("kp=%.1f kd=%.2f kv=%.3f legkp=%.0f legkd=%.1f -> survived %d/%d worst|pitch|=%.3f mean|verr|=%.3f mean ee err=%.3f\n",
              ec.balance_kp, ec.balance_kd, ec.vel_gain, ec.leg_kp, ec.leg_kd,
              survived, episodes, worst_pitch, sum_abs_verr / steps_total,
              sum_ee_err / steps_total);
  return 0;
}
