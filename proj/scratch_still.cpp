#include <cstdio>
#include <cmath>
#include <cstdlib>
#include "locoforge/bc.hpp"

using namespace locoforge;

// args: kp kd legkp legkd vcmd slip velgain lean armtau fixarm episodes
int main(int argc, char** argv) {
  ModelSpec model;
  TaskConfig cfg;
  CurriculumConfig ccfg;
  const CurriculumState cstate = init_curriculum(ccfg);

  ExpertConfig ec;
  if (argc > 1) ec.balance_kp = std::atof(argv[1]);
  if (argc > 2) ec.balance_kd = std::atof(argv[2]);
  if (argc > 3) ec.leg_kp = std::atof(argv[3]);
  if (argc > 4) ec.leg_kd = std::atof(argv[4]);
  const double vcmd = argc > 5 ? std::atof(argv[5]) : 0.0;
  if (argc > 6) ec.slip_damping = std::atof(argv[6]);
  if (argc > 7) ec.vel_gain = std::atof(argv[7]);
  if (argc > 8) ec.lean_limit = std::atof(argv[8]);
  if (argc > 9) ec.arm_tau = std::atof(argv[9]);
  const bool fix_arm = argc > 10 ? std::atoi(argv[10]) != 0 : true;
  const int episodes = argc > 11 ? std::atoi(argv[11]) : 20;

  Env env(model, cfg, 11, 0);
  ScriptedExpert expert(ec);
  int survived = 0;
  double worst = 0.0;
  for (int ep = 0; ep < episodes; ++ep) {
    expert.reset();
    env.reset(cstate, ccfg);
    CommandSet cmd = env.command();
    cmd.v_x_cmd = vcmd;
    if (fix_arm) cmd.p_ee_cmd = env.kinematics().p_ee_base;
    env.set_command(cmd);
    bool ok = true;
    double ep_worst = 0.0;
    while (!env.done()) {
      const EnvStep r = env.step(expert.action(env));
      ep_worst = std::max(ep_worst, std::abs(env.state().q[kPitch]));
      if (r.terminated) { ok = false; break; }
    }
    if (ok) ++survived; else if (ep < 3)
      std::printf("  ep %d died t=%d th=%+.3f h=%.3f\n", ep, env.status().steps,
                  env.state().q[kPitch], env.state().q[kBaseZ]);
    worst = std::max(worst, ep_worst);
  }
  std::printf("kp=%.0f kd=%.1f legs=%.0f/%.0f v=%.2f slip=%.1f vg=%.3f lean=%.3f tau=%.2f fix=%d -> %d/%d worst|th|=%.3f\n",
              ec.balance_kp, ec.balance_kd, ec.leg_kp, ec.leg_kd, vcmd, ec.slip_damping,
              ec.vel_gain, ec.lean_limit, ec.arm_tau, (int)fix_arm, survived, episodes, worst);
  return 0;
}
