#include <cstdio>
#include <cmath>
#include "locoforge/bc.hpp"

using namespace locoforge;

int main(int argc, char** argv) {
  ModelSpec model;
  TaskConfig cfg;
  CurriculumConfig ccfg;
  const CurriculumState cstate = init_curriculum(ccfg);
  const int target_ep = argc > 1 ? std::atoi(argv[1]) : 2;

  Env env(model, cfg, 7, 0);
  ScriptedExpert expert;
  for (int ep = 0; ep <= target_ep; ++ep) {
    expert.reset();
    env.reset(cstate, ccfg);
    if (ep < target_ep) {
      while (!env.done()) env.step(expert.action(env));
      continue;
    }
    std::printf("v_cmd=%.2f p_ee_cmd=(%.3f %.3f)\n", env.command().v_x_cmd,
                env.command().p_ee_cmd.x(), env.command().p_ee_cmd.y());
    while (!env.done()) {
      const auto a = expert.action(env);
      const auto& s = env.state();
      if (env.status().steps % 4 == 0)
        std::printf(
            "t=%3d th=%+.3f h=%.3f hip=%+.3f knee=%+.3f v=%+.3f w_spd=%+.2f tau=(%+.1f %+.1f %+.1f) arm=(%+.2f %+.2f %+.2f)\n",
            env.status().steps, s.q[kPitch], s.q[kBaseZ], s.q[kHip], s.q[kKnee],
            s.qd[kBaseX], s.qd[kWheel], s.applied_torques[0], s.applied_torques[1],
            s.applied_torques[2], s.q[kArm1], s.q[kArm2], s.q[kArm3]);
      env.step(a);
    }
    std::printf("END t=%d th=%+.3f h=%.3f terminated=%d\n", env.status().steps,
                env.state().q[kPitch], env.state().q[kBaseZ], env.status().terminated);
  }
  return 0;
}
