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
#include "locoforge/sim.hpp"

#include <cmath>
#include <string>

namespace locoforge {
namespace {

// Planar spatial vectors are (omega, vx, vy) for motion and
// (torque_z, fx, fy) for force, expressed in a body frame.

enum class JointType { PrismX, PrismZ, RevZ, RevZNeg };

struct Joint {
  JointType type;
  int parent;
  Eigen::Vector2d offset;  // tree translation in the parent frame
  Eigen::Vector3d S;       // motion subspace in the child frame
};

std::array<Joint, kNumCoords> joint_table(const ModelSpec& m) {
  const Eigen::Vector3d sx(0, 1, 0), sz(0, 0, 1), sw(1, 0, 0), swn(-1, 0, 0);
  return {{
      {JointType::PrismX, -1, {0, 0}, sx},                         // base x
      {JointType::PrismZ, 0, {0, 0}, sz},                          // base z
      {JointType::RevZ, 1, {0, 0}, sw},                            // pitch
      {JointType::RevZ, 2, m.hip_offset, sw},                      // hip
      {JointType::RevZ, 3, {0, -m.thigh_length}, sw},              // knee
      {JointType::RevZNeg, 4, {0, -m.shank_length}, swn},          // wheel
      {JointType::RevZ, 2, m.arm_offset, sw},                      // arm 1
      {JointType::RevZ, 6, {m.arm_length[0], 0}, sw},              // arm 2
      {JointType::RevZ, 7, {m.arm_length[1], 0}, sw},              // arm 3
  }};
}

Eigen::Vector2d perp(const Eigen::Vector2d& v) { return {-v.y(), v.x()}; }

double cross2(const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
  return a.x() * b.y() - a.y() * b.x();
}

Eigen::Matrix2d rot(double a) {
  const double c = std::cos(a), s = std::sin(a);
  Eigen::Matrix2d r;
  r << c, -s, s, c;
  return r;
}

// Joint transform parent->child as a rotation angle plus a translation given
// in the parent frame.
struct FrameStep {
  double theta;
  Eigen::Vector2d r;
};

FrameStep joint_frame(const Joint& j, double q) {
  switch (j.type) {
    case JointType::PrismX:
      return {0.0, j.offset + Eigen::Vector2d(q, 0)};
    case JointType::PrismZ:
      return {0.0, j.offset + Eigen::Vector2d(0, q)};
    case JointType::RevZ:
      return {q, j.offset};
    case JointType::RevZNeg:
      return {-q, j.offset};
  }
  return {0.0, {0, 0}};
}

// Motion transform matrix for a FrameStep: maps parent-frame motion vectors
// into the child frame.
Eigen::Matrix3d motion_xform(const FrameStep& fs) {
  const Eigen::Matrix2d rt = rot(fs.theta).transpose();
  const Eigen::Vector2d a = rt * perp(fs.r);
  Eigen::Matrix3d x;
  x << 1, 0, 0,  //
      a.x(), rt(0, 0), rt(0, 1),  //
      a.y(), rt(1, 0), rt(1, 1);
  return x;
}

Eigen::Matrix3d spatial_inertia(double mass, double inertia, const Eigen::Vector2d& com) {
  Eigen::Matrix3d I;
  I << inertia + mass * com.squaredNorm(), -mass * com.y(), mass * com.x(),  //
      -mass * com.y(), mass, 0,                                             //
      mass * com.x(), 0, mass;
  return I;
}

struct BodyParams {
  double mass;
  double inertia;
  Eigen::Vector2d com;
};

std::array<BodyParams, kNumBodies> body_params(const ModelSpec& m) {
  return {{
      {0, 0, {0, 0}},
      {0, 0, {0, 0}},
      {m.base_mass, m.base_inertia, m.base_com},
      {m.thigh_mass, m.thigh_inertia, {0, -m.thigh_com}},
      {m.shank_mass, m.shank_inertia, {0, -m.shank_com}},
      {m.wheel_mass, m.wheel_inertia, {0, 0}},
      {m.arm_mass[0], m.arm_inertia[0], {m.arm_com[0], 0}},
      {m.arm_mass[1], m.arm_inertia[1], {m.arm_com[1], 0}},
      {m.arm_mass[2], m.arm_inertia[2], {m.arm_com[2], 0}},
  }};
}

Eigen::Vector3d cross_motion(const Eigen::Vector3d& v, const Eigen::Vector3d& u) {
  const Eigen::Vector2d vl(v[1], v[2]), ul(u[1], u[2]);
  const Eigen::Vector2d lin = v[0] * perp(ul) - u[0] * perp(vl);
  return {0.0, lin.x(), lin.y()};
}

Eigen::Vector3d cross_force(const Eigen::Vector3d& v, const Eigen::Vector3d& h) {
  const Eigen::Vector2d vl(v[1], v[2]), hl(h[1], h[2]);
  const Eigen::Vector2d lin = v[0] * perp(hl);
  return {cross2(vl, hl), lin.x(), lin.y()};
}

struct Poses {
  std::array<double, kNumBodies> angle;
  std::array<Eigen::Vector2d, kNumBodies> origin;
};

Poses compute_poses(const ModelSpec& model, const Vec9& q) {
  const auto joints = joint_table(model);
  Poses p;
  for (int i = 0; i < kNumCoords; ++i) {
    const FrameStep fs = joint_frame(joints[i], q[i]);
    const int pa = joints[i].parent;
    const double pa_angle = pa < 0 ? 0.0 : p.angle[pa];
    const Eigen::Vector2d pa_origin = pa < 0 ? Eigen::Vector2d::Zero() : p.origin[pa];
    p.angle[i] = pa_angle + fs.theta;
    p.origin[i] = pa_origin + rot(pa_angle) * fs.r;
  }
  return p;
}

std::array<Eigen::Vector3d, kNumBodies> compute_velocities(const ModelSpec& model, const Vec9& q,
                                                           const Vec9& qd) {
  const auto joints = joint_table(model);
  std::array<Eigen::Vector3d, kNumBodies> v;
  for (int i = 0; i < kNumCoords; ++i) {
    const Eigen::Matrix3d x = motion_xform(joint_frame(joints[i], q[i]));
    const Eigen::Vector3d vp =
        joints[i].parent < 0 ? Eigen::Vector3d::Zero() : v[joints[i].parent];
    v[i] = x * vp + joints[i].S * qd[i];
  }
  return v;
}

// World-frame velocity of the material point of `body` at `point_world`.
Eigen::Vector2d point_velocity_from(const Poses& poses,
                                    const std::array<Eigen::Vector3d, kNumBodies>& vels, int body,
                                    const Eigen::Vector2d& point_world) {
  const Eigen::Vector3d& v = vels[body];
  const Eigen::Vector2d origin_vel = rot(poses.angle[body]) * Eigen::Vector2d(v[1], v[2]);
  return origin_vel + v[0] * perp(point_world - poses.origin[body]);
}

// External spatial force on each body in body coordinates, torque about the
// body frame origin.
std::array<Eigen::Vector3d, kNumBodies> gather_external(const Poses& poses,
                                                        const ContactSet* contacts) {
  std::array<Eigen::Vector3d, kNumBodies> f;
  f.fill(Eigen::Vector3d::Zero());
  if (contacts == nullptr) return f;
  for (const ContactForce& c : contacts->forces) {
    const double n = cross2(c.point - poses.origin[c.body], c.force);
    const Eigen::Vector2d fb = rot(poses.angle[c.body]).transpose() * c.force;
    f[c.body] += Eigen::Vector3d(n, fb.x(), fb.y());
  }
  return f;
}

// Closest points between segments a0-a1 and b0-b1.
struct SegmentClosest {
  double dist;
  Eigen::Vector2d on_a, on_b;
};

SegmentClosest closest_segment_points(const Eigen::Vector2d& a0, const Eigen::Vector2d& a1,
                                      const Eigen::Vector2d& b0, const Eigen::Vector2d& b1) {
  const Eigen::Vector2d d1 = a1 - a0, d2 = b1 - b0, r = a0 - b0;
  const double la = d1.squaredNorm(), lb = d2.squaredNorm(), f = d2.dot(r);
  double s = 0.0, t = 0.0;
  const double eps = 1e-12;
  if (la <= eps && lb <= eps) {
    // both degenerate
  } else if (la <= eps) {
    t = std::clamp(f / lb, 0.0, 1.0);
  } else {
    const double c = d1.dot(r);
    if (lb <= eps) {
      s = std::clamp(-c / la, 0.0, 1.0);
    } else {
      const double b = d1.dot(d2);
      const double denom = la * lb - b * b;
      if (denom > eps) s = std::clamp((b * f - c * lb) / denom, 0.0, 1.0);
      t = (b * s + f) / lb;
      if (t < 0.0) {
        t = 0.0;
        s = std::clamp(-c / la, 0.0, 1.0);
      } else if (t > 1.0) {
        t = 1.0;
        s = std::clamp((b - c) / la, 0.0, 1.0);
      }
    }
  }
  SegmentClosest out;
  out.on_a = a0 + s * d1;
  out.on_b = b0 + t * d2;
  out.dist = (out.on_b - out.on_a).norm();
  return out;
}

}  // namespace

void ModelSpec::validate() const {
  if (base_mass <= 0.0 || base_inertia <= 0.0) throw std::invalid_argument("base mass and inertia must be positive");
  if (thigh_mass < 0.0 || shank_mass < 0.0 || wheel_mass < 0.0)
    throw std::invalid_argument("leg masses must be non-negative");
  if (thigh_length <= 0.0 || shank_length <= 0.0 || wheel_radius <= 0.0)
    throw std::invalid_argument("leg geometry must be positive");
  for (int i = 0; i < 3; ++i) {
    if (arm_mass[i] < 0.0 || arm_inertia[i] < 0.0) throw std::invalid_argument("arm mass/inertia must be non-negative");
    if (arm_length[i] <= 0.0) throw std::invalid_argument("arm link lengths must be positive");
  }
  for (int i = 0; i < 5; ++i) {
    if (!(q_lower[i] < q_upper[i])) throw std::invalid_argument("joint limits must satisfy lower < upper");
  }
  for (double t : torque_limit) {
    if (t <= 0.0) throw std::invalid_argument("torque limits must be positive");
  }
  if (contact_stiffness < 0.0 || contact_damping < 0.0 || tangential_gain < 0.0)
    throw std::invalid_argument("contact gains must be non-negative");
  if (friction_coeff < 0.0) throw std::invalid_argument("friction coefficient must be non-negative");
  if (base_capsule_radius <= 0.0 || base_capsule_halflen < 0.0 || arm_link_radius <= 0.0)
    throw std::invalid_argument("collision geometry must be positive");
  if (arm_kp < 0.0 || arm_kd < 0.0) throw std::invalid_argument("arm PD gains must be non-negative");
  if (gravity < 0.0) throw std::invalid_argument("gravity must be non-negative");
}

KinematicsResult forward_kinematics(const ModelSpec& model, const Vec9& q) {
  const Poses poses = compute_poses(model, q);
  const auto bodies = body_params(model);
  KinematicsResult out;
  for (int i = 0; i < kNumBodies; ++i) out.links[i] = {poses.angle[i], poses.origin[i]};

  const int last = kBodyArm3;
  out.p_ee_world =
      poses.origin[last] + rot(poses.angle[last]) * Eigen::Vector2d(model.arm_length[2], 0);
  out.ee_angle_world = poses.angle[last];
  const double base_angle = poses.angle[kBodyBase];
  out.p_ee_base = rot(base_angle).transpose() * (out.p_ee_world - poses.origin[kBodyBase]);
  out.ee_angle_base = out.ee_angle_world - base_angle;

  auto group_centroid = [&](std::initializer_list<int> ids, const Eigen::Vector2d& fallback) {
    double m_sum = 0.0;
    Eigen::Vector2d weighted = Eigen::Vector2d::Zero();
    for (int i : ids) {
      const Eigen::Vector2d com = poses.origin[i] + rot(poses.angle[i]) * bodies[i].com;
      weighted += bodies[i].mass * com;
      m_sum += bodies[i].mass;
    }
    return m_sum > 0.0 ? Eigen::Vector2d(weighted / m_sum) : fallback;
  };
  out.arm_centroid = group_centroid({kBodyArm1, kBodyArm2, kBodyArm3}, poses.origin[kBodyArm1]);
  out.base_centroid =
      group_centroid({kBodyBase, kBodyThigh, kBodyShank, kBodyWheel}, poses.origin[kBodyBase]);
  return out;
}

std::array<Eigen::Vector3d, kNumBodies> body_spatial_velocities(const ModelSpec& model,
                                                                const Vec9& q, const Vec9& qd) {
  return compute_velocities(model, q, qd);
}

Eigen::Vector2d point_velocity(const ModelSpec& model, const Vec9& q, const Vec9& qd, int body,
                               const Eigen::Vector2d& point_world) {
  if (body < 0 || body >= kNumBodies) throw std::invalid_argument("body index out of range");
  const Poses poses = compute_poses(model, q);
  const auto vels = compute_velocities(model, q, qd);
  return point_velocity_from(poses, vels, body, point_world);
}

Vec9 inverse_dynamics(const ModelSpec& model, const Vec9& q, const Vec9& qd, const Vec9& qdd,
                      const ContactSet* contacts) {
  const auto joints = joint_table(model);
  const auto bodies = body_params(model);
  const Poses poses = compute_poses(model, q);
  const auto f_ext = gather_external(poses, contacts);

  std::array<Eigen::Matrix3d, kNumBodies> x;
  std::array<Eigen::Vector3d, kNumBodies> v, a, f;
  // Fictitious upward base acceleration stands in for gravity.
  const Eigen::Vector3d a_world(0, 0, model.gravity);
  for (int i = 0; i < kNumCoords; ++i) {
    x[i] = motion_xform(joint_frame(joints[i], q[i]));
    const int pa = joints[i].parent;
    const Eigen::Vector3d vp = pa < 0 ? Eigen::Vector3d::Zero() : v[pa];
    const Eigen::Vector3d ap = pa < 0 ? a_world : a[pa];
    const Eigen::Vector3d vj = joints[i].S * qd[i];
    v[i] = x[i] * vp + vj;
    a[i] = x[i] * ap + joints[i].S * qdd[i] + cross_motion(v[i], vj);
    const Eigen::Matrix3d inertia =
        spatial_inertia(bodies[i].mass, bodies[i].inertia, bodies[i].com);
    f[i] = inertia * a[i] + cross_force(v[i], inertia * v[i]) - f_ext[i];
  }
  Vec9 tau;
  for (int i = kNumCoords - 1; i >= 0; --i) {
    tau[i] = joints[i].S.dot(f[i]);
    if (joints[i].parent >= 0) f[joints[i].parent] += x[i].transpose() * f[i];
  }
  return tau;
}

Mat9 mass_matrix(const ModelSpec& model, const Vec9& q) {
  const auto joints = joint_table(model);
  const auto bodies = body_params(model);
  std::array<Eigen::Matrix3d, kNumBodies> x, ic;
  for (int i = 0; i < kNumCoords; ++i) {
    x[i] = motion_xform(joint_frame(joints[i], q[i]));
    ic[i] = spatial_inertia(bodies[i].mass, bodies[i].inertia, bodies[i].com);
  }
  Mat9 m = Mat9::Zero();
  for (int i = kNumCoords - 1; i >= 0; --i) {
    if (joints[i].parent >= 0)
      ic[joints[i].parent] += x[i].transpose() * ic[i] * x[i];
    Eigen::Vector3d fh = ic[i] * joints[i].S;
    m(i, i) = joints[i].S.dot(fh);
    int j = i;
    while (joints[j].parent >= 0) {
      fh = x[j].transpose() * fh;
      j = joints[j].parent;
      m(i, j) = m(j, i) = fh.dot(joints[j].S);
    }
  }
  return m;
}

ContactSet contact_forces(const ModelSpec& model, const SimState& state) {
  ContactSet out;
  if (!model.contacts_enabled) return out;
  const Poses poses = compute_poses(model, state.q);
  const auto vels = compute_velocities(model, state.q, state.qd);
  const double k = model.contact_stiffness, c = model.contact_damping;

  auto ground_force = [&](int body, const Eigen::Vector2d& p, double clearance) {
    const double pen = clearance - p.y();
    if (pen <= 0.0) return Eigen::Vector2d(0.0, 0.0);
    const Eigen::Vector2d vp = point_velocity_from(poses, vels, body, p);
    const double normal = std::max(0.0, k * pen - c * vp.y());
    if (normal <= 0.0) return Eigen::Vector2d(0.0, 0.0);
    const double cone = model.friction_coeff * normal;
    const double tangent = std::clamp(-model.tangential_gain * vp.x(), -cone, cone);
    return Eigen::Vector2d(tangent, normal);
  };

  // Wheel against the ground plane y = 0.
  {
    const Eigen::Vector2d center = poses.origin[kBodyWheel];
    const Eigen::Vector2d p(center.x(), center.y() - model.wheel_radius);
    const Eigen::Vector2d f = ground_force(kBodyWheel, p, 0.0);
    if (f != Eigen::Vector2d::Zero()) out.forces.push_back({kBodyWheel, p, f});
  }

  // Arm link tips against the ground. The lowest point of a straight link is
  // always an endpoint, and each proximal endpoint is the previous link's tip.
  std::array<Eigen::Vector2d, kNumArmLinks> tips;
  for (int l = 0; l < kNumArmLinks; ++l) {
    const int body = kBodyArm1 + l;
    tips[l] = poses.origin[body] + rot(poses.angle[body]) * Eigen::Vector2d(model.arm_length[l], 0);
    const Eigen::Vector2d f = ground_force(body, tips[l], model.arm_link_radius);
    if (f != Eigen::Vector2d::Zero()) {
      out.forces.push_back({body, tips[l], f});
      out.link_forces[l] += f;
    }
  }

  // Distal arm links against the base collision capsule. Link 1 is mounted
  // flush to the base and is excluded like any adjacent pair.
  const Eigen::Matrix2d rb = rot(poses.angle[kBodyBase]);
  const Eigen::Vector2d cap0 =
      poses.origin[kBodyBase] + rb * Eigen::Vector2d(0, -model.base_capsule_halflen);
  const Eigen::Vector2d cap1 =
      poses.origin[kBodyBase] + rb * Eigen::Vector2d(0, model.base_capsule_halflen);
  const double clearance = model.base_capsule_radius + model.arm_link_radius;
  for (int l = 1; l < kNumArmLinks; ++l) {
    const int body = kBodyArm1 + l;
    const SegmentClosest sc = closest_segment_points(cap0, cap1, poses.origin[body], tips[l]);
    if (sc.dist >= clearance || sc.dist <= 1e-9) continue;
    const Eigen::Vector2d n = (sc.on_b - sc.on_a) / sc.dist;
    const Eigen::Vector2d v_rel = point_velocity_from(poses, vels, body, sc.on_b) -
                                  point_velocity_from(poses, vels, kBodyBase, sc.on_a);
    const double normal = std::max(0.0, k * (clearance - sc.dist) - c * n.dot(v_rel));
    if (normal <= 0.0) continue;
    const Eigen::Vector2d f = normal * n;
    out.forces.push_back({body, sc.on_b, f});
    out.forces.push_back({kBodyBase, sc.on_a, -f});
    out.link_forces[l] += f;
  }
  return out;
}

Eigen::Vector3d arm_pd_torque(const ModelSpec& model, const Eigen::Vector3d& targets,
                              const Eigen::Vector3d& q_arm, const Eigen::Vector3d& qd_arm) {
  Eigen::Vector3d tau;
  for (int i = 0; i < 3; ++i) {
    const double limit = model.torque_limit[3 + i];
    tau[i] = std::clamp(model.arm_kp * (targets[i] - q_arm[i]) - model.arm_kd * qd_arm[i], -limit,
                        limit);
  }
  return tau;
}

Vec9 forward_dynamics(const ModelSpec& model, const SimState& state, const Vec6& actuator_torques,
                      const ContactSet& contacts) {
  Vec9 tau = Vec9::Zero();
  for (int i = 0; i < kNumActuators; ++i) tau[kHip + i] = actuator_torques[i];

  Vec9 qd = state.qd;
  for (int i = 0; i < kNumCoords; ++i)
    if (model.is_locked(i)) qd[i] = 0.0;

  const Vec9 bias = inverse_dynamics(model, state.q, qd, Vec9::Zero(), &contacts);
  const Mat9 m = mass_matrix(model, state.q);

  Vec9 qdd = Vec9::Zero();
  if (model.locked_joints == 0) {
    qdd = m.ldlt().solve(tau - bias);
  } else {
    std::vector<int> active;
    for (int i = 0; i < kNumCoords; ++i)
      if (!model.is_locked(i)) active.push_back(i);
    if (!active.empty()) {
      const int n = static_cast<int>(active.size());
      Eigen::MatrixXd ma(n, n);
      Eigen::VectorXd rhs(n);
      for (int r = 0; r < n; ++r) {
        rhs[r] = tau[active[r]] - bias[active[r]];
        for (int cidx = 0; cidx < n; ++cidx) ma(r, cidx) = m(active[r], active[cidx]);
      }
      const Eigen::VectorXd sol = ma.ldlt().solve(rhs);
      for (int r = 0; r < n; ++r) qdd[active[r]] = sol[r];
    }
  }
  return qdd;
}

SimState step(const ModelSpec& model, const SimState& state, const ActuationInput& input,
              double dt) {
  if (!(dt > 0.0) || dt > 0.01) throw std::invalid_argument("step size must be in (0, 0.01]");

  const ContactSet contacts = contact_forces(model, state);

  Vec6 tau;
  for (int i = 0; i < 3; ++i)
    tau[i] = std::clamp(input.leg_torques[i], -model.torque_limit[i], model.torque_limit[i]);
  const Eigen::Vector3d arm_tau = arm_pd_torque(
      model, input.arm_targets, state.q.segment<3>(kArm1), state.qd.segment<3>(kArm1));
  tau.tail<3>() = arm_tau;

  const Vec9 qdd = forward_dynamics(model, state, tau, contacts);

  SimState next = state;
  for (int i = 0; i < kNumCoords; ++i) {
    if (model.is_locked(i)) continue;
    next.qd[i] += dt * qdd[i];
    next.q[i] += dt * next.qd[i];
  }
  next.time += dt;
  next.link_forces = contacts.link_forces;
  next.applied_torques = tau;
  if (!next.all_finite())
    throw SimDivergence("simulation diverged at t=" + std::to_string(next.time));
  return next;
}

double mechanical_energy(const ModelSpec& model, const SimState& state) {
  const Mat9 m = mass_matrix(model, state.q);
  const double kinetic = 0.5 * state.qd.dot(m * state.qd);
  const Poses poses = compute_poses(model, state.q);
  const auto bodies = body_params(model);
  double potential = 0.0;
  for (int i = 0; i < kNumBodies; ++i) {
    const Eigen::Vector2d com = poses.origin[i] + rot(poses.angle[i]) * bodies[i].com;
    potential += bodies[i].mass * model.gravity * com.y();
  }
  return kinetic + potential;
}

}  // namespace locoforge
