// Copyright 2026 The Locoforge Authors
// Licensed under the Apache License, Version 2.0.

#include <doctest.h>

#include <cmath>

#include "locoforge/rng.hpp"
#include "locoforge/sim.hpp"

using namespace locoforge;

namespace {

uint16_t lock_all_except(std::initializer_list<int> free_coords) {
  uint16_t mask = (1u << kNumCoords) - 1u;
  for (int c : free_coords) mask &= static_cast<uint16_t>(~(1u << c));
  return mask;
}

Vec9 random_pose(Rng& rng) {
  Vec9 q;
  q << rng.uniform(-1, 1), rng.uniform(0.3, 0.9), rng.uniform(-0.5, 0.5), rng.uniform(-1, 1),
      rng.uniform(-2, 2), rng.uniform(-3, 3), rng.uniform(-1.5, 1.5), rng.uniform(-2, 2),
      rng.uniform(-2, 2);
  return q;
}

}  // namespace

TEST_CASE("free fall matches the closed-form semi-implicit displacement") {
  ModelSpec model;
  model.contacts_enabled = false;
  model.arm_kp = 0.0;
  model.arm_kd = 0.0;

  SimState s;
  s.q[kBaseZ] = 2.0;
  s.q[kHip] = 0.4;
  s.q[kKnee] = -0.8;
  const Vec9 q0 = s.q;

  const double dt = 1e-3;
  const int n = 100;
  for (int i = 0; i < n; ++i) s = step(model, s, {}, dt);

  // Semi-implicit Euler from rest: dz = -g dt^2 n(n+1)/2.
  const double expected = -model.gravity * dt * dt * n * (n + 1) / 2.0;
  CHECK(s.q[kBaseZ] - q0[kBaseZ] == doctest::Approx(expected).epsilon(1e-10));
  for (int i = 0; i < kNumCoords; ++i) {
    if (i == kBaseZ) continue;
    CHECK(std::abs(s.q[i] - q0[i]) < 1e-9);
  }
}

TEST_CASE("single-joint reduction obeys the pendulum equation") {
  ModelSpec model;
  model.contacts_enabled = false;
  model.arm_mass[1] = model.arm_mass[2] = 0.0;
  model.arm_inertia[1] = model.arm_inertia[2] = 0.0;
  model.locked_joints = lock_all_except({kArm1});

  const double m = model.arm_mass[0], c = model.arm_com[0];
  const double pivot_inertia = model.arm_inertia[0] + m * c * c;

  for (double q1 : {0.3, -1.0, 2.0}) {
    for (double qd1 : {0.0, 1.7}) {
      SimState s;
      s.q[kArm1] = q1;
      s.qd[kArm1] = qd1;
      const Vec9 qdd = forward_dynamics(model, s, Vec6::Zero(), {});
      // Angle is measured from the horizontal +x axis.
      const double expected = -(m * model.gravity * c / pivot_inertia) * std::cos(q1);
      CHECK(qdd[kArm1] == doctest::Approx(expected).epsilon(1e-12));
      for (int i = 0; i < kNumCoords; ++i)
        if (i != kArm1) CHECK(qdd[i] == 0.0);
    }
  }
}

TEST_CASE("mass matrix is symmetric and consistent with inverse dynamics") {
  ModelSpec model;
  model.contacts_enabled = false;
  Rng rng(31);
  for (int trial = 0; trial < 5; ++trial) {
    const Vec9 q = random_pose(rng);
    const Mat9 m = mass_matrix(model, q);
    CHECK((m - m.transpose()).norm() == 0.0);

    // Column i of M equals ID(q, 0, e_i) minus the gravity term ID(q, 0, 0).
    const Vec9 gravity_term = inverse_dynamics(model, q, Vec9::Zero(), Vec9::Zero());
    for (int i = 0; i < kNumCoords; ++i) {
      Vec9 e = Vec9::Zero();
      e[i] = 1.0;
      const Vec9 col = inverse_dynamics(model, q, Vec9::Zero(), e) - gravity_term;
      CHECK((col - m.col(i)).lpNorm<Eigen::Infinity>() < 1e-10);
    }

    // Eigenvalues are positive.
    const Eigen::SelfAdjointEigenSolver<Mat9> eig(m);
    CHECK(eig.eigenvalues().minCoeff() > 0.0);
  }
}

TEST_CASE("energy drift shrinks linearly with the step size") {
  ModelSpec model;
  model.contacts_enabled = false;
  model.arm_kp = 0.0;
  model.arm_kd = 0.0;

  SimState init;
  init.q << 0, 1.5, 0.1, 0.3, -0.5, 0, 0.4, 0.5, -0.3;
  init.qd << 0.2, 0, 0.3, 0.5, -0.4, 1.0, 0.6, -0.5, 0.4;

  auto max_drift = [&](double dt, double horizon) {
    SimState s = init;
    const double e0 = mechanical_energy(model, s);
    double worst = 0.0;
    for (int i = 0; i < static_cast<int>(horizon / dt); ++i) {
      s = step(model, s, {}, dt);
      worst = std::max(worst, std::abs(mechanical_energy(model, s) - e0));
    }
    return worst;
  };

  const double coarse = max_drift(1e-3, 0.5);
  const double fine = max_drift(5e-4, 0.5);
  CHECK(coarse < 0.5);              // joules, small against ~200 J total
  CHECK(fine < 0.70 * coarse);      // first-order integrator halves with dt
}

TEST_CASE("driven wheel approaches pure rolling after the torque is removed") {
  ModelSpec model;
  model.locked_joints = lock_all_except({kBaseX, kBaseZ, kWheel});

  const double total_mass = model.base_mass + model.thigh_mass + model.shank_mass +
                            model.wheel_mass + model.arm_mass[0] + model.arm_mass[1] +
                            model.arm_mass[2];
  const double wheel_drop = 0.08 + model.thigh_length + model.shank_length;  // hip mount + leg
  const double settle = total_mass * model.gravity / model.contact_stiffness;

  SimState s;
  s.q[kBaseZ] = wheel_drop + model.wheel_radius - settle;

  ActuationInput drive;
  drive.leg_torques << 0, 0, 1.0;
  for (int i = 0; i < 1000; ++i) s = step(model, s, drive, 1e-3);
  CHECK(s.q[kBaseX] > 0.05);
  CHECK(s.qd[kBaseX] > 0.2);

  for (int i = 0; i < 300; ++i) s = step(model, s, {}, 1e-3);
  const double slip = s.qd[kBaseX] - model.wheel_radius * s.qd[kWheel];
  CHECK(std::abs(slip) < 1e-3 * std::max(1.0, std::abs(s.qd[kBaseX])));
  CHECK(s.qd[kBaseX] > 0.2);
}

TEST_CASE("arm PD settles near its targets") {
  ModelSpec model;
  model.contacts_enabled = false;
  model.locked_joints = lock_all_except({kArm1, kArm2, kArm3});

  SimState s;
  ActuationInput input;
  input.arm_targets << 0.3, -0.4, 0.2;
  for (int i = 0; i < 1500; ++i) s = step(model, s, input, 1e-3);
  for (int j = 0; j < 3; ++j) {
    CHECK(std::abs(s.q[kArm1 + j] - input.arm_targets[j]) < 0.12);
    CHECK(std::abs(s.qd[kArm1 + j]) < 0.05);
  }
}

TEST_CASE("zero-pose kinematics match hand-computed offsets") {
  ModelSpec model;
  Vec9 q = Vec9::Zero();
  q[kBaseX] = 1.3;
  q[kBaseZ] = 0.9;

  KinematicsResult kin = forward_kinematics(model, q);
  CHECK((kin.p_ee_base - Eigen::Vector2d(0.75, 0.10)).norm() < 1e-12);
  CHECK((kin.p_ee_world - Eigen::Vector2d(2.05, 1.00)).norm() < 1e-12);
  CHECK((kin.wheel_center() - Eigen::Vector2d(1.3, 0.32)).norm() < 1e-12);
  CHECK(kin.ee_angle_base == 0.0);
  CHECK((kin.arm_centroid - Eigen::Vector2d(1.3 + 0.375, 1.0)).norm() < 1e-12);
  const double base_centroid_z = 0.9 + (-0.205 - 0.455 - 0.58) / 13.0;
  CHECK((kin.base_centroid - Eigen::Vector2d(1.3, base_centroid_z)).norm() < 1e-12);

  // Pitch rotates base-frame offsets into the world.
  q[kPitch] = M_PI / 2.0;
  kin = forward_kinematics(model, q);
  CHECK((kin.p_ee_world - Eigen::Vector2d(1.3 - 0.10, 0.9 + 0.75)).norm() < 1e-12);
  CHECK((kin.p_ee_base - Eigen::Vector2d(0.75, 0.10)).norm() < 1e-12);

  // Arm joint angles add up in the end-effector orientation.
  q[kPitch] = 0.0;
  q[kArm1] = 0.2;
  q[kArm2] = 0.3;
  q[kArm3] = -0.1;
  kin = forward_kinematics(model, q);
  CHECK(kin.ee_angle_base == doctest::Approx(0.4).epsilon(1e-12));
}

TEST_CASE("wheel penalty law evaluates exactly") {
  ModelSpec model;
  model.contact_stiffness = 1e5;
  model.contact_damping = 0.0;

  SimState s;
  s.q[kBaseZ] = 0.58 + model.wheel_radius - 1e-3;  // wheel 1 mm into the ground
  const ContactSet contacts = contact_forces(model, s);
  REQUIRE(contacts.forces.size() == 1);
  CHECK(contacts.forces[0].force.y() == doctest::Approx(100.0).epsilon(1e-12));
  CHECK(contacts.forces[0].force.x() == 0.0);

  // Separating faster than the spring pushes: no sticking, force clamps to 0.
  s.qd[kBaseZ] = 10.0;
  model.contact_damping = 300.0;
  const ContactSet sep = contact_forces(model, s);
  for (const auto& f : sep.forces) CHECK(f.force.y() >= 0.0);
}

TEST_CASE("pitch rotation by pi reflects the gripper through the base") {
  ModelSpec model;
  Vec9 q = Vec9::Zero();
  q[kBaseZ] = 1.0;
  q[kArm1] = 0.4;
  q[kArm2] = -0.2;
  const KinematicsResult a = forward_kinematics(model, q);
  q[kPitch] = M_PI;
  const KinematicsResult b = forward_kinematics(model, q);
  const Eigen::Vector2d base(0.0, 1.0);
  CHECK((b.p_ee_world - (2.0 * base - a.p_ee_world)).norm() < 1e-12);
}

TEST_CASE("centroids match an independent recomputation from link poses") {
  ModelSpec model;
  Rng rng(77);
  for (int trial = 0; trial < 3; ++trial) {
    const Vec9 q = random_pose(rng);
    const KinematicsResult kin = forward_kinematics(model, q);

    auto rotate = [](double a, const Eigen::Vector2d& v) {
      return Eigen::Vector2d(std::cos(a) * v.x() - std::sin(a) * v.y(),
                             std::sin(a) * v.x() + std::cos(a) * v.y());
    };
    const double arm_mass_sum = model.arm_mass[0] + model.arm_mass[1] + model.arm_mass[2];
    Eigen::Vector2d arm = Eigen::Vector2d::Zero();
    for (int l = 0; l < 3; ++l) {
      const LinkPose& pose = kin.links[kBodyArm1 + l];
      arm += model.arm_mass[l] *
             (pose.origin + rotate(pose.angle, {model.arm_com[l], 0.0}));
    }
    CHECK((kin.arm_centroid - arm / arm_mass_sum).norm() < 1e-12);

    Eigen::Vector2d base = model.base_mass * kin.links[kBodyBase].origin;
    base += model.thigh_mass * (kin.links[kBodyThigh].origin +
                                rotate(kin.links[kBodyThigh].angle, {0.0, -model.thigh_com}));
    base += model.shank_mass * (kin.links[kBodyShank].origin +
                                rotate(kin.links[kBodyShank].angle, {0.0, -model.shank_com}));
    base += model.wheel_mass * kin.links[kBodyWheel].origin;
    const double base_mass_sum =
        model.base_mass + model.thigh_mass + model.shank_mass + model.wheel_mass;
    CHECK((kin.base_centroid - base / base_mass_sum).norm() < 1e-12);
  }
}

TEST_CASE("finite-difference kinematics match propagated velocities") {
  ModelSpec model;
  Rng rng(55);
  const Vec9 q = random_pose(rng);
  Vec9 qd;
  for (int i = 0; i < kNumCoords; ++i) qd[i] = rng.uniform(-1.0, 1.0);

  const double h = 1e-6;
  const KinematicsResult k0 = forward_kinematics(model, q);
  const KinematicsResult k1 = forward_kinematics(model, Vec9(q + h * qd));
  const Eigen::Vector2d fd = (k1.p_ee_world - k0.p_ee_world) / h;
  const Eigen::Vector2d analytic = point_velocity(model, q, qd, kBodyArm3, k0.p_ee_world);
  CHECK((fd - analytic).norm() < 1e-6);
}

TEST_CASE("passive pendulum energy drift stays under half a percent over 10 s") {
  ModelSpec model;
  model.contacts_enabled = false;
  model.arm_kp = 0.0;
  model.arm_kd = 0.0;
  model.arm_mass[1] = model.arm_mass[2] = 0.0;
  model.arm_inertia[1] = model.arm_inertia[2] = 0.0;
  model.locked_joints = lock_all_except({kArm1});

  SimState s;
  s.q[kArm1] = 0.9;
  const double e0 = mechanical_energy(model, s);
  // Energy scale for the relative bound: swing amplitude above the minimum.
  const double m = model.arm_mass[0], c = model.arm_com[0];
  const double scale = 2.0 * m * model.gravity * c;
  double worst = 0.0;
  for (int i = 0; i < 10000; ++i) {
    s = step(model, s, {}, 1e-3);
    worst = std::max(worst, std::abs(mechanical_energy(model, s) - e0));
  }
  CHECK(worst / scale < 0.005);
}

TEST_CASE("point velocities and the rolling constraint") {
  ModelSpec model;
  Vec9 q = Vec9::Zero();
  q[kBaseZ] = 0.58 + model.wheel_radius;  // wheel center at height r

  Vec9 qd = Vec9::Zero();
  qd[kWheel] = 10.0;
  // Positive wheel speed sweeps the contact point backward.
  const Eigen::Vector2d bottom(0.0, 0.0);
  Eigen::Vector2d v = point_velocity(model, q, qd, kBodyWheel, bottom);
  CHECK((v - Eigen::Vector2d(-1.0, 0.0)).norm() < 1e-12);

  // Matching base speed cancels it: rolling without slip.
  qd[kBaseX] = model.wheel_radius * qd[kWheel];
  v = point_velocity(model, q, qd, kBodyWheel, bottom);
  CHECK(v.norm() < 1e-12);

  // Pure translation moves every material point at the base velocity.
  qd.setZero();
  qd[kBaseX] = 2.0;
  const KinematicsResult kin = forward_kinematics(model, q);
  v = point_velocity(model, q, qd, kBodyArm3, kin.p_ee_world);
  CHECK((v - Eigen::Vector2d(2.0, 0.0)).norm() < 1e-12);
}

TEST_CASE("arm links below ground report upward contact forces") {
  ModelSpec model;
  SimState s;
  s.q[kBaseZ] = 0.0;
  s.q[kArm1] = -1.9;  // arm points steeply down, all tips below the ground

  const ContactSet contacts = contact_forces(model, s);
  CHECK(contacts.forces.size() >= 3);
  for (int l = 0; l < kNumArmLinks; ++l) CHECK(contacts.link_forces[l].y() > 0.0);
}

TEST_CASE("folded arm collides with the base capsule") {
  ModelSpec model;
  SimState s;
  s.q[kBaseZ] = 1.0;  // well above ground
  s.q[kArm2] = 2.4;
  s.q[kArm3] = 2.4;

  const ContactSet contacts = contact_forces(model, s);
  REQUIRE(!contacts.forces.empty());
  CHECK(contacts.link_forces[0].norm() == 0.0);
  CHECK(contacts.link_forces[2].norm() > 0.0);
  // The reaction pushes the distal link away from the base axis.
  CHECK(contacts.link_forces[2].x() > 0.0);

  // Away from both ground and base there is no contact at all.
  SimState clear;
  clear.q[kBaseZ] = 1.0;
  CHECK(contact_forces(model, clear).forces.empty());
}

TEST_CASE("stepping is deterministic") {
  ModelSpec model;
  auto rollout = [&]() {
    SimState s;
    s.q[kBaseZ] = 0.68;
    s.q[kHip] = 0.4;
    s.q[kKnee] = -0.8;
    for (int i = 0; i < 200; ++i) {
      ActuationInput in;
      in.leg_torques << 2.0 * std::sin(0.01 * i), -1.5 * std::cos(0.02 * i), 0.5;
      in.arm_targets << 0.1, 0.2, -0.1;
      s = step(model, s, in, 1e-3);
    }
    return s;
  };
  const SimState a = rollout();
  const SimState b = rollout();
  CHECK(a.q == b.q);
  CHECK(a.qd == b.qd);
  CHECK(a.applied_torques == b.applied_torques);
}

TEST_CASE("invalid steps and divergence are reported") {
  ModelSpec model;
  SimState s;
  CHECK_THROWS_AS(step(model, s, {}, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(step(model, s, {}, 0.02), std::invalid_argument);

  // Quadratic velocity terms overflow once the pitch rate is this large.
  s.qd[kPitch] = 1e160;
  CHECK_THROWS_AS(step(model, s, {}, 1e-3), SimDivergence);

  ModelSpec bad;
  bad.q_lower[0] = 1.0;
  bad.q_upper[0] = -1.0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  ModelSpec bad2;
  bad2.wheel_radius = 0.0;
  CHECK_THROWS_AS(bad2.validate(), std::invalid_argument);
}
