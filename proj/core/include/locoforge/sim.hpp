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
#ifndef LOCOFORGE_SIM_HPP
#define LOCOFORGE_SIM_HPP

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace locoforge {

// The sagittal plane is spanned by the world x axis (horizontal) and the
// world z axis (up). Planar points and vectors are Eigen::Vector2d with
// components (x, z); the ground is the line z = 0.

using Vec9 = Eigen::Matrix<double, 9, 1>;
using Mat9 = Eigen::Matrix<double, 9, 9>;
using Vec6 = Eigen::Matrix<double, 6, 1>;

/// Generalized-coordinate layout of the planar robot.
enum Coord : int {
  kBaseX = 0,   // base horizontal position (m)
  kBaseZ = 1,   // base height (m)
  kPitch = 2,   // base pitch (rad)
  kHip = 3,     // hip joint (rad)
  kKnee = 4,    // knee joint (rad)
  kWheel = 5,   // wheel spin (rad); positive spin rolls the base toward +x
  kArm1 = 6,    // arm joints (rad)
  kArm2 = 7,
  kArm3 = 8,
};
constexpr int kNumCoords = 9;

/// Body indexing shared by kinematics and dynamics. Bodies 0 and 1 are the
/// massless virtual carriers of the base x/z translations.
enum Body : int {
  kBodyBase = 2,
  kBodyThigh = 3,
  kBodyShank = 4,
  kBodyWheel = 5,
  kBodyArm1 = 6,
  kBodyArm2 = 7,
  kBodyArm3 = 8,
};
constexpr int kNumBodies = 9;
constexpr int kNumArmLinks = 3;
constexpr int kNumActuators = 6;  // hip, knee, wheel, arm 1-3

/// Physical description of the planar wheel-leg-arm robot. All defaults are
/// documented desk-scale values; every field can be overridden from config.
struct ModelSpec {
  // Base body (frame origin at the body's reference point).
  double base_mass = 10.0;
  double base_inertia = 0.15;
  Eigen::Vector2d base_com{0.0, 0.0};

  // Leg: thigh and shank extend along -z at zero joint angle.
  double thigh_mass = 1.0, thigh_length = 0.25, thigh_com = 0.125, thigh_inertia = 0.0052;
  double shank_mass = 1.0, shank_length = 0.25, shank_com = 0.125, shank_inertia = 0.0052;
  double wheel_mass = 1.0, wheel_radius = 0.10, wheel_inertia = 0.005;

  // Arm: three links extending along +x at zero joint angles.
  std::array<double, 3> arm_mass{0.5, 0.5, 0.5};
  std::array<double, 3> arm_length{0.25, 0.25, 0.25};
  std::array<double, 3> arm_com{0.125, 0.125, 0.125};
  std::array<double, 3> arm_inertia{0.0026, 0.0026, 0.0026};

  // Mount points in the base frame.
  Eigen::Vector2d hip_offset{0.0, -0.08};
  Eigen::Vector2d arm_offset{0.0, 0.10};

  // Joint limits, ordered [hip, knee, arm1, arm2, arm3].
  std::array<double, 5> q_lower{-1.2, -2.4, -1.9, -2.4, -2.4};
  std::array<double, 5> q_upper{1.2, 2.4, 1.9, 2.4, 2.4};

  // Actuator torque limits, ordered [hip, knee, wheel, arm1, arm2, arm3].
  std::array<double, 6> torque_limit{40.0, 40.0, 8.0, 10.0, 10.0, 10.0};

  // Penalty contact model.
  double contact_stiffness = 4.0e4;   // N/m
  double contact_damping = 300.0;     // N s/m
  double friction_coeff = 1.0;
  double tangential_gain = 400.0;     // N s/m, viscous pre-cone tangential force
  double base_capsule_radius = 0.13;
  double base_capsule_halflen = 0.10;
  double arm_link_radius = 0.03;

  // Low-level arm position controller.
  double arm_kp = 60.0;
  double arm_kd = 3.0;

  double gravity = 9.81;

  bool contacts_enabled = true;
  // Bitmask over Coord; locked coordinates are frozen (tests use this to
  // reduce the robot to closed-form systems).
  uint16_t locked_joints = 0;

  void validate() const;
  bool is_locked(int coord) const { return (locked_joints >> coord) & 1; }
};

/// Ground-truth physical state.
struct SimState {
  Vec9 q = Vec9::Zero();
  Vec9 qd = Vec9::Zero();
  double time = 0.0;
  // Most recent external contact force on each arm link, world frame.
  std::array<Eigen::Vector2d, kNumArmLinks> link_forces{
      Eigen::Vector2d::Zero(), Eigen::Vector2d::Zero(), Eigen::Vector2d::Zero()};
  // Last actuator torques [hip, knee, wheel, arm1..3].
  Vec6 applied_torques = Vec6::Zero();

  bool all_finite() const {
    if (!q.allFinite() || !qd.allFinite() || !applied_torques.allFinite()) return false;
    for (const auto& f : link_forces)
      if (!f.allFinite()) return false;
    return true;
  }
};

/// Policy-visible actuation: direct torques for the leg and wheel, position
/// targets for the arm's low-level PD loop.
struct ActuationInput {
  Eigen::Vector3d leg_torques = Eigen::Vector3d::Zero();  // hip, knee, wheel
  Eigen::Vector3d arm_targets = Eigen::Vector3d::Zero();  // arm joint positions
};

struct LinkPose {
  double angle = 0.0;           // world orientation of the link frame
  Eigen::Vector2d origin{0, 0};  // world position of the link frame origin
};

struct KinematicsResult {
  std::array<LinkPose, kNumBodies> links;  // indices per Body (0,1 mirror the base)
  Eigen::Vector2d p_ee_world{0, 0};
  Eigen::Vector2d p_ee_base{0, 0};   // gripper position in the base frame
  double ee_angle_world = 0.0;
  double ee_angle_base = 0.0;
  Eigen::Vector2d arm_centroid{0, 0};   // mass-weighted, world frame
  Eigen::Vector2d base_centroid{0, 0};  // base + leg + wheel, world frame

  const Eigen::Vector2d& wheel_center() const { return links[kBodyWheel].origin; }
};

/// One world-frame contact force applied at a world point of a body.
struct ContactForce {
  int body = -1;
  Eigen::Vector2d point{0, 0};
  Eigen::Vector2d force{0, 0};
};

struct ContactSet {
  std::vector<ContactForce> forces;
  std::array<Eigen::Vector2d, kNumArmLinks> link_forces{
      Eigen::Vector2d::Zero(), Eigen::Vector2d::Zero(), Eigen::Vector2d::Zero()};
};

/// Thrown when integration produces a non-finite state; the episode layer
/// treats it as a failure termination.
class SimDivergence : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// World pose of every link plus gripper pose and the two centroids used by
/// the stability constraint.
KinematicsResult forward_kinematics(const ModelSpec& model, const Vec9& q);

/// Spatial velocity (omega, vx, vy) of each body expressed in its own frame.
std::array<Eigen::Vector3d, kNumBodies> body_spatial_velocities(const ModelSpec& model,
                                                                const Vec9& q, const Vec9& qd);

/// World-frame velocity of a world-fixed point currently coinciding with a
/// material point of `body`.
Eigen::Vector2d point_velocity(const ModelSpec& model, const Vec9& q, const Vec9& qd,
                               int body, const Eigen::Vector2d& point_world);

/// Recursive Newton-Euler inverse dynamics: generalized forces that realize
/// `qdd` at (q, qd) under gravity and the given external contact forces.
Vec9 inverse_dynamics(const ModelSpec& model, const Vec9& q, const Vec9& qd, const Vec9& qdd,
                      const ContactSet* contacts = nullptr);

/// Joint-space mass matrix assembled by the composite-rigid-body method.
Mat9 mass_matrix(const ModelSpec& model, const Vec9& q);

/// Penalty contact forces: wheel-ground, arm-link-ground, and arm-link vs
/// base-capsule clearance. Per-arm-link sums are reported for the collision
/// cost.
ContactSet contact_forces(const ModelSpec& model, const SimState& state);

/// Low-level arm PD: tau_i = kp (q*_i - q_i) - kd qd_i, saturated.
Eigen::Vector3d arm_pd_torque(const ModelSpec& model, const Eigen::Vector3d& targets,
                              const Eigen::Vector3d& q_arm, const Eigen::Vector3d& qd_arm);

/// Solves M(q) qdd = tau - bias(q, qd) + contact terms. `actuator_torques`
/// is the saturated [hip, knee, wheel, arm1..3] vector.
Vec9 forward_dynamics(const ModelSpec& model, const SimState& state, const Vec6& actuator_torques,
                      const ContactSet& contacts);

/// One semi-implicit Euler step of length dt (0 < dt <= 0.01). Throws
/// SimDivergence if the next state is non-finite.
SimState step(const ModelSpec& model, const SimState& state, const ActuationInput& input,
              double dt);

/// Kinetic plus gravitational potential energy; used by the energy-drift
/// checks.
double mechanical_energy(const ModelSpec& model, const SimState& state);

}  // namespace locoforge

#endif  // LOCOFORGE_SIM_HPP
