#pragma once

#include <array>
#include <cstdint>
#include <string>

#include "cablepaint/geometry.hpp"

namespace cablepaint {

// Physical description of the planar 4-cable robot; the single source of
// truth shared by the optimizer, runtime, and calibration.
//
// Conventions, fixed across the codebase:
//   - r_i = (pose o mount_i) - pulley_i points pulley -> mount.
//   - The cable pulls the end effector toward the pulley, i.e. along -r_i.
//   - Cable rate follows: ldot_i = rhat_i . (mount-point velocity), so for
//     pure translation ldot = -W_trans^T * pdot.
struct RobotModel {
  std::array<Vec2, 4> pulleys{Vec2(1.52, -1.22), Vec2(1.52, 1.22),
                              Vec2(-1.52, 1.22), Vec2(-1.52, -1.22)};
  std::array<Vec2, 4> mounts{Vec2(0.094, -0.061), Vec2(0.094, 0.061),
                             Vec2(-0.094, 0.061), Vec2(-0.094, -0.061)};

  double winch_radius = 0.0127;     // m
  double motor_inertia = 1.96e-4;   // kg m^2
  double friction_mu = 0.5;         // N, tanh-smoothed Coulomb term
  double friction_b = 0.1;          // N s/m, viscous term
  double mass = 1.2;                // kg
  double rot_inertia = 2.5e-3;      // kg m^2 about the body origin
  double gravity = 9.81;            // m/s^2, acting along -y

  double tension_min = 1.0;    // N
  double tension_max = 200.0;  // N
  double torque_min = 1.0 * 0.0127;  // N m
  double torque_max = 3.86;          // N m

  // Cable-feed friction force: f(l, ldot) = -(mu tanh(50 ldot) + b ldot).
  double cable_friction(double ldot) const {
    return -(friction_mu * std::tanh(50.0 * ldot) + friction_b * ldot);
  }
  double cable_friction_deriv(double ldot) const {
    double th = std::tanh(50.0 * ldot);
    return -(friction_mu * 50.0 * (1.0 - th * th) + friction_b);
  }

  double torque_mid() const { return 0.5 * (torque_min + torque_max); }

  // Bounding box of the pulley frame.
  void frame_bounds(Vec2& lo, Vec2& hi) const;

  // Throws ParseError when a physical invariant fails.
  void validate() const;
};

RobotModel load_robot_model(const std::string& path);
void save_robot_model(const RobotModel& model, const std::string& path);

// FNV-1a over the canonical serialization; recorded in schedule headers so a
// schedule can be matched to the model that produced it.
uint64_t model_hash(const RobotModel& model);

}  // namespace cablepaint
