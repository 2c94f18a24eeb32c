#pragma once

#include <array>

#include "cablepaint/geometry.hpp"
#include "cablepaint/robot_model.hpp"

namespace cablepaint {

struct CableGeometry {
  Vec2 r;      // pulley -> mount, world frame
  double length = 0.0;
  Vec2 rhat;   // r / |r|
  Vec2 mount_world;  // pose o mount, world frame
};

using CableGeometries = std::array<CableGeometry, 4>;

// Throws OptimizeError("degenerate cable ...") when a cable length drops
// below 1e-6 m (end effector at a pulley).
CableGeometries cable_vectors(const RobotModel& model, const PlanarPose& pose);

// ldot_i = rhat_i . (velocity of mount point i).
Vec4 cable_rates(const RobotModel& model, const PlanarPose& pose,
                 const PlanarTwist& twist);

// lddot_i = rhat_i . (acceleration of mount point i), keeping only the terms
// linear in the twist acceleration; the centripetal and sliding-direction
// contributions are dropped.
Vec4 cable_accels(const RobotModel& model, const PlanarPose& pose,
                  const PlanarAccel& accel);

// 3x4 wrench matrix, rows (torque, fx, fy). Column i is the unit wrench of
// cable i on the end effector: force dhat_i = -rhat_i toward the pulley,
// torque cross(R b_i, dhat_i) about the body origin.
Eigen::Matrix<double, 3, 4> wrench_matrix(const RobotModel& model,
                                          const PlanarPose& pose);

// Winch model: tau_i = t_i r - I lddot_i / r + f(l_i, ldot_i) r.
Vec4 winch_torque(const RobotModel& model, const Vec4& tension,
                  const Vec4& ldot, const Vec4& lddot);
Vec4 tension_from_torque(const RobotModel& model, const Vec4& torque,
                         const Vec4& ldot, const Vec4& lddot);

}  // namespace cablepaint
