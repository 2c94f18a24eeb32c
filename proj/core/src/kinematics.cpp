#include "cablepaint/kinematics.hpp"

#include <string>

#include "cablepaint/errors.hpp"

namespace cablepaint {

CableGeometries cable_vectors(const RobotModel& model,
                              const PlanarPose& pose) {
  CableGeometries cables;
  Mat2 rot = pose.rotation();
  for (int i = 0; i < 4; ++i) {
    CableGeometry& c = cables[i];
    c.mount_world = pose.p + rot * model.mounts[i];
    c.r = c.mount_world - model.pulleys[i];
    c.length = c.r.norm();
    if (c.length < 1e-6) {
      throw OptimizeError("degenerate cable " + std::to_string(i + 1) +
                          ": end effector at pulley");
    }
    c.rhat = c.r / c.length;
  }
  return cables;
}

Vec4 cable_rates(const RobotModel& model, const PlanarPose& pose,
                 const PlanarTwist& twist) {
  CableGeometries cables = cable_vectors(model, pose);
  Mat2 rot = pose.rotation();
  Vec4 ldot;
  for (int i = 0; i < 4; ++i) {
    Vec2 arm = rot * model.mounts[i];
    Vec2 mount_vel = twist.v + twist.omega * perp(arm);
    ldot[i] = cables[i].rhat.dot(mount_vel);
  }
  return ldot;
}

Vec4 cable_accels(const RobotModel& model, const PlanarPose& pose,
                  const PlanarAccel& accel) {
  CableGeometries cables = cable_vectors(model, pose);
  Mat2 rot = pose.rotation();
  Vec4 lddot;
  for (int i = 0; i < 4; ++i) {
    Vec2 arm = rot * model.mounts[i];
    Vec2 mount_acc = accel.a + accel.alpha * perp(arm);
    lddot[i] = cables[i].rhat.dot(mount_acc);
  }
  return lddot;
}

Eigen::Matrix<double, 3, 4> wrench_matrix(const RobotModel& model,
                                          const PlanarPose& pose) {
  CableGeometries cables = cable_vectors(model, pose);
  Mat2 rot = pose.rotation();
  Eigen::Matrix<double, 3, 4> w;
  for (int i = 0; i < 4; ++i) {
    Vec2 dhat = -cables[i].rhat;
    Vec2 arm = rot * model.mounts[i];
    w(0, i) = cross2(arm, dhat);
    w(1, i) = dhat.x();
    w(2, i) = dhat.y();
  }
  return w;
}

Vec4 winch_torque(const RobotModel& model, const Vec4& tension,
                  const Vec4& ldot, const Vec4& lddot) {
  Vec4 tau;
  double r = model.winch_radius;
  for (int i = 0; i < 4; ++i) {
    tau[i] = tension[i] * r - model.motor_inertia * lddot[i] / r +
             model.cable_friction(ldot[i]) * r;
  }
  return tau;
}

Vec4 tension_from_torque(const RobotModel& model, const Vec4& torque,
                         const Vec4& ldot, const Vec4& lddot) {
  Vec4 t;
  double r = model.winch_radius;
  for (int i = 0; i < 4; ++i) {
    t[i] = torque[i] / r + model.motor_inertia * lddot[i] / (r * r) -
           model.cable_friction(ldot[i]);
  }
  return t;
}

}  // namespace cablepaint
