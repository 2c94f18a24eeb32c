#pragma once

#include <array>

#include "cablepaint/kinematics.hpp"

namespace cablepaint {

// Minimum-norm tension vector balancing gravity at `pose`:
//   min |t|^2  s.t.  W_trans t = (0, m g),  t in [t_min, t_max].
// Residual of the returned solution is <= 1e-9 N. Throws OptimizeError
// when no tension vector within limits balances gravity.
Vec4 static_tensions(const RobotModel& model, const PlanarPose& pose);

bool statically_feasible(const RobotModel& model, const PlanarPose& pose);

// Newton-Euler for the planar body under the given cable tensions plus
// gravity; G = diag(I_zz, m, m).
PlanarAccel rigid_body_accel(const RobotModel& model, const PlanarPose& pose,
                             const PlanarTwist& twist, const Vec4& tensions);

// Coupled winch + cable + rigid-body solve. Cables whose tension comes out
// negative are clamped to zero and removed from the solve; a slack winch
// spins according to its own inertia and friction.
struct ForwardDynamics {
  PlanarAccel accel;
  Vec4 tensions = Vec4::Zero();
  Vec4 lddot = Vec4::Zero();
  std::array<bool, 4> taut{true, true, true, true};
};

ForwardDynamics forward_dynamics(const RobotModel& model,
                                 const PlanarPose& pose,
                                 const PlanarTwist& twist, const Vec4& torque);

// Reduced model used by the trajectory optimizer: the end effector held
// vertical (theta = 0), state x = (px, py, vx, vy), controls the four winch
// torques. Same winch/cable/slack physics as forward_dynamics with the
// rotational row dropped.
struct PlanarDynamics {
  Vec2 accel = Vec2::Zero();
  Vec4 tensions = Vec4::Zero();
  Vec4 lddot = Vec4::Zero();
  std::array<bool, 4> taut{true, true, true, true};
};

PlanarDynamics planar_accel(const RobotModel& model, const Vec2& p,
                            const Vec2& v, const Vec4& torque);

// One dt step of the reduced model, semi-implicit Euler (velocity first):
//   v' = v + dt a(p, v, u);  p' = p + dt v'.
Vec4 planar_step(const RobotModel& model, const Vec4& x, const Vec4& u,
                 double dt);

// Analytic Jacobians A = df/dx, B = df/du of planar_step, holding the
// taut/slack set fixed at the evaluation point.
void linearize_dynamics(const RobotModel& model, const Vec4& x, const Vec4& u,
                        double dt, Mat4& A, Mat4& B);

// Peak end-effector speed and acceleration a motor can deliver through the
// winch: v = omega r, a = tau / (m r + I / r).
struct Capability {
  double v_max = 0.0;
  double a_max = 0.0;
};

Capability capability(const RobotModel& model, double motor_omega_max,
                      double motor_torque_max, double payload_mass);

}  // namespace cablepaint
