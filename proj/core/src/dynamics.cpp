#include "cablepaint/dynamics.hpp"

#include <cmath>
#include <limits>
#include <optional>

#include <Eigen/Dense>

#include "cablepaint/errors.hpp"

namespace cablepaint {

namespace {

// Nearest point to the origin in the polygon {z : A z <= b}, or nullopt when
// the polygon is empty. Exact enumeration: interior, edge projections, and
// vertices. A has one row per half-plane; rows need not be normalized.
std::optional<Vec2> nearest_point_in_polygon(
    const Eigen::Matrix<double, Eigen::Dynamic, 2>& A,
    const Eigen::VectorXd& b) {
  const double tol = 1e-9;
  const int m = static_cast<int>(A.rows());
  auto feasible = [&](const Vec2& z) {
    for (int i = 0; i < m; ++i) {
      double scale = std::max(1.0, A.row(i).norm());
      if (A.row(i).dot(z) > b[i] + tol * scale) return false;
    }
    return true;
  };

  if (feasible(Vec2::Zero())) return Vec2::Zero();

  std::optional<Vec2> best;
  double best_norm2 = std::numeric_limits<double>::infinity();
  auto consider = [&](const Vec2& z) {
    if (!feasible(z)) return;
    double n2 = z.squaredNorm();
    if (n2 < best_norm2) {
      best_norm2 = n2;
      best = z;
    }
  };

  for (int i = 0; i < m; ++i) {
    double nn = A.row(i).squaredNorm();
    if (nn < 1e-18) continue;
    consider(A.row(i).transpose() * (b[i] / nn));
    for (int j = i + 1; j < m; ++j) {
      Mat2 pair;
      pair << A(i, 0), A(i, 1), A(j, 0), A(j, 1);
      double det = pair.determinant();
      if (std::abs(det) < 1e-12 * A.row(i).norm() * A.row(j).norm()) continue;
      consider(pair.inverse() * Vec2(b[i], b[j]));
    }
  }
  return best;
}

}  // namespace

Vec4 static_tensions(const RobotModel& model, const PlanarPose& pose) {
  Eigen::Matrix<double, 3, 4> w3 = wrench_matrix(model, pose);
  Eigen::Matrix<double, 2, 4> w = w3.bottomRows<2>();
  Vec2 rhs(0.0, model.mass * model.gravity);

  Eigen::JacobiSVD<Eigen::Matrix<double, 2, 4>> svd(
      w, Eigen::ComputeFullU | Eigen::ComputeFullV);
  if (svd.rank() < 2) {
    throw OptimizeError("static_tensions: rank-deficient wrench matrix");
  }
  // Minimum-norm particular solution lies in the row space of w, so the
  // objective splits: |t_p + N z|^2 = |t_p|^2 + |z|^2.
  Vec4 t_p = svd.solve(rhs);
  Eigen::Matrix<double, 4, 2> nullsp = svd.matrixV().rightCols<2>();

  Eigen::Matrix<double, Eigen::Dynamic, 2> a(8, 2);
  Eigen::VectorXd b(8);
  for (int i = 0; i < 4; ++i) {
    a.row(2 * i) = nullsp.row(i);
    b[2 * i] = model.tension_max - t_p[i];
    a.row(2 * i + 1) = -nullsp.row(i);
    b[2 * i + 1] = t_p[i] - model.tension_min;
  }
  std::optional<Vec2> z = nearest_point_in_polygon(a, b);
  if (!z) {
    throw OptimizeError("static_tensions: infeasible pose");
  }
  Vec4 t = t_p + nullsp * (*z);
  t = t.cwiseMax(model.tension_min).cwiseMin(model.tension_max);
  if ((w * t - rhs).norm() > 1e-9) {
    throw OptimizeError("static_tensions: equilibrium residual too large");
  }
  return t;
}

bool statically_feasible(const RobotModel& model, const PlanarPose& pose) {
  try {
    static_tensions(model, pose);
    return true;
  } catch (const OptimizeError&) {
    return false;
  }
}

PlanarAccel rigid_body_accel(const RobotModel& model, const PlanarPose& pose,
                             const PlanarTwist& twist, const Vec4& tensions) {
  (void)twist;  // planar body about its COM has no velocity-product terms
  Eigen::Matrix<double, 3, 4> w = wrench_matrix(model, pose);
  Vec3 wrench = w * tensions + Vec3(0.0, 0.0, -model.mass * model.gravity);
  PlanarAccel out;
  out.alpha = wrench[0] / model.rot_inertia;
  out.a = wrench.tail<2>() / model.mass;
  return out;
}

ForwardDynamics forward_dynamics(const RobotModel& model,
                                 const PlanarPose& pose,
                                 const PlanarTwist& twist,
                                 const Vec4& torque) {
  const double r = model.winch_radius;
  const double rho = model.motor_inertia / (r * r);
  Eigen::Matrix<double, 3, 4> w = wrench_matrix(model, pose);
  Vec4 ldot = cable_rates(model, pose, twist);
  Vec4 fric;
  for (int i = 0; i < 4; ++i) fric[i] = model.cable_friction(ldot[i]);

  Mat3 inertia = Mat3::Zero();
  inertia.diagonal() << model.rot_inertia, model.mass, model.mass;
  Vec3 gravity(0.0, 0.0, -model.mass * model.gravity);

  ForwardDynamics out;
  // Drop the most negative tension and re-solve until all remaining cables
  // carry nonnegative tension.
  while (true) {
    Mat3 sys = inertia;
    Vec3 rhs = gravity;
    for (int i = 0; i < 4; ++i) {
      if (!out.taut[i]) continue;
      Vec3 wi = w.col(i);
      sys += rho * wi * wi.transpose();
      rhs += (torque[i] / r - fric[i]) * wi;
    }
    Eigen::LDLT<Mat3> ldlt(sys);
    if (ldlt.info() != Eigen::Success) {
      throw OptimizeError("forward_dynamics: singular coupled system");
    }
    Vec3 vdot = ldlt.solve(rhs);
    if ((sys * vdot - rhs).norm() > 1e-9 * std::max(1.0, rhs.norm())) {
      throw OptimizeError("forward_dynamics: singular coupled system");
    }

    int worst = -1;
    double worst_t = 0.0;
    for (int i = 0; i < 4; ++i) {
      if (!out.taut[i]) continue;
      double lddot_i = -w.col(i).dot(vdot);
      double t_i = torque[i] / r + rho * lddot_i - fric[i];
      out.lddot[i] = lddot_i;
      out.tensions[i] = t_i;
      if (t_i < worst_t) {
        worst_t = t_i;
        worst = i;
      }
    }
    if (worst < 0) {
      out.accel.alpha = vdot[0];
      out.accel.a = vdot.tail<2>();
      break;
    }
    out.taut[worst] = false;
  }

  for (int i = 0; i < 4; ++i) {
    if (out.taut[i]) continue;
    out.tensions[i] = 0.0;
    // Slack winch spins on its own: 0 = tau/r + rho lddot - f.
    out.lddot[i] = model.motor_inertia > 0.0
                       ? (fric[i] - torque[i] / r) / rho
                       : 0.0;
  }
  return out;
}

PlanarDynamics planar_accel(const RobotModel& model, const Vec2& p,
                            const Vec2& v, const Vec4& torque) {
  const double r = model.winch_radius;
  const double rho = model.motor_inertia / (r * r);
  PlanarPose pose{0.0, p};
  CableGeometries cables = cable_vectors(model, pose);
  Vec4 ldot, fric;
  for (int i = 0; i < 4; ++i) {
    ldot[i] = cables[i].rhat.dot(v);
    fric[i] = model.cable_friction(ldot[i]);
  }

  PlanarDynamics out;
  while (true) {
    Mat2 sys = model.mass * Mat2::Identity();
    Vec2 rhs(0.0, -model.mass * model.gravity);
    for (int i = 0; i < 4; ++i) {
      if (!out.taut[i]) continue;
      const Vec2& rhat = cables[i].rhat;
      sys += rho * rhat * rhat.transpose();
      rhs -= (torque[i] / r - fric[i]) * rhat;  // force is along -rhat
    }
    Vec2 accel = sys.ldlt().solve(rhs);

    int worst = -1;
    double worst_t = 0.0;
    for (int i = 0; i < 4; ++i) {
      if (!out.taut[i]) continue;
      double lddot_i = cables[i].rhat.dot(accel);
      double t_i = torque[i] / r + rho * lddot_i - fric[i];
      out.lddot[i] = lddot_i;
      out.tensions[i] = t_i;
      if (t_i < worst_t) {
        worst_t = t_i;
        worst = i;
      }
    }
    if (worst < 0) {
      out.accel = accel;
      break;
    }
    out.taut[worst] = false;
  }

  for (int i = 0; i < 4; ++i) {
    if (out.taut[i]) continue;
    out.tensions[i] = 0.0;
    out.lddot[i] = model.motor_inertia > 0.0
                       ? (fric[i] - torque[i] / r) / rho
                       : 0.0;
  }
  return out;
}

Vec4 planar_step(const RobotModel& model, const Vec4& x, const Vec4& u,
                 double dt) {
  Vec2 p = x.head<2>();
  Vec2 v = x.tail<2>();
  Vec2 a = planar_accel(model, p, v, u).accel;
  Vec2 v_next = v + dt * a;
  Vec2 p_next = p + dt * v_next;
  Vec4 out;
  out << p_next, v_next;
  return out;
}

void linearize_dynamics(const RobotModel& model, const Vec4& x, const Vec4& u,
                        double dt, Mat4& A, Mat4& B) {
  const double r = model.winch_radius;
  const double rho = model.motor_inertia / (r * r);
  Vec2 p = x.head<2>();
  Vec2 v = x.tail<2>();
  PlanarPose pose{0.0, p};
  CableGeometries cables = cable_vectors(model, pose);
  PlanarDynamics dyn = planar_accel(model, p, v, u);
  const Vec2 a = dyn.accel;

  Mat2 sys = model.mass * Mat2::Identity();
  for (int i = 0; i < 4; ++i) {
    if (!dyn.taut[i]) continue;
    const Vec2& rhat = cables[i].rhat;
    sys += rho * rhat * rhat.transpose();
  }
  Mat2 sys_inv = sys.inverse();

  Mat2 dF_dp = Mat2::Zero();
  Mat2 dF_dv = Mat2::Zero();
  Mat2 dM_dp_a = Mat2::Zero();  // column k holds (dM/dp_k) a
  Eigen::Matrix<double, 2, 4> dF_du = Eigen::Matrix<double, 2, 4>::Zero();
  for (int i = 0; i < 4; ++i) {
    if (!dyn.taut[i]) continue;
    const Vec2& rhat = cables[i].rhat;
    const double len = cables[i].length;
    double ldot_i = rhat.dot(v);
    double f_i = model.cable_friction(ldot_i);
    double fp_i = model.cable_friction_deriv(ldot_i);
    Vec2 dhat = -rhat;
    Mat2 proj = Mat2::Identity() - rhat * rhat.transpose();

    dF_du.col(i) = dhat / r;
    // F_i = (tau/r - f) dhat; dhat and ldot both vary with p.
    dF_dp += -(u[i] / r - f_i) * proj / len -
             fp_i * dhat * (proj * v / len).transpose();
    dF_dv += fp_i * dhat * dhat.transpose();
    dM_dp_a += (rho / len) * ((rhat.dot(a)) * proj + rhat * (proj * a).transpose());
  }

  Mat2 da_dp = sys_inv * (dF_dp - dM_dp_a);
  Mat2 da_dv = sys_inv * dF_dv;
  Eigen::Matrix<double, 2, 4> da_du = sys_inv * dF_du;

  A.setZero();
  B.setZero();
  Mat2 eye = Mat2::Identity();
  A.topLeftCorner<2, 2>() = eye + dt * dt * da_dp;
  A.topRightCorner<2, 2>() = dt * eye + dt * dt * da_dv;
  A.bottomLeftCorner<2, 2>() = dt * da_dp;
  A.bottomRightCorner<2, 2>() = eye + dt * da_dv;
  B.topRows<2>() = dt * dt * da_du;
  B.bottomRows<2>() = dt * da_du;
}

Capability capability(const RobotModel& model, double motor_omega_max,
                      double motor_torque_max, double payload_mass) {
  Capability c;
  double r = model.winch_radius;
  c.v_max = motor_omega_max * r;
  c.a_max = motor_torque_max / (payload_mass * r + model.motor_inertia / r);
  return c;
}

}  // namespace cablepaint
