#pragma once

#include <algorithm>
#include <optional>
#include <random>

#include "cablepaint/dynamics.hpp"
#include "cablepaint/polygon.hpp"
#include "cablepaint/robot_model.hpp"
#include "cablepaint/stroke.hpp"

namespace cablepaint::testutil {

inline std::mt19937_64 rng(uint64_t seed) { return std::mt19937_64(seed); }

inline double uniform(std::mt19937_64& g, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(g);
}

inline PlanarState random_state(std::mt19937_64& g, double theta_range = 0.3) {
  PlanarState s;
  s.pose.theta = uniform(g, -theta_range, theta_range);
  s.pose.p = Vec2(uniform(g, -1.1, 1.1), uniform(g, -0.9, 0.9));
  s.twist.omega = uniform(g, -2.0, 2.0);
  s.twist.v = Vec2(uniform(g, -2.0, 2.0), uniform(g, -2.0, 2.0));
  return s;
}

// Independent check for static_tensions: enumerate every bound pattern
// (free / at-lower / at-upper per cable), solve the equality-constrained
// least-norm subproblem, and keep the KKT-consistent candidates.
//   min |t|^2  s.t.  W t = w,  lb <= t <= ub
inline std::optional<Vec4> qp_enumeration_oracle(
    const Eigen::Matrix<double, 2, 4>& w_mat, const Vec2& w_rhs, double lb,
    double ub) {
  const double tol = 1e-8;
  std::optional<Vec4> best;
  double best_norm = std::numeric_limits<double>::infinity();

  for (int pattern = 0; pattern < 81; ++pattern) {
    int digits[4];
    int p = pattern;
    for (int i = 0; i < 4; ++i) {
      digits[i] = p % 3;  // 0 free, 1 lower, 2 upper
      p /= 3;
    }
    std::vector<int> free_idx;
    Vec4 t = Vec4::Zero();
    Vec2 rhs = w_rhs;
    for (int i = 0; i < 4; ++i) {
      if (digits[i] == 0) {
        free_idx.push_back(i);
      } else {
        t[i] = digits[i] == 1 ? lb : ub;
        rhs -= w_mat.col(i) * t[i];
      }
    }

    Eigen::MatrixXd wf(2, free_idx.size());
    for (size_t k = 0; k < free_idx.size(); ++k) wf.col(k) = w_mat.col(free_idx[k]);

    Eigen::VectorXd tf;
    Vec2 lambda = Vec2::Zero();
    if (!free_idx.empty()) {
      // Least-norm solution of wf tf = rhs via tf = -wf^T lambda.
      Eigen::Matrix2d gram = wf * wf.transpose();
      Eigen::JacobiSVD<Eigen::Matrix2d> svd(
          gram, Eigen::ComputeFullU | Eigen::ComputeFullV);
      lambda = -svd.solve(rhs);
      tf = -wf.transpose() * lambda;
      if ((wf * tf - rhs).norm() > tol) continue;
    } else {
      if (rhs.norm() > tol) continue;
    }

    bool ok = true;
    for (size_t k = 0; k < free_idx.size(); ++k) {
      t[free_idx[k]] = tf[k];
      if (tf[k] < lb - tol || tf[k] > ub + tol) ok = false;
    }
    if (!ok) continue;

    // Multiplier signs for the bound-constrained coordinates.
    Vec4 grad = t + w_mat.transpose() * lambda;
    for (int i = 0; i < 4; ++i) {
      if (digits[i] == 1 && grad[i] < -tol) ok = false;  // mu_lo >= 0
      if (digits[i] == 2 && grad[i] > tol) ok = false;   // mu_up >= 0
    }
    if (!ok) continue;

    double n = t.squaredNorm();
    if (n < best_norm) {
      best_norm = n;
      best = t;
    }
  }
  return best;
}

inline std::optional<Vec4> static_tensions_oracle(const RobotModel& model,
                                                  const PlanarPose& pose) {
  Eigen::Matrix<double, 2, 4> w =
      wrench_matrix(model, pose).bottomRows<2>();
  return qp_enumeration_oracle(w, Vec2(0.0, model.mass * model.gravity),
                               model.tension_min, model.tension_max);
}

inline RigidFrame random_frame(std::mt19937_64& g) {
  Eigen::Quaterniond q(uniform(g, -1, 1), uniform(g, -1, 1), uniform(g, -1, 1),
                       uniform(g, -1, 1));
  while (q.norm() < 1e-3) {
    q = Eigen::Quaterniond(uniform(g, -1, 1), uniform(g, -1, 1),
                           uniform(g, -1, 1), uniform(g, -1, 1));
  }
  q.normalize();
  RigidFrame f;
  f.rotation = q.toRotationMatrix();
  f.translation = Vec3(uniform(g, -2, 2), uniform(g, -2, 2), uniform(g, -2, 2));
  return f;
}

inline Eigen::Matrix4d homogeneous(const RigidFrame& f) {
  Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
  m.topLeftCorner<3, 3>() = f.rotation;
  m.topRightCorner<3, 1>() = f.translation;
  return m;
}

// Star-shaped simple polygon around a random center; always non-self-
// intersecting.
inline Polygon random_simple_polygon(std::mt19937_64& g, int max_vertices = 12,
                                     double r_min = 0.05, double r_max = 0.16) {
  int n = 3 + static_cast<int>(uniform(g, 0, max_vertices - 3 + 0.999));
  std::vector<double> angles(n);
  for (double& a : angles) a = uniform(g, 0, 2 * M_PI);
  std::sort(angles.begin(), angles.end());
  // Spread nearly-duplicate angles so edges stay non-degenerate.
  for (int i = 1; i < n; ++i) {
    if (angles[i] - angles[i - 1] < 0.05) angles[i] = angles[i - 1] + 0.05;
  }
  Vec2 center(uniform(g, -0.3, 0.3), uniform(g, -0.3, 0.3));
  Ring ring;
  for (int i = 0; i < n; ++i) {
    double r = uniform(g, r_min, r_max);
    ring.push_back(center + r * Vec2(std::cos(angles[i]), std::sin(angles[i])));
  }
  ring.push_back(ring.front());
  if (ring_signed_area(ring) < 0) reverse_ring(ring);
  Polygon poly;
  poly.outer = ring;
  return poly;
}

struct CoverageReport {
  double covered_fraction = 1.0;
  size_t eroded_points = 0;
  bool all_inside = true;
};

// 1 mm rasterization oracle: every eroded-interior grid point must lie
// within spacing/2 of an infill segment, and every infill vertex/midpoint
// must lie inside the polygon.
inline CoverageReport coverage_oracle(const Polygon& poly,
                                      const std::vector<Stroke>& strokes,
                                      double spacing, double grid = 1e-3) {
  CoverageReport rep;
  std::vector<std::pair<Vec2, Vec2>> segs;
  for (const Stroke& s : strokes) {
    for (size_t i = 0; i + 1 < s.points.size(); ++i) {
      segs.emplace_back(s.points[i], s.points[i + 1]);
    }
    for (const Vec2& p : s.points) {
      if (!point_in_polygon(poly, p, 1e-7)) rep.all_inside = false;
    }
    for (size_t i = 0; i + 1 < s.points.size(); ++i) {
      Vec2 mid = 0.5 * (s.points[i] + s.points[i + 1]);
      if (!point_in_polygon(poly, mid, 1e-7)) rep.all_inside = false;
    }
  }

  Vec2 lo, hi;
  poly.bounds(lo, hi);
  size_t covered = 0;
  for (double x = lo.x(); x <= hi.x(); x += grid) {
    for (double y = lo.y(); y <= hi.y(); y += grid) {
      Vec2 p(x, y);
      if (!point_in_polygon(poly, p, 0.0)) continue;
      if (distance_to_polygon_boundary(poly, p) < 0.5 * spacing) continue;
      ++rep.eroded_points;
      // Grid rows exactly halfway between passes sit at distance exactly
      // spacing/2; give the comparison an epsilon so the knife edge counts.
      double reach = 0.5 * spacing + 1e-9;
      double best = std::numeric_limits<double>::infinity();
      for (const auto& [a, b] : segs) {
        best = std::min(best, point_segment_distance(p, a, b));
        if (best <= reach) break;
      }
      if (best <= reach) ++covered;
    }
  }
  rep.covered_fraction =
      rep.eroded_points == 0
          ? 1.0
          : static_cast<double>(covered) / static_cast<double>(rep.eroded_points);
  return rep;
}

}  // namespace cablepaint::testutil
