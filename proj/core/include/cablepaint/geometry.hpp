#pragma once

#include <Eigen/Dense>

namespace cablepaint {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Vec4 = Eigen::Vector4d;
using Mat2 = Eigen::Matrix2d;
using Mat3 = Eigen::Matrix3d;
using Mat4 = Eigen::Matrix4d;

inline Vec2 perp(const Vec2& v) { return Vec2(-v.y(), v.x()); }
inline double cross2(const Vec2& a, const Vec2& b) {
  return a.x() * b.y() - a.y() * b.x();
}

// Proper rigid transform in 3-space. Used by the capture pipeline to move
// mocap data between world, surface, can, and nozzle frames.
struct RigidFrame {
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();

  static RigidFrame identity() { return {}; }

  Vec3 apply(const Vec3& p) const { return rotation * p + translation; }

  RigidFrame compose(const RigidFrame& other) const {
    return {rotation * other.rotation,
            rotation * other.translation + translation};
  }

  RigidFrame inverse() const {
    Mat3 rt = rotation.transpose();
    return {rt, -(rt * translation)};
  }

  // RtR = I and det R = +1, both within tol.
  bool is_orthonormal(double tol = 1e-9) const;
};

// Builds a right-handed frame from three points: origin at `origin`, x along
// (x_point - origin), y the Gram-Schmidt remainder of (y_point - origin),
// z their cross product. Throws ParseError on collinear input.
RigidFrame frame_from_points(const Vec3& origin, const Vec3& x_point,
                             const Vec3& y_point);

// Planar pose (theta, x, y) and twist (omega, xdot, ydot). Linear parts are
// in the world frame; theta rotates body to world.
struct PlanarPose {
  double theta = 0.0;
  Vec2 p = Vec2::Zero();

  Mat2 rotation() const {
    double c = std::cos(theta), s = std::sin(theta);
    Mat2 r;
    r << c, -s, s, c;
    return r;
  }
  Vec2 apply(const Vec2& body_point) const {
    return p + rotation() * body_point;
  }
};

struct PlanarTwist {
  double omega = 0.0;
  Vec2 v = Vec2::Zero();
};

// Twist acceleration (alpha, ax, ay), same ordering convention as the twist:
// angular component first.
struct PlanarAccel {
  double alpha = 0.0;
  Vec2 a = Vec2::Zero();
};

struct PlanarState {
  PlanarPose pose;
  PlanarTwist twist;
};

}  // namespace cablepaint
