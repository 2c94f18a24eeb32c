#include "cablepaint/geometry.hpp"

#include "cablepaint/errors.hpp"

namespace cablepaint {

bool RigidFrame::is_orthonormal(double tol) const {
  Mat3 err = rotation.transpose() * rotation - Mat3::Identity();
  if (err.cwiseAbs().maxCoeff() > tol) return false;
  return std::abs(rotation.determinant() - 1.0) <= tol;
}

RigidFrame frame_from_points(const Vec3& origin, const Vec3& x_point,
                             const Vec3& y_point) {
  Vec3 dx = x_point - origin;
  Vec3 dy = y_point - origin;
  if (dx.cross(dy).norm() < 1e-9) {
    throw ParseError("collinear markers: cannot build a frame");
  }
  Vec3 x = dx.normalized();
  Vec3 y = (dy - dy.dot(x) * x).normalized();
  Vec3 z = x.cross(y);
  RigidFrame f;
  f.rotation.col(0) = x;
  f.rotation.col(1) = y;
  f.rotation.col(2) = z;
  f.translation = origin;
  return f;
}

}  // namespace cablepaint
