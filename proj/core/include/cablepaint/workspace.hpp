#pragma once

#include "cablepaint/dynamics.hpp"

namespace cablepaint {

struct AlignedRect {
  Vec2 lo = Vec2::Zero();
  Vec2 hi = Vec2::Zero();

  double width() const { return hi.x() - lo.x(); }
  double height() const { return hi.y() - lo.y(); }
  double area() const { return width() * height(); }
  bool contains(const Vec2& p, double tol = 0.0) const {
    return p.x() >= lo.x() - tol && p.x() <= hi.x() + tol &&
           p.y() >= lo.y() - tol && p.y() <= hi.y() + tol;
  }
  AlignedRect intersect(const AlignedRect& o) const {
    return {lo.cwiseMax(o.lo), hi.cwiseMin(o.hi)};
  }
};

// Largest axis-aligned rectangle (grid-quantized at `grid_step`) whose grid
// points all admit feasible static tensions. Ties broken by the lower-left
// corner, then by width. Throws OptimizeError when no grid point is feasible.
AlignedRect wfw_rectangle(const RobotModel& model, double grid_step);

}  // namespace cablepaint
