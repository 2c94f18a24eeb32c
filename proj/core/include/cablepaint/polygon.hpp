#pragma once

#include <vector>

#include "cablepaint/geometry.hpp"

namespace cablepaint {

// Closed ring: first point equals last. Outer rings wind counterclockwise,
// holes clockwise.
using Ring = std::vector<Vec2>;

struct Polygon {
  Ring outer;
  std::vector<Ring> holes;

  // Throws PlanError when a ring is open, degenerate, or self-intersecting.
  void validate() const;
  void bounds(Vec2& lo, Vec2& hi) const;
  double area() const;  // outer minus holes
};

double ring_signed_area(const Ring& ring);
bool ring_is_closed(const Ring& ring, double tol = 1e-12);
void reverse_ring(Ring& ring);
bool ring_self_intersects(const Ring& ring);

// Even-odd test counting all rings; points within `boundary_tol` of an edge
// count as inside (the closed region).
bool point_in_polygon(const Polygon& poly, const Vec2& p,
                      double boundary_tol = 1e-9);

double distance_to_polygon_boundary(const Polygon& poly, const Vec2& p);

double point_segment_distance(const Vec2& p, const Vec2& a, const Vec2& b);

}  // namespace cablepaint
