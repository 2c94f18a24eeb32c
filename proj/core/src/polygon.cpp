#include "cablepaint/polygon.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "cablepaint/errors.hpp"

namespace cablepaint {

double ring_signed_area(const Ring& ring) {
  double acc = 0.0;
  for (size_t i = 0; i + 1 < ring.size(); ++i) {
    acc += cross2(ring[i], ring[i + 1]);
  }
  return 0.5 * acc;
}

bool ring_is_closed(const Ring& ring, double tol) {
  return ring.size() >= 4 && (ring.front() - ring.back()).norm() <= tol;
}

void reverse_ring(Ring& ring) { std::reverse(ring.begin(), ring.end()); }

namespace {

// Proper or improper intersection of segments ab and cd, excluding shared
// endpoints.
bool segments_cross(const Vec2& a, const Vec2& b, const Vec2& c,
                    const Vec2& d) {
  auto orient = [](const Vec2& p, const Vec2& q, const Vec2& r) {
    return cross2(q - p, r - p);
  };
  const double eps = 1e-12;
  double d1 = orient(a, b, c);
  double d2 = orient(a, b, d);
  double d3 = orient(c, d, a);
  double d4 = orient(c, d, b);
  if (((d1 > eps && d2 < -eps) || (d1 < -eps && d2 > eps)) &&
      ((d3 > eps && d4 < -eps) || (d3 < -eps && d4 > eps))) {
    return true;
  }
  return false;
}

}  // namespace

bool ring_self_intersects(const Ring& ring) {
  size_t n = ring.size();
  if (n < 4) return false;
  size_t edges = n - 1;  // ring stored closed
  for (size_t i = 0; i < edges; ++i) {
    for (size_t j = i + 2; j < edges; ++j) {
      if (i == 0 && j == edges - 1) continue;  // adjacent via closure
      if (segments_cross(ring[i], ring[i + 1], ring[j], ring[j + 1])) {
        return true;
      }
    }
  }
  return false;
}

void Polygon::validate() const {
  auto check_ring = [](const Ring& r, bool outer_ring) {
    if (r.size() < 4 || !ring_is_closed(r, 1e-9)) {
      throw PlanError("polygon ring must be closed with >= 3 vertices");
    }
    if (ring_self_intersects(r)) {
      throw PlanError("self-intersecting polygon ring");
    }
    double a = ring_signed_area(r);
    if (std::abs(a) < 1e-12) throw PlanError("degenerate polygon ring");
    if (outer_ring && a < 0) throw PlanError("outer ring must wind CCW");
    if (!outer_ring && a > 0) throw PlanError("hole ring must wind CW");
  };
  check_ring(outer, true);
  for (const Ring& h : holes) check_ring(h, false);
}

void Polygon::bounds(Vec2& lo, Vec2& hi) const {
  lo = hi = outer.front();
  for (const Vec2& p : outer) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
}

double Polygon::area() const {
  double a = ring_signed_area(outer);
  for (const Ring& h : holes) a += ring_signed_area(h);  // holes are CW
  return a;
}

double point_segment_distance(const Vec2& p, const Vec2& a, const Vec2& b) {
  Vec2 ab = b - a;
  double len2 = ab.squaredNorm();
  if (len2 < 1e-30) return (p - a).norm();
  double t = std::clamp((p - a).dot(ab) / len2, 0.0, 1.0);
  return (p - (a + t * ab)).norm();
}

double distance_to_polygon_boundary(const Polygon& poly, const Vec2& p) {
  double best = std::numeric_limits<double>::infinity();
  auto scan = [&](const Ring& r) {
    for (size_t i = 0; i + 1 < r.size(); ++i) {
      best = std::min(best, point_segment_distance(p, r[i], r[i + 1]));
    }
  };
  scan(poly.outer);
  for (const Ring& h : poly.holes) scan(h);
  return best;
}

bool point_in_polygon(const Polygon& poly, const Vec2& p,
                      double boundary_tol) {
  if (boundary_tol > 0 &&
      distance_to_polygon_boundary(poly, p) <= boundary_tol) {
    return true;
  }
  // Even-odd crossing count over all rings.
  int crossings = 0;
  auto scan = [&](const Ring& r) {
    for (size_t i = 0; i + 1 < r.size(); ++i) {
      const Vec2& a = r[i];
      const Vec2& b = r[i + 1];
      if ((a.y() > p.y()) == (b.y() > p.y())) continue;
      double x_cross = a.x() + (p.y() - a.y()) / (b.y() - a.y()) * (b.x() - a.x());
      if (x_cross > p.x()) ++crossings;
    }
  };
  scan(poly.outer);
  for (const Ring& h : poly.holes) scan(h);
  return crossings % 2 == 1;
}

}  // namespace cablepaint
