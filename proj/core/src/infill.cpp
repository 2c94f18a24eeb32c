#include "cablepaint/infill.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "cablepaint/errors.hpp"

namespace cablepaint {

namespace {

struct Interval {
  double xl0, xl1, xr0, xr1;  // wall x at slab bottom / top
  int cell = -1;
};

struct Slab {
  double y0, y1;
  std::vector<Interval> intervals;
};

// Horizontal slice of the polygon at height y: sorted crossing xs paired
// even-odd. Also reports the wall slope so interval bounds can be evaluated
// at both slab edges.
std::vector<Slab> build_slabs(const Polygon& poly) {
  std::vector<const Ring*> rings{&poly.outer};
  for (const Ring& h : poly.holes) rings.push_back(&h);

  std::vector<double> ys;
  for (const Ring* r : rings) {
    for (size_t i = 0; i + 1 < r->size(); ++i) ys.push_back((*r)[i].y());
  }
  std::sort(ys.begin(), ys.end());
  ys.erase(std::unique(ys.begin(), ys.end(),
                       [](double a, double b) { return std::abs(a - b) < 1e-12; }),
           ys.end());

  std::vector<Slab> slabs;
  for (size_t s = 0; s + 1 < ys.size(); ++s) {
    Slab slab;
    slab.y0 = ys[s];
    slab.y1 = ys[s + 1];
    if (slab.y1 - slab.y0 < 1e-12) continue;
    double ym = 0.5 * (slab.y0 + slab.y1);

    struct Crossing {
      double xm, x0, x1;
    };
    std::vector<Crossing> crossings;
    for (const Ring* r : rings) {
      for (size_t i = 0; i + 1 < r->size(); ++i) {
        Vec2 a = (*r)[i], b = (*r)[i + 1];
        if (a.y() == b.y()) continue;
        double ylo = std::min(a.y(), b.y());
        double yhi = std::max(a.y(), b.y());
        if (ym <= ylo || ym > yhi) continue;
        auto x_at = [&](double y) {
          return a.x() + (y - a.y()) / (b.y() - a.y()) * (b.x() - a.x());
        };
        crossings.push_back({x_at(ym), x_at(slab.y0), x_at(slab.y1)});
      }
    }
    std::sort(crossings.begin(), crossings.end(),
              [](const Crossing& a, const Crossing& b) { return a.xm < b.xm; });
    if (crossings.size() % 2 != 0) {
      throw PlanError("infill: inconsistent polygon slice");
    }
    for (size_t i = 0; i + 1 < crossings.size(); i += 2) {
      Interval iv;
      iv.xl0 = crossings[i].x0;
      iv.xl1 = crossings[i].x1;
      iv.xr0 = crossings[i + 1].x0;
      iv.xr1 = crossings[i + 1].x1;
      slab.intervals.push_back(iv);
    }
    if (!slab.intervals.empty()) slabs.push_back(slab);
  }
  return slabs;
}

bool spans_overlap(double a0, double a1, double b0, double b1) {
  return std::min(a1, b1) - std::max(a0, b0) > 1e-12;
}

}  // namespace

double SweepCell::left_at(double y) const {
  for (const Slab& s : slabs) {
    if (y >= s.y0 - 1e-12 && y <= s.y1 + 1e-12) {
      double f = (s.y1 - s.y0) > 0 ? (y - s.y0) / (s.y1 - s.y0) : 0.0;
      return s.xl0 + f * (s.xl1 - s.xl0);
    }
  }
  return slabs.front().xl0;
}

double SweepCell::right_at(double y) const {
  for (const Slab& s : slabs) {
    if (y >= s.y0 - 1e-12 && y <= s.y1 + 1e-12) {
      double f = (s.y1 - s.y0) > 0 ? (y - s.y0) / (s.y1 - s.y0) : 0.0;
      return s.xr0 + f * (s.xr1 - s.xr0);
    }
  }
  return slabs.front().xr0;
}

std::vector<SweepCell> decompose_cells(const Polygon& polygon) {
  polygon.validate();
  if (std::abs(polygon.area()) < 1e-12) {
    throw PlanError("infill: degenerate zero-area polygon");
  }
  std::vector<Slab> slabs = build_slabs(polygon);
  if (slabs.empty()) throw PlanError("infill: degenerate zero-area polygon");

  std::vector<SweepCell> cells;
  auto open_cell = [&](const Slab& slab, Interval& iv) {
    SweepCell c;
    c.y_min = slab.y0;
    c.y_max = slab.y1;
    c.slabs.push_back({slab.y0, slab.y1, iv.xl0, iv.xl1, iv.xr0, iv.xr1});
    cells.push_back(std::move(c));
    iv.cell = static_cast<int>(cells.size()) - 1;
  };
  auto link = [&](int a, int b) {
    if (a == b) return;
    SweepCell& ca = cells[a];
    SweepCell& cb = cells[b];
    if (std::find(ca.neighbors.begin(), ca.neighbors.end(), b) ==
        ca.neighbors.end()) {
      ca.neighbors.push_back(b);
      cb.neighbors.push_back(a);
    }
  };

  for (Interval& iv : slabs[0].intervals) open_cell(slabs[0], iv);
  for (size_t s = 1; s < slabs.size(); ++s) {
    Slab& below = slabs[s - 1];
    Slab& above = slabs[s];
    bool contiguous = std::abs(above.y0 - below.y1) < 1e-12;

    // Match intervals across the slab boundary by x-overlap.
    std::vector<std::vector<int>> up(below.intervals.size());
    std::vector<std::vector<int>> down(above.intervals.size());
    if (contiguous) {
      for (size_t i = 0; i < below.intervals.size(); ++i) {
        for (size_t j = 0; j < above.intervals.size(); ++j) {
          if (spans_overlap(below.intervals[i].xl1, below.intervals[i].xr1,
                            above.intervals[j].xl0, above.intervals[j].xr0)) {
            up[i].push_back(static_cast<int>(j));
            down[j].push_back(static_cast<int>(i));
          }
        }
      }
    }
    for (size_t j = 0; j < above.intervals.size(); ++j) {
      Interval& iv = above.intervals[j];
      if (down[j].size() == 1 && up[down[j][0]].size() == 1) {
        // Unique continuation: extend the open cell.
        int cell = below.intervals[down[j][0]].cell;
        cells[cell].slabs.push_back(
            {above.y0, above.y1, iv.xl0, iv.xl1, iv.xr0, iv.xr1});
        cells[cell].y_max = above.y1;
        iv.cell = cell;
      } else {
        open_cell(above, iv);
        for (int i : down[j]) link(below.intervals[i].cell, iv.cell);
      }
    }
  }
  return cells;
}

std::vector<Stroke> infill(const Polygon& polygon, double line_spacing) {
  if (!(line_spacing > 0)) throw PlanError("line_spacing must be > 0");
  std::vector<SweepCell> cells = decompose_cells(polygon);

  // Pass heights per cell.
  std::vector<std::vector<double>> pass_ys(cells.size());
  for (size_t c = 0; c < cells.size(); ++c) {
    const SweepCell& cell = cells[c];
    double y = cell.y_min + 0.5 * line_spacing;
    while (y < cell.y_max - 1e-12) {  // passes stay strictly interior
      pass_ys[c].push_back(y);
      y += line_spacing;
    }
    if (pass_ys[c].empty()) {
      pass_ys[c].push_back(0.5 * (cell.y_min + cell.y_max));  // clamp rule
    }
  }

  // Greedy depth-first walk over the adjacency graph, entering the nearest
  // unvisited neighbor first.
  size_t start = 0;
  for (size_t c = 1; c < cells.size(); ++c) {
    if (cells[c].y_min < cells[start].y_min ||
        (cells[c].y_min == cells[start].y_min &&
         cells[c].left_at(pass_ys[c].front()) <
             cells[start].left_at(pass_ys[start].front()))) {
      start = c;
    }
  }
  std::vector<bool> visited(cells.size(), false);
  std::vector<size_t> order;
  std::vector<size_t> stack{start};
  visited[start] = true;
  Vec2 cursor(cells[start].left_at(pass_ys[start].front()),
              pass_ys[start].front());
  while (!stack.empty()) {
    size_t cur = stack.back();
    if (std::find(order.begin(), order.end(), cur) == order.end()) {
      order.push_back(cur);
    }
    int next = -1;
    double best_d = std::numeric_limits<double>::infinity();
    for (int nb : cells[cur].neighbors) {
      if (visited[nb]) continue;
      Vec2 entry(cells[nb].left_at(pass_ys[nb].front()), pass_ys[nb].front());
      double d = (entry - cursor).norm();
      if (d < best_d) {
        best_d = d;
        next = nb;
      }
    }
    if (next < 0) {
      stack.pop_back();
      continue;
    }
    visited[next] = true;
    stack.push_back(next);
    cursor = Vec2(cells[next].left_at(pass_ys[next].front()),
                  pass_ys[next].front());
  }
  for (size_t c = 0; c < cells.size(); ++c) {
    if (!visited[c]) order.push_back(c);  // disconnected components
  }

  // One serpentine stroke per cell; joints follow the side wall so the
  // stroke never leaves the polygon.
  std::vector<Stroke> strokes;
  Vec2 pen = cursor;
  bool have_pen = false;
  for (size_t oi = 0; oi < order.size(); ++oi) {
    const SweepCell& cell = cells[order[oi]];
    const std::vector<double>& ys = pass_ys[order[oi]];

    // Start on whichever corner of the first pass is nearer the pen.
    bool start_left = true;
    if (have_pen) {
      double dl = (Vec2(cell.left_at(ys[0]), ys[0]) - pen).norm();
      double dr = (Vec2(cell.right_at(ys[0]), ys[0]) - pen).norm();
      start_left = dl <= dr;
    }

    Stroke s;
    s.paint = true;
    for (size_t k = 0; k < ys.size(); ++k) {
      double y = ys[k];
      auto side_x = [&](bool left) {
        return left ? cell.left_at(y) : cell.right_at(y);
      };
      if (k > 0) {
        // Serpentine: this pass starts on the side the previous one ended.
        // The joint follows that side wall, dropping in a point at every
        // slab boundary it crosses so the stroke stays on the boundary.
        for (const SweepCell::Slab& sl : cell.slabs) {
          if (sl.y0 > ys[k - 1] + 1e-12 && sl.y0 < y - 1e-12) {
            double wx =
                start_left ? cell.left_at(sl.y0) : cell.right_at(sl.y0);
            s.points.push_back(Vec2(wx, sl.y0));
          }
        }
      }
      s.points.push_back(Vec2(side_x(start_left), y));
      s.points.push_back(Vec2(side_x(!start_left), y));
      start_left = !start_left;  // next pass starts where this one ended
    }

    // Cells stacked above start their own pass grid spacing/2 up, so the
    // band under an interior top boundary can sit farther than spacing/2
    // from any pass. Cap it with a segment along the shared boundary.
    bool has_upper = false;
    for (int nb : cell.neighbors) {
      if (std::abs(cells[nb].y_min - cell.y_max) < 1e-9) has_upper = true;
    }
    if (has_upper && cell.y_max - ys.back() > 0.5 * line_spacing + 1e-12) {
      double y_top = cell.y_max;
      for (const SweepCell::Slab& sl : cell.slabs) {
        if (sl.y0 > ys.back() + 1e-12 && sl.y0 < y_top - 1e-12) {
          double wx = start_left ? cell.left_at(sl.y0) : cell.right_at(sl.y0);
          s.points.push_back(Vec2(wx, sl.y0));
        }
      }
      double xa = start_left ? cell.left_at(y_top) : cell.right_at(y_top);
      double xb = start_left ? cell.right_at(y_top) : cell.left_at(y_top);
      s.points.push_back(Vec2(xa, y_top));
      s.points.push_back(Vec2(xb, y_top));
    }

    pen = s.points.back();
    have_pen = true;
    strokes.push_back(std::move(s));
  }
  return strokes;
}

}  // namespace cablepaint
