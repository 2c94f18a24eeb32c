#pragma once

#include <vector>

#include "cablepaint/polygon.hpp"
#include "cablepaint/stroke.hpp"

namespace cablepaint {

// Boustrophedon coverage of a polygon with holes. The sweep runs bottom to
// top; cells are maximal y-ranges over which a horizontal slice of the
// polygon is a single interval with fixed bounding edges. Each cell becomes
// one paint stroke: horizontal passes at y = y_min + spacing/2 + k spacing
// (at least one pass, mid-height when the cell is shorter than the spacing),
// serpentine-connected along the cell boundary. Cells are ordered by a
// greedy depth-first walk of the adjacency graph.
std::vector<Stroke> infill(const Polygon& polygon, double line_spacing);

// Exposed for tests: the cell decomposition itself.
struct SweepCell {
  double y_min = 0.0;
  double y_max = 0.0;
  // Piecewise-linear side walls, one entry per slab the cell spans.
  struct Slab {
    double y0, y1;
    double xl0, xl1;  // left wall x at y0 and y1
    double xr0, xr1;  // right wall x at y0 and y1
  };
  std::vector<Slab> slabs;
  std::vector<int> neighbors;

  double left_at(double y) const;
  double right_at(double y) const;
};

std::vector<SweepCell> decompose_cells(const Polygon& polygon);

}  // namespace cablepaint
