#include "cablepaint/workspace.hpp"

#include <vector>

#include "cablepaint/errors.hpp"

namespace cablepaint {

AlignedRect wfw_rectangle(const RobotModel& model, double grid_step) {
  if (!(grid_step > 0)) throw OptimizeError("grid_step must be > 0");
  Vec2 lo, hi;
  model.frame_bounds(lo, hi);
  int nx = static_cast<int>(std::floor((hi.x() - lo.x()) / grid_step)) + 1;
  int ny = static_cast<int>(std::floor((hi.y() - lo.y()) / grid_step)) + 1;

  std::vector<std::vector<bool>> ok(nx, std::vector<bool>(ny, false));
  bool any = false;
  for (int ix = 0; ix < nx; ++ix) {
    for (int iy = 0; iy < ny; ++iy) {
      Vec2 p = lo + grid_step * Vec2(ix, iy);
      bool feasible = false;
      try {
        feasible = statically_feasible(model, PlanarPose{0.0, p});
      } catch (const OptimizeError&) {
        feasible = false;  // degenerate cable at a pulley
      }
      ok[ix][iy] = feasible;
      any = any || feasible;
    }
  }
  if (!any) throw OptimizeError("wfw_rectangle: no feasible point");

  // For every column range [x0, x1], the tallest all-feasible row band.
  // O(nx^2 ny); grids here are small.
  AlignedRect best{Vec2::Zero(), Vec2::Zero()};
  double best_area = -1.0;
  for (int x0 = 0; x0 < nx; ++x0) {
    std::vector<bool> band(ny, true);
    for (int x1 = x0; x1 < nx; ++x1) {
      for (int iy = 0; iy < ny; ++iy) {
        band[iy] = band[iy] && ok[x1][iy];
      }
      int run_start = -1;
      for (int iy = 0; iy <= ny; ++iy) {
        bool on = iy < ny && band[iy];
        if (on && run_start < 0) run_start = iy;
        if (!on && run_start >= 0) {
          AlignedRect rect{lo + grid_step * Vec2(x0, run_start),
                           lo + grid_step * Vec2(x1, iy - 1)};
          double area = rect.area();
          bool better = area > best_area + 1e-12;
          if (!better && std::abs(area - best_area) <= 1e-12) {
            if (rect.lo.x() < best.lo.x() - 1e-12 ||
                (std::abs(rect.lo.x() - best.lo.x()) <= 1e-12 &&
                 (rect.lo.y() < best.lo.y() - 1e-12 ||
                  (std::abs(rect.lo.y() - best.lo.y()) <= 1e-12 &&
                   rect.width() > best.width() + 1e-12)))) {
              better = true;
            }
          }
          if (better) {
            best_area = area;
            best = rect;
          }
          run_start = -1;
        }
      }
    }
  }
  return best;
}

}  // namespace cablepaint
