#pragma once

#include <string>

#include "cablepaint/pathgen.hpp"
#include "cablepaint/runtime.hpp"

namespace cablepaint {

struct RenderStyle {
  double stroke_width = 0.025;  // m, matches the painted line width
  bool show_travel = true;      // travel segments dashed when shown
  std::string background = "white";
};

// Deterministic SVG preview of a planned path. Output units are meters.
std::string render_path_svg(const PaintPath& path, const RenderStyle& style);

// Preview of what a simulated run painted: ground-truth positions while the
// effective paint state was on.
std::string render_log_svg(const SimulationLog& log, const RenderStyle& style);

void write_svg(const std::string& svg, const std::string& path);

}  // namespace cablepaint
