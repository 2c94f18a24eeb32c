#pragma once

#include <string>
#include <vector>

#include "cablepaint/infill.hpp"
#include "cablepaint/polygon.hpp"
#include "cablepaint/stroke.hpp"
#include "cablepaint/workspace.hpp"

namespace cablepaint {

enum class StrokeClass { outline, infill, travel };

struct PathStroke {
  Stroke stroke;
  StrokeClass cls = StrokeClass::outline;
  std::string color;  // empty for travel
};

// Single continuous paint/travel path; consecutive strokes meet within
// 1e-9 m.
struct PaintPath {
  std::vector<PathStroke> strokes;

  double max_junction_gap() const;
  double painted_arc_length() const;
};

struct Placement {
  std::string shape;
  double tx = 0.0, ty = 0.0;
  double scale = 1.0;
  double rotation_deg = 0.0;
  std::string face_color = "black";
  std::string outline_color = "black";
  int layer = 0;  // strict total order, unique per placement

  Vec2 apply(const Vec2& p) const;
};

struct PaintingSpec {
  AlignedRect canvas;
  std::vector<Placement> placements;

  void validate() const;  // scale > 0, layers form a strict total order
};

PaintingSpec load_painting_spec(const std::string& path);
void save_painting_spec(const PaintingSpec& spec, const std::string& path);

struct PlacedShape {
  std::vector<Stroke> outline;  // transformed paint strokes, capture order
  std::vector<Polygon> fill;    // closed outlines resolved even-odd
  std::string face_color;
  std::string outline_color;
};

// Validates placements against canvas and workspace, resolves layering, and
// returns shapes bottom-to-top. Outline loops that do not close within
// `closure_tol` are kept as line art with no fill.
std::vector<PlacedShape> compose(const PaintingSpec& spec,
                                 const StrokeLibrary& library,
                                 const AlignedRect& wfw_rect,
                                 double closure_tol = 0.02);

// Chains strokes into closed rings (endpoint gap <= closure_tol) and nests
// them even-odd into polygons with holes. Strokes that cannot close are
// reported through `line_art` when given, otherwise rejected.
std::vector<Polygon> outline_to_polygon(const std::vector<Stroke>& outline,
                                        double closure_tol = 0.02,
                                        std::vector<Stroke>* line_art = nullptr);

// Inserts 2-point travel strokes between consecutive strokes whose endpoints
// differ by more than 1e-9 m.
PaintPath add_travel_strokes(const std::vector<PathStroke>& strokes);

// Full painting order: per shape, infill in the face color then outline in
// the outline color; shapes strictly in layer order; travels inserted.
PaintPath order_painting(const std::vector<PlacedShape>& shapes,
                         double line_spacing = 0.025);

void save_paint_path(const PaintPath& path, const std::string& file);
PaintPath load_paint_path(const std::string& file);

}  // namespace cablepaint
