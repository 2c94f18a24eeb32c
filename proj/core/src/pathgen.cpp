#include "cablepaint/pathgen.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>

#include <json.hpp>

#include "cablepaint/errors.hpp"

namespace cablepaint {

using ordered_json = nlohmann::ordered_json;

double PaintPath::max_junction_gap() const {
  double worst = 0.0;
  for (size_t i = 1; i < strokes.size(); ++i) {
    worst = std::max(worst, (strokes[i].stroke.points.front() -
                             strokes[i - 1].stroke.points.back())
                                .norm());
  }
  return worst;
}

double PaintPath::painted_arc_length() const {
  double len = 0.0;
  for (const PathStroke& s : strokes) {
    if (s.stroke.paint) len += s.stroke.arc_length();
  }
  return len;
}

Vec2 Placement::apply(const Vec2& p) const {
  double rad = rotation_deg * M_PI / 180.0;
  double c = std::cos(rad), s = std::sin(rad);
  Vec2 q(scale * (c * p.x() - s * p.y()), scale * (s * p.x() + c * p.y()));
  return q + Vec2(tx, ty);
}

void PaintingSpec::validate() const {
  std::set<int> layers;
  for (const Placement& pl : placements) {
    if (!(pl.scale > 0)) throw PlanError("placement scale must be > 0");
    if (!layers.insert(pl.layer).second) {
      throw PlanError("layering is not a strict total order: duplicate layer " +
                      std::to_string(pl.layer));
    }
  }
}

PaintingSpec load_painting_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open file: " + path);
  ordered_json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw ParseError("bad painting spec " + path + ": " + e.what());
  }
  if (j.value("format", "") != "cablepaint-painting") {
    throw ParseError("not a painting spec file: " + path);
  }
  PaintingSpec spec;
  const auto& canvas = j.at("canvas");
  spec.canvas.lo = Vec2(canvas.at("x").get<double>(), canvas.at("y").get<double>());
  spec.canvas.hi = spec.canvas.lo + Vec2(canvas.at("width").get<double>(),
                                         canvas.at("height").get<double>());
  for (const auto& jp : j.at("placements")) {
    Placement pl;
    pl.shape = jp.at("shape").get<std::string>();
    pl.tx = jp.at("tx").get<double>();
    pl.ty = jp.at("ty").get<double>();
    pl.scale = jp.at("scale").get<double>();
    pl.rotation_deg = jp.value("rotation_deg", 0.0);
    pl.face_color = jp.value("face", "black");
    pl.outline_color = jp.value("outline", "black");
    pl.layer = jp.at("layer").get<int>();
    spec.placements.push_back(std::move(pl));
  }
  spec.validate();
  return spec;
}

void save_painting_spec(const PaintingSpec& spec, const std::string& path) {
  ordered_json j;
  j["format"] = "cablepaint-painting";
  j["canvas"] = {{"x", spec.canvas.lo.x()},
                 {"y", spec.canvas.lo.y()},
                 {"width", spec.canvas.width()},
                 {"height", spec.canvas.height()}};
  ordered_json arr = ordered_json::array();
  for (const Placement& pl : spec.placements) {
    arr.push_back({{"shape", pl.shape},
                   {"tx", pl.tx},
                   {"ty", pl.ty},
                   {"scale", pl.scale},
                   {"rotation_deg", pl.rotation_deg},
                   {"face", pl.face_color},
                   {"outline", pl.outline_color},
                   {"layer", pl.layer}});
  }
  j["placements"] = std::move(arr);
  std::ofstream out(path);
  if (!out) throw ParseError("cannot write file: " + path);
  out << j.dump(2) << "\n";
}

std::vector<Polygon> outline_to_polygon(const std::vector<Stroke>& outline,
                                        double closure_tol,
                                        std::vector<Stroke>* line_art) {
  // Chain strokes end-to-start into rings.
  std::vector<Ring> rings;
  Ring current;
  std::vector<Stroke> open_chains;
  auto flush_open = [&](Ring&& chain) {
    if (chain.size() < 2) return;
    Stroke s;
    s.points = std::move(chain);
    s.paint = true;
    open_chains.push_back(std::move(s));
  };

  for (const Stroke& s : outline) {
    s.validate();
    if (current.empty()) {
      current = s.points;
    } else if ((current.back() - s.points.front()).norm() <= closure_tol) {
      current.insert(current.end(), s.points.begin() + 1, s.points.end());
    } else {
      flush_open(std::move(current));
      current = s.points;
    }
    if (current.size() >= 3 &&
        (current.front() - current.back()).norm() <= closure_tol) {
      current.back() = current.front();  // snap closed
      rings.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) flush_open(std::move(current));

  if (!open_chains.empty()) {
    if (!line_art) {
      throw PlanError("outline does not close into loops");
    }
    *line_art = std::move(open_chains);
  }

  for (const Ring& r : rings) {
    if (ring_self_intersects(r)) {
      throw PlanError("self-intersecting outline");
    }
  }

  // Even-odd nesting: depth = number of rings strictly containing a ring.
  size_t n = rings.size();
  std::vector<int> depth(n, 0);
  for (size_t i = 0; i < n; ++i) {
    Polygon probe;
    for (size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      probe.outer = rings[j];
      // Use a vertex of ring i; ties on shared boundaries are not expected
      // from captured outlines.
      if (point_in_polygon(probe, rings[i][0], 0.0)) depth[i]++;
    }
  }

  std::vector<Polygon> polys;
  std::vector<int> poly_of_ring(n, -1);
  for (size_t i = 0; i < n; ++i) {
    if (depth[i] % 2 != 0) continue;
    Ring outer = rings[i];
    if (ring_signed_area(outer) < 0) reverse_ring(outer);
    Polygon p;
    p.outer = std::move(outer);
    poly_of_ring[i] = static_cast<int>(polys.size());
    polys.push_back(std::move(p));
  }
  for (size_t i = 0; i < n; ++i) {
    if (depth[i] % 2 == 0) continue;
    // Attach to the smallest even-depth ring containing it.
    int best = -1;
    double best_area = std::numeric_limits<double>::infinity();
    for (size_t j = 0; j < n; ++j) {
      if (depth[j] % 2 != 0 || i == j) continue;
      Polygon probe;
      probe.outer = rings[j];
      if (!point_in_polygon(probe, rings[i][0], 0.0)) continue;
      double a = std::abs(ring_signed_area(rings[j]));
      if (a < best_area) {
        best_area = a;
        best = static_cast<int>(j);
      }
    }
    if (best < 0) throw PlanError("hole ring without an enclosing outline");
    Ring hole = rings[i];
    if (ring_signed_area(hole) > 0) reverse_ring(hole);
    polys[poly_of_ring[best]].holes.push_back(std::move(hole));
  }
  for (Polygon& p : polys) p.validate();
  return polys;
}

std::vector<PlacedShape> compose(const PaintingSpec& spec,
                                 const StrokeLibrary& library,
                                 const AlignedRect& wfw_rect,
                                 double closure_tol) {
  spec.validate();
  AlignedRect allowed = spec.canvas.intersect(wfw_rect);

  std::vector<const Placement*> by_layer;
  for (const Placement& pl : spec.placements) by_layer.push_back(&pl);
  std::sort(by_layer.begin(), by_layer.end(),
            [](const Placement* a, const Placement* b) {
              return a->layer < b->layer;
            });

  std::vector<PlacedShape> placed;
  for (const Placement* pl : by_layer) {
    if (!library.contains(pl->shape)) {
      throw PlanError("unknown shape: " + pl->shape);
    }
    PlacedShape shape;
    shape.face_color = pl->face_color;
    shape.outline_color = pl->outline_color;
    for (const Stroke& s : library.at(pl->shape)) {
      if (!s.paint) continue;  // capture travels are not art
      Stroke t = s;
      for (Vec2& p : t.points) p = pl->apply(p);
      for (const Vec2& p : t.points) {
        if (!allowed.contains(p, 1e-9)) {
          throw PlanError("placement of '" + pl->shape +
                          "' falls outside the workspace");
        }
      }
      shape.outline.push_back(std::move(t));
    }
    if (shape.outline.empty()) {
      throw PlanError("shape '" + pl->shape + "' has no paint strokes");
    }
    std::vector<Stroke> line_art;
    shape.fill =
        outline_to_polygon(shape.outline, closure_tol * pl->scale, &line_art);
    placed.push_back(std::move(shape));
  }
  return placed;
}

PaintPath add_travel_strokes(const std::vector<PathStroke>& strokes) {
  if (strokes.empty()) throw PlanError("cannot path an empty stroke list");
  PaintPath path;
  for (const PathStroke& ps : strokes) {
    if (!path.strokes.empty()) {
      Vec2 from = path.strokes.back().stroke.points.back();
      Vec2 to = ps.stroke.points.front();
      if ((to - from).norm() > 1e-9) {
        PathStroke travel;
        travel.cls = StrokeClass::travel;
        travel.stroke.paint = false;
        travel.stroke.points = {from, to};
        path.strokes.push_back(std::move(travel));
      }
    }
    path.strokes.push_back(ps);
  }
  return path;
}

PaintPath order_painting(const std::vector<PlacedShape>& shapes,
                         double line_spacing) {
  std::vector<PathStroke> ordered;
  for (const PlacedShape& shape : shapes) {
    for (const Polygon& poly : shape.fill) {
      for (Stroke& s : infill(poly, line_spacing)) {
        PathStroke ps;
        ps.cls = StrokeClass::infill;
        ps.color = shape.face_color;
        ps.stroke = std::move(s);
        ordered.push_back(std::move(ps));
      }
    }
    for (const Stroke& s : shape.outline) {
      PathStroke ps;
      ps.cls = StrokeClass::outline;
      ps.color = shape.outline_color;
      ps.stroke = s;
      ordered.push_back(std::move(ps));
    }
  }
  return add_travel_strokes(ordered);
}

namespace {

const char* class_name(StrokeClass c) {
  switch (c) {
    case StrokeClass::outline: return "outline";
    case StrokeClass::infill: return "infill";
    case StrokeClass::travel: return "travel";
  }
  return "outline";
}

StrokeClass class_from(const std::string& s) {
  if (s == "outline") return StrokeClass::outline;
  if (s == "infill") return StrokeClass::infill;
  if (s == "travel") return StrokeClass::travel;
  throw ParseError("unknown stroke class: " + s);
}

}  // namespace

void save_paint_path(const PaintPath& path, const std::string& file) {
  ordered_json j;
  j["format"] = "cablepaint-path";
  ordered_json arr = ordered_json::array();
  for (const PathStroke& ps : path.strokes) {
    ordered_json js;
    js["class"] = class_name(ps.cls);
    js["color"] = ps.color;
    js["paint"] = ps.stroke.paint;
    ordered_json pts = ordered_json::array();
    for (const Vec2& p : ps.stroke.points) pts.push_back({p.x(), p.y()});
    js["points"] = std::move(pts);
    if (ps.stroke.vertex_times) js["times"] = *ps.stroke.vertex_times;
    arr.push_back(std::move(js));
  }
  j["strokes"] = std::move(arr);
  std::ofstream out(file);
  if (!out) throw ParseError("cannot write file: " + file);
  out << j.dump(2) << "\n";
}

PaintPath load_paint_path(const std::string& file) {
  std::ifstream in(file);
  if (!in) throw ParseError("cannot open file: " + file);
  ordered_json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw ParseError("bad paint path " + file + ": " + e.what());
  }
  if (j.value("format", "") != "cablepaint-path") {
    throw ParseError("not a paint path file: " + file);
  }
  PaintPath path;
  for (const auto& js : j.at("strokes")) {
    PathStroke ps;
    ps.cls = class_from(js.at("class").get<std::string>());
    ps.color = js.at("color").get<std::string>();
    ps.stroke.paint = js.at("paint").get<bool>();
    for (const auto& jp : js.at("points")) {
      ps.stroke.points.emplace_back(jp.at(0).get<double>(),
                                    jp.at(1).get<double>());
    }
    if (js.contains("times")) {
      ps.stroke.vertex_times = js.at("times").get<std::vector<double>>();
    }
    ps.stroke.validate();
    path.strokes.push_back(std::move(ps));
  }
  return path;
}

}  // namespace cablepaint
