#include "cablepaint/render.hpp"

#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "cablepaint/errors.hpp"

namespace cablepaint {

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

struct Bounds {
  double min_x = std::numeric_limits<double>::infinity();
  double min_y = std::numeric_limits<double>::infinity();
  double max_x = -std::numeric_limits<double>::infinity();
  double max_y = -std::numeric_limits<double>::infinity();

  void add(const Vec2& p) {
    min_x = std::min(min_x, p.x());
    max_x = std::max(max_x, p.x());
    min_y = std::min(min_y, p.y());
    max_y = std::max(max_y, p.y());
  }
  void pad(double m) {
    min_x -= m;
    min_y -= m;
    max_x += m;
    max_y += m;
  }
};

// SVG is y-down; flip about the bounds so the painting reads upright.
std::string polyline(const std::vector<Vec2>& pts, const Bounds& b,
                     const std::string& color, double width, bool dashed) {
  std::ostringstream os;
  os << "  <polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\""
     << fmt(width) << "\" stroke-linecap=\"round\" stroke-linejoin=\"round\"";
  if (dashed) os << " stroke-dasharray=\"" << fmt(width * 2) << "\"";
  os << " points=\"";
  for (size_t i = 0; i < pts.size(); ++i) {
    if (i) os << ' ';
    os << fmt(pts[i].x()) << ',' << fmt(b.max_y + b.min_y - pts[i].y());
  }
  os << "\"/>\n";
  return os.str();
}

std::string document(const Bounds& b, const std::string& body,
                     const std::string& background) {
  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"" << fmt(b.min_x)
     << ' ' << fmt(b.min_y) << ' ' << fmt(b.max_x - b.min_x) << ' '
     << fmt(b.max_y - b.min_y) << "\">\n";
  os << "  <rect x=\"" << fmt(b.min_x) << "\" y=\"" << fmt(b.min_y)
     << "\" width=\"" << fmt(b.max_x - b.min_x) << "\" height=\""
     << fmt(b.max_y - b.min_y) << "\" fill=\"" << background << "\"/>\n";
  os << body << "</svg>\n";
  return os.str();
}

}  // namespace

std::string render_path_svg(const PaintPath& path, const RenderStyle& style) {
  if (path.strokes.empty()) throw PlanError("cannot render an empty path");
  Bounds b;
  for (const PathStroke& ps : path.strokes) {
    for (const Vec2& p : ps.stroke.points) b.add(p);
  }
  b.pad(style.stroke_width * 2);

  std::string body;
  for (const PathStroke& ps : path.strokes) {
    if (ps.stroke.paint) {
      std::string color = ps.color.empty() ? "black" : ps.color;
      body += polyline(ps.stroke.points, b, color, style.stroke_width, false);
    } else if (style.show_travel) {
      body += polyline(ps.stroke.points, b, "gray", style.stroke_width * 0.2,
                       true);
    }
  }
  return document(b, body, style.background);
}

std::string render_log_svg(const SimulationLog& log, const RenderStyle& style) {
  if (log.ticks.empty()) throw SimulateError("cannot render an empty log");
  Bounds b;
  for (const LogTick& tk : log.ticks) b.add(tk.pose.p);
  b.pad(style.stroke_width * 2);

  std::string body;
  std::vector<Vec2> run;
  bool painting = false;
  auto flush = [&](bool as_paint) {
    if (run.size() >= 2) {
      body += as_paint ? polyline(run, b, "black", style.stroke_width, false)
                       : (style.show_travel
                              ? polyline(run, b, "gray",
                                         style.stroke_width * 0.2, true)
                              : std::string());
    }
    run.clear();
  };
  for (const LogTick& tk : log.ticks) {
    if (tk.paint_on != painting) {
      flush(painting);
      painting = tk.paint_on;
    }
    run.push_back(tk.pose.p);
  }
  flush(painting);
  return document(b, body, style.background);
}

void write_svg(const std::string& svg, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot write file: " + path);
  out << svg;
}

}  // namespace cablepaint
