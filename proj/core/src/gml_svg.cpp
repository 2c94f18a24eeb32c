#include "cablepaint/gml_svg.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <sstream>

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>

#include "cablepaint/errors.hpp"

namespace cablepaint {

namespace pt = boost::property_tree;

namespace {

pt::ptree read_xml_file(const std::string& path) {
  pt::ptree tree;
  try {
    pt::read_xml(path, tree, pt::xml_parser::trim_whitespace);
  } catch (const std::exception& e) {
    throw ParseError("malformed XML in " + path + ": " + e.what());
  }
  return tree;
}

// Normalize all strokes into the unit box, flipping y so the artwork is
// y-up in the painting frame.
void normalize_unit_box(std::vector<Stroke>& strokes, double min_x,
                        double max_x, double min_y, double max_y) {
  double span = std::max(max_x - min_x, max_y - min_y);
  double s = span > 1e-12 ? 1.0 / span : 1.0;
  for (Stroke& st : strokes) {
    for (Vec2& p : st.points) {
      p = Vec2((p.x() - min_x) * s, (max_y - p.y()) * s);
    }
  }
}

void content_bounds(const std::vector<Stroke>& strokes, double& min_x,
                    double& max_x, double& min_y, double& max_y) {
  min_x = min_y = std::numeric_limits<double>::infinity();
  max_x = max_y = -std::numeric_limits<double>::infinity();
  for (const Stroke& st : strokes) {
    for (const Vec2& p : st.points) {
      min_x = std::min(min_x, p.x());
      max_x = std::max(max_x, p.x());
      min_y = std::min(min_y, p.y());
      max_y = std::max(max_y, p.y());
    }
  }
}

void collect_gml_strokes(const pt::ptree& node, std::vector<Stroke>& out,
                         const std::string& path) {
  for (const auto& [key, child] : node) {
    if (key == "stroke") {
      Stroke s;
      std::vector<double> times;
      bool any_time = false;
      for (const auto& [pkey, pchild] : child) {
        if (pkey != "pt") continue;
        auto x = pchild.get_optional<double>("x");
        auto y = pchild.get_optional<double>("y");
        if (!x || !y) {
          throw ParseError("missing coordinate element in " + path);
        }
        s.points.emplace_back(*x, *y);
        auto t = pchild.get_optional<double>("t");
        times.push_back(t ? *t : 0.0);
        any_time = any_time || t.has_value();
      }
      if (s.points.size() < 2) {
        throw ParseError("stroke needs >=2 points in " + path);
      }
      if (any_time) {
        // Guard against duplicated timestamps from coarse recorders.
        for (size_t i = 1; i < times.size(); ++i) {
          if (times[i] <= times[i - 1]) times[i] = times[i - 1] + 1e-4;
        }
        s.vertex_times = times;
      }
      out.push_back(std::move(s));
    } else if (key != "<xmlattr>") {
      collect_gml_strokes(child, out, path);
    }
  }
}

}  // namespace

std::vector<Stroke> load_gml(const std::string& path) {
  pt::ptree tree = read_xml_file(path);
  auto gml = tree.get_child_optional("gml");
  if (!gml) throw ParseError("not a GML file (no <gml> root): " + path);
  std::vector<Stroke> strokes;
  collect_gml_strokes(*gml, strokes, path);
  if (strokes.empty()) throw ParseError("GML file has no strokes: " + path);

  double min_x, max_x, min_y, max_y;
  content_bounds(strokes, min_x, max_x, min_y, max_y);
  normalize_unit_box(strokes, min_x, max_x, min_y, max_y);
  for (Stroke& s : strokes) s.validate();
  return strokes;
}

namespace {

struct PathTokenizer {
  const std::string& d;
  size_t pos = 0;
  const std::string& file;

  void skip_separators() {
    while (pos < d.size() &&
           (std::isspace(static_cast<unsigned char>(d[pos])) || d[pos] == ',')) {
      ++pos;
    }
  }
  bool done() {
    skip_separators();
    return pos >= d.size();
  }
  bool peek_number() {
    skip_separators();
    if (pos >= d.size()) return false;
    char c = d[pos];
    return std::isdigit(static_cast<unsigned char>(c)) || c == '-' ||
           c == '+' || c == '.';
  }
  char next_command() {
    skip_separators();
    char c = d[pos];
    if (!std::isalpha(static_cast<unsigned char>(c))) {
      throw ParseError("expected path command in " + file + " at '" +
                       d.substr(pos, 8) + "'");
    }
    ++pos;
    return c;
  }
  double number() {
    skip_separators();
    const char* begin = d.c_str() + pos;
    char* end = nullptr;
    double v = std::strtod(begin, &end);
    if (end == begin) {
      throw ParseError("expected number in path data of " + file);
    }
    pos += end - begin;
    return v;
  }
};

void flatten_cubic(const Vec2& p0, const Vec2& p1, const Vec2& p2,
                   const Vec2& p3, double tol, int depth,
                   std::vector<Vec2>& out) {
  Vec2 chord = p3 - p0;
  double chord_len = chord.norm();
  double d1, d2;
  if (chord_len < 1e-12) {
    d1 = (p1 - p0).norm();
    d2 = (p2 - p0).norm();
  } else {
    d1 = std::abs(cross2(chord, p1 - p0)) / chord_len;
    d2 = std::abs(cross2(chord, p2 - p0)) / chord_len;
  }
  if (std::max(d1, d2) <= tol || depth >= 24) {
    out.push_back(p3);
    return;
  }
  Vec2 p01 = 0.5 * (p0 + p1), p12 = 0.5 * (p1 + p2), p23 = 0.5 * (p2 + p3);
  Vec2 p012 = 0.5 * (p01 + p12), p123 = 0.5 * (p12 + p23);
  Vec2 mid = 0.5 * (p012 + p123);
  flatten_cubic(p0, p01, p012, mid, tol, depth + 1, out);
  flatten_cubic(mid, p123, p23, p3, tol, depth + 1, out);
}

std::vector<Stroke> parse_path_data(const std::string& d, double tol,
                                    const std::string& file) {
  PathTokenizer tok{d, 0, file};
  std::vector<Stroke> strokes;
  Stroke cur;
  Vec2 pen = Vec2::Zero();
  Vec2 subpath_start = Vec2::Zero();
  char cmd = 0;

  auto flush = [&]() {
    if (cur.points.size() >= 2) strokes.push_back(cur);
    cur = Stroke{};
  };
  auto begin_at = [&](const Vec2& p) {
    flush();
    cur.points.push_back(p);
    pen = p;
    subpath_start = p;
  };
  auto line_to = [&](const Vec2& p) {
    if (cur.points.empty()) cur.points.push_back(pen);
    cur.points.push_back(p);
    pen = p;
  };

  while (!tok.done()) {
    if (!tok.peek_number()) {
      cmd = tok.next_command();
    } else if (cmd == 'M') {
      cmd = 'L';  // implicit lineto after moveto
    } else if (cmd == 'm') {
      cmd = 'l';
    } else if (cmd == 0) {
      throw ParseError("path data must start with a moveto in " + file);
    }
    bool rel = std::islower(static_cast<unsigned char>(cmd));
    char c = static_cast<char>(std::toupper(static_cast<unsigned char>(cmd)));
    Vec2 base = rel ? pen : Vec2::Zero();
    switch (c) {
      case 'M': {
        double x = tok.number(), y = tok.number();
        begin_at(base + Vec2(x, y));
        break;
      }
      case 'L': {
        double x = tok.number(), y = tok.number();
        line_to(base + Vec2(x, y));
        break;
      }
      case 'H': {
        double x = tok.number();
        line_to(Vec2(rel ? pen.x() + x : x, pen.y()));
        break;
      }
      case 'V': {
        double y = tok.number();
        line_to(Vec2(pen.x(), rel ? pen.y() + y : y));
        break;
      }
      case 'C': {
        double x1 = tok.number(), y1 = tok.number();
        double x2 = tok.number(), y2 = tok.number();
        double x3 = tok.number(), y3 = tok.number();
        Vec2 c1 = base + Vec2(x1, y1);
        Vec2 c2 = base + Vec2(x2, y2);
        Vec2 end = base + Vec2(x3, y3);
        if (cur.points.empty()) cur.points.push_back(pen);
        std::vector<Vec2> flat;
        flatten_cubic(pen, c1, c2, end, tol, 0, flat);
        for (const Vec2& p : flat) cur.points.push_back(p);
        pen = end;
        break;
      }
      case 'Q': {
        double xq = tok.number(), yq = tok.number();
        double xe = tok.number(), ye = tok.number();
        Vec2 q = base + Vec2(xq, yq);
        Vec2 end = base + Vec2(xe, ye);
        // Exact degree elevation to a cubic.
        Vec2 c1 = pen + (2.0 / 3.0) * (q - pen);
        Vec2 c2 = end + (2.0 / 3.0) * (q - end);
        if (cur.points.empty()) cur.points.push_back(pen);
        std::vector<Vec2> flat;
        flatten_cubic(pen, c1, c2, end, tol, 0, flat);
        for (const Vec2& p : flat) cur.points.push_back(p);
        pen = end;
        break;
      }
      case 'Z': {
        if (!cur.points.empty() && (pen - subpath_start).norm() > 1e-12) {
          line_to(subpath_start);
        }
        flush();
        pen = subpath_start;
        break;
      }
      default:
        throw ParseError(std::string("unsupported command ") + cmd + " in " +
                         file);
    }
  }
  flush();
  if (strokes.empty()) {
    throw ParseError("path with fewer than 2 points in " + file);
  }
  return strokes;
}

void collect_paths(const pt::ptree& node,
                   std::vector<std::pair<std::string, std::string>>& out) {
  for (const auto& [key, child] : node) {
    if (key == "path") {
      auto d = child.get_optional<std::string>("<xmlattr>.d");
      if (d) {
        out.emplace_back(child.get<std::string>("<xmlattr>.id", ""), *d);
      }
    } else if (key != "<xmlattr>") {
      collect_paths(child, out);
    }
  }
}

}  // namespace

std::vector<std::pair<std::string, std::vector<Stroke>>> load_svg_paths(
    const std::string& path, double flatten_tol) {
  if (!(flatten_tol > 0)) throw ParseError("flatten_tol must be > 0");
  pt::ptree tree = read_xml_file(path);
  auto svg = tree.get_child_optional("svg");
  if (!svg) throw ParseError("not an SVG file (no <svg> root): " + path);

  std::vector<std::pair<std::string, std::string>> raw;
  collect_paths(*svg, raw);
  if (raw.empty()) throw ParseError("SVG file has no path elements: " + path);

  std::vector<std::pair<std::string, std::vector<Stroke>>> named;
  int counter = 0;
  for (auto& [id, d] : raw) {
    ++counter;
    std::string name = id.empty() ? "path-" + std::to_string(counter) : id;
    named.emplace_back(name, parse_path_data(d, flatten_tol, path));
  }

  // Normalization frame: viewBox when present, else the content bounds.
  double min_x, max_x, min_y, max_y;
  auto viewbox = svg->get_optional<std::string>("<xmlattr>.viewBox");
  if (viewbox) {
    std::istringstream is(*viewbox);
    double w, h;
    if (!(is >> min_x >> min_y >> w >> h) || w <= 0 || h <= 0) {
      throw ParseError("bad viewBox in " + path);
    }
    max_x = min_x + w;
    max_y = min_y + h;
  } else {
    std::vector<Stroke> all;
    for (auto& [name, strokes] : named) {
      all.insert(all.end(), strokes.begin(), strokes.end());
    }
    content_bounds(all, min_x, max_x, min_y, max_y);
  }
  for (auto& [name, strokes] : named) {
    normalize_unit_box(strokes, min_x, max_x, min_y, max_y);
    for (Stroke& s : strokes) s.validate();
  }
  return named;
}

}  // namespace cablepaint
