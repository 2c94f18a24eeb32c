#include "cablepaint/stroke.hpp"

#include <cmath>
#include <fstream>

#include <json.hpp>

#include "cablepaint/errors.hpp"

namespace cablepaint {

using ordered_json = nlohmann::ordered_json;

double Stroke::arc_length() const {
  double len = 0.0;
  for (size_t i = 1; i < points.size(); ++i) {
    len += (points[i] - points[i - 1]).norm();
  }
  return len;
}

void Stroke::validate() const {
  if (points.size() < 2) throw PlanError("stroke needs >=2 points");
  for (const Vec2& p : points) {
    if (!p.allFinite()) throw PlanError("stroke has non-finite coordinates");
  }
  if (vertex_times) {
    if (vertex_times->size() != points.size()) {
      throw PlanError("vertex_times length differs from points");
    }
    for (size_t i = 1; i < vertex_times->size(); ++i) {
      if (!((*vertex_times)[i] > (*vertex_times)[i - 1])) {
        throw PlanError("vertex_times not strictly increasing");
      }
    }
  }
}

void StrokeLibrary::add(const std::string& name, std::vector<Stroke> strokes) {
  if (shapes_.count(name)) throw ParseError("duplicate name: " + name);
  shapes_.emplace(name, std::move(strokes));
  order_.push_back(name);
}

bool StrokeLibrary::contains(const std::string& name) const {
  return shapes_.count(name) != 0;
}

const std::vector<Stroke>& StrokeLibrary::at(const std::string& name) const {
  auto it = shapes_.find(name);
  if (it == shapes_.end()) throw PlanError("unknown shape: " + name);
  return it->second;
}

void save_library(const StrokeLibrary& lib, const std::string& path) {
  ordered_json root;
  root["format"] = "cablepaint-shapes";
  root["version"] = 1;
  ordered_json shapes = ordered_json::object();
  for (const std::string& name : lib.names()) {
    ordered_json jstrokes = ordered_json::array();
    for (const Stroke& s : lib.at(name)) {
      ordered_json js;
      js["paint"] = s.paint;
      ordered_json pts = ordered_json::array();
      for (const Vec2& p : s.points) pts.push_back({p.x(), p.y()});
      js["points"] = std::move(pts);
      if (s.vertex_times) js["times"] = *s.vertex_times;
      jstrokes.push_back(std::move(js));
    }
    shapes[name] = std::move(jstrokes);
  }
  root["shapes"] = std::move(shapes);
  std::ofstream out(path);
  if (!out) throw ParseError("cannot write file: " + path);
  out << root.dump(2) << "\n";
}

StrokeLibrary load_library(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open file: " + path);
  ordered_json root;
  try {
    in >> root;
  } catch (const std::exception& e) {
    throw ParseError("bad shape library " + path + ": " + e.what());
  }
  if (root.value("format", "") != "cablepaint-shapes") {
    throw ParseError("not a shape library file: " + path);
  }
  StrokeLibrary lib;
  for (const auto& [name, jstrokes] : root.at("shapes").items()) {
    std::vector<Stroke> strokes;
    for (const auto& js : jstrokes) {
      Stroke s;
      s.paint = js.at("paint").get<bool>();
      for (const auto& jp : js.at("points")) {
        s.points.emplace_back(jp.at(0).get<double>(), jp.at(1).get<double>());
      }
      if (js.contains("times")) {
        s.vertex_times = js.at("times").get<std::vector<double>>();
      }
      s.validate();
      strokes.push_back(std::move(s));
    }
    lib.add(name, std::move(strokes));
  }
  return lib;
}

}  // namespace cablepaint
