#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cablepaint/geometry.hpp"

namespace cablepaint {

// Ordered planar polyline in the painting-surface frame. `vertex_times`
// preserves the captured timing when the stroke came from a recording;
// generated strokes (infill, travel) have none.
struct Stroke {
  std::vector<Vec2> points;
  std::optional<std::vector<double>> vertex_times;
  bool paint = true;

  double arc_length() const;
  // Throws PlanError when the invariants fail (< 2 points, non-finite
  // coordinates, non-increasing or mismatched vertex times).
  void validate() const;
};

// Named sets of strokes; the captured-art currency. Keys iterate in insert
// order so exports are stable.
class StrokeLibrary {
 public:
  void add(const std::string& name, std::vector<Stroke> strokes);
  bool contains(const std::string& name) const;
  const std::vector<Stroke>& at(const std::string& name) const;
  const std::vector<std::string>& names() const { return order_; }
  size_t size() const { return order_.size(); }

 private:
  std::map<std::string, std::vector<Stroke>> shapes_;
  std::vector<std::string> order_;
};

// Shape-library file: JSON, floats printed so they reload bit-exactly.
void save_library(const StrokeLibrary& lib, const std::string& path);
StrokeLibrary load_library(const std::string& path);

}  // namespace cablepaint
