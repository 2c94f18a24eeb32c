#include "cablepaint/capture.hpp"

#include <algorithm>
#include <cmath>

#include "cablepaint/csv.hpp"
#include "cablepaint/errors.hpp"

namespace cablepaint {

const MarkerTrack* MocapData::find(const std::string& id) const {
  for (const MarkerTrack& t : markers) {
    if (t.marker_id == id) return &t;
  }
  return nullptr;
}

namespace {

const char* kCanPoseColumns[7] = {"can_qw", "can_qx", "can_qy", "can_qz",
                                  "can_tx", "can_ty", "can_tz"};

struct HeaderLayout {
  // marker name -> column indices (x, y, z)
  std::vector<std::pair<std::string, std::array<int, 3>>> markers;
  std::array<int, 7> can_pose{-1, -1, -1, -1, -1, -1, -1};
  int finger = -1;
};

HeaderLayout parse_header(const std::vector<std::string>& header,
                          const std::string& path) {
  if (header.empty() || header[0] != "time") {
    throw ParseError("malformed header in " + path + ": first column must be 'time'");
  }
  HeaderLayout layout;
  std::map<std::string, std::array<int, 3>> partial;
  std::vector<std::string> order;
  for (size_t c = 1; c < header.size(); ++c) {
    const std::string& name = header[c];
    if (name == "finger_y") {
      layout.finger = static_cast<int>(c);
      continue;
    }
    bool is_pose = false;
    for (int k = 0; k < 7; ++k) {
      if (name == kCanPoseColumns[k]) {
        layout.can_pose[k] = static_cast<int>(c);
        is_pose = true;
        break;
      }
    }
    if (is_pose) continue;
    size_t underscore = name.rfind('_');
    if (underscore == std::string::npos || underscore + 2 != name.size()) {
      throw ParseError("malformed header in " + path + ": column '" + name + "'");
    }
    char axis = name.back();
    int idx = axis == 'x' ? 0 : axis == 'y' ? 1 : axis == 'z' ? 2 : -1;
    if (idx < 0) {
      throw ParseError("malformed header in " + path + ": column '" + name + "'");
    }
    std::string marker = name.substr(0, underscore);
    if (!partial.count(marker)) order.push_back(marker);
    partial[marker][idx] = static_cast<int>(c);
  }
  bool any_pose = false, all_pose = true;
  for (int k = 0; k < 7; ++k) {
    any_pose = any_pose || layout.can_pose[k] >= 0;
    all_pose = all_pose && layout.can_pose[k] >= 0;
  }
  if (any_pose && !all_pose) {
    throw ParseError("malformed header in " + path +
                     ": incomplete can pose columns");
  }
  for (const std::string& marker : order) {
    const auto& cols = partial[marker];
    for (int k = 0; k < 3; ++k) {
      if (cols[k] <= 0) {
        throw ParseError("malformed header in " + path + ": marker '" +
                         marker + "' missing an axis column");
      }
    }
    layout.markers.emplace_back(marker, cols);
  }
  return layout;
}

std::optional<double> parse_cell(const std::vector<std::string>& row, int col,
                                 const std::string& context) {
  if (col < 0 || static_cast<size_t>(col) >= row.size()) return std::nullopt;
  const std::string& cell = row[col];
  if (cell.empty()) return std::nullopt;
  return parse_double(cell, context);
}

}  // namespace

MocapData parse_mocap_csv(const std::string& path) {
  CsvTable table = read_csv(path);
  HeaderLayout layout = parse_header(table.header, path);

  MocapData data;
  for (const auto& [name, cols] : layout.markers) {
    MarkerTrack t;
    t.marker_id = name;
    data.markers.push_back(std::move(t));
  }
  if (layout.can_pose[0] >= 0) data.can_pose = PoseTrack{};

  double prev_time = -std::numeric_limits<double>::infinity();
  for (size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    std::string ctx = path + " row " + std::to_string(r + 2);
    if (row.empty() || row[0].empty()) {
      throw ParseError("missing time value in " + ctx);
    }
    double t = parse_double(row[0], ctx);
    if (!(t > prev_time)) {
      throw ParseError("non-monotonic time in " + ctx);
    }
    prev_time = t;
    data.times.push_back(t);

    for (size_t mi = 0; mi < layout.markers.size(); ++mi) {
      const auto& cols = layout.markers[mi].second;
      auto x = parse_cell(row, cols[0], ctx);
      auto y = parse_cell(row, cols[1], ctx);
      auto z = parse_cell(row, cols[2], ctx);
      MarkerTrack& track = data.markers[mi];
      track.times.push_back(t);
      if (x && y && z) {
        track.positions.push_back(Vec3(*x, *y, *z));
      } else {
        track.positions.push_back(std::nullopt);  // flagged gap
      }
    }
    if (data.can_pose) {
      std::array<std::optional<double>, 7> vals;
      bool all = true;
      for (int k = 0; k < 7; ++k) {
        vals[k] = parse_cell(row, layout.can_pose[k], ctx);
        all = all && vals[k].has_value();
      }
      data.can_pose->times.push_back(t);
      if (all) {
        Eigen::Quaterniond q(*vals[0], *vals[1], *vals[2], *vals[3]);
        if (q.norm() < 1e-9) {
          throw ParseError("zero quaternion in " + ctx);
        }
        q.normalize();
        RigidFrame f;
        f.rotation = q.toRotationMatrix();
        f.translation = Vec3(*vals[4], *vals[5], *vals[6]);
        data.can_pose->frames.push_back(f);
      } else {
        data.can_pose->frames.push_back(std::nullopt);
      }
    }
    if (layout.finger >= 0) {
      data.finger_y.push_back(parse_cell(row, layout.finger, ctx));
    }
  }

  if (data.times.size() >= 2) {
    std::vector<double> dts;
    for (size_t i = 1; i < data.times.size(); ++i) {
      dts.push_back(data.times[i] - data.times[i - 1]);
    }
    std::nth_element(dts.begin(), dts.begin() + dts.size() / 2, dts.end());
    double median = dts[dts.size() / 2];
    if (median > 0) data.sample_rate = 1.0 / median;
  }
  for (MarkerTrack& t : data.markers) t.sample_rate = data.sample_rate;
  return data;
}

RigidFrame surface_frame(const Vec3& bl, const Vec3& br, const Vec3& tl) {
  return frame_from_points(bl, br, tl);
}

RigidFrame nozzle_in_surface(const RigidFrame& wTs, const RigidFrame& wTc,
                             const RigidFrame& cTn) {
  return wTs.inverse().compose(wTc).compose(cTn);
}

NozzleTrace build_nozzle_trace(const MocapData& data, const RigidFrame& cTn) {
  const MarkerTrack* bl = data.find("surf_bl");
  const MarkerTrack* br = data.find("surf_br");
  const MarkerTrack* tl = data.find("surf_tl");
  if (!bl || !br || !tl) {
    throw ParseError("mocap data missing surf_bl/surf_br/surf_tl markers");
  }
  const MarkerTrack* can1 = data.find("can_m1");
  const MarkerTrack* can2 = data.find("can_m2");
  const MarkerTrack* can3 = data.find("can_m3");
  bool marker_can = can1 && can2 && can3;
  if (!marker_can && !data.can_pose) {
    throw ParseError("mocap data has neither can_m1..can_m3 markers nor can pose columns");
  }

  NozzleTrace trace;
  for (size_t k = 0; k < data.times.size(); ++k) {
    if (!bl->positions[k] || !br->positions[k] || !tl->positions[k]) continue;

    RigidFrame wTc;
    if (data.can_pose) {
      if (!data.can_pose->frames[k]) continue;
      wTc = *data.can_pose->frames[k];
    } else {
      if (!can1->positions[k] || !can2->positions[k] || !can3->positions[k]) {
        continue;
      }
      wTc = frame_from_points(*can1->positions[k], *can2->positions[k],
                              *can3->positions[k]);
    }
    RigidFrame wTs = surface_frame(*bl->positions[k], *br->positions[k],
                                   *tl->positions[k]);
    trace.times.push_back(data.times[k]);
    trace.poses.push_back(nozzle_in_surface(wTs, wTc, cTn));
    trace.finger_y.push_back(data.finger_y.empty() ? std::nullopt
                                                   : data.finger_y[k]);
  }
  return trace;
}

void SegmentationConfig::validate() const {
  if (!(closure_dist_max > 0) || !(paint_speed_max > 0) ||
      !(arclength_min > 0) || nms_window == 0) {
    throw ParseError("segmentation thresholds must be positive");
  }
}

namespace {

std::vector<std::pair<size_t, size_t>> runs_of(const std::vector<bool>& flags) {
  std::vector<std::pair<size_t, size_t>> runs;  // [begin, end)
  size_t n = flags.size();
  size_t begin = 0;
  for (size_t i = 1; i <= n; ++i) {
    if (i == n || flags[i] != flags[begin]) {
      runs.emplace_back(begin, i);
      begin = i;
    }
  }
  return runs;
}

}  // namespace

std::vector<Stroke> segment_strokes(const NozzleTrace& trace,
                                    const SegmentationConfig& cfg) {
  cfg.validate();
  const size_t n = trace.size();
  if (n < 2) throw PlanError("segment_strokes: trace needs >= 2 samples");

  std::vector<Vec2> pts(n);
  for (size_t k = 0; k < n; ++k) pts[k] = trace.projected(k);

  // Central-difference speed at the native rate, one-sided at the ends.
  std::vector<double> speed(n);
  for (size_t k = 0; k < n; ++k) {
    size_t a = k == 0 ? 0 : k - 1;
    size_t b = k + 1 == n ? n - 1 : k + 1;
    double dt = trace.times[b] - trace.times[a];
    speed[k] = dt > 0 ? (pts[b] - pts[a]).norm() / dt : 0.0;
  }

  auto finger_down = [&](size_t k) {
    if (!cfg.finger_y_threshold || trace.finger_y.empty()) return false;
    const auto& v = trace.finger_y[k];
    return v && *v <= *cfg.finger_y_threshold;
  };

  std::vector<bool> base(n);
  for (size_t k = 0; k < n; ++k) {
    base[k] = speed[k] <= cfg.paint_speed_max || finger_down(k);
  }

  // Score each candidate run: all geometric gates must pass, OR a majority
  // finger-down vote keeps it.
  std::vector<bool> flags(n, false);
  for (auto [b, e] : runs_of(base)) {
    if (!base[b]) continue;
    double arclen = 0.0;
    double max_speed = 0.0;
    size_t down = 0;
    for (size_t k = b; k < e; ++k) {
      if (k > b) arclen += (pts[k] - pts[k - 1]).norm();
      max_speed = std::max(max_speed, speed[k]);
      if (finger_down(k)) ++down;
    }
    bool closure = (pts[e - 1] - pts[b]).norm() <= cfg.closure_dist_max;
    bool gates = closure && max_speed <= cfg.paint_speed_max &&
                 arclen >= cfg.arclength_min;
    bool finger_vote = cfg.finger_y_threshold && 2 * down > (e - b);
    if (gates || finger_vote) {
      for (size_t k = b; k < e; ++k) flags[k] = true;
    }
  }

  // Non-maximum suppression: absorb runs shorter than the window into their
  // neighbor until the classification is stable.
  while (true) {
    auto runs = runs_of(flags);
    if (runs.size() <= 1) break;
    bool changed = false;
    for (auto [b, e] : runs) {
      if (e - b < cfg.nms_window) {
        bool cls = b > 0 ? flags[b - 1] : flags[e];
        for (size_t k = b; k < e; ++k) flags[k] = cls;
        changed = true;
        break;
      }
    }
    if (!changed) break;
  }

  for (const ManualOverride& ov : cfg.manual_overrides) {
    size_t e = std::min(ov.end, n);
    for (size_t k = ov.begin; k < e; ++k) flags[k] = ov.paint;
  }

  // Emit strokes, folding single-sample runs into the previous stroke so
  // every stroke keeps >= 2 points while the index partition is preserved.
  std::vector<Stroke> strokes;
  for (auto [b, e] : runs_of(flags)) {
    if (e - b < 2 && !strokes.empty()) {
      Stroke& prev = strokes.back();
      for (size_t k = b; k < e; ++k) {
        prev.points.push_back(pts[k]);
        prev.vertex_times->push_back(trace.times[k]);
      }
      continue;
    }
    Stroke s;
    s.paint = flags[b];
    s.vertex_times.emplace();
    for (size_t k = b; k < e; ++k) {
      s.points.push_back(pts[k]);
      s.vertex_times->push_back(trace.times[k]);
    }
    strokes.push_back(std::move(s));
  }
  // A leading 1-sample run has no predecessor; fold it forward.
  if (strokes.size() >= 2 && strokes.front().points.size() < 2) {
    Stroke head = strokes.front();
    strokes.erase(strokes.begin());
    Stroke& next = strokes.front();
    next.points.insert(next.points.begin(), head.points.begin(),
                       head.points.end());
    next.vertex_times->insert(next.vertex_times->begin(),
                              head.vertex_times->begin(),
                              head.vertex_times->end());
  }
  return strokes;
}

void export_library(
    const std::vector<std::pair<std::string, std::vector<Stroke>>>& shapes,
    const std::string& path) {
  StrokeLibrary lib;
  for (const auto& [name, strokes] : shapes) {
    lib.add(name, strokes);  // throws on duplicate names
  }
  save_library(lib, path);
}

}  // namespace cablepaint
