#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cablepaint/geometry.hpp"
#include "cablepaint/stroke.hpp"

namespace cablepaint {

// One labeled mocap marker. Missing samples stay in the vector as explicit
// gaps so downstream code decides what to drop; they are never interpolated.
struct MarkerTrack {
  std::string marker_id;
  std::vector<double> times;
  std::vector<std::optional<Vec3>> positions;
  double sample_rate = 120.0;
};

// Pre-fused rigid pose per timestep (the vendor-software CSV layout).
struct PoseTrack {
  std::vector<double> times;
  std::vector<std::optional<RigidFrame>> frames;
};

struct MocapData {
  std::vector<double> times;
  std::vector<MarkerTrack> markers;
  std::optional<PoseTrack> can_pose;
  std::vector<std::optional<double>> finger_y;  // empty when column absent
  double sample_rate = 120.0;

  const MarkerTrack* find(const std::string& id) const;
};

// Mocap CSV: header `time,<marker>_x,<marker>_y,<marker>_z,...` with
// optional `can_qw..can_qz,can_tx..can_tz` pose columns and an optional
// `finger_y` column. Empty cell = gap.
MocapData parse_mocap_csv(const std::string& path);

// Nozzle pose per kept timestep, expressed in the painting-surface frame.
struct NozzleTrace {
  std::vector<double> times;
  std::vector<RigidFrame> poses;
  std::vector<std::optional<double>> finger_y;  // aligned with times

  size_t size() const { return times.size(); }
  Vec2 projected(size_t k) const {
    return poses[k].translation.head<2>();
  }
};

// surface frame from its three corner markers: origin bl, x toward br,
// y the Gram-Schmidt remainder of (tl - bl).
RigidFrame surface_frame(const Vec3& bl, const Vec3& br, const Vec3& tl);

// (wTs)^-1 * wTc * cTn.
RigidFrame nozzle_in_surface(const RigidFrame& wTs, const RigidFrame& wTc,
                             const RigidFrame& cTn);

// Walks the mocap rows, drops any timestep with a missing required marker,
// and composes the nozzle pose in the surface frame. The can frame comes
// from the pre-fused pose columns when present, otherwise from markers
// can_m1 (origin), can_m2 (x), can_m3 (y).
NozzleTrace build_nozzle_trace(const MocapData& data, const RigidFrame& cTn);

struct ManualOverride {
  size_t begin = 0;  // sample index, inclusive
  size_t end = 0;    // exclusive
  bool paint = false;
};

struct SegmentationConfig {
  double closure_dist_max = 0.02;  // m
  double paint_speed_max = 6.0;    // m/s
  double arclength_min = 0.1;      // m
  size_t nms_window = 5;           // samples
  std::optional<double> finger_y_threshold;  // m, can frame
  std::vector<ManualOverride> manual_overrides;

  void validate() const;
};

// Partitions the trace into contiguous paint/travel strokes. Candidate paint
// segments must pass all geometric gates (closure, speed, arc length); a
// majority finger-down vote can rescue a segment when the finger track
// exists; flicker shorter than nms_window is merged into its neighbor; manual
// overrides win unconditionally.
std::vector<Stroke> segment_strokes(const NozzleTrace& trace,
                                    const SegmentationConfig& cfg);

// Writes named stroke sets as a shape-library file; round-trips exactly.
void export_library(
    const std::vector<std::pair<std::string, std::vector<Stroke>>>& shapes,
    const std::string& path);

}  // namespace cablepaint
