#pragma once

#include <string>
#include <vector>

#include "cablepaint/pathgen.hpp"

namespace cablepaint {

struct ClassLimits {
  double v_max = 0.0;  // m/s
  double a_max = 0.0;  // m/s^2
};

// Speed/acceleration limits per stroke class, set by the paint dispersion of
// the respective nozzles.
struct LimitSet {
  ClassLimits outline{1.2, 20.0};
  ClassLimits infill_travel{0.5, 20.0};

  const ClassLimits& for_class(StrokeClass cls) const {
    return cls == StrokeClass::outline ? outline : infill_travel;
  }
  void validate() const;
};

// Finite-difference kinematics of a polyline stroke under its recorded
// vertex times, or 1 s per segment when the stroke carries no timing.
struct StrokeKinematics {
  std::vector<double> times;          // parameter time per vertex
  std::vector<double> segment_speed;  // one per segment
  std::vector<Vec2> vertex_velocity;  // central differences
  std::vector<Vec2> vertex_accel;     // central differences
  double peak_speed = 0.0;
  double peak_accel = 0.0;
};

StrokeKinematics naive_kinematics(const Stroke& stroke);

// Linear time scaling t' = c t with
//   c = max(peak_speed / v_max, sqrt(peak_accel / a_max), 1).
double time_scale_factor(const StrokeKinematics& kin, const ClassLimits& lim);

// Rest-to-rest scalar profile along a straight distance.
struct TrapezoidProfile {
  double distance = 0.0;
  double accel = 0.0;
  double v_peak = 0.0;
  double t_accel = 0.0;
  double t_cruise = 0.0;

  static TrapezoidProfile plan(double distance, double v_max, double a_max);
  double total_time() const { return 2.0 * t_accel + t_cruise; }
  double position(double t) const;
  double velocity(double t) const;
};

struct TrajSample {
  Vec2 p = Vec2::Zero();
  Vec2 v = Vec2::Zero();
  bool paint = false;
  StrokeClass cls = StrokeClass::travel;
};

// Fixed-rate state samples; the artist-intent signal handed to the
// optimizer. Timestamps are exactly k dt.
struct TimedTrajectory {
  double dt = 0.01;
  std::vector<TrajSample> samples;

  double duration() const {
    return samples.empty() ? 0.0 : dt * (samples.size() - 1);
  }
};

// Samples a continuous paint path at dt. Outline strokes keep their recorded
// timing, linearly slowed to the limits and eased to rest at both ends;
// infill and travel strokes run one rest-to-rest trapezoid per polyline
// edge. All junctions are at rest, so velocity is continuous everywhere.
TimedTrajectory discretize(const PaintPath& path, const LimitSet& limits,
                           double dt = 0.01);

void save_trajectory(const TimedTrajectory& traj, const std::string& path);
TimedTrajectory load_trajectory(const std::string& path);

}  // namespace cablepaint
