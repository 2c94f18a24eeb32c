#include "cablepaint/trajgen.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "cablepaint/csv.hpp"
#include "cablepaint/errors.hpp"

namespace cablepaint {

void LimitSet::validate() const {
  if (!(outline.v_max > 0) || !(outline.a_max > 0) ||
      !(infill_travel.v_max > 0) || !(infill_travel.a_max > 0)) {
    throw PlanError("limits must be positive");
  }
}

StrokeKinematics naive_kinematics(const Stroke& stroke) {
  stroke.validate();
  const size_t n = stroke.points.size();
  StrokeKinematics kin;
  if (stroke.vertex_times) {
    kin.times = *stroke.vertex_times;
  } else {
    kin.times.resize(n);
    for (size_t i = 0; i < n; ++i) kin.times[i] = static_cast<double>(i);
  }

  kin.segment_speed.resize(n - 1);
  for (size_t i = 0; i + 1 < n; ++i) {
    double dt = kin.times[i + 1] - kin.times[i];
    kin.segment_speed[i] =
        (stroke.points[i + 1] - stroke.points[i]).norm() / dt;
  }

  kin.vertex_velocity.resize(n);
  kin.vertex_accel.resize(n);
  for (size_t i = 0; i < n; ++i) {
    size_t a = i == 0 ? 0 : i - 1;
    size_t b = i + 1 == n ? n - 1 : i + 1;
    double span = kin.times[b] - kin.times[a];
    kin.vertex_velocity[i] = (stroke.points[b] - stroke.points[a]) / span;
  }
  for (size_t i = 0; i < n; ++i) {
    if (i == 0 || i + 1 == n) continue;
    double h0 = kin.times[i] - kin.times[i - 1];
    double h1 = kin.times[i + 1] - kin.times[i];
    Vec2 d0 = (stroke.points[i] - stroke.points[i - 1]) / h0;
    Vec2 d1 = (stroke.points[i + 1] - stroke.points[i]) / h1;
    kin.vertex_accel[i] = 2.0 * (d1 - d0) / (h0 + h1);
  }
  if (n > 2) {
    kin.vertex_accel[0] = kin.vertex_accel[1];
    kin.vertex_accel[n - 1] = kin.vertex_accel[n - 2];
  } else {
    kin.vertex_accel[0] = kin.vertex_accel[1] = Vec2::Zero();
  }

  for (double s : kin.segment_speed) kin.peak_speed = std::max(kin.peak_speed, s);
  for (const Vec2& a : kin.vertex_accel) {
    kin.peak_accel = std::max(kin.peak_accel, a.norm());
  }
  return kin;
}

double time_scale_factor(const StrokeKinematics& kin, const ClassLimits& lim) {
  if (kin.times.back() <= kin.times.front()) {
    throw PlanError("time_scale: zero-length stroke");
  }
  double c_speed = kin.peak_speed / lim.v_max;
  double c_accel = std::sqrt(std::max(0.0, kin.peak_accel) / lim.a_max);
  return std::max({c_speed, c_accel, 1.0});
}

TrapezoidProfile TrapezoidProfile::plan(double distance, double v_max,
                                        double a_max) {
  if (distance < 0) throw PlanError("trapezoid distance must be >= 0");
  TrapezoidProfile p;
  p.distance = distance;
  p.accel = a_max;
  if (distance == 0.0) {
    p.v_peak = 0.0;
    p.t_accel = 0.0;
    p.t_cruise = 0.0;
    return p;
  }
  double d_ramp = v_max * v_max / a_max;  // accel + decel distance at v_max
  if (distance >= d_ramp) {
    p.v_peak = v_max;
    p.t_accel = v_max / a_max;
    p.t_cruise = (distance - d_ramp) / v_max;
  } else {
    p.v_peak = std::sqrt(distance * a_max);
    p.t_accel = p.v_peak / a_max;
    p.t_cruise = 0.0;
  }
  return p;
}

double TrapezoidProfile::position(double t) const {
  if (t <= 0.0) return 0.0;
  double total = total_time();
  if (t >= total) return distance;
  if (t < t_accel) return 0.5 * accel * t * t;
  double d_acc = 0.5 * accel * t_accel * t_accel;
  if (t < t_accel + t_cruise) return d_acc + v_peak * (t - t_accel);
  double td = total - t;
  return distance - 0.5 * accel * td * td;
}

double TrapezoidProfile::velocity(double t) const {
  double total = total_time();
  if (t <= 0.0 || t >= total) return 0.0;
  if (t < t_accel) return accel * t;
  if (t < t_accel + t_cruise) return v_peak;
  return accel * (total - t);
}

namespace {

// Piecewise-linear path position/velocity under a scalar time map.
struct PolylineParam {
  std::vector<Vec2> pts;
  std::vector<double> times;  // per vertex, strictly increasing

  Vec2 position(double t) const {
    if (t <= times.front()) return pts.front();
    if (t >= times.back()) return pts.back();
    size_t hi = std::upper_bound(times.begin(), times.end(), t) - times.begin();
    size_t lo = hi - 1;
    double f = (t - times[lo]) / (times[hi] - times[lo]);
    return pts[lo] + f * (pts[hi] - pts[lo]);
  }
  Vec2 velocity(double t) const {
    if (t < times.front() || t >= times.back()) return Vec2::Zero();
    size_t hi = std::upper_bound(times.begin(), times.end(), t) - times.begin();
    if (hi == 0) hi = 1;
    size_t lo = hi - 1;
    return (pts[hi] - pts[lo]) / (times[hi] - times[lo]);
  }
  double duration() const { return times.back() - times.front(); }
};

struct SampledStroke {
  std::vector<Vec2> p;
  std::vector<Vec2> v;
};

size_t steps_for(double duration, double dt) {
  return static_cast<size_t>(std::ceil(duration / dt - 1e-9));
}

// Sample an outline stroke: recorded timing linearly scaled to the limits,
// eased to rest at both ends by running a unit-rate trapezoid over the
// scaled time axis. The easing only ever slows the stroke, so the speed
// limit holds by construction; the acceleration check below retries with a
// larger scale when corner transitions in the data are too sharp for dt.
SampledStroke sample_outline(const Stroke& stroke, const ClassLimits& lim,
                             double dt) {
  StrokeKinematics kin = naive_kinematics(stroke);
  double c = time_scale_factor(kin, lim);

  for (int attempt = 0; attempt < 60; ++attempt) {
    PolylineParam param;
    param.pts = stroke.points;
    param.times.resize(kin.times.size());
    for (size_t i = 0; i < kin.times.size(); ++i) {
      param.times[i] = c * (kin.times[i] - kin.times.front());
    }
    double span = param.duration();

    // Ramp rate of the time map; keeps the easing's own contribution to the
    // path acceleration under half the limit.
    double ease_accel = 0.5 * lim.a_max / lim.v_max;
    TrapezoidProfile ease = TrapezoidProfile::plan(span, 1.0, ease_accel);
    double total = ease.total_time();

    SampledStroke out;
    size_t steps = std::max<size_t>(1, steps_for(total, dt));
    for (size_t k = 0; k <= steps; ++k) {
      double s = std::min(static_cast<double>(k) * dt, total);
      double u = k == steps ? span : ease.position(s);
      double w = k == steps ? 0.0 : ease.velocity(s);
      out.p.push_back(param.position(u));
      out.v.push_back(param.velocity(u) * w);
    }
    out.p.back() = stroke.points.back();
    out.v.back() = Vec2::Zero();
    out.v.front() = Vec2::Zero();

    double worst = 0.0;
    for (size_t k = 0; k + 1 < out.v.size(); ++k) {
      worst = std::max(worst, (out.v[k + 1] - out.v[k]).norm() / dt);
    }
    if (worst <= lim.a_max + 5e-7) return out;
    c *= std::max(1.05, worst / lim.a_max);
  }
  throw PlanError("discretize: could not fit stroke within limits");
}

// Infill/travel strokes: one rest-to-rest trapezoid per polyline edge, so
// velocity is continuous (zero) through every direction change.
SampledStroke sample_trapezoid(const Stroke& stroke, const ClassLimits& lim,
                               double dt) {
  SampledStroke out;
  out.p.push_back(stroke.points.front());
  out.v.push_back(Vec2::Zero());
  for (size_t e = 0; e + 1 < stroke.points.size(); ++e) {
    Vec2 a = stroke.points[e];
    Vec2 b = stroke.points[e + 1];
    double dist = (b - a).norm();
    if (dist < 1e-12) continue;
    Vec2 dir = (b - a) / dist;
    TrapezoidProfile prof = TrapezoidProfile::plan(dist, lim.v_max, lim.a_max);
    double total = prof.total_time();
    size_t steps = std::max<size_t>(1, steps_for(total, dt));
    for (size_t k = 1; k <= steps; ++k) {
      double t = static_cast<double>(k) * dt;
      if (k == steps) {
        out.p.push_back(b);
        out.v.push_back(Vec2::Zero());
      } else {
        out.p.push_back(a + dir * prof.position(t));
        out.v.push_back(dir * prof.velocity(t));
      }
    }
  }
  if (out.p.size() < 2) {  // zero-length stroke still occupies one step
    out.p.push_back(stroke.points.back());
    out.v.push_back(Vec2::Zero());
  }
  return out;
}

}  // namespace

TimedTrajectory discretize(const PaintPath& path, const LimitSet& limits,
                           double dt) {
  limits.validate();
  if (!(dt > 0)) throw PlanError("dt must be > 0");
  if (path.strokes.empty()) throw PlanError("cannot discretize an empty path");
  if (path.max_junction_gap() > 1e-9) {
    throw PlanError("paint path is not position-continuous");
  }

  TimedTrajectory traj;
  traj.dt = dt;
  for (const PathStroke& ps : path.strokes) {
    const ClassLimits& lim = limits.for_class(ps.cls);
    SampledStroke s = ps.cls == StrokeClass::outline
                          ? sample_outline(ps.stroke, lim, dt)
                          : sample_trapezoid(ps.stroke, lim, dt);
    size_t begin = traj.samples.empty() ? 0 : 1;  // junction sample is shared
    for (size_t k = begin; k < s.p.size(); ++k) {
      TrajSample sample;
      sample.p = s.p[k];
      sample.v = s.v[k];
      sample.paint = ps.stroke.paint;
      sample.cls = ps.cls;
      traj.samples.push_back(sample);
    }
  }
  return traj;
}

void save_trajectory(const TimedTrajectory& traj, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot write file: " + path);
  out << "t,px,py,vx,vy,paint\n";
  for (size_t k = 0; k < traj.samples.size(); ++k) {
    const TrajSample& s = traj.samples[k];
    out << format_double(static_cast<double>(k) * traj.dt) << ','
        << format_double(s.p.x()) << ',' << format_double(s.p.y()) << ','
        << format_double(s.v.x()) << ',' << format_double(s.v.y()) << ','
        << (s.paint ? 1 : 0) << '\n';
  }
}

TimedTrajectory load_trajectory(const std::string& path) {
  CsvTable table = read_csv(path);
  if (table.header != std::vector<std::string>{"t", "px", "py", "vx", "vy",
                                               "paint"}) {
    throw ParseError("not a trajectory CSV: " + path);
  }
  TimedTrajectory traj;
  double prev_t = 0.0;
  for (size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    std::string ctx = path + " row " + std::to_string(r + 2);
    if (row.size() != 6) throw ParseError("wrong column count in " + ctx);
    double t = parse_double(row[0], ctx);
    TrajSample s;
    s.p = Vec2(parse_double(row[1], ctx), parse_double(row[2], ctx));
    s.v = Vec2(parse_double(row[3], ctx), parse_double(row[4], ctx));
    s.paint = parse_double(row[5], ctx) != 0.0;
    s.cls = s.paint ? StrokeClass::outline : StrokeClass::travel;
    if (r == 1) traj.dt = t - prev_t;
    prev_t = t;
    traj.samples.push_back(s);
  }
  if (traj.samples.empty()) throw ParseError("empty trajectory: " + path);
  return traj;
}

}  // namespace cablepaint
