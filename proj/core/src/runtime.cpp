#include "cablepaint/runtime.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>

#include "cablepaint/csv.hpp"
#include "cablepaint/errors.hpp"

namespace cablepaint {

void RuntimeConfig::validate(double schedule_dt) const {
  if (!(control_rate > 0) || sim_substeps < 1) {
    throw SimulateError("bad runtime configuration");
  }
  if (control_rate * schedule_dt < 10.0 - 1e-9) {
    throw SimulateError("control_rate must be at least 10x the schedule rate");
  }
  if (encoder_noise_std < 0 || rate_noise_std < 0 || paint_latency < 0) {
    throw SimulateError("noise and latency must be nonnegative");
  }
}

InterpolatedStep interpolate_schedule(const ControlSchedule& schedule,
                                      double t) {
  if (schedule.steps.empty()) throw SimulateError("empty schedule");
  double span = schedule.span();
  if (t < -1e-12 || t > span + 1e-12) {
    throw SimulateError("time outside schedule span");
  }
  size_t k = static_cast<size_t>(std::floor(std::max(0.0, t) / schedule.dt));
  if (k >= schedule.steps.size()) k = schedule.steps.size() - 1;
  const ScheduleStep& step = schedule.steps[k];
  InterpolatedStep out;
  out.u_ff = step.u_ff;
  out.gain = step.gain;
  double dt_in = t - static_cast<double>(k) * schedule.dt;
  out.x_ff = step.x_ff;
  out.x_ff.head<2>() += dt_in * step.x_ff.tail<2>();
  return out;
}

Vec2 estimate_position(const RobotModel& model, const Vec4& lengths) {
  // Top two cables by pulley height; cables 2 and 3 in the stock geometry.
  int i2 = 0, i3 = 1;
  {
    std::array<int, 4> idx{0, 1, 2, 3};
    std::sort(idx.begin(), idx.end(), [&](int a, int b) {
      if (model.pulleys[a].y() != model.pulleys[b].y()) {
        return model.pulleys[a].y() > model.pulleys[b].y();
      }
      return a < b;
    });
    i2 = std::min(idx[0], idx[1]);
    i3 = std::max(idx[0], idx[1]);
  }
  Vec2 c2 = model.pulleys[i2] - model.mounts[i2];
  Vec2 c3 = model.pulleys[i3] - model.mounts[i3];
  double r2 = lengths[i2];
  double r3 = lengths[i3];

  Vec2 axis = c3 - c2;
  double d = axis.norm();
  if (d < 1e-9) throw SimulateError("estimator centers coincide");
  if (d > r2 + r3 + 1e-6 || d < std::abs(r2 - r3) - 1e-6) {
    throw SimulateError("inconsistent cable lengths: circles do not intersect");
  }
  double a = (d * d + r2 * r2 - r3 * r3) / (2.0 * d);
  double h2 = r2 * r2 - a * a;
  if (h2 < -1e-6 * std::max(1.0, r2 * r2)) {
    throw SimulateError("inconsistent cable lengths: circles do not intersect");
  }
  double h = std::sqrt(std::max(0.0, h2));
  Vec2 u = axis / d;
  Vec2 base = c2 + a * u;
  Vec2 n = perp(u);
  Vec2 lo = base - h * n;
  Vec2 hi = base + h * n;
  return lo.y() <= hi.y() ? lo : hi;  // below the pulley line
}

Vec2 estimate_velocity(const RobotModel& model, const PlanarPose& pose,
                       const Vec4& ldot) {
  Eigen::Matrix<double, 2, 4> wt = wrench_matrix(model, pose).bottomRows<2>();
  // ldot = -W_trans^T pdot; least squares via the normal equations.
  Mat2 gram = wt * wt.transpose();
  Eigen::LDLT<Mat2> ldlt(gram);
  if (ldlt.info() != Eigen::Success ||
      gram.determinant() < 1e-12) {
    throw SimulateError("rank-deficient wrench matrix in velocity estimate");
  }
  return ldlt.solve(-wt * ldot);
}

Vec4 control_step(const ControlSchedule& schedule, double t,
                  const Vec4& x_hat) {
  InterpolatedStep s = interpolate_schedule(schedule, t);
  return s.u_ff + s.gain * (s.x_ff - x_hat);
}

namespace {

// Deterministic standard normal (Box-Muller), independent of the standard
// library's distribution implementation.
class NormalSampler {
 public:
  explicit NormalSampler(uint64_t seed) : gen_(seed) {}
  double operator()() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = 0.0;
    do {
      u1 = unit_(gen_);
    } while (u1 <= 1e-300);
    double u2 = unit_(gen_);
    double r = std::sqrt(-2.0 * std::log(u1));
    double theta = 2.0 * M_PI * u2;
    spare_ = r * std::sin(theta);
    have_spare_ = true;
    return r * std::cos(theta);
  }

 private:
  std::mt19937_64 gen_;
  std::uniform_real_distribution<double> unit_{0.0, 1.0};
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace

SimulationLog simulate(const RobotModel& model, const ControlSchedule& schedule,
                       const RuntimeConfig& cfg) {
  cfg.validate(schedule.dt);
  if (schedule.steps.size() < 2) throw SimulateError("schedule too short");

  const double tick_dt = 1.0 / cfg.control_rate;
  const double span = schedule.span();
  const size_t n_ticks = static_cast<size_t>(std::round(span / tick_dt)) + 1;
  const double sub_dt = tick_dt / cfg.sim_substeps;
  const size_t latency_ticks =
      static_cast<size_t>(std::round(cfg.paint_latency / tick_dt));

  Vec2 frame_lo, frame_hi;
  model.frame_bounds(frame_lo, frame_hi);
  Vec2 frame_span = frame_hi - frame_lo;

  PlanarState state;
  if (cfg.initial_state) {
    state = *cfg.initial_state;
  } else {
    state.pose.theta = 0.0;
    state.pose.p = schedule.steps.front().x_ff.head<2>();
    state.twist = PlanarTwist{};
  }

  NormalSampler noise(cfg.seed);
  auto paint_at = [&](double t) {
    size_t k = static_cast<size_t>(std::floor(t / schedule.dt));
    if (k >= schedule.steps.size()) k = schedule.steps.size() - 1;
    return schedule.steps[k].paint;
  };

  SimulationLog log;
  log.tick_dt = tick_dt;
  log.ticks.reserve(n_ticks);
  std::vector<bool> cmd_history(n_ticks, false);

  for (size_t tick = 0; tick < n_ticks; ++tick) {
    double t = std::min(static_cast<double>(tick) * tick_dt, span);

    // Sense.
    CableGeometries cables = cable_vectors(model, state.pose);
    Vec4 l_meas, ldot_meas;
    Vec4 ldot_true = cable_rates(model, state.pose, state.twist);
    for (int i = 0; i < 4; ++i) {
      l_meas[i] = cables[i].length +
                  (cfg.encoder_noise_std > 0 ? cfg.encoder_noise_std * noise() : 0.0);
      ldot_meas[i] = ldot_true[i] +
                     (cfg.rate_noise_std > 0 ? cfg.rate_noise_std * noise() : 0.0);
    }

    // Estimate.
    Vec2 p_hat = estimate_position(model, l_meas);
    Vec2 v_hat = estimate_velocity(model, PlanarPose{0.0, p_hat}, ldot_meas);
    Vec4 x_hat;
    x_hat << p_hat, v_hat;

    // Control.
    InterpolatedStep ref = interpolate_schedule(schedule, t);
    Vec4 tau = ref.u_ff + ref.gain * (ref.x_ff - x_hat);

    // Paint: command leads the schedule by the actuator latency.
    bool cmd = paint_at(std::min(t + cfg.paint_latency, span));
    cmd_history[tick] = cmd;
    bool on = tick >= latency_ticks ? cmd_history[tick - latency_ticks] : false;

    LogTick entry;
    entry.t = t;
    entry.pose = state.pose;
    entry.twist = state.twist;
    entry.x_hat = x_hat;
    entry.x_ff = ref.x_ff;
    entry.torque = tau;
    entry.paint_cmd = cmd;
    entry.paint_on = on;

    // Plant.
    Vec4 tensions = Vec4::Zero();
    for (int s = 0; s < cfg.sim_substeps; ++s) {
      ForwardDynamics fd = forward_dynamics(model, state.pose, state.twist, tau);
      tensions = fd.tensions;
      state.twist.omega += sub_dt * fd.accel.alpha;
      state.twist.v += sub_dt * fd.accel.a;
      state.pose.theta += sub_dt * state.twist.omega;
      state.pose.p += sub_dt * state.twist.v;
    }
    entry.tensions = tensions;
    log.ticks.push_back(entry);

    Vec2 rel = state.pose.p - 0.5 * (frame_lo + frame_hi);
    if (std::abs(rel.x()) > frame_span.x() || std::abs(rel.y()) > frame_span.y()) {
      throw SimulateError("plant diverged outside twice the frame bounds");
    }
  }
  return log;
}

namespace {

// Catmull-Rom evaluation on a uniform grid.
double cubic_at(const std::vector<double>& samples, double dt, double t) {
  size_t n = samples.size();
  if (n == 1) return samples[0];
  double s = t / dt;
  double fi = std::floor(s);
  long i = static_cast<long>(fi);
  if (i < 0) return samples.front();
  if (i >= static_cast<long>(n - 1)) return samples.back();
  double f = s - fi;
  double p1 = samples[i];
  double p2 = samples[i + 1];
  double p0 = i > 0 ? samples[i - 1] : 2.0 * p1 - p2;
  double p3 = i + 2 < static_cast<long>(n) ? samples[i + 2] : 2.0 * p2 - p1;
  double f2 = f * f, f3 = f2 * f;
  return 0.5 * ((2.0 * p1) + (-p0 + p2) * f +
                (2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3) * f2 +
                (-p0 + 3.0 * p1 - 3.0 * p2 + p3) * f3);
}

}  // namespace

Metrics metrics(const SimulationLog& log, double ground_truth_rate) {
  if (log.ticks.empty()) throw SimulateError("empty simulation log");
  size_t n = log.ticks.size();
  std::vector<double> x(n), y(n), th(n), hx(n), hy(n), fx(n), fy(n);
  for (size_t i = 0; i < n; ++i) {
    const LogTick& tk = log.ticks[i];
    x[i] = tk.pose.p.x();
    y[i] = tk.pose.p.y();
    th[i] = tk.pose.theta;
    hx[i] = tk.x_hat[0];
    hy[i] = tk.x_hat[1];
    fx[i] = tk.x_ff[0];
    fy[i] = tk.x_ff[1];
  }
  double duration = log.ticks.back().t;
  double out_dt = 1.0 / ground_truth_rate;
  size_t m = static_cast<size_t>(std::floor(duration / out_dt + 1e-9)) + 1;

  double track = 0.0, est = 0.0, rot = 0.0;
  for (size_t k = 0; k < m; ++k) {
    double t = static_cast<double>(k) * out_dt;
    double tx = cubic_at(x, log.tick_dt, t);
    double ty = cubic_at(y, log.tick_dt, t);
    Vec2 e_track(cubic_at(fx, log.tick_dt, t) - tx,
                 cubic_at(fy, log.tick_dt, t) - ty);
    Vec2 e_est(cubic_at(hx, log.tick_dt, t) - tx,
               cubic_at(hy, log.tick_dt, t) - ty);
    double theta = cubic_at(th, log.tick_dt, t);
    track += e_track.squaredNorm();
    est += e_est.squaredNorm();
    rot += theta * theta;
  }
  Metrics out;
  out.tracking_rmse = std::sqrt(track / m);
  out.estimation_rmse = std::sqrt(est / m);
  out.rotation_rms_deg = std::sqrt(rot / m) * 180.0 / M_PI;
  return out;
}

double painted_arc_length(const SimulationLog& log) {
  double len = 0.0;
  for (size_t i = 1; i < log.ticks.size(); ++i) {
    if (log.ticks[i].paint_on && log.ticks[i - 1].paint_on) {
      len += (log.ticks[i].pose.p - log.ticks[i - 1].pose.p).norm();
    }
  }
  return len;
}

void save_simlog(const SimulationLog& log, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot write file: " + path);
  out << "t,x,y,theta,vx,vy,omega,xhat_px,xhat_py,xhat_vx,xhat_vy,"
         "xff_px,xff_py,xff_vx,xff_vy,tau1,tau2,tau3,tau4,"
         "t1,t2,t3,t4,paint_cmd,paint_on\n";
  for (const LogTick& tk : log.ticks) {
    out << format_double(tk.t) << ',' << format_double(tk.pose.p.x()) << ','
        << format_double(tk.pose.p.y()) << ',' << format_double(tk.pose.theta)
        << ',' << format_double(tk.twist.v.x()) << ','
        << format_double(tk.twist.v.y()) << ',' << format_double(tk.twist.omega);
    for (int i = 0; i < 4; ++i) out << ',' << format_double(tk.x_hat[i]);
    for (int i = 0; i < 4; ++i) out << ',' << format_double(tk.x_ff[i]);
    for (int i = 0; i < 4; ++i) out << ',' << format_double(tk.torque[i]);
    for (int i = 0; i < 4; ++i) out << ',' << format_double(tk.tensions[i]);
    out << ',' << (tk.paint_cmd ? 1 : 0) << ',' << (tk.paint_on ? 1 : 0) << '\n';
  }
}

SimulationLog load_simlog(const std::string& path) {
  CsvTable table = read_csv(path);
  if (table.header.size() != 25 || table.header[0] != "t") {
    throw ParseError("not a simulation log CSV: " + path);
  }
  SimulationLog log;
  for (size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    std::string ctx = path + " row " + std::to_string(r + 2);
    if (row.size() != 25) throw ParseError("wrong column count in " + ctx);
    LogTick tk;
    tk.t = parse_double(row[0], ctx);
    tk.pose.p = Vec2(parse_double(row[1], ctx), parse_double(row[2], ctx));
    tk.pose.theta = parse_double(row[3], ctx);
    tk.twist.v = Vec2(parse_double(row[4], ctx), parse_double(row[5], ctx));
    tk.twist.omega = parse_double(row[6], ctx);
    for (int i = 0; i < 4; ++i) tk.x_hat[i] = parse_double(row[7 + i], ctx);
    for (int i = 0; i < 4; ++i) tk.x_ff[i] = parse_double(row[11 + i], ctx);
    for (int i = 0; i < 4; ++i) tk.torque[i] = parse_double(row[15 + i], ctx);
    for (int i = 0; i < 4; ++i) tk.tensions[i] = parse_double(row[19 + i], ctx);
    tk.paint_cmd = parse_double(row[23], ctx) != 0.0;
    tk.paint_on = parse_double(row[24], ctx) != 0.0;
    log.ticks.push_back(tk);
  }
  if (log.ticks.size() >= 2) log.tick_dt = log.ticks[1].t - log.ticks[0].t;
  if (log.ticks.empty()) throw ParseError("empty simulation log: " + path);
  return log;
}

}  // namespace cablepaint
