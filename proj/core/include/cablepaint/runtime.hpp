#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cablepaint/ilqr.hpp"

namespace cablepaint {

struct RuntimeConfig {
  double control_rate = 1000.0;  // Hz
  double encoder_noise_std = 0.0;  // m, cable length
  double rate_noise_std = 0.0;     // m/s, cable rate
  std::optional<PlanarState> initial_state;  // default: schedule start, rest
  double paint_latency = 0.4;  // s between spray command and paint
  int sim_substeps = 4;        // plant integration substeps per tick
  uint64_t seed = 0;

  void validate(double schedule_dt) const;
};

struct LogTick {
  double t = 0.0;
  PlanarPose pose;      // ground truth
  PlanarTwist twist;    // ground truth
  Vec4 x_hat = Vec4::Zero();
  Vec4 x_ff = Vec4::Zero();
  Vec4 torque = Vec4::Zero();
  Vec4 tensions = Vec4::Zero();
  bool paint_cmd = false;
  bool paint_on = false;
};

struct SimulationLog {
  double tick_dt = 1e-3;
  std::vector<LogTick> ticks;
};

struct InterpolatedStep {
  Vec4 x_ff;
  Vec4 u_ff;
  Mat4 gain;
};

// Step k = floor(t / dt): K and u_ff zero-order held, x_ff position
// extrapolated linearly along the held velocity. Throws SimulateError when
// t is outside the schedule span.
InterpolatedStep interpolate_schedule(const ControlSchedule& schedule,
                                      double t);

// Position from the top two cable lengths assuming the body hangs vertical:
// intersect circles about (pulley - mount) with the measured radii and keep
// the intersection below the pulley line.
Vec2 estimate_position(const RobotModel& model, const Vec4& lengths);

// Least-squares velocity from cable rates: pdot = -(W_trans^T)^+ ldot.
Vec2 estimate_velocity(const RobotModel& model, const PlanarPose& pose,
                       const Vec4& ldot);

// tau = u_ff(t) + K(t) (x_ff(t) - x_hat); no clamping.
Vec4 control_step(const ControlSchedule& schedule, double t, const Vec4& x_hat);

// Fixed-step closed loop against the full planar plant: sense cable
// lengths/rates with optional Gaussian noise, estimate, apply the schedule's
// affine law, integrate with sim_substeps. Spray commands are issued
// paint_latency early so paint lands on the schedule's intervals.
SimulationLog simulate(const RobotModel& model, const ControlSchedule& schedule,
                       const RuntimeConfig& cfg);

struct Metrics {
  double tracking_rmse = 0.0;    // m, |x_ff - x_true| position RMS
  double estimation_rmse = 0.0;  // m, |x_hat - x_true| position RMS
  double rotation_rms_deg = 0.0;
};

// Resamples the log onto the ground-truth rate with piecewise-cubic
// interpolation before computing the RMS figures.
Metrics metrics(const SimulationLog& log, double ground_truth_rate = 100.0);

double painted_arc_length(const SimulationLog& log);

void save_simlog(const SimulationLog& log, const std::string& path);
SimulationLog load_simlog(const std::string& path);

}  // namespace cablepaint
