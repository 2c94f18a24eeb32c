#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "cablepaint/errors.hpp"
#include "cablepaint/runtime.hpp"
#include "test_util.hpp"

using namespace cablepaint;
using namespace cablepaint::testutil;

namespace {

RobotModel hold_model() {
  RobotModel m;
  m.tension_min = 0.0;
  m.torque_min = -3.86;
  m.torque_max = 3.86;
  return m;
}

ControlSchedule hold_schedule(const RobotModel& m, const Vec2& at, int steps,
                              bool paint_window = false) {
  TimedTrajectory traj;
  traj.dt = 0.01;
  traj.samples.resize(steps);
  for (int k = 0; k < steps; ++k) {
    traj.samples[k].p = at;
    traj.samples[k].v = Vec2::Zero();
    traj.samples[k].paint =
        paint_window && k * traj.dt >= 1.0 && k * traj.dt < 2.0;
  }
  ILQRConfig cfg;
  cfg.max_iterations = 60;
  return solve(build_problem(m, traj, cfg)).first;
}

std::string log_bytes(const SimulationLog& log) {
  std::string path =
      (std::filesystem::temp_directory_path() / "det_check.csv").string();
  save_simlog(log, path);
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("interpolate_schedule") {
  ControlSchedule s;
  s.dt = 0.01;
  for (int k = 0; k < 3; ++k) {
    ScheduleStep step;
    step.x_ff << 0.1 * k, 0.0, 1.0, 0.0;  // position x ramps, velocity (1,0)
    step.u_ff = Vec4::Constant(0.5 + k);
    step.gain = Mat4::Identity() * (k + 1);
    s.steps.push_back(step);
  }

  SUBCASE("exact at stored steps") {
    InterpolatedStep at = interpolate_schedule(s, 0.01);
    CHECK((at.x_ff - s.steps[1].x_ff).cwiseAbs().maxCoeff() == 0.0);
    CHECK((at.u_ff - s.steps[1].u_ff).cwiseAbs().maxCoeff() == 0.0);
    CHECK((at.gain - s.steps[1].gain).cwiseAbs().maxCoeff() == 0.0);
  }
  SUBCASE("first-order position extrapolation") {
    InterpolatedStep at = interpolate_schedule(s, 0.005);
    CHECK(at.x_ff[0] == doctest::Approx(0.005).epsilon(1e-12));
    CHECK(at.x_ff[2] == 1.0);
  }
  SUBCASE("zero-order hold for K and u_ff") {
    for (double f : {0.2, 0.5, 0.9}) {
      InterpolatedStep at = interpolate_schedule(s, 0.01 + f * 0.01);
      CHECK((at.gain - s.steps[1].gain).cwiseAbs().maxCoeff() == 0.0);
      CHECK((at.u_ff - s.steps[1].u_ff).cwiseAbs().maxCoeff() == 0.0);
    }
  }
  SUBCASE("outside the span throws") {
    CHECK_THROWS_AS(interpolate_schedule(s, -0.1), SimulateError);
    CHECK_THROWS_AS(interpolate_schedule(s, 0.05), SimulateError);
  }
}

TEST_CASE("estimate_position") {
  RobotModel m;

  SUBCASE("exact at home") {
    auto cables = cable_vectors(m, PlanarPose{});
    Vec4 l;
    for (int i = 0; i < 4; ++i) l[i] = cables[i].length;
    Vec2 p = estimate_position(m, l);
    CHECK(p.norm() < 1e-9);
  }
  SUBCASE("equal top lengths pin x to the centerline") {
    auto cables = cable_vectors(m, PlanarPose{0.0, Vec2(0.0, -0.3)});
    Vec4 l;
    for (int i = 0; i < 4; ++i) l[i] = cables[i].length;
    CHECK(l[1] == doctest::Approx(l[2]).epsilon(1e-12));
    Vec2 p = estimate_position(m, l);
    CHECK(std::abs(p.x()) < 1e-12);
  }
  SUBCASE("too-short lengths cannot intersect") {
    Vec4 l = Vec4::Constant(0.1);
    CHECK_THROWS_WITH_AS(estimate_position(m, l),
                         doctest::Contains("inconsistent"), SimulateError);
  }
  SUBCASE("exact inversion across the workspace at theta zero") {
    auto g = rng(61);
    for (int trial = 0; trial < 300; ++trial) {
      Vec2 p_true(uniform(g, -1.0, 1.0), uniform(g, -0.9, 0.8));
      auto cables = cable_vectors(m, PlanarPose{0.0, p_true});
      Vec4 l;
      for (int i = 0; i < 4; ++i) l[i] = cables[i].length;
      Vec2 p = estimate_position(m, l);
      CHECK((p - p_true).norm() < 1e-9);
    }
  }
}

TEST_CASE("estimate_velocity") {
  RobotModel m;

  SUBCASE("recovers unit x velocity at home") {
    Vec4 ldot = cable_rates(m, PlanarPose{}, PlanarTwist{0.0, Vec2(1, 0)});
    Vec2 v = estimate_velocity(m, PlanarPose{}, ldot);
    CHECK((v - Vec2(1, 0)).norm() < 1e-9);
  }
  SUBCASE("zero maps to zero") {
    CHECK(estimate_velocity(m, PlanarPose{}, Vec4::Zero()).norm() == 0.0);
  }
  SUBCASE("matches the pseudoinverse oracle under noise") {
    auto g = rng(62);
    for (int trial = 0; trial < 200; ++trial) {
      PlanarPose pose{0.0, Vec2(uniform(g, -1, 1), uniform(g, -0.9, 0.8))};
      Vec4 ldot;
      for (int i = 0; i < 4; ++i) ldot[i] = uniform(g, -2, 2);
      Vec2 v = estimate_velocity(m, pose, ldot);
      Eigen::Matrix<double, 4, 2> wt =
          (-wrench_matrix(m, pose).bottomRows<2>()).transpose();
      Vec2 oracle = wt.completeOrthogonalDecomposition().solve(
          Eigen::Vector4d(ldot));
      CHECK((v - oracle).norm() < 1e-12);
    }
  }
}

TEST_CASE("control_step is the affine law") {
  RobotModel m = hold_model();
  ControlSchedule s = hold_schedule(m, Vec2(0, 0), 30);
  double t = 0.1;
  InterpolatedStep ref = interpolate_schedule(s, t);

  SUBCASE("zero error gives the feedforward") {
    Vec4 tau = control_step(s, t, ref.x_ff);
    CHECK((tau - ref.u_ff).cwiseAbs().maxCoeff() < 1e-15);
  }
  SUBCASE("error scales through the gain column") {
    Vec4 e = Vec4::Zero();
    e[0] = 0.01;
    Vec4 tau = control_step(s, t, ref.x_ff - e);
    CHECK((tau - (ref.u_ff + ref.gain * e)).cwiseAbs().maxCoeff() < 1e-15);
  }
  SUBCASE("doubling the gain doubles the feedback component") {
    Vec4 e(0.01, -0.02, 0.1, 0.0);
    Vec4 fb1 = control_step(s, t, ref.x_ff - e) - ref.u_ff;
    ControlSchedule doubled = s;
    for (ScheduleStep& step : doubled.steps) step.gain *= 2.0;
    Vec4 fb2 = control_step(doubled, t, ref.x_ff - e) - ref.u_ff;
    CHECK((fb2 - 2.0 * fb1).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("simulate") {
  RobotModel m = hold_model();

  SUBCASE("holds position within a millimeter for five seconds") {
    ControlSchedule s = hold_schedule(m, Vec2(0, 0), 501);
    RuntimeConfig cfg;
    SimulationLog log = simulate(m, s, cfg);
    CHECK(log.ticks.size() == 5001);
    for (const LogTick& tk : log.ticks) {
      CHECK(tk.pose.p.norm() < 1e-3);
    }
  }

  SUBCASE("paint command leads the schedule by the latency") {
    ControlSchedule s = hold_schedule(m, Vec2(0, 0), 301, true);
    RuntimeConfig cfg;
    SimulationLog log = simulate(m, s, cfg);
    double cmd_on = -1, cmd_off = -1, on_start = -1, on_end = -1;
    for (size_t i = 1; i < log.ticks.size(); ++i) {
      if (log.ticks[i].paint_cmd && !log.ticks[i - 1].paint_cmd) {
        cmd_on = log.ticks[i].t;
      }
      if (!log.ticks[i].paint_cmd && log.ticks[i - 1].paint_cmd) {
        cmd_off = log.ticks[i].t;
      }
      if (log.ticks[i].paint_on && !log.ticks[i - 1].paint_on) {
        on_start = log.ticks[i].t;
      }
      if (!log.ticks[i].paint_on && log.ticks[i - 1].paint_on) {
        on_end = log.ticks[i].t;
      }
    }
    double tick = log.tick_dt;
    CHECK(std::abs(cmd_on - 0.6) <= 1.5 * tick);
    CHECK(std::abs(cmd_off - 1.6) <= 1.5 * tick);
    CHECK(std::abs(on_start - 1.0) <= 1.5 * tick);
    CHECK(std::abs(on_end - 2.0) <= 1.5 * tick);
  }

  SUBCASE("noise-free estimator is exact while vertical") {
    ControlSchedule s = hold_schedule(m, Vec2(0.1, -0.2), 201);
    RuntimeConfig cfg;
    SimulationLog log = simulate(m, s, cfg);
    for (const LogTick& tk : log.ticks) {
      if (std::abs(tk.pose.theta) < 1e-12) {
        CHECK((tk.x_hat.head<2>() - tk.pose.p).norm() < 1e-6);
      }
    }
  }

  SUBCASE("identical seeds give byte-identical logs") {
    ControlSchedule s = hold_schedule(m, Vec2(0, 0), 101);
    RuntimeConfig cfg;
    cfg.encoder_noise_std = 5e-4;
    cfg.rate_noise_std = 1e-3;
    cfg.seed = 1234;
    std::string log1 = log_bytes(simulate(m, s, cfg));
    std::string log2 = log_bytes(simulate(m, s, cfg));
    CHECK(log1 == log2);
    cfg.seed = 99;
    CHECK(log_bytes(simulate(m, s, cfg)) != log1);
  }

  SUBCASE("control rate must comfortably exceed the schedule rate") {
    ControlSchedule s = hold_schedule(m, Vec2(0, 0), 30);
    RuntimeConfig cfg;
    cfg.control_rate = 50.0;
    CHECK_THROWS_AS(simulate(m, s, cfg), SimulateError);
  }
}

TEST_CASE("metrics") {
  SUBCASE("identical signals give zero error") {
    SimulationLog log;
    log.tick_dt = 1e-3;
    for (int i = 0; i <= 1000; ++i) {
      LogTick tk;
      tk.t = i * log.tick_dt;
      tk.pose.p = Vec2(0.1 * std::sin(i * 0.01), 0.0);
      tk.x_ff << tk.pose.p, Vec2::Zero();
      tk.x_hat << tk.pose.p, Vec2::Zero();
      log.ticks.push_back(tk);
    }
    Metrics out = metrics(log);
    CHECK(out.tracking_rmse < 1e-12);
    CHECK(out.estimation_rmse < 1e-12);
    CHECK(out.rotation_rms_deg == 0.0);
  }

  SUBCASE("constant offset reads back exactly") {
    SimulationLog log;
    log.tick_dt = 1e-3;
    for (int i = 0; i <= 1000; ++i) {
      LogTick tk;
      tk.t = i * log.tick_dt;
      tk.pose.p = Vec2(0.0, 0.0);
      tk.x_ff << 1e-3, 0.0, 0.0, 0.0;  // 1 mm x offset
      tk.x_hat << tk.pose.p, Vec2::Zero();
      log.ticks.push_back(tk);
    }
    Metrics out = metrics(log);
    CHECK(out.tracking_rmse == doctest::Approx(1e-3).epsilon(1e-9));
  }

  SUBCASE("sinusoidal error integrates to amplitude over root two") {
    SimulationLog log;
    log.tick_dt = 1e-3;
    double amp = 2e-3;
    int periods = 10;
    int n = 10000;  // 10 s
    for (int i = 0; i <= n; ++i) {
      LogTick tk;
      tk.t = i * log.tick_dt;
      tk.pose.p = Vec2::Zero();
      double phase = 2.0 * M_PI * periods * i / n;
      tk.x_ff << amp * std::sin(phase), 0.0, 0.0, 0.0;
      tk.x_hat << tk.pose.p, Vec2::Zero();
      log.ticks.push_back(tk);
    }
    Metrics out = metrics(log);
    CHECK(out.tracking_rmse ==
          doctest::Approx(amp / std::sqrt(2.0)).epsilon(0.01));
  }
}

TEST_CASE("simulation log file round trip") {
  RobotModel m = hold_model();
  ControlSchedule s = hold_schedule(m, Vec2(0, 0), 51);
  RuntimeConfig cfg;
  cfg.encoder_noise_std = 1e-4;
  cfg.seed = 7;
  SimulationLog log = simulate(m, s, cfg);
  std::string path =
      (std::filesystem::temp_directory_path() / "simlog_rt.csv").string();
  save_simlog(log, path);
  SimulationLog back = load_simlog(path);
  REQUIRE(back.ticks.size() == log.ticks.size());
  CHECK(back.tick_dt == log.tick_dt);
  for (size_t i = 0; i < log.ticks.size(); i += 7) {
    CHECK(back.ticks[i].pose.p.x() == log.ticks[i].pose.p.x());
    CHECK(back.ticks[i].x_hat[2] == log.ticks[i].x_hat[2]);
    CHECK(back.ticks[i].torque[3] == log.ticks[i].torque[3]);
    CHECK(back.ticks[i].paint_cmd == log.ticks[i].paint_cmd);
  }
}
