#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "cablepaint/errors.hpp"
#include "cablepaint/trajgen.hpp"
#include "test_util.hpp"

using namespace cablepaint;
using namespace cablepaint::testutil;

namespace {

Stroke two_point(Vec2 a, Vec2 b) {
  Stroke s;
  s.points = {a, b};
  return s;
}

PaintPath single_stroke_path(Stroke s, StrokeClass cls) {
  PathStroke ps;
  ps.stroke = std::move(s);
  ps.cls = cls;
  PaintPath path;
  path.strokes.push_back(std::move(ps));
  return path;
}

// Peak finite-difference figures of a sampled trajectory.
void fd_peaks(const TimedTrajectory& traj, double& v_peak, double& a_peak) {
  v_peak = 0.0;
  a_peak = 0.0;
  for (size_t k = 0; k < traj.samples.size(); ++k) {
    v_peak = std::max(v_peak, traj.samples[k].v.norm());
    if (k + 1 < traj.samples.size()) {
      a_peak = std::max(a_peak, (traj.samples[k + 1].v - traj.samples[k].v)
                                        .norm() /
                                    traj.dt);
    }
  }
}

}  // namespace

TEST_CASE("naive_kinematics") {
  SUBCASE("unit segment, one second each") {
    StrokeKinematics kin = naive_kinematics(two_point(Vec2(0, 0), Vec2(1, 0)));
    REQUIRE(kin.segment_speed.size() == 1);
    CHECK(kin.segment_speed[0] == doctest::Approx(1.0).epsilon(1e-12));
  }
  SUBCASE("repeated point has zero segment speed") {
    Stroke s;
    s.points = {Vec2(0, 0), Vec2(1, 0), Vec2(1, 0)};
    StrokeKinematics kin = naive_kinematics(s);
    REQUIRE(kin.segment_speed.size() == 2);
    CHECK(kin.segment_speed[1] == 0.0);
  }
  SUBCASE("recorded times override the 1 s default") {
    Stroke s = two_point(Vec2(0, 0), Vec2(1, 0));
    s.vertex_times = std::vector<double>{0.0, 0.5};
    StrokeKinematics kin = naive_kinematics(s);
    CHECK(kin.segment_speed[0] == doctest::Approx(2.0).epsilon(1e-12));
  }
}

TEST_CASE("time_scale_factor") {
  ClassLimits lim{1.2, 20.0};
  StrokeKinematics kin;
  kin.times = {0.0, 1.0};

  SUBCASE("speed bound dominates") {
    kin.peak_speed = 3.0;
    kin.peak_accel = 10.0;
    // speed ratio 2.5 beats accel ratio sqrt(0.5) = 0.707.
    CHECK(time_scale_factor(kin, lim) == doctest::Approx(2.5).epsilon(1e-12));
  }
  SUBCASE("never speeds the artist up") {
    kin.peak_speed = 0.5;
    kin.peak_accel = 5.0;
    CHECK(time_scale_factor(kin, lim) == 1.0);
  }
  SUBCASE("boundary case") {
    kin.peak_speed = 1.2;
    kin.peak_accel = 0.0;
    CHECK(time_scale_factor(kin, lim) == 1.0);
  }
}

TEST_CASE("time scaling halves speeds and quarters accelerations") {
  auto g = rng(41);
  ClassLimits lim{1.2, 20.0};
  for (int trial = 0; trial < 50; ++trial) {
    Stroke s;
    std::vector<double> times;
    double t = 0.0;
    int n = 4 + static_cast<int>(uniform(g, 0, 8));
    for (int i = 0; i < n; ++i) {
      s.points.push_back(Vec2(uniform(g, -1, 1), uniform(g, -1, 1)));
      times.push_back(t);
      t += uniform(g, 0.05, 0.3);
    }
    s.vertex_times = times;
    StrokeKinematics kin = naive_kinematics(s);
    double c = time_scale_factor(kin, lim);

    Stroke scaled = s;
    for (double& vt : *scaled.vertex_times) vt *= c;
    StrokeKinematics kin2 = naive_kinematics(scaled);
    CHECK(kin2.peak_speed == doctest::Approx(kin.peak_speed / c).epsilon(1e-9));
    CHECK(kin2.peak_accel ==
          doctest::Approx(kin.peak_accel / (c * c)).epsilon(1e-9));
    CHECK(kin2.peak_speed <= lim.v_max + 1e-9);
    CHECK(kin2.peak_accel <= lim.a_max + 1e-6);
  }
}

TEST_CASE("trapezoid_profile") {
  SUBCASE("cruise case") {
    TrapezoidProfile p = TrapezoidProfile::plan(1.0, 0.5, 20.0);
    CHECK(p.t_accel == doctest::Approx(0.025).epsilon(1e-12));
    CHECK(p.t_cruise == doctest::Approx(1.975).epsilon(1e-12));
    CHECK(p.total_time() == doctest::Approx(2.025).epsilon(1e-12));
    CHECK(p.position(p.total_time()) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(p.velocity(0.0) == 0.0);
    CHECK(p.velocity(p.total_time()) == 0.0);
  }
  SUBCASE("triangular case") {
    TrapezoidProfile p = TrapezoidProfile::plan(0.005, 0.5, 20.0);
    CHECK(p.v_peak == doctest::Approx(std::sqrt(0.1)).epsilon(1e-12));
    CHECK(p.total_time() ==
          doctest::Approx(2.0 * std::sqrt(0.1) / 20.0).epsilon(1e-12));
    CHECK(p.t_cruise == 0.0);
  }
  SUBCASE("zero distance") {
    TrapezoidProfile p = TrapezoidProfile::plan(0.0, 0.5, 20.0);
    CHECK(p.total_time() == 0.0);
  }
  SUBCASE("negative distance rejected") {
    CHECK_THROWS_AS(TrapezoidProfile::plan(-0.1, 0.5, 20.0), PlanError);
  }
  SUBCASE("numerically integrated velocity reproduces the positions") {
    auto g = rng(42);
    for (int trial = 0; trial < 30; ++trial) {
      double d = uniform(g, 0.001, 3.0);
      double v = uniform(g, 0.1, 2.0);
      double a = uniform(g, 1.0, 30.0);
      TrapezoidProfile p = TrapezoidProfile::plan(d, v, a);
      double total = p.total_time();
      int n = 20000;
      double pos = 0.0;
      double h = total / n;
      for (int i = 0; i < n; ++i) {
        double t0 = i * h;
        // Simpson rule per slice.
        pos += h / 6.0 *
               (p.velocity(t0) + 4.0 * p.velocity(t0 + 0.5 * h) +
                p.velocity(t0 + h));
      }
      CHECK(pos == doctest::Approx(d).epsilon(1e-6));
      CHECK(std::abs(p.position(total * 0.37) -
                     [&] {
                       double acc = 0.0;
                       double tt = total * 0.37;
                       int m = 20000;
                       double hh = tt / m;
                       for (int i = 0; i < m; ++i) {
                         double t0 = i * hh;
                         acc += hh / 6.0 *
                                (p.velocity(t0) +
                                 4.0 * p.velocity(t0 + 0.5 * hh) +
                                 p.velocity(t0 + hh));
                       }
                       return acc;
                     }()) < 1e-6);
    }
  }
}

TEST_CASE("discretize") {
  LimitSet limits;

  SUBCASE("one meter travel produces 204 samples at rest ends") {
    PaintPath path = single_stroke_path(two_point(Vec2(0, 0), Vec2(1, 0)),
                                        StrokeClass::travel);
    path.strokes[0].stroke.paint = false;
    TimedTrajectory traj = discretize(path, limits, 0.01);
    CHECK(traj.samples.size() == 204);
    CHECK(traj.samples.front().v.norm() == 0.0);
    CHECK(traj.samples.back().v.norm() == 0.0);
    CHECK((traj.samples.front().p - Vec2(0, 0)).norm() == 0.0);
    CHECK((traj.samples.back().p - Vec2(1, 0)).norm() == 0.0);
  }

  SUBCASE("outline samples lie on the original polyline") {
    Stroke s;
    s.points = {Vec2(0, 0), Vec2(0.3, 0.1), Vec2(0.5, 0.4), Vec2(0.9, 0.2)};
    s.vertex_times = std::vector<double>{0.0, 0.5, 1.1, 1.6};
    PaintPath path = single_stroke_path(s, StrokeClass::outline);
    TimedTrajectory traj = discretize(path, limits, 0.01);
    for (const TrajSample& sample : traj.samples) {
      double best = std::numeric_limits<double>::infinity();
      for (size_t e = 0; e + 1 < s.points.size(); ++e) {
        best = std::min(best, point_segment_distance(sample.p, s.points[e],
                                                     s.points[e + 1]));
      }
      CHECK(best <= 1e-9);
    }
    CHECK((traj.samples.front().p - s.points.front()).norm() == 0.0);
    CHECK((traj.samples.back().p - s.points.back()).norm() == 0.0);
  }

  SUBCASE("full path: continuity, limits, junction velocities") {
    Stroke outline;
    outline.points = {Vec2(0, 0), Vec2(0.4, 0.0), Vec2(0.4, 0.3)};
    outline.vertex_times = std::vector<double>{0.0, 0.4, 0.8};

    PathStroke o;
    o.stroke = outline;
    o.cls = StrokeClass::outline;
    PathStroke f;
    f.stroke = two_point(Vec2(0.4, 0.3), Vec2(0.1, 0.3));
    f.stroke.paint = true;
    f.cls = StrokeClass::infill;
    PaintPath path = add_travel_strokes({o, f});

    TimedTrajectory traj = discretize(path, limits, 0.01);
    double v_peak, a_peak;
    fd_peaks(traj, v_peak, a_peak);
    CHECK(v_peak <= limits.outline.v_max + 1e-9);
    CHECK(a_peak <= limits.outline.a_max + 1e-6);

    // Position continuity at the velocity limit.
    for (size_t k = 1; k < traj.samples.size(); ++k) {
      CHECK((traj.samples[k].p - traj.samples[k - 1].p).norm() <=
            limits.outline.v_max * traj.dt + 1e-9);
    }

    // Velocity continuity across class changes: zero at junctions.
    for (size_t k = 1; k < traj.samples.size(); ++k) {
      if (traj.samples[k].cls != traj.samples[k - 1].cls) {
        CHECK(traj.samples[k - 1].v.norm() <= 1e-9);
      }
    }
  }

  SUBCASE("random strokes respect both limit sets") {
    auto g = rng(43);
    for (int trial = 0; trial < 25; ++trial) {
      Stroke s;
      std::vector<double> times;
      double t = 0.0;
      int n = 3 + static_cast<int>(uniform(g, 0, 6));
      for (int i = 0; i < n; ++i) {
        s.points.push_back(Vec2(uniform(g, -0.5, 0.5), uniform(g, -0.5, 0.5)));
        times.push_back(t);
        t += uniform(g, 0.1, 0.4);
      }
      s.vertex_times = times;
      bool as_outline = trial % 2 == 0;
      PaintPath path = single_stroke_path(
          s, as_outline ? StrokeClass::outline : StrokeClass::infill);
      TimedTrajectory traj = discretize(path, limits, 0.01);
      const ClassLimits& lim =
          as_outline ? limits.outline : limits.infill_travel;
      double v_peak, a_peak;
      fd_peaks(traj, v_peak, a_peak);
      CHECK(v_peak <= lim.v_max + 1e-9);
      CHECK(a_peak <= lim.a_max + 1e-6);
    }
  }

  SUBCASE("trajectory CSV round trip") {
    PaintPath path = single_stroke_path(two_point(Vec2(0, 0), Vec2(0.3, 0.2)),
                                        StrokeClass::travel);
    TimedTrajectory traj = discretize(path, limits, 0.01);
    std::string file =
        (std::filesystem::temp_directory_path() / "traj_rt.csv").string();
    save_trajectory(traj, file);
    TimedTrajectory back = load_trajectory(file);
    REQUIRE(back.samples.size() == traj.samples.size());
    CHECK(back.dt == traj.dt);
    for (size_t k = 0; k < traj.samples.size(); ++k) {
      CHECK(back.samples[k].p.x() == traj.samples[k].p.x());
      CHECK(back.samples[k].v.y() == traj.samples[k].v.y());
      CHECK(back.samples[k].paint == traj.samples[k].paint);
    }
  }
}
