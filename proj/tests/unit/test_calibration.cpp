#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "cablepaint/calibration.hpp"
#include "cablepaint/errors.hpp"
#include "cablepaint/kinematics.hpp"
#include "test_util.hpp"

using namespace cablepaint;
using namespace cablepaint::testutil;

namespace {

// Rectangular excitation run with the given measurement-model parameters.
CalibLog synthetic_log(const RobotModel& model, const CalibParams& truth,
                       int samples, double noise_std = 0.0,
                       uint64_t seed = 0) {
  CalibLog log;
  std::mt19937_64 g(seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  Vec2 lo(-0.5, -0.35), hi(0.5, 0.35);
  double perimeter = 2.0 * ((hi - lo).x() + (hi - lo).y());
  for (int k = 0; k < samples; ++k) {
    double s = perimeter * k / samples;
    Vec2 p;
    double w = (hi - lo).x(), h = (hi - lo).y();
    if (s < w) {
      p = lo + Vec2(s, 0);
    } else if (s < w + h) {
      p = Vec2(hi.x(), lo.y() + (s - w));
    } else if (s < 2 * w + h) {
      p = Vec2(hi.x() - (s - w - h), hi.y());
    } else {
      p = Vec2(lo.x(), hi.y() - (s - 2 * w - h));
    }
    CalibSample sample;
    sample.pose = PlanarPose{0.0, p};
    for (int i = 0; i < 4; ++i) {
      Vec2 mount = sample.pose.apply(model.mounts[i]);
      double l = (mount - truth.pulleys[i]).norm();
      sample.lengths[i] = truth.scale[i] * l + truth.offset[i] +
                          (noise_std > 0 ? noise_std * noise(g) : 0.0);
    }
    log.samples.push_back(sample);
  }
  return log;
}

double param_error(const CalibParams& a, const CalibParams& b) {
  double worst = 0.0;
  for (int i = 0; i < 4; ++i) {
    worst = std::max(worst, (a.pulleys[i] - b.pulleys[i]).norm());
    worst = std::max(worst, std::abs(a.scale[i] - b.scale[i]));
    worst = std::max(worst, std::abs(a.offset[i] - b.offset[i]));
  }
  return worst;
}

}  // namespace

TEST_CASE("calibration_residuals") {
  RobotModel m;
  CalibParams truth = CalibParams::from_model(m);
  CalibLog log = synthetic_log(m, truth, 50);

  SUBCASE("true parameters leave no residual") {
    Eigen::VectorXd r = calibration_residuals(m, truth, log);
    CHECK(r.cwiseAbs().maxCoeff() < 1e-12);
  }
  SUBCASE("offset error shows up uniformly on its cable") {
    CalibParams shifted = truth;
    shifted.offset[0] += 0.01;
    Eigen::VectorXd r = calibration_residuals(m, shifted, log);
    for (size_t k = 0; k < log.samples.size(); ++k) {
      CHECK(r[4 * k] == doctest::Approx(-0.01).epsilon(1e-12));
      CHECK(std::abs(r[4 * k + 1]) < 1e-12);
    }
  }
  SUBCASE("matches a direct recomputation") {
    auto g = rng(71);
    CalibParams random = truth;
    for (int i = 0; i < 4; ++i) {
      random.pulleys[i] += Vec2(uniform(g, -0.05, 0.05), uniform(g, -0.05, 0.05));
      random.scale[i] = uniform(g, 0.9, 1.1);
      random.offset[i] = uniform(g, -0.02, 0.02);
    }
    Eigen::VectorXd r = calibration_residuals(m, random, log);
    for (size_t k = 0; k < log.samples.size(); ++k) {
      for (int i = 0; i < 4; ++i) {
        Vec2 mount = log.samples[k].pose.apply(m.mounts[i]);
        double expect = log.samples[k].lengths[i] -
                        (random.scale[i] * (mount - random.pulleys[i]).norm() +
                         random.offset[i]);
        CHECK(r[4 * k + i] == doctest::Approx(expect).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("calibrate") {
  RobotModel m;
  CalibParams truth = CalibParams::from_model(m);

  SUBCASE("recovers perturbed parameters from a noiseless run") {
    CalibParams truth_perturbed = truth;
    truth_perturbed.pulleys[0] += Vec2(0.02, -0.01);
    truth_perturbed.scale[0] = 1.01;
    CalibLog log = synthetic_log(m, truth_perturbed, 500);
    CalibrationResult r = calibrate(m, log, truth);
    CHECK(r.converged);
    CHECK(param_error(r.params, truth_perturbed) < 1e-3);
    CHECK(r.final_cost < 1e-12);
    for (size_t i = 1; i < r.cost_history.size(); ++i) {
      CHECK(r.cost_history[i] <= r.cost_history[i - 1]);
    }
  }

  SUBCASE("starting at the truth converges immediately") {
    CalibLog log = synthetic_log(m, truth, 100);
    CalibrationResult r = calibrate(m, log, truth);
    CHECK(r.converged);
    CHECK(r.iterations <= 2);
    CHECK(r.final_cost <= 1e-20);
  }

  SUBCASE("identical poses are insufficient excitation") {
    CalibLog log;
    for (int k = 0; k < 12; ++k) {
      CalibSample s;
      s.pose = PlanarPose{0.0, Vec2(0.1, 0.1)};
      auto cables = cable_vectors(m, s.pose);
      for (int i = 0; i < 4; ++i) s.lengths[i] = cables[i].length;
      log.samples.push_back(s);
    }
    CHECK_THROWS_WITH_AS(calibrate(m, log, truth),
                         doctest::Contains("insufficient excitation"),
                         OptimizeError);
  }

  SUBCASE("parameter error scales roughly linearly with noise") {
    CalibParams start = truth;
    start.pulleys[1] += Vec2(-0.015, 0.01);
    double err_small, err_large;
    {
      CalibLog log = synthetic_log(m, truth, 500, 1e-4, 5);
      err_small = param_error(calibrate(m, log, start).params, truth);
    }
    {
      CalibLog log = synthetic_log(m, truth, 500, 1e-3, 5);
      err_large = param_error(calibrate(m, log, start).params, truth);
    }
    double ratio = err_large / err_small;
    CHECK(ratio > 10.0 / 3.0);
    CHECK(ratio < 30.0);
    // Noiseless recovery is essentially exact.
    CalibLog log = synthetic_log(m, truth, 500);
    CHECK(param_error(calibrate(m, log, start).params, truth) < 1e-6);
  }

  SUBCASE("offsets can be frozen to match a scale-only model") {
    CalibParams truth_scaled = truth;
    truth_scaled.scale = {1.02, 0.99, 1.01, 0.98};
    CalibLog log = synthetic_log(m, truth_scaled, 300);
    CalibOptions opt;
    opt.fix_offsets = true;
    CalibrationResult r = calibrate(m, log, truth, opt);
    CHECK(param_error(r.params, truth_scaled) < 1e-6);
    for (int i = 0; i < 4; ++i) CHECK(r.params.offset[i] == 0.0);
  }

  SUBCASE("scales can be tied to a single coefficient") {
    CalibParams truth_tied = truth;
    truth_tied.scale = {1.015, 1.015, 1.015, 1.015};
    CalibLog log = synthetic_log(m, truth_tied, 300);
    CalibOptions opt;
    opt.tie_scales = true;
    CalibrationResult r = calibrate(m, log, truth, opt);
    CHECK(param_error(r.params, truth_tied) < 1e-6);
    CHECK(r.params.scale[0] == r.params.scale[3]);
  }
}

TEST_CASE("calibration file round trips") {
  RobotModel m;
  CalibParams truth = CalibParams::from_model(m);
  truth.scale = {1.01, 0.99, 1.0, 1.02};
  truth.offset = {0.001, -0.002, 0.0, 0.0005};

  SUBCASE("log CSV") {
    CalibLog log = synthetic_log(m, truth, 20);
    std::string path =
        (std::filesystem::temp_directory_path() / "calib_rt.csv").string();
    save_calib_log(log, path);
    CalibLog back = load_calib_log(path);
    REQUIRE(back.samples.size() == log.samples.size());
    for (size_t k = 0; k < log.samples.size(); ++k) {
      CHECK(back.samples[k].pose.p.x() == log.samples[k].pose.p.x());
      CHECK(back.samples[k].lengths[2] == log.samples[k].lengths[2]);
    }
  }
  SUBCASE("params JSON") {
    std::string path =
        (std::filesystem::temp_directory_path() / "calib_params.json").string();
    save_calib_params(truth, path);
    CalibParams back = load_calib_params(path);
    CHECK(param_error(back, truth) == 0.0);
  }
}
