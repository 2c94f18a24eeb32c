#pragma once

#include <array>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cablepaint/robot_model.hpp"

namespace cablepaint {

// Per-cable measurement model: measured = s_i * |pose o b_i - a_i| + o_i.
struct CalibParams {
  std::array<Vec2, 4> pulleys;
  std::array<double, 4> scale{1.0, 1.0, 1.0, 1.0};
  std::array<double, 4> offset{0.0, 0.0, 0.0, 0.0};

  static CalibParams from_model(const RobotModel& model);
  void validate(const RobotModel& model) const;  // s in (0.5, 2), pulleys sane
};

struct CalibSample {
  PlanarPose pose;        // ground truth
  Vec4 lengths = Vec4::Zero();  // measured
};

struct CalibLog {
  std::vector<CalibSample> samples;

  // >= 12 samples spanning at least a 0.5 x 0.5 m area.
  void validate() const;
};

struct CalibOptions {
  bool fix_offsets = false;  // freeze o_i at 0
  bool tie_scales = false;   // one shared scale coefficient
  int max_iterations = 100;
  double cost_tolerance = 1e-10;  // relative decrease
};

// Stacked residuals r_{k,i} = measured_{k,i} - (s_i l_i(pose_k) + o_i),
// ordered sample-major.
Eigen::VectorXd calibration_residuals(const RobotModel& model,
                                      const CalibParams& params,
                                      const CalibLog& log);

struct CalibrationResult {
  CalibParams params;
  double final_cost = 0.0;
  int iterations = 0;
  bool converged = false;
  std::vector<double> cost_history;  // accepted LM iterates, non-increasing
};

// Levenberg-Marquardt over (pulleys, scales, offsets). Throws OptimizeError
// on insufficient excitation (rank-deficient Jacobian).
CalibrationResult calibrate(const RobotModel& model, const CalibLog& log,
                            const CalibParams& initial,
                            const CalibOptions& options = {});

// CSV `t,x,y,theta,l1,l2,l3,l4`.
CalibLog load_calib_log(const std::string& path);
void save_calib_log(const CalibLog& log, const std::string& path);

void save_calib_params(const CalibParams& params, const std::string& path);
CalibParams load_calib_params(const std::string& path);

// Returns the model with calibrated pulleys substituted in.
RobotModel apply_calibration(const RobotModel& model, const CalibParams& p);

}  // namespace cablepaint
