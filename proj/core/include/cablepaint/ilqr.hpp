#pragma once

#include <memory>
#include <string>
#include <vector>

#include "cablepaint/dynamics.hpp"
#include "cablepaint/trajgen.hpp"

namespace cablepaint {

struct ILQRConfig {
  Mat4 Q = (Eigen::Vector4d(1e4, 1e4, 0.0, 0.0)).asDiagonal();
  Mat4 R = Mat4::Identity();
  int max_iterations = 100;
  double cost_tolerance = 1e-7;  // stop when an accepted step improves less
  double lambda_init = 1e-6;
  double lambda_growth = 10.0;
  double lambda_shrink = 0.2;
  double lambda_max = 1e10;
  double dt = 0.01;

  void validate() const;  // Q symmetric PSD, R symmetric PD
};

struct ScheduleStep {
  Vec4 x_ff = Vec4::Zero();
  Vec4 u_ff = Vec4::Zero();
  Mat4 gain = Mat4::Zero();  // tau = u_ff + gain (x_ff - x)
  bool paint = false;
};

struct ControlSchedule {
  double dt = 0.01;
  uint64_t model_hash = 0;
  Mat4 Q = Mat4::Zero();
  Mat4 R = Mat4::Identity();
  std::vector<ScheduleStep> steps;

  double span() const {
    return steps.empty() ? 0.0 : dt * (steps.size() - 1);
  }
};

struct ILQRReport {
  std::vector<double> iteration_costs;  // accepted iterates, non-increasing
  int iterations = 0;
  bool converged = false;
  double final_cost = 0.0;
  double max_dynamics_residual = 0.0;
  int torque_bound_violations = 0;
};

// Discrete dynamics interface so the solver is testable against exactly
// linear systems.
class DiscreteDynamics {
 public:
  virtual ~DiscreteDynamics() = default;
  virtual Vec4 step(const Vec4& x, const Vec4& u) const = 0;
  virtual void linearize(const Vec4& x, const Vec4& u, Mat4& A,
                         Mat4& B) const = 0;
};

class CdprDynamics : public DiscreteDynamics {
 public:
  CdprDynamics(RobotModel model, double dt)
      : model_(std::move(model)), dt_(dt) {}
  Vec4 step(const Vec4& x, const Vec4& u) const override {
    return planar_step(model_, x, u, dt_);
  }
  void linearize(const Vec4& x, const Vec4& u, Mat4& A, Mat4& B) const override {
    linearize_dynamics(model_, x, u, dt_, A, B);
  }
  const RobotModel& model() const { return model_; }

 private:
  RobotModel model_;
  double dt_;
};

// x' = A x + B u + c; exercised by the solver tests and the QP oracle.
class LtiDynamics : public DiscreteDynamics {
 public:
  LtiDynamics(Mat4 A, Mat4 B, Vec4 c) : A_(A), B_(B), c_(c) {}
  Vec4 step(const Vec4& x, const Vec4& u) const override {
    return A_ * x + B_ * u + c_;
  }
  void linearize(const Vec4&, const Vec4&, Mat4& A, Mat4& B) const override {
    A = A_;
    B = B_;
  }

 private:
  Mat4 A_, B_;
  Vec4 c_;
};

struct ILQRProblem {
  std::shared_ptr<const DiscreteDynamics> dynamics;
  std::vector<Vec4> x_desired;   // one per step
  std::vector<bool> paint;       // carried into the schedule
  std::vector<Vec4> u_initial;   // initial rollout controls, size N-1
  Vec4 x0 = Vec4::Zero();
  Vec4 u_mid = Vec4::Zero();     // control cost center
  ILQRConfig config;
  uint64_t model_hash = 0;
};

// Builds the tracking problem for a desired trajectory: objective
// sum x~' Q x~ + u~' R u~ with x~ = x - x_d and u~ = u - u_mid, u_mid the
// midpoint of the allowable torques, dynamics the dt-step integrator, and
// x0 the first sample at rest. The initial rollout uses gravity-compensating
// torques along the desired positions.
ILQRProblem build_problem(const RobotModel& model, const TimedTrajectory& x_d,
                          const ILQRConfig& config);

std::pair<ControlSchedule, ILQRReport> solve(const ILQRProblem& problem);

// Re-solves with R scaled by each factor; larger factors trade tracking
// fidelity for smoother, lower-effort motion.
std::vector<std::pair<ControlSchedule, ILQRReport>> stylize_sweep(
    const ILQRProblem& problem, const std::vector<double>& scales);

// Schedule CSV: per step k, x_ff (4), u_ff (4), K (16 row-major), paint;
// header comments record dt, Q, R, and the model hash.
void save_schedule(const ControlSchedule& schedule, const std::string& path);
ControlSchedule load_schedule(const std::string& path);

}  // namespace cablepaint
