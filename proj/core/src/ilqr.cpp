#include "cablepaint/ilqr.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <Eigen/Dense>

#include "cablepaint/csv.hpp"
#include "cablepaint/errors.hpp"

namespace cablepaint {

void ILQRConfig::validate() const {
  if ((Q - Q.transpose()).cwiseAbs().maxCoeff() > 1e-12 ||
      (R - R.transpose()).cwiseAbs().maxCoeff() > 1e-12) {
    throw OptimizeError("Q and R must be symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Mat4> eq(Q), er(R);
  if (eq.eigenvalues().minCoeff() < -1e-12) {
    throw OptimizeError("Q must be positive semidefinite");
  }
  if (er.eigenvalues().minCoeff() <= 0.0) {
    throw OptimizeError("R must be positive definite");
  }
  if (max_iterations < 1 || !(dt > 0)) {
    throw OptimizeError("bad iLQR configuration");
  }
}

ILQRProblem build_problem(const RobotModel& model, const TimedTrajectory& x_d,
                          const ILQRConfig& config) {
  config.validate();
  if (x_d.samples.empty()) {
    throw OptimizeError("desired trajectory is empty");
  }
  if (std::abs(x_d.dt - config.dt) > 1e-12) {
    throw OptimizeError("dt mismatch between trajectory and solver config");
  }

  ILQRProblem p;
  p.dynamics = std::make_shared<CdprDynamics>(model, config.dt);
  p.config = config;
  p.model_hash = model_hash(model);
  p.u_mid = Vec4::Constant(model.torque_mid());

  const size_t n = x_d.samples.size();
  p.x_desired.resize(n);
  p.paint.resize(n);
  for (size_t k = 0; k < n; ++k) {
    p.x_desired[k] << x_d.samples[k].p, x_d.samples[k].v;
    p.paint[k] = x_d.samples[k].paint;
  }
  p.x0 << x_d.samples[0].p, Vec2::Zero();

  // Gravity-compensating warm start along the desired positions.
  p.u_initial.resize(n > 1 ? n - 1 : 0);
  for (size_t k = 0; k + 1 < n; ++k) {
    try {
      Vec4 t = static_tensions(model, PlanarPose{0.0, x_d.samples[k].p});
      p.u_initial[k] = winch_torque(model, t, Vec4::Zero(), Vec4::Zero());
    } catch (const OptimizeError&) {
      p.u_initial[k] = p.u_mid;  // outside the static workspace
    }
  }
  return p;
}

namespace {

struct Rollout {
  std::vector<Vec4> x;
  std::vector<Vec4> u;
  double cost = 0.0;
};

double trajectory_cost(const ILQRProblem& p, const std::vector<Vec4>& x,
                       const std::vector<Vec4>& u) {
  const Mat4& Q = p.config.Q;
  const Mat4& R = p.config.R;
  double cost = 0.0;
  for (size_t k = 0; k < x.size(); ++k) {
    Vec4 xe = x[k] - p.x_desired[k];
    cost += xe.dot(Q * xe);
  }
  for (size_t k = 0; k < u.size(); ++k) {
    Vec4 ue = u[k] - p.u_mid;
    cost += ue.dot(R * ue);
  }
  return cost;
}

Rollout roll_forward(const ILQRProblem& p, const std::vector<Vec4>& u) {
  Rollout r;
  r.u = u;
  r.x.resize(u.size() + 1);
  r.x[0] = p.x0;
  for (size_t k = 0; k < u.size(); ++k) {
    r.x[k + 1] = p.dynamics->step(r.x[k], u[k]);
  }
  r.cost = trajectory_cost(p, r.x, r.u);
  return r;
}

struct BackwardPass {
  std::vector<Vec4> k_ff;
  std::vector<Mat4> k_fb;  // delta u = k_ff + k_fb delta x
  bool ok = false;
};

BackwardPass backward_pass(const ILQRProblem& p, const Rollout& roll,
                           double lambda) {
  const Mat4& Q = p.config.Q;
  const Mat4& R = p.config.R;
  const size_t n = roll.x.size();
  BackwardPass bp;
  bp.k_ff.resize(n - 1);
  bp.k_fb.resize(n - 1);

  Vec4 vx = 2.0 * Q * (roll.x[n - 1] - p.x_desired[n - 1]);
  Mat4 vxx = 2.0 * Q;
  Mat4 a, b;
  for (size_t ki = n - 1; ki-- > 0;) {
    p.dynamics->linearize(roll.x[ki], roll.u[ki], a, b);
    Vec4 qx = 2.0 * Q * (roll.x[ki] - p.x_desired[ki]) + a.transpose() * vx;
    Vec4 qu = 2.0 * R * (roll.u[ki] - p.u_mid) + b.transpose() * vx;
    Mat4 qxx = 2.0 * Q + a.transpose() * vxx * a;
    Mat4 quu = 2.0 * R + b.transpose() * vxx * b;
    Mat4 qux = b.transpose() * vxx * a;

    Mat4 quu_reg = quu + lambda * Mat4::Identity();
    Eigen::LLT<Mat4> llt(quu_reg);
    if (llt.info() != Eigen::Success) return bp;  // needs more regularization

    bp.k_ff[ki] = -llt.solve(qu);
    bp.k_fb[ki] = -llt.solve(qux);

    vx = qx + bp.k_fb[ki].transpose() * quu * bp.k_ff[ki] +
         bp.k_fb[ki].transpose() * qu + qux.transpose() * bp.k_ff[ki];
    vxx = qxx + bp.k_fb[ki].transpose() * quu * bp.k_fb[ki] +
          bp.k_fb[ki].transpose() * qux + qux.transpose() * bp.k_fb[ki];
    vxx = 0.5 * (vxx + vxx.transpose());
  }
  bp.ok = true;
  return bp;
}

Rollout line_search(const ILQRProblem& p, const Rollout& roll,
                    const BackwardPass& bp, bool& accepted) {
  accepted = false;
  for (double alpha = 1.0; alpha >= 1.0 / 64.0 - 1e-12; alpha *= 0.5) {
    Rollout cand;
    cand.x.resize(roll.x.size());
    cand.u.resize(roll.u.size());
    cand.x[0] = p.x0;
    bool finite = true;
    for (size_t k = 0; k < roll.u.size(); ++k) {
      cand.u[k] = roll.u[k] + alpha * bp.k_ff[k] +
                  bp.k_fb[k] * (cand.x[k] - roll.x[k]);
      if (!cand.u[k].allFinite()) {
        finite = false;
        break;
      }
      cand.x[k + 1] = p.dynamics->step(cand.x[k], cand.u[k]);
      if (!cand.x[k + 1].allFinite()) {
        finite = false;
        break;
      }
    }
    if (!finite) continue;
    cand.cost = trajectory_cost(p, cand.x, cand.u);
    if (std::isfinite(cand.cost) && cand.cost < roll.cost) {
      accepted = true;
      return cand;
    }
  }
  return roll;
}

}  // namespace

std::pair<ControlSchedule, ILQRReport> solve(const ILQRProblem& problem) {
  problem.config.validate();
  const size_t n = problem.x_desired.size();
  if (n < 2) throw OptimizeError("iLQR needs at least two steps");
  if (problem.u_initial.size() != n - 1) {
    throw OptimizeError("initial controls must have horizon-1 entries");
  }

  Rollout roll = roll_forward(problem, problem.u_initial);
  if (!std::isfinite(roll.cost)) {
    throw OptimizeError("iLQR: initial rollout diverged");
  }

  ILQRReport report;
  report.iteration_costs.push_back(roll.cost);

  double lambda = problem.config.lambda_init;
  for (int it = 0; it < problem.config.max_iterations; ++it) {
    BackwardPass bp = backward_pass(problem, roll, lambda);
    if (!bp.ok) {
      lambda *= problem.config.lambda_growth;
      if (lambda > problem.config.lambda_max) break;
      continue;
    }
    bool accepted = false;
    Rollout next = line_search(problem, roll, bp, accepted);
    ++report.iterations;
    if (!accepted) {
      lambda *= problem.config.lambda_growth;
      if (lambda > problem.config.lambda_max) {
        if (!std::isfinite(roll.cost)) {
          throw OptimizeError("iLQR diverged: regularization exhausted");
        }
        break;  // cannot improve further; keep the best iterate
      }
      continue;
    }
    double improvement = roll.cost - next.cost;
    roll = std::move(next);
    report.iteration_costs.push_back(roll.cost);
    lambda = std::max(1e-12, lambda * problem.config.lambda_shrink);
    if (improvement < problem.config.cost_tolerance) {
      report.converged = true;
      break;
    }
  }
  report.final_cost = roll.cost;

  // Gains from a final unregularized backward pass at the solution.
  BackwardPass bp = backward_pass(problem, roll, 0.0);
  if (!bp.ok) bp = backward_pass(problem, roll, 1e-9);
  if (!bp.ok) throw OptimizeError("iLQR: gain extraction failed");

  ControlSchedule schedule;
  schedule.dt = problem.config.dt;
  schedule.model_hash = problem.model_hash;
  schedule.Q = problem.config.Q;
  schedule.R = problem.config.R;
  schedule.steps.resize(n);
  for (size_t k = 0; k < n; ++k) {
    ScheduleStep& step = schedule.steps[k];
    step.x_ff = roll.x[k];
    step.paint = problem.paint[k];
    if (k + 1 < n) {
      step.u_ff = roll.u[k];
      step.gain = -bp.k_fb[k];  // tau = u_ff + gain (x_ff - x)
    } else {
      step.u_ff = roll.u[n - 2];  // terminal hold
      step.gain = -bp.k_fb[n - 2];
    }
  }

  for (size_t k = 0; k + 1 < n; ++k) {
    Vec4 predicted = problem.dynamics->step(roll.x[k], roll.u[k]);
    report.max_dynamics_residual = std::max(
        report.max_dynamics_residual, (predicted - roll.x[k + 1]).norm());
  }
  if (const auto* cdpr =
          dynamic_cast<const CdprDynamics*>(problem.dynamics.get())) {
    const RobotModel& m = cdpr->model();
    for (const Vec4& u : roll.u) {
      for (int i = 0; i < 4; ++i) {
        if (u[i] < m.torque_min - 1e-9 || u[i] > m.torque_max + 1e-9) {
          ++report.torque_bound_violations;
        }
      }
    }
  }
  return {std::move(schedule), std::move(report)};
}

std::vector<std::pair<ControlSchedule, ILQRReport>> stylize_sweep(
    const ILQRProblem& problem, const std::vector<double>& scales) {
  std::vector<std::pair<ControlSchedule, ILQRReport>> out;
  for (double s : scales) {
    if (!(s > 0)) throw OptimizeError("stylize scale must be > 0");
    ILQRProblem scaled = problem;
    scaled.config.R = s * problem.config.R;
    out.push_back(solve(scaled));
  }
  return out;
}

void save_schedule(const ControlSchedule& schedule, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot write file: " + path);
  out << "# dt=" << format_double(schedule.dt) << "\n";
  out << "# model_hash=" << schedule.model_hash << "\n";
  auto mat_line = [&](const char* name, const Mat4& m) {
    out << "# " << name << "=";
    for (int r = 0; r < 4; ++r) {
      for (int c = 0; c < 4; ++c) {
        out << format_double(m(r, c)) << (r == 3 && c == 3 ? "" : " ");
      }
    }
    out << "\n";
  };
  mat_line("Q", schedule.Q);
  mat_line("R", schedule.R);
  out << "k,xff_px,xff_py,xff_vx,xff_vy,u1,u2,u3,u4";
  for (int r = 0; r < 4; ++r) {
    for (int c = 0; c < 4; ++c) out << ",K" << r + 1 << c + 1;
  }
  out << ",paint\n";
  for (size_t k = 0; k < schedule.steps.size(); ++k) {
    const ScheduleStep& s = schedule.steps[k];
    out << k;
    for (int i = 0; i < 4; ++i) out << ',' << format_double(s.x_ff[i]);
    for (int i = 0; i < 4; ++i) out << ',' << format_double(s.u_ff[i]);
    for (int r = 0; r < 4; ++r) {
      for (int c = 0; c < 4; ++c) out << ',' << format_double(s.gain(r, c));
    }
    out << ',' << (s.paint ? 1 : 0) << '\n';
  }
}

ControlSchedule load_schedule(const std::string& path) {
  CsvTable table = read_csv(path);
  ControlSchedule schedule;
  bool have_dt = false;
  for (const std::string& c : table.comments) {
    std::istringstream is(c);
    std::string hash_tag;
    is >> hash_tag;  // '#'
    std::string body;
    std::getline(is, body);
    size_t eq = body.find('=');
    if (eq == std::string::npos) continue;
    std::string key = body.substr(0, eq);
    key.erase(0, key.find_first_not_of(' '));
    std::string value = body.substr(eq + 1);
    std::istringstream vs(value);
    if (key == "dt") {
      vs >> schedule.dt;
      have_dt = true;
    } else if (key == "model_hash") {
      vs >> schedule.model_hash;
    } else if (key == "Q" || key == "R") {
      Mat4 m;
      for (int r = 0; r < 4; ++r) {
        for (int col = 0; col < 4; ++col) vs >> m(r, col);
      }
      (key == "Q" ? schedule.Q : schedule.R) = m;
    }
  }
  if (!have_dt) throw ParseError("schedule missing dt header: " + path);
  if (table.header.size() != 26) {
    throw ParseError("not a schedule CSV: " + path);
  }
  for (size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    std::string ctx = path + " row " + std::to_string(r + 1);
    if (row.size() != 26) throw ParseError("wrong column count in " + ctx);
    ScheduleStep s;
    for (int i = 0; i < 4; ++i) s.x_ff[i] = parse_double(row[1 + i], ctx);
    for (int i = 0; i < 4; ++i) s.u_ff[i] = parse_double(row[5 + i], ctx);
    for (int rr = 0; rr < 4; ++rr) {
      for (int cc = 0; cc < 4; ++cc) {
        s.gain(rr, cc) = parse_double(row[9 + rr * 4 + cc], ctx);
      }
    }
    s.paint = parse_double(row[25], ctx) != 0.0;
    schedule.steps.push_back(s);
  }
  if (schedule.steps.empty()) throw ParseError("empty schedule: " + path);
  return schedule;
}

}  // namespace cablepaint
