#include "cablepaint/calibration.hpp"

#include <cmath>
#include <fstream>

#include <json.hpp>

#include "cablepaint/csv.hpp"
#include "cablepaint/errors.hpp"

namespace cablepaint {

using ordered_json = nlohmann::ordered_json;

CalibParams CalibParams::from_model(const RobotModel& model) {
  CalibParams p;
  p.pulleys = model.pulleys;
  return p;
}

void CalibParams::validate(const RobotModel& model) const {
  Vec2 lo, hi;
  model.frame_bounds(lo, hi);
  Vec2 margin = hi - lo;
  for (int i = 0; i < 4; ++i) {
    if (!(scale[i] > 0.5 && scale[i] < 2.0)) {
      throw OptimizeError("calibration scale out of range (0.5, 2)");
    }
    if (pulleys[i].x() < lo.x() - margin.x() ||
        pulleys[i].x() > hi.x() + margin.x() ||
        pulleys[i].y() < lo.y() - margin.y() ||
        pulleys[i].y() > hi.y() + margin.y()) {
      throw OptimizeError("calibrated pulley outside twice the frame bounds");
    }
  }
}

void CalibLog::validate() const {
  if (samples.size() < 12) {
    throw OptimizeError("calibration log needs at least 12 samples");
  }
  Vec2 lo = samples[0].pose.p, hi = samples[0].pose.p;
  for (const CalibSample& s : samples) {
    lo = lo.cwiseMin(s.pose.p);
    hi = hi.cwiseMax(s.pose.p);
  }
  if ((hi - lo).minCoeff() < 0.5) {
    throw OptimizeError(
        "insufficient excitation: poses span less than 0.5 x 0.5 m");
  }
}

namespace {

double predicted_length(const RobotModel& model, const CalibParams& p,
                        const PlanarPose& pose, int cable) {
  Vec2 mount = pose.apply(model.mounts[cable]);
  double l = (mount - p.pulleys[cable]).norm();
  if (l < 1e-6) throw OptimizeError("degenerate cable in calibration sample");
  return p.scale[cable] * l + p.offset[cable];
}

// Parameter vector layout: [a1x a1y ... a4x a4y, s1..s4, o1..o4].
constexpr int kNumParams = 16;

Eigen::VectorXd pack(const CalibParams& p) {
  Eigen::VectorXd v(kNumParams);
  for (int i = 0; i < 4; ++i) {
    v[2 * i] = p.pulleys[i].x();
    v[2 * i + 1] = p.pulleys[i].y();
    v[8 + i] = p.scale[i];
    v[12 + i] = p.offset[i];
  }
  return v;
}

CalibParams unpack(const Eigen::VectorXd& v) {
  CalibParams p;
  for (int i = 0; i < 4; ++i) {
    p.pulleys[i] = Vec2(v[2 * i], v[2 * i + 1]);
    p.scale[i] = v[8 + i];
    p.offset[i] = v[12 + i];
  }
  return p;
}

Eigen::MatrixXd jacobian(const RobotModel& model, const CalibParams& p,
                         const CalibLog& log) {
  const size_t n = log.samples.size();
  Eigen::MatrixXd j = Eigen::MatrixXd::Zero(4 * n, kNumParams);
  for (size_t k = 0; k < n; ++k) {
    const PlanarPose& pose = log.samples[k].pose;
    for (int i = 0; i < 4; ++i) {
      Vec2 mount = pose.apply(model.mounts[i]);
      Vec2 r = mount - p.pulleys[i];
      double l = r.norm();
      Vec2 rhat = r / l;
      long row = static_cast<long>(4 * k + i);
      // r = meas - (s l + o); dl/da = -rhat^T... r points pulley->mount so
      // dl/da_i = -rhat, giving dres/da_i = +s rhat.
      j(row, 2 * i) = p.scale[i] * rhat.x();
      j(row, 2 * i + 1) = p.scale[i] * rhat.y();
      j(row, 8 + i) = -l;
      j(row, 12 + i) = -1.0;
    }
  }
  return j;
}

}  // namespace

Eigen::VectorXd calibration_residuals(const RobotModel& model,
                                      const CalibParams& params,
                                      const CalibLog& log) {
  const size_t n = log.samples.size();
  Eigen::VectorXd r(4 * n);
  for (size_t k = 0; k < n; ++k) {
    for (int i = 0; i < 4; ++i) {
      r[4 * k + i] = log.samples[k].lengths[i] -
                     predicted_length(model, params, log.samples[k].pose, i);
    }
  }
  return r;
}

CalibrationResult calibrate(const RobotModel& model, const CalibLog& log,
                            const CalibParams& initial,
                            const CalibOptions& options) {
  log.validate();
  initial.validate(model);

  // Active parameter selection under the option flags.
  std::vector<int> active;
  for (int i = 0; i < 8; ++i) active.push_back(i);
  if (options.tie_scales) {
    active.push_back(8);  // shared scale lives in slot 8
  } else {
    for (int i = 8; i < 12; ++i) active.push_back(i);
  }
  if (!options.fix_offsets) {
    for (int i = 12; i < 16; ++i) active.push_back(i);
  }

  Eigen::VectorXd theta = pack(initial);
  auto expand = [&](const Eigen::VectorXd& reduced) {
    Eigen::VectorXd full = theta;
    for (size_t i = 0; i < active.size(); ++i) full[active[i]] = reduced[i];
    if (options.tie_scales) {
      for (int i = 9; i < 12; ++i) full[i] = full[8];
    }
    return full;
  };
  auto reduce_jacobian = [&](const Eigen::MatrixXd& j) {
    Eigen::MatrixXd jr(j.rows(), active.size());
    for (size_t i = 0; i < active.size(); ++i) {
      jr.col(i) = j.col(active[i]);
      if (options.tie_scales && active[i] == 8) {
        for (int c = 9; c < 12; ++c) jr.col(i) += j.col(c);
      }
    }
    return jr;
  };

  Eigen::VectorXd reduced(active.size());
  for (size_t i = 0; i < active.size(); ++i) reduced[i] = theta[active[i]];

  CalibParams params = unpack(expand(reduced));
  Eigen::VectorXd res = calibration_residuals(model, params, log);
  double cost = res.squaredNorm();

  {
    Eigen::MatrixXd jr = reduce_jacobian(jacobian(model, params, log));
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(jr);
    double smax = svd.singularValues()[0];
    double smin = svd.singularValues()[svd.singularValues().size() - 1];
    if (smax <= 0 || smin / smax < 1e-9) {
      throw OptimizeError("insufficient excitation: rank-deficient Jacobian");
    }
  }

  CalibrationResult result;
  result.cost_history.push_back(cost);
  double lambda = 1e-6;
  int it = 0;
  for (; it < options.max_iterations; ++it) {
    Eigen::MatrixXd jr = reduce_jacobian(jacobian(model, params, log));
    Eigen::MatrixXd jtj = jr.transpose() * jr;
    Eigen::VectorXd jtr = jr.transpose() * res;

    bool stepped = false;
    for (int tries = 0; tries < 40; ++tries) {
      Eigen::MatrixXd damped = jtj + lambda * Eigen::MatrixXd(jtj.diagonal().asDiagonal());
      Eigen::VectorXd delta = damped.ldlt().solve(jtr);
      Eigen::VectorXd cand_reduced = reduced + delta;
      CalibParams cand = unpack(expand(cand_reduced));
      Eigen::VectorXd cand_res;
      try {
        cand_res = calibration_residuals(model, cand, log);
      } catch (const OptimizeError&) {
        lambda *= 10.0;
        continue;
      }
      double cand_cost = cand_res.squaredNorm();
      if (cand_cost < cost) {
        double rel = (cost - cand_cost) / std::max(cost, 1e-300);
        reduced = cand_reduced;
        params = cand;
        res = cand_res;
        cost = cand_cost;
        lambda = std::max(1e-12, lambda * 0.3);
        stepped = true;
        result.cost_history.push_back(cost);
        result.converged = rel < options.cost_tolerance;
        break;
      }
      lambda *= 10.0;
      if (lambda > 1e14) break;
    }
    if (!stepped) {
      // No damped step improves the cost: stationary point.
      result.converged = true;
      break;
    }
    if (result.converged) break;
  }

  result.params = params;
  result.final_cost = cost;
  result.iterations = it + 1;
  return result;
}

CalibLog load_calib_log(const std::string& path) {
  CsvTable table = read_csv(path);
  std::vector<std::string> expect{"t", "x", "y", "theta",
                                  "l1", "l2", "l3", "l4"};
  if (table.header != expect) {
    throw ParseError("not a calibration log CSV: " + path);
  }
  CalibLog log;
  for (size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    std::string ctx = path + " row " + std::to_string(r + 2);
    if (row.size() != 8) throw ParseError("wrong column count in " + ctx);
    CalibSample s;
    s.pose.p = Vec2(parse_double(row[1], ctx), parse_double(row[2], ctx));
    s.pose.theta = parse_double(row[3], ctx);
    for (int i = 0; i < 4; ++i) s.lengths[i] = parse_double(row[4 + i], ctx);
    log.samples.push_back(s);
  }
  return log;
}

void save_calib_log(const CalibLog& log, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot write file: " + path);
  out << "t,x,y,theta,l1,l2,l3,l4\n";
  for (size_t k = 0; k < log.samples.size(); ++k) {
    const CalibSample& s = log.samples[k];
    out << format_double(0.01 * static_cast<double>(k)) << ','
        << format_double(s.pose.p.x()) << ',' << format_double(s.pose.p.y())
        << ',' << format_double(s.pose.theta);
    for (int i = 0; i < 4; ++i) out << ',' << format_double(s.lengths[i]);
    out << '\n';
  }
}

void save_calib_params(const CalibParams& params, const std::string& path) {
  ordered_json j;
  j["format"] = "cablepaint-calibration";
  ordered_json pulleys = ordered_json::array();
  for (int i = 0; i < 4; ++i) {
    pulleys.push_back({params.pulleys[i].x(), params.pulleys[i].y()});
  }
  j["pulleys"] = pulleys;
  j["scale"] = params.scale;
  j["offset"] = params.offset;
  std::ofstream out(path);
  if (!out) throw ParseError("cannot write file: " + path);
  out << j.dump(2) << "\n";
}

CalibParams load_calib_params(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open file: " + path);
  ordered_json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw ParseError("bad calibration file " + path + ": " + e.what());
  }
  if (j.value("format", "") != "cablepaint-calibration") {
    throw ParseError("not a calibration file: " + path);
  }
  CalibParams p;
  for (int i = 0; i < 4; ++i) {
    p.pulleys[i] = Vec2(j.at("pulleys").at(i).at(0).get<double>(),
                        j.at("pulleys").at(i).at(1).get<double>());
    p.scale[i] = j.at("scale").at(i).get<double>();
    p.offset[i] = j.at("offset").at(i).get<double>();
  }
  return p;
}

RobotModel apply_calibration(const RobotModel& model, const CalibParams& p) {
  RobotModel out = model;
  out.pulleys = p.pulleys;
  return out;
}

}  // namespace cablepaint
