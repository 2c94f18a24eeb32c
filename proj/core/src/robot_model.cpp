#include "cablepaint/robot_model.hpp"

#include <cmath>
#include <fstream>

#include <json.hpp>

#include "cablepaint/errors.hpp"

namespace cablepaint {

using ordered_json = nlohmann::ordered_json;

void RobotModel::frame_bounds(Vec2& lo, Vec2& hi) const {
  lo = pulleys[0];
  hi = pulleys[0];
  for (const Vec2& a : pulleys) {
    lo = lo.cwiseMin(a);
    hi = hi.cwiseMax(a);
  }
}

void RobotModel::validate() const {
  if (!(winch_radius > 0)) throw ParseError("winch_radius must be > 0");
  if (!(mass > 0)) throw ParseError("mass must be > 0");
  if (!(rot_inertia > 0)) throw ParseError("rot_inertia must be > 0");
  if (!(motor_inertia >= 0)) throw ParseError("motor_inertia must be >= 0");
  if (!(tension_min >= 0)) throw ParseError("tension_min must be >= 0");
  if (!(tension_min < tension_max)) {
    throw ParseError("tension limits must satisfy t_min < t_max");
  }
  if (!(torque_min < torque_max)) {
    throw ParseError("torque limits must satisfy tau_min < tau_max");
  }
  for (int i = 0; i < 4; ++i) {
    for (int j = i + 1; j < 4; ++j) {
      if ((pulleys[i] - pulleys[j]).norm() < 1e-9) {
        throw ParseError("pulleys must be pairwise distinct");
      }
    }
  }
}

static ordered_json vec2_json(const Vec2& v) {
  return ordered_json::array({v.x(), v.y()});
}

static Vec2 vec2_from(const ordered_json& j) {
  return Vec2(j.at(0).get<double>(), j.at(1).get<double>());
}

static ordered_json to_json(const RobotModel& m) {
  ordered_json j;
  j["format"] = "cablepaint-robot";
  ordered_json pulleys = ordered_json::array();
  ordered_json mounts = ordered_json::array();
  for (int i = 0; i < 4; ++i) {
    pulleys.push_back(vec2_json(m.pulleys[i]));
    mounts.push_back(vec2_json(m.mounts[i]));
  }
  j["pulleys"] = pulleys;
  j["mounts"] = mounts;
  j["winch_radius"] = m.winch_radius;
  j["motor_inertia"] = m.motor_inertia;
  j["friction_mu"] = m.friction_mu;
  j["friction_b"] = m.friction_b;
  j["mass"] = m.mass;
  j["rot_inertia"] = m.rot_inertia;
  j["gravity"] = m.gravity;
  j["tension_min"] = m.tension_min;
  j["tension_max"] = m.tension_max;
  j["torque_min"] = m.torque_min;
  j["torque_max"] = m.torque_max;
  return j;
}

void save_robot_model(const RobotModel& model, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot write file: " + path);
  out << to_json(model).dump(2) << "\n";
}

RobotModel load_robot_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open file: " + path);
  ordered_json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw ParseError("bad robot config " + path + ": " + e.what());
  }
  if (j.value("format", "") != "cablepaint-robot") {
    throw ParseError("not a robot config file: " + path);
  }
  RobotModel m;
  for (int i = 0; i < 4; ++i) {
    m.pulleys[i] = vec2_from(j.at("pulleys").at(i));
    m.mounts[i] = vec2_from(j.at("mounts").at(i));
  }
  m.winch_radius = j.at("winch_radius").get<double>();
  m.motor_inertia = j.at("motor_inertia").get<double>();
  m.friction_mu = j.at("friction_mu").get<double>();
  m.friction_b = j.at("friction_b").get<double>();
  m.mass = j.at("mass").get<double>();
  m.rot_inertia = j.at("rot_inertia").get<double>();
  m.gravity = j.at("gravity").get<double>();
  m.tension_min = j.at("tension_min").get<double>();
  m.tension_max = j.at("tension_max").get<double>();
  m.torque_min = j.at("torque_min").get<double>();
  m.torque_max = j.at("torque_max").get<double>();
  m.validate();
  return m;
}

uint64_t model_hash(const RobotModel& model) {
  std::string s = to_json(model).dump();
  uint64_t h = 14695981039346656037ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace cablepaint
