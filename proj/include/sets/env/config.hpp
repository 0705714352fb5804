#pragma once

// JSON configuration: an environment document with a `type` discriminator
// and an optional `planner` section.

#include "sets/env/double_integrator.hpp"
#include "sets/env/glider.hpp"
#include "sets/env/hazard_grid.hpp"
#include "sets/env/spacecraft_net.hpp"
#include "sets/env/tracked_vehicle.hpp"
#include "sets/planner.hpp"

#include <nlohmann/json.hpp>

#include <fstream>
#include <memory>
#include <string>

namespace sets::env {

using nlohmann::json;

namespace detail {

inline Vector vector_from(const json& j, const char* what) {
  if (!j.is_array()) throw ConfigError(std::string(what) + ": expected an array of numbers");
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) throw ConfigError(std::string(what) + ": expected an array of numbers");
    v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
  }
  return v;
}

inline Eigen::Vector2d vec2_from(const json& j, const char* what) {
  const Vector v = vector_from(j, what);
  if (v.size() != 2) throw ConfigError(std::string(what) + ": expected 2 entries");
  return v;
}

inline IntervalBox box_from(const json& j, const char* what) {
  try {
    return IntervalBox(vector_from(j.at("lower"), what), vector_from(j.at("upper"), what));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string(what) + ": " + e.what());
  }
}

inline Vector initial_state_from(const json& j, Eigen::Index dim, const Vector& fallback) {
  if (!j.contains("initial_state")) return fallback;
  Vector x = vector_from(j["initial_state"], "initial_state");
  if (x.size() != dim) throw ConfigError("initial_state: expected " + std::to_string(dim) + " entries");
  return x;
}

template <typename T>
void read(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j[key].get<T>();
}

}  // namespace detail

inline DoubleIntegratorConfig double_integrator_config_from(const json& j) {
  DoubleIntegratorConfig c;
  detail::read(j, "dt", c.dt);
  detail::read(j, "horizon", c.horizon);
  detail::read(j, "gamma", c.gamma);
  detail::read(j, "reward_scale", c.reward_scale);
  if (j.contains("goal")) c.goal = detail::vec2_from(j["goal"], "goal");
  if (j.contains("obstacles")) {
    for (const auto& ob : j["obstacles"]) {
      c.obstacles.push_back({detail::vec2_from(ob.at("center"), "obstacle center"), ob.at("radius").get<double>()});
    }
  }
  if (j.contains("state_box")) c.state_box = detail::box_from(j["state_box"], "state_box");
  if (j.contains("action_box")) c.action_box = detail::box_from(j["action_box"], "action_box");
  return c;
}

inline TrackedVehicleConfig tracked_vehicle_config_from(const json& j) {
  TrackedVehicleConfig c;
  detail::read(j, "dt", c.dt);
  detail::read(j, "tau_v", c.tau_v);
  detail::read(j, "tau_omega", c.tau_omega);
  detail::read(j, "horizon", c.horizon);
  detail::read(j, "gamma", c.gamma);
  detail::read(j, "v_cmd", c.v_cmd);
  detail::read(j, "omega_cmd", c.omega_cmd);
  detail::read(j, "footprint_radius", c.footprint_radius);
  detail::read(j, "terminal_bonus", c.terminal_bonus);
  if (j.contains("degradation")) {
    const Vector a = detail::vector_from(j["degradation"], "degradation");
    if (a.size() != 4) throw ConfigError("degradation: expected 4 entries");
    for (int i = 0; i < 4; ++i) c.degradation[i] = a[i];
  }
  if (j.contains("state_box")) c.state_box = detail::box_from(j["state_box"], "state_box");
  if (j.contains("action_box")) c.action_box = detail::box_from(j["action_box"], "action_box");
  return c;
}

/// `"map": "chicane"`, an inline HazardGrid object, or absent for open terrain.
inline std::shared_ptr<const HazardGrid> hazard_from(const json& j) {
  if (!j.contains("map") || j["map"].is_null()) return nullptr;
  const json& m = j["map"];
  if (m.is_string()) {
    if (m.get<std::string>() == "chicane") return std::make_shared<const HazardGrid>(make_chicane_map());
    throw ConfigError("map: unknown named map '" + m.get<std::string>() + "'");
  }
  return std::make_shared<const HazardGrid>(hazard_grid_from_json(m));
}

inline SpacecraftNetConfig spacecraft_net_config_from(const json& j) {
  SpacecraftNetConfig c;
  detail::read(j, "chain_nodes", c.chain_nodes);
  detail::read(j, "spacecraft_mass", c.spacecraft_mass);
  detail::read(j, "node_mass", c.node_mass);
  detail::read(j, "target_mass", c.target_mass);
  if (j.contains("net")) {
    const json& n = j["net"];
    detail::read(n, "nominal_len", c.net.nominal_len);
    detail::read(n, "stiffness", c.net.stiffness);
    detail::read(n, "damping", c.net.damping);
    detail::read(n, "contact_stiffness", c.net.contact_stiffness);
    detail::read(n, "contact_damping", c.net.contact_damping);
    detail::read(n, "target_radius", c.net.target_radius);
  }
  if (j.contains("reward_weights")) {
    const Vector w = detail::vector_from(j["reward_weights"], "reward_weights");
    if (w.size() != 3) throw ConfigError("reward_weights: expected 3 entries");
    c.c1 = w[0], c.c2 = w[1], c.c3 = w[2];
  }
  if (j.contains("reward_scales")) {
    const Vector a = detail::vector_from(j["reward_scales"], "reward_scales");
    if (a.size() != 3) throw ConfigError("reward_scales: expected 3 entries");
    c.a1 = a[0], c.a2 = a[1], c.a3 = a[2];
  }
  if (j.contains("desired_velocity")) c.desired_velocity = detail::vec2_from(j["desired_velocity"], "desired_velocity");
  detail::read(j, "thrust_limit", c.thrust_limit);
  detail::read(j, "dt", c.dt);
  detail::read(j, "horizon", c.horizon);
  detail::read(j, "gamma", c.gamma);
  detail::read(j, "position_limit_lo", c.position_limit_lo);
  detail::read(j, "position_limit_hi", c.position_limit_hi);
  detail::read(j, "velocity_limit", c.velocity_limit);
  return c;
}

inline GliderConfig glider_config_from(const json& j) {
  GliderConfig c;
  for (const char* key : {"mass", "Jx", "Jy", "Jz", "Jxz", "wing_area", "chord", "span"}) {
    if (!j.contains(key)) throw ConfigError(std::string("glider: missing '") + key + "'");
  }
  c.mass = j["mass"].get<double>();
  c.Jx = j["Jx"].get<double>();
  c.Jy = j["Jy"].get<double>();
  c.Jz = j["Jz"].get<double>();
  c.Jxz = j["Jxz"].get<double>();
  c.wing_area = j["wing_area"].get<double>();
  c.chord = j["chord"].get<double>();
  c.span = j["span"].get<double>();
  if (!j.contains("aero")) throw ConfigError("glider: missing 'aero' coefficient table");
  c.aero = aero_from_json(j["aero"]);
  detail::read(j, "air_density", c.air_density);
  detail::read(j, "gravity", c.gravity);
  if (j.contains("thermal")) {
    const json& t = j["thermal"];
    c.thermal_center = detail::vec2_from(t.at("center"), "thermal center");
    c.thermal_radius = t.at("radius").get<double>();
    c.thermal_force = t.at("force").get<double>();
  }
  if (j.contains("target")) {
    const Vector t = detail::vector_from(j["target"], "target");
    if (t.size() != 3) throw ConfigError("target: expected 3 entries");
    c.target = t;
  }
  detail::read(j, "cone_half_angle_deg", c.cone_half_angle_deg);
  detail::read(j, "cone_length", c.cone_length);
  detail::read(j, "stay_alive_reward", c.stay_alive_reward);
  detail::read(j, "observation_timescale", c.observation_timescale);
  detail::read(j, "target_distance_scale", c.target_distance_scale);
  detail::read(j, "dt", c.dt);
  detail::read(j, "horizon", c.horizon);
  detail::read(j, "gamma", c.gamma);
  return c;
}

/// Level flight at 25 m/s, 100 m up, heading north.
inline Vector glider_default_initial_state() {
  Vector x = Vector::Zero(13);
  x[2] = -100.0;
  x[3] = 25.0;
  return x;
}

inline Environment environment_from_json(const json& j) {
  try {
    if (!j.is_object() || !j.contains("type")) throw ConfigError("config: missing 'type'");
    const std::string type = j["type"].get<std::string>();
    Environment e;
    e.type = type;
    if (type == "double_integrator") {
      e.mdp = make_double_integrator(double_integrator_config_from(j));
      e.initial_state = detail::initial_state_from(j, 4, Vector::Zero(4));
    } else if (type == "tracked_vehicle") {
      e.mdp = make_tracked_vehicle(tracked_vehicle_config_from(j), hazard_from(j));
      e.initial_state = detail::initial_state_from(j, 5, Vector::Zero(5));
    } else if (type == "spacecraft_net") {
      const SpacecraftNetConfig c = spacecraft_net_config_from(j);
      e.mdp = make_spacecraft_net(c);
      const Eigen::Vector2d target =
          j.contains("target_position") ? detail::vec2_from(j["target_position"], "target_position")
                                        : Eigen::Vector2d(0.9 * c.net.nominal_len * (c.chain_nodes - 1) / 2.0, -1.0);
      e.initial_state = detail::initial_state_from(j, e.mdp.state_dim, spacecraft_net_initial_state(c, target));
    } else if (type == "glider") {
      e.mdp = make_glider(glider_config_from(j));
      e.initial_state = detail::initial_state_from(j, 13, glider_default_initial_state());
    } else {
      throw ConfigError("config: unknown environment type '" + type + "'");
    }
    if (e.mdp.is_unsafe(e.initial_state)) throw ConfigError("config: initial state is unsafe");
    return e;
  } catch (const json::exception& ex) {
    throw ConfigError(std::string("config: ") + ex.what());
  } catch (const std::invalid_argument& ex) {
    throw ConfigError(std::string("config: ") + ex.what());
  }
}

inline PlannerConfig planner_config_from(const json& j) {
  PlannerConfig p;
  if (!j.contains("planner")) return p;
  try {
    const json& c = j["planner"];
    if (c.contains("method")) p.method = parse_method(c["method"].get<std::string>());
    detail::read(c, "branch_len", p.expansion.branch_len);
    if (p.expansion.branch_len < 1) throw ConfigError("planner: branch_len must be at least 1");
    if (c.contains("mode_groups")) p.expansion.mode_groups = c["mode_groups"].get<std::vector<std::vector<int>>>();
    if (c.contains("goal_bias")) p.expansion.goal_bias = detail::vector_from(c["goal_bias"], "goal_bias");
    if (c.contains("goal_coordinates")) p.expansion.goal_coordinates = c["goal_coordinates"].get<std::vector<int>>();
    detail::read(c, "time_invariant_lin", p.expansion.time_invariant_lin);
    detail::read(c, "reuse_first_gain", p.expansion.reuse_first_gain);
    if (c.contains("on_dare_failure")) {
      const auto policy = c["on_dare_failure"].get<std::string>();
      if (policy == "finite_horizon") {
        p.expansion.on_dare_failure = DareFailurePolicy::kFiniteHorizonGains;
      } else if (policy == "mark_unsafe") {
        p.expansion.on_dare_failure = DareFailurePolicy::kMarkUnsafe;
      } else {
        throw ConfigError("planner: on_dare_failure must be finite_horizon or mark_unsafe");
      }
    }
    detail::read(c, "eta", p.eta);
    detail::read(c, "k_pw", p.widening.k_pw);
    detail::read(c, "alpha_pw", p.widening.alpha_pw);
    detail::read(c, "max_children", p.widening.max_children);
    detail::read(c, "c1", p.constants.c1);
    detail::read(c, "c2", p.constants.c2);
    detail::read(c, "c3", p.constants.c3);
    if (c.contains("iterations")) p.budget.max_iterations = c["iterations"].get<long>();
    if (c.contains("wall_ms")) {
      p.budget.max_wall_time = std::chrono::milliseconds(c["wall_ms"].get<long>());
      if (!c.contains("iterations")) p.budget.max_iterations.reset();
    }
  } catch (const json::exception& ex) {
    throw ConfigError(std::string("planner: ") + ex.what());
  } catch (const std::invalid_argument& ex) {
    throw ConfigError(std::string("planner: ") + ex.what());
  }
  return p;
}

inline json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::exception& ex) {
    throw ConfigError("config: " + path + ": " + ex.what());
  }
}

}  // namespace sets::env
