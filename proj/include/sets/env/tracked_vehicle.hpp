#pragma once

// Tracked ground vehicle (x, y, θ, v, ω) with first-order velocity response
// to commanded (v_d, ω_d), driven in shared-control mode: the human command
// sets the reward, the planner picks the executed command.

#include "sets/env/common.hpp"
#include "sets/env/hazard_grid.hpp"

#include <array>
#include <cmath>
#include <memory>
#include <numbers>

namespace sets::env {

struct TrackedVehicleConfig {
  double dt = 0.1;
  double tau_v = 0.2;
  double tau_omega = 0.15;
  int horizon = 16;
  double gamma = 1.0;
  /// Driver command the reward tracks.
  double v_cmd = 0.0;
  double omega_cmd = 0.0;
  /// {a1, a2, a3, a4}: executed command = [[1+a1, a2], [a3, 1+a4]]·u.
  std::array<double, 4> degradation{0.0, 0.0, 0.0, 0.0};
  double footprint_radius = 0.3;
  /// Constant terminal reward for trajectories that finish safely. Zero
  /// reproduces D ≡ 0; horizon·max R makes every feasible plan beat every
  /// infeasible one.
  double terminal_bonus = 0.0;
  IntervalBox state_box = IntervalBox((Vector(5) << -100, -100, -10 * std::numbers::pi, -1.8, -1.5).finished(),
                                      (Vector(5) << 100, 100, 10 * std::numbers::pi, 1.8, 1.5).finished());
  IntervalBox action_box = IntervalBox::uniform(2, -1.0, 1.0);
};

inline Eigen::Matrix2d degradation_matrix(const std::array<double, 4>& a) {
  Eigen::Matrix2d M;
  M << 1.0 + a[0], a[1], a[2], 1.0 + a[3];
  return M;
}

inline Vector tracked_vehicle_step(const Vector& x, const Vector& u, const TrackedVehicleConfig& cfg) {
  const Eigen::Vector2d cmd = degradation_matrix(cfg.degradation) * u.head<2>();
  const double theta = x[2], v = x[3], omega = x[4];
  Vector next(5);
  next[0] = x[0] + cfg.dt * v * std::cos(theta);
  next[1] = x[1] + cfg.dt * v * std::sin(theta);
  next[2] = theta + cfg.dt * omega;
  next[3] = v + cfg.dt * (cmd[0] - v) / cfg.tau_v;
  next[4] = omega + cfg.dt * (cmd[1] - omega) / cfg.tau_omega;
  return next;
}

inline double tracked_vehicle_reward(const Vector& x, double v_cmd, double omega_cmd) {
  const double dv = x[3] - v_cmd;
  const double dw = x[4] - omega_cmd;
  return std::max(1.0 - 0.8 * dv * dv - 0.6 * dw * dw, 0.0);
}

/// `hazard` may be null for open terrain.
inline MdpDefinition make_tracked_vehicle(const TrackedVehicleConfig& cfg, std::shared_ptr<const HazardGrid> hazard) {
  MdpDefinition mdp;
  mdp.state_dim = 5;
  mdp.action_dim = 2;
  mdp.dynamics = [cfg](const Vector& x, const Vector& u) { return tracked_vehicle_step(x, u, cfg); };
  const double v_cmd = cfg.v_cmd, omega_cmd = cfg.omega_cmd;
  mdp.stage_reward = [v_cmd, omega_cmd](const Vector& x) { return tracked_vehicle_reward(x, v_cmd, omega_cmd); };
  const double bonus = cfg.terminal_bonus;
  mdp.terminal_reward = [bonus](const Vector&) { return bonus; };
  mdp.terminal_reward_max = bonus;
  const double radius = cfg.footprint_radius;
  mdp.unsafe = [hazard, radius](const Vector& x) { return hazard && hazard->disc_collides(x[0], x[1], radius); };
  mdp.state_box = cfg.state_box;
  mdp.action_box = cfg.action_box;
  mdp.horizon = cfg.horizon;
  mdp.discount = cfg.gamma;
  mdp.dt = cfg.dt;
  mdp.validate();
  return mdp;
}

}  // namespace sets::env
