#pragma once

#include "sets/env/common.hpp"

#include <vector>

namespace sets::env {

struct CircleObstacle {
  Eigen::Vector2d center;
  double radius = 0.0;
};

/// Planar point mass with state (x, y, vx, vy) and acceleration input.
struct DoubleIntegratorConfig {
  double dt = 0.1;
  int horizon = 100;
  double gamma = 0.99;
  Eigen::Vector2d goal = Eigen::Vector2d(5.0, 0.0);
  /// Distance scale a of the goal shaping s(d, a).
  double reward_scale = 0.5;
  std::vector<CircleObstacle> obstacles;
  IntervalBox state_box = IntervalBox(Vector::Constant(4, -10.0), Vector::Constant(4, 10.0));
  IntervalBox action_box = IntervalBox::uniform(2, -1.0, 1.0);
};

inline Vector double_integrator_step(const Vector& x, const Vector& u, double dt) {
  Vector next(4);
  next[0] = x[0] + dt * x[2];
  next[1] = x[1] + dt * x[3];
  next[2] = x[2] + dt * u[0];
  next[3] = x[3] + dt * u[1];
  return next;
}

inline MdpDefinition make_double_integrator(const DoubleIntegratorConfig& cfg) {
  MdpDefinition mdp;
  mdp.state_dim = 4;
  mdp.action_dim = 2;
  const double dt = cfg.dt;
  mdp.dynamics = [dt](const Vector& x, const Vector& u) { return double_integrator_step(x, u, dt); };
  const Eigen::Vector2d goal = cfg.goal;
  const double a = cfg.reward_scale;
  mdp.stage_reward = [goal, a](const Vector& x) {
    return normalized_distance_reward((x.head<2>() - goal).norm(), a);
  };
  mdp.terminal_reward = [](const Vector&) { return 0.0; };
  const auto obstacles = cfg.obstacles;
  mdp.unsafe = [obstacles](const Vector& x) {
    for (const auto& ob : obstacles) {
      if ((x.head<2>() - ob.center).norm() <= ob.radius) return true;
    }
    return false;
  };
  mdp.state_box = cfg.state_box;
  mdp.action_box = cfg.action_box;
  mdp.horizon = cfg.horizon;
  mdp.discount = cfg.gamma;
  mdp.dt = cfg.dt;
  mdp.validate();
  return mdp;
}

/// x⁺ = A x + B u + c with a constant reward; used to exercise exactness.
inline MdpDefinition make_linear_system(const Matrix& A, const Matrix& B, const Vector& c, IntervalBox state_box,
                                        IntervalBox action_box, int horizon, double gamma) {
  MdpDefinition mdp;
  mdp.state_dim = static_cast<int>(A.rows());
  mdp.action_dim = static_cast<int>(B.cols());
  mdp.dynamics = [A, B, c](const Vector& x, const Vector& u) -> Vector { return A * x + B * u + c; };
  mdp.stage_reward = [](const Vector&) { return 1.0; };
  mdp.terminal_reward = [](const Vector&) { return 0.0; };
  mdp.state_box = std::move(state_box);
  mdp.action_box = std::move(action_box);
  mdp.horizon = horizon;
  mdp.discount = gamma;
  mdp.dt = 1.0;
  mdp.validate();
  return mdp;
}

}  // namespace sets::env
