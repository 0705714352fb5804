#pragma once

// Deterministic continuous MDP definition and the rollout primitives shared by
// every planner in this library.

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace sets {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Axis-aligned box [lower, upper] used for both state and action limits.
struct IntervalBox {
  Vector lower;
  Vector upper;

  IntervalBox() = default;
  IntervalBox(Vector lo, Vector hi) : lower(std::move(lo)), upper(std::move(hi)) {
    if (lower.size() == 0 || lower.size() != upper.size()) {
      throw std::invalid_argument("IntervalBox: bounds must be non-empty and of equal length");
    }
    for (Eigen::Index j = 0; j < lower.size(); ++j) {
      if (!(lower[j] <= upper[j])) {
        throw std::invalid_argument("IntervalBox: lower > upper at index " + std::to_string(j));
      }
    }
  }

  /// Same bounds [lo, hi] in every one of `dim` coordinates.
  static IntervalBox uniform(Eigen::Index dim, double lo, double hi) {
    return IntervalBox(Vector::Constant(dim, lo), Vector::Constant(dim, hi));
  }

  Eigen::Index dim() const { return lower.size(); }
  Vector center() const { return 0.5 * (lower + upper); }
  Vector half_width() const { return 0.5 * (upper - lower); }

  bool contains(const Vector& x) const {
    if (x.size() != dim()) return false;
    for (Eigen::Index j = 0; j < dim(); ++j) {
      if (!(x[j] >= lower[j] && x[j] <= upper[j])) return false;
    }
    return true;
  }
};

/// ⟨X, U, F, R, D, Ω, K, γ⟩ with a fixed timestep. Stage rewards are
/// state-only and evaluated at the arrived-at state.
struct MdpDefinition {
  using Dynamics = std::function<Vector(const Vector&, const Vector&)>;
  using StateReward = std::function<double(const Vector&)>;
  using Predicate = std::function<bool(const Vector&)>;

  int state_dim = 0;
  int action_dim = 0;
  Dynamics dynamics;
  StateReward stage_reward;
  StateReward terminal_reward;
  Predicate unsafe;
  IntervalBox state_box;
  IntervalBox action_box;
  int horizon = 1;
  double discount = 0.99;
  double dt = 0.1;
  /// Upper bound of terminal_reward over the state box, used for value bounds.
  double terminal_reward_max = 0.0;

  /// Unsafe means inside Ω or outside the state box.
  bool is_unsafe(const Vector& x) const {
    if (!state_box.contains(x)) return true;
    return unsafe && unsafe(x);
  }

  void validate() const {
    if (state_dim <= 0 || action_dim <= 0) throw std::invalid_argument("MdpDefinition: dimensions must be positive");
    if (!dynamics || !stage_reward) throw std::invalid_argument("MdpDefinition: dynamics and stage_reward are required");
    if (state_box.dim() != state_dim || action_box.dim() != action_dim) {
      throw std::invalid_argument("MdpDefinition: box dimensions do not match");
    }
    if (horizon <= 0) throw std::invalid_argument("MdpDefinition: horizon must be positive");
    if (!(discount >= 0.0 && discount <= 1.0)) throw std::invalid_argument("MdpDefinition: discount must be in [0,1]");
    if (!(dt > 0.0)) throw std::invalid_argument("MdpDefinition: dt must be positive");
  }
};

/// States x_0..x_L, actions u_1..u_L and rewards R(x_1)..R(x_L). Rewards past
/// the safe prefix are zero.
struct Trajectory {
  std::vector<Vector> states;
  std::vector<Vector> actions;
  std::vector<double> stage_rewards;
  int safe_prefix_len = 0;

  int length() const { return static_cast<int>(actions.size()); }
  bool safe() const { return safe_prefix_len == length(); }

  /// Appends `tail`, whose first state must equal this trajectory's last.
  void append(const Trajectory& tail) {
    if (states.empty()) {
      *this = tail;
      return;
    }
    const bool was_safe = safe();
    states.insert(states.end(), tail.states.begin() + 1, tail.states.end());
    actions.insert(actions.end(), tail.actions.begin(), tail.actions.end());
    stage_rewards.insert(stage_rewards.end(), tail.stage_rewards.begin(), tail.stage_rewards.end());
    if (was_safe) safe_prefix_len += tail.safe_prefix_len;
  }
};

inline bool all_finite(const Vector& v) { return v.allFinite(); }

inline Vector step(const MdpDefinition& mdp, const Vector& x, const Vector& u) {
  if (x.size() != mdp.state_dim || u.size() != mdp.action_dim) {
    throw std::invalid_argument("step: dimension mismatch");
  }
  Vector next = mdp.dynamics(x, u);
  if (!all_finite(next)) throw std::runtime_error("dynamics produced non-finite state");
  return next;
}

/// Componentwise saturation onto the box.
inline Vector clip_action(const Vector& u, const IntervalBox& box) {
  if (u.size() != box.dim()) throw std::invalid_argument("clip_action: dimension mismatch");
  return u.cwiseMax(box.lower).cwiseMin(box.upper);
}

/// Σ_k γ^(offset+k) r_k.
inline double discounted_return(const std::vector<double>& rewards, double gamma, int step_offset = 0) {
  double total = 0.0;
  double weight = std::pow(gamma, step_offset);
  for (double r : rewards) {
    total += weight * r;
    weight *= gamma;
  }
  return total;
}

/// Open-loop rollout. Stops counting reward at the first unsafe arrival but
/// keeps simulating so the trajectory always has us.size() steps.
inline Trajectory rollout(const MdpDefinition& mdp, const Vector& x0, const std::vector<Vector>& us) {
  if (us.empty()) throw std::invalid_argument("rollout: empty action sequence");
  Trajectory traj;
  traj.states.reserve(us.size() + 1);
  traj.states.push_back(x0);
  traj.safe_prefix_len = static_cast<int>(us.size());
  bool safe = true;
  for (std::size_t k = 0; k < us.size(); ++k) {
    Vector next = step(mdp, traj.states.back(), us[k]);
    if (safe && mdp.is_unsafe(next)) {
      safe = false;
      traj.safe_prefix_len = static_cast<int>(k);
    }
    traj.stage_rewards.push_back(safe ? mdp.stage_reward(next) : 0.0);
    traj.actions.push_back(us[k]);
    traj.states.push_back(std::move(next));
  }
  return traj;
}

/// Discounted return of a full-horizon trajectory including the terminal reward
/// when the trajectory is safe throughout.
inline double trajectory_return(const MdpDefinition& mdp, const Trajectory& traj) {
  double value = discounted_return(traj.stage_rewards, mdp.discount);
  if (traj.safe() && mdp.terminal_reward && traj.length() >= mdp.horizon) {
    value += std::pow(mdp.discount, traj.length()) * mdp.terminal_reward(traj.states.back());
  }
  return value;
}

/// Largest value any rollout of the given length can attain.
inline double value_upper_bound(const MdpDefinition& mdp, int steps) {
  const double g = mdp.discount;
  const double stage = g == 1.0 ? static_cast<double>(steps) : (1.0 - std::pow(g, steps)) / (1.0 - g);
  return stage + std::pow(g, steps) * mdp.terminal_reward_max;
}

}  // namespace sets
