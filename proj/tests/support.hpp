#pragma once

// Shared fixtures: seeded generators and small hand-checkable MDPs.

#include "sets/env/double_integrator.hpp"
#include "sets/tree_search.hpp"

#include <random>
#include <vector>

namespace sets::testing {

inline Vector random_vector(Rng& rng, Eigen::Index n, double lo, double hi) {
  std::uniform_real_distribution<double> d(lo, hi);
  Vector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = d(rng);
  return v;
}

inline Matrix random_matrix(Rng& rng, Eigen::Index r, Eigen::Index c, double lo, double hi) {
  std::uniform_real_distribution<double> d(lo, hi);
  Matrix m(r, c);
  for (Eigen::Index i = 0; i < r; ++i) {
    for (Eigen::Index j = 0; j < c; ++j) m(i, j) = d(rng);
  }
  return m;
}

inline int random_int(Rng& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }

/// Point mass in one axis: (p, v), u = acceleration.
inline MdpDefinition double_integrator_1d(double dt, int horizon) {
  Matrix A(2, 2);
  A << 1, dt, 0, 1;
  Matrix B(2, 1);
  B << 0, dt;
  return env::make_linear_system(A, B, Vector::Zero(2), IntervalBox::uniform(2, -1e6, 1e6), IntervalBox::uniform(1, -1, 1),
                                 horizon, 1.0);
}

/// Deterministic binary tree: state (node id), action slot ∈ {0, 1}, child id
/// 2·id + 1 + slot, reward looked up by the arrived-at id.
inline MdpDefinition binary_tree_mdp(std::vector<double> rewards, int depth, double gamma) {
  MdpDefinition mdp;
  mdp.state_dim = 1;
  mdp.action_dim = 1;
  mdp.dynamics = [](const Vector& x, const Vector& u) {
    Vector n(1);
    n[0] = 2.0 * x[0] + 1.0 + std::round(u[0]);
    return n;
  };
  mdp.stage_reward = [rewards](const Vector& x) { return rewards.at(static_cast<std::size_t>(x[0])); };
  mdp.terminal_reward = [](const Vector&) { return 0.0; };
  mdp.state_box = IntervalBox::uniform(1, 0.0, 1e6);
  mdp.action_box = IntervalBox::uniform(1, 0.0, 1.0);
  mdp.horizon = depth;
  mdp.discount = gamma;
  mdp.dt = 1.0;
  mdp.validate();
  return mdp;
}

/// One child per action slot, each a single step.
class SlotExpander {
 public:
  using Context = Vector;
  SlotExpander(MdpDefinition mdp, int slots) : mdp_(std::move(mdp)), slots_(slots) {}
  int branch_len() const { return 1; }
  int branch_count() const { return slots_; }
  int open_slots(long) const { return slots_; }
  Context prepare(const Vector& x, int) const { return x; }
  Branch expand(const Context& x, int slot, Rng&) const {
    Vector u(1);
    u[0] = slot;
    return make_branch(mdp_, rollout(mdp_, x, {u}), BranchKind::kUniform, slot, x);
  }

 private:
  MdpDefinition mdp_;
  int slots_;
};

}  // namespace sets::testing
