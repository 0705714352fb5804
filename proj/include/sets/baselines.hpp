#pragma once

// Comparison planners: uniform action discretization, double progressive
// widening, and predictive sampling over any expander.

#include "sets/tree_search.hpp"

#include <cmath>
#include <stdexcept>

namespace sets {

struct UniformGrid {
  int eta = 3;       // points per action dimension
  int hold_len = 1;  // steps each constant action is held
};

inline int ipow(int base, int exp) {
  int out = 1;
  for (int i = 0; i < exp; ++i) out *= base;
  return out;
}

/// Grid action for `child_index`, decoded least-significant digit first.
inline Vector uniform_grid_action(const IntervalBox& box, int child_index, int eta) {
  if (eta < 2) throw std::invalid_argument("uniform grid: eta must be at least 2");
  const int m = static_cast<int>(box.dim());
  if (child_index < 0 || child_index >= ipow(eta, m)) throw std::out_of_range("uniform grid: child index out of range");
  Vector u(m);
  int rest = child_index;
  for (int j = 0; j < m; ++j) {
    const int digit = rest % eta;
    rest /= eta;
    u[j] = box.lower[j] + (static_cast<double>(digit) / (eta - 1)) * (box.upper[j] - box.lower[j]);
  }
  return u;
}

inline Branch hold_action_branch(const MdpDefinition& mdp, const Vector& x0, const Vector& u, int steps,
                                 BranchKind kind, int index) {
  const Vector clipped = clip_action(u, mdp.action_box);
  Trajectory traj = rollout(mdp, x0, std::vector<Vector>(steps, clipped));
  Vector end = traj.states.back();
  return make_branch(mdp, std::move(traj), kind, index, std::move(end));
}

inline Branch uniform_expand(const MdpDefinition& mdp, const Vector& x0, int child_index, const UniformGrid& grid) {
  return hold_action_branch(mdp, x0, uniform_grid_action(mdp.action_box, child_index, grid.eta), grid.hold_len,
                            BranchKind::kUniform, child_index);
}

class UniformExpander {
 public:
  struct Context {
    Vector x0;
    int steps = 0;
  };

  UniformExpander(MdpDefinition mdp, UniformGrid grid) : mdp_(std::move(mdp)), grid_(grid) {
    if (grid_.hold_len < 1) throw std::invalid_argument("UniformExpander: hold_len must be at least 1");
    count_ = ipow(grid_.eta, mdp_.action_dim);
  }

  int branch_len() const { return grid_.hold_len; }
  int branch_count() const { return count_; }
  int open_slots(long /*visits*/) const { return count_; }
  Context prepare(const Vector& x, int steps) const { return {x, steps}; }
  Branch expand(const Context& ctx, int slot, Rng& /*rng*/) const {
    return hold_action_branch(mdp_, ctx.x0, uniform_grid_action(mdp_.action_box, slot, grid_.eta), ctx.steps,
                              BranchKind::kUniform, slot);
  }

 private:
  MdpDefinition mdp_;
  UniformGrid grid_;
  int count_ = 0;
};

struct WideningParams {
  double k_pw = 1.0;
  double alpha_pw = 0.5;
  int hold_len = 1;
  int max_children = 64;
};

/// True iff another child may be added: children < ⌈k·visits^α⌉.
inline bool dpw_allows_new_child(long visits, int current_children, double k_pw, double alpha_pw) {
  const double limit = std::ceil(k_pw * std::pow(static_cast<double>(visits), alpha_pw));
  return static_cast<double>(current_children) < limit;
}

/// Progressive widening: each new child holds an action drawn uniformly from
/// the action box.
class WideningExpander {
 public:
  struct Context {
    Vector x0;
    int steps = 0;
  };

  WideningExpander(MdpDefinition mdp, WideningParams params) : mdp_(std::move(mdp)), params_(params) {
    if (!(params_.k_pw > 0.0) || !(params_.alpha_pw > 0.0 && params_.alpha_pw <= 1.0)) {
      throw std::invalid_argument("WideningExpander: need k_pw > 0 and alpha_pw in (0, 1]");
    }
    if (params_.hold_len < 1 || params_.max_children < 1) throw std::invalid_argument("WideningExpander: bad sizes");
  }

  int branch_len() const { return params_.hold_len; }
  int branch_count() const { return params_.max_children; }
  int open_slots(long visits) const {
    const double limit = std::ceil(params_.k_pw * std::pow(static_cast<double>(visits), params_.alpha_pw));
    return static_cast<int>(std::min<double>(limit, params_.max_children));
  }
  Context prepare(const Vector& x, int steps) const { return {x, steps}; }
  Branch expand(const Context& ctx, int slot, Rng& rng) const {
    const IntervalBox& box = mdp_.action_box;
    Vector u(box.dim());
    for (Eigen::Index j = 0; j < box.dim(); ++j) {
      std::uniform_real_distribution<double> draw(box.lower[j], box.upper[j]);
      u[j] = draw(rng);
    }
    return hold_action_branch(mdp_, ctx.x0, u, ctx.steps, BranchKind::kWidening, slot);
  }

 private:
  MdpDefinition mdp_;
  WideningParams params_;
};

/// Uniformly random root-to-leaf rollouts over the expander's children,
/// keeping the best one. Expanded branches are cached in the tree.
template <Expander E>
SearchResult predictive_sampling(const MdpDefinition& mdp, const Vector& x0, const E& expander,
                                 const SearchBudget& budget, Rng& rng, const SearchObserver& observer = {}) {
  SearchOptions opts;
  opts.budget = budget;
  opts.rule = SelectionRule::kUniformRandom;
  TreeSearch<E> ts(mdp, expander, x0);
  return ts.run(opts, rng, observer);
}

}  // namespace sets
