#pragma once

// Spectral expansion: turns a node state into up to 2n dynamically feasible
// branches, one per signed mode of the local controllability Gramian, each
// tracked on the nonlinear plant with Riccati feedback.

#include "sets/branch.hpp"
#include "sets/numerics.hpp"

#include <optional>
#include <stdexcept>
#include <vector>

namespace sets {

enum class DareFailurePolicy {
  /// Fall back to the finite-window Riccati recursion for the branch.
  kFiniteHorizonGains,
  /// Mark the branch unsafe with zero reward.
  kMarkUnsafe,
};

struct ExpansionOptions {
  int branch_len = 1;
  /// Each group of state coordinates selects one mode (the one most aligned
  /// with the group). Empty means all n modes.
  std::vector<std::vector<int>> mode_groups;
  std::optional<Vector> goal_bias;
  /// Coordinates of goal_bias that count; the rest follow the drift. Empty means all.
  std::vector<int> goal_coordinates;
  bool time_invariant_lin = false;
  /// Solve the DARE at k = 0 only and reuse the gain along the branch.
  bool reuse_first_gain = false;
  Matrix state_weight;  // Γ_x, identity when empty
  Matrix input_weight;  // Γ_u, identity when empty
  DareFailurePolicy on_dare_failure = DareFailurePolicy::kFiniteHorizonGains;
  DareOptions dare;
};

inline int branching_factor(const ExpansionOptions& opts, int n) {
  const int modes = opts.mode_groups.empty() ? n : static_cast<int>(opts.mode_groups.size());
  return 2 * modes + (opts.goal_bias ? 1 : 0);
}

/// Picks one distinct mode per coordinate group, maximizing σ_i·‖v_i[group]‖.
inline std::vector<int> select_modes(const ControllabilityDecomposition& d,
                                     const std::vector<std::vector<int>>& groups) {
  const int n = d.state_dim();
  std::vector<int> modes;
  if (groups.empty()) {
    for (int i = 0; i < n; ++i) modes.push_back(i);
    return modes;
  }
  if (static_cast<int>(groups.size()) > n) throw std::invalid_argument("select_modes: more groups than modes");
  std::vector<bool> taken(n, false);
  for (const auto& group : groups) {
    int best = -1;
    double best_score = -1.0;
    for (int i = 0; i < n; ++i) {
      if (taken[i]) continue;
      double energy = 0.0;
      for (int r : group) {
        if (r < 0 || r >= n) throw std::invalid_argument("select_modes: coordinate index out of range");
        energy += d.singular_vectors(r, i) * d.singular_vectors(r, i);
      }
      const double score = d.singular_values[i] * std::sqrt(energy);
      if (score > best_score) {
        best_score = score;
        best = i;
      }
    }
    taken[best] = true;
    modes.push_back(best);
  }
  return modes;
}

/// drift ± σ_i v_i.
inline Vector mode_target(const ControllabilityDecomposition& d, int mode, bool negative) {
  const double sign = negative ? -1.0 : 1.0;
  return d.drift_endpoint + sign * d.singular_values[mode] * d.singular_vectors.col(mode);
}

/// Projection of goal − drift onto the unit-energy ellipsoid {Σ a_i σ_i v_i : ‖a‖ ≤ 1}.
inline Vector goal_biased_target(const ControllabilityDecomposition& d, const Vector& goal,
                                 const std::vector<int>& coordinates = {}) {
  const int n = d.state_dim();
  Vector disp = goal - d.drift_endpoint;
  if (!coordinates.empty()) {
    Vector masked = Vector::Zero(n);
    for (int c : coordinates) {
      if (c < 0 || c >= n) throw std::invalid_argument("goal_biased_target: coordinate out of range");
      masked[c] = disp[c];
    }
    disp = masked;
  }
  const double cutoff = 1e-8 * d.singular_values[0];
  Vector coeff = Vector::Zero(n);
  for (int i = 0; i < n; ++i) {
    const double s = d.singular_values[i];
    if (s < cutoff || s == 0.0) continue;
    coeff[i] = d.singular_vectors.col(i).dot(disp) / s;
  }
  const double norm = coeff.norm();
  if (norm > 1.0) coeff /= norm;
  return d.drift_endpoint + d.singular_vectors * coeff.cwiseProduct(d.singular_values);
}

/// |σ_i · v_i[r]| with rows indexed by state coordinate, columns by mode.
inline Matrix spectrum_heatmap(const ControllabilityDecomposition& d) {
  return (d.singular_vectors * d.singular_values.asDiagonal()).cwiseAbs();
}

/// Everything about a node that is shared by its children: linearization,
/// spectrum, selected modes and tracking gains.
struct SpectralPlan {
  Vector x0;
  int steps = 0;
  Linearization lin;
  ControllabilityDecomposition decomp;
  std::vector<int> modes;
  std::vector<Matrix> gains;
  bool infinite_horizon_gains = true;
  bool gains_valid = true;
};

namespace detail {

inline Matrix weight_or_identity(const Matrix& w, Eigen::Index dim) {
  return w.size() == 0 ? Matrix::Identity(dim, dim) : w;
}

}  // namespace detail

inline SpectralPlan prepare_spectral(const MdpDefinition& mdp, const Vector& x0, const ExpansionOptions& opts,
                                     int steps) {
  if (steps < 1) throw std::invalid_argument("prepare_spectral: branch length must be at least 1");
  SpectralPlan plan;
  plan.x0 = x0;
  plan.steps = steps;
  const std::vector<Vector> nominal(steps, mdp.action_box.center());
  plan.lin = linearize_along(mdp, x0, nominal, opts.time_invariant_lin);
  plan.decomp = controllability(plan.lin, mdp.action_box);
  plan.modes = select_modes(plan.decomp, opts.mode_groups);

  const Matrix Gx = detail::weight_or_identity(opts.state_weight, mdp.state_dim);
  const Matrix Gu = detail::weight_or_identity(opts.input_weight, mdp.action_dim);
  try {
    plan.gains.reserve(steps);
    for (int k = 0; k < steps; ++k) {
      if (k > 0 && (opts.reuse_first_gain || opts.time_invariant_lin)) {
        plan.gains.push_back(plan.gains.front());
        continue;
      }
      // The DARE only depends on (A_k, B_k).
      if (k > 0 && plan.lin.A_seq[k] == plan.lin.A_seq[k - 1] && plan.lin.B_seq[k] == plan.lin.B_seq[k - 1]) {
        plan.gains.push_back(plan.gains.back());
        continue;
      }
      const Matrix M = dare_solve(plan.lin.A_seq[k], plan.lin.B_seq[k], Gx, Gu, opts.dare);
      plan.gains.push_back(lqr_gain(plan.lin.A_seq[k], plan.lin.B_seq[k], M, Gu));
    }
  } catch (const DareError&) {
    plan.infinite_horizon_gains = false;
    if (opts.on_dare_failure == DareFailurePolicy::kFiniteHorizonGains) {
      plan.gains = finite_horizon_gains(plan.lin.A_seq, plan.lin.B_seq, Gx, Gu);
    } else {
      plan.gains.clear();
      plan.gains_valid = false;
    }
  }
  return plan;
}

inline int plan_branch_count(const SpectralPlan& plan, const ExpansionOptions& opts) {
  return 2 * static_cast<int>(plan.modes.size()) + (opts.goal_bias ? 1 : 0);
}

/// Expands child `branch_index` of a prepared node.
inline Branch expand_from(const MdpDefinition& mdp, const SpectralPlan& plan, int branch_index,
                          const ExpansionOptions& opts) {
  const int mode_slots = 2 * static_cast<int>(plan.modes.size());
  if (branch_index < 0 || branch_index >= plan_branch_count(plan, opts)) {
    throw std::out_of_range("spectral_expand: branch index out of range");
  }
  Vector target;
  BranchKind kind = BranchKind::kSpectralMode;
  int mode = -1;
  if (branch_index < mode_slots) {
    mode = plan.modes[branch_index / 2];
    target = mode_target(plan.decomp, mode, branch_index % 2 == 1);
  } else {
    kind = BranchKind::kGoalBias;
    target = goal_biased_target(plan.decomp, *opts.goal_bias, opts.goal_coordinates);
  }

  const ReferenceInputs ref = min_energy_inputs(plan.decomp, target, mdp.action_box);
  const std::vector<Vector> z_ref = plan.lin.simulate(plan.x0, ref.actions);

  if (!plan.gains_valid) {
    Trajectory traj = rollout(mdp, plan.x0, ref.actions);
    std::fill(traj.stage_rewards.begin(), traj.stage_rewards.end(), 0.0);
    traj.safe_prefix_len = 0;
    return make_branch(mdp, std::move(traj), kind, mode, std::move(target));
  }

  Trajectory traj = closed_loop_rollout(mdp, plan.x0, plan.steps, [&](int k, const Vector& x) -> Vector {
    return ref.actions[k] - plan.gains[k] * (x - z_ref[k]);
  });
  return make_branch(mdp, std::move(traj), kind, mode, std::move(target));
}

inline Branch spectral_expand(const MdpDefinition& mdp, const Vector& x0, int branch_index,
                              const ExpansionOptions& opts) {
  return expand_from(mdp, prepare_spectral(mdp, x0, opts, opts.branch_len), branch_index, opts);
}

/// Expansion strategy adapter for the tree search.
class SpectralExpander {
 public:
  using Context = SpectralPlan;

  SpectralExpander(MdpDefinition mdp, ExpansionOptions opts) : mdp_(std::move(mdp)), opts_(std::move(opts)) {
    if (opts_.branch_len < 1) throw std::invalid_argument("SpectralExpander: branch_len must be at least 1");
    count_ = branching_factor(opts_, mdp_.state_dim);
  }

  int branch_len() const { return opts_.branch_len; }
  int branch_count() const { return count_; }
  int open_slots(long /*visits*/) const { return count_; }
  const ExpansionOptions& options() const { return opts_; }

  Context prepare(const Vector& x, int steps) const { return prepare_spectral(mdp_, x, opts_, steps); }
  Branch expand(const Context& ctx, int slot, Rng& /*rng*/) const { return expand_from(mdp_, ctx, slot, opts_); }

 private:
  MdpDefinition mdp_;
  ExpansionOptions opts_;
  int count_ = 0;
};

}  // namespace sets
