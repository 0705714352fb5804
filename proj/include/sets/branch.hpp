#pragma once

#include "sets/mdp.hpp"

#include <random>
#include <string>

namespace sets {

/// Seedable generator owned by each search call.
using Rng = std::mt19937_64;

enum class BranchKind { kSpectralMode, kGoalBias, kUniform, kWidening };

inline const char* to_string(BranchKind kind) {
  switch (kind) {
    case BranchKind::kSpectralMode: return "spectral";
    case BranchKind::kGoalBias: return "goal_bias";
    case BranchKind::kUniform: return "uniform";
    case BranchKind::kWidening: return "widening";
  }
  return "unknown";
}

/// One tree edge: an H-step trajectory segment plus its provenance.
struct Branch {
  Trajectory trajectory;
  /// Σ_{k<H} γ^k R(x_{k+1}) over the safe prefix.
  double branch_reward = 0.0;
  Vector target_endpoint;
  Vector achieved_endpoint;
  BranchKind kind = BranchKind::kSpectralMode;
  /// Mode index for spectral branches, child slot for baselines, -1 for the
  /// goal-biased branch.
  int mode_index = 0;
  bool safe = true;
};

/// Closed-loop rollout where the action at step k is policy(k, x_k). Actions
/// are clipped to the box before use.
template <typename Policy>
Trajectory closed_loop_rollout(const MdpDefinition& mdp, const Vector& x0, int steps, Policy&& policy) {
  Trajectory traj;
  traj.states.reserve(steps + 1);
  traj.actions.reserve(steps);
  traj.stage_rewards.reserve(steps);
  traj.states.push_back(x0);
  traj.safe_prefix_len = steps;
  bool safe = true;
  for (int k = 0; k < steps; ++k) {
    Vector u = clip_action(policy(k, traj.states.back()), mdp.action_box);
    Vector next = step(mdp, traj.states.back(), u);
    if (safe && mdp.is_unsafe(next)) {
      safe = false;
      traj.safe_prefix_len = k;
    }
    traj.stage_rewards.push_back(safe ? mdp.stage_reward(next) : 0.0);
    traj.actions.push_back(std::move(u));
    traj.states.push_back(std::move(next));
  }
  return traj;
}

inline Branch make_branch(const MdpDefinition& mdp, Trajectory traj, BranchKind kind, int index, Vector target) {
  Branch b;
  b.branch_reward = discounted_return(traj.stage_rewards, mdp.discount);
  b.achieved_endpoint = traj.states.back();
  b.target_endpoint = std::move(target);
  b.safe = traj.safe();
  b.kind = kind;
  b.mode_index = index;
  b.trajectory = std::move(traj);
  return b;
}

}  // namespace sets
