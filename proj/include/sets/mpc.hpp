#pragma once

// Receding-horizon execution: execute a plan prefix, replan, repeat.

#include "sets/planner.hpp"

#include <functional>
#include <ostream>
#include <stdexcept>
#include <vector>

namespace sets {

struct MpcConfig {
  int replan_interval = 1;
  /// Horizon K of each plan.
  int plan_horizon = 1;
  SearchBudget budget = SearchBudget::iterations(1000);
  /// Plan the next window from the state the model predicts at the end of
  /// the current prefix instead of from the state after executing it.
  bool predict_ahead = true;
  /// On replanning, keep the unexecuted tail of the current plan when it
  /// earns more over the remaining steps than the fresh plan.
  bool reuse_plan_tail = true;
  bool abort_on_unsafe = false;

  void validate() const {
    if (replan_interval < 1 || plan_horizon < 1) throw std::invalid_argument("MpcConfig: sizes must be positive");
    if (replan_interval > plan_horizon) throw std::invalid_argument("MpcConfig: replan_interval exceeds plan_horizon");
  }
};

/// Plans from a state over `mdp.horizon` steps.
using MpcPlanner = std::function<SearchResult(const MdpDefinition& mdp, const Vector& x, Rng& rng)>;

inline MpcPlanner make_mpc_planner(PlannerConfig cfg) {
  return [cfg](const MdpDefinition& mdp, const Vector& x, Rng& rng) { return plan(mdp, x, cfg, rng); };
}

struct MpcRecord {
  double t = 0.0;
  int step = 0;
  Vector state;  // before the action
  Vector action;
  double reward = 0.0;  // R of the resulting state
  double plan_value = 0.0;
  bool safety_event = false;
};

struct MpcLog {
  std::vector<MpcRecord> records;
  int plans = 0;
  int safety_events = 0;
  bool aborted = false;
  Vector final_state;

  double total_reward() const {
    double s = 0.0;
    for (const auto& r : records) s += r.reward;
    return s;
  }

  double discounted_reward(double gamma) const {
    double s = 0.0, g = 1.0;
    for (const auto& r : records) {
      s += g * r.reward;
      g *= gamma;
    }
    return s;
  }

  void write_csv(std::ostream& out) const {
    if (records.empty()) {
      out << "t,step,reward,plan_value,safety_event\n";
      return;
    }
    out << "t,step";
    for (Eigen::Index i = 0; i < records.front().state.size(); ++i) out << ",x" << i;
    for (Eigen::Index i = 0; i < records.front().action.size(); ++i) out << ",u" << i;
    out << ",reward,plan_value,safety_event\n";
    out.precision(17);
    for (const auto& r : records) {
      out << r.t << ',' << r.step;
      for (Eigen::Index i = 0; i < r.state.size(); ++i) out << ',' << r.state[i];
      for (Eigen::Index i = 0; i < r.action.size(); ++i) out << ',' << r.action[i];
      out << ',' << r.reward << ',' << r.plan_value << ',' << (r.safety_event ? 1 : 0) << '\n';
    }
  }
};

namespace detail {

/// Action k of a plan; once the plan runs out (truncated at an unsafe
/// state) the action box center is used.
inline Vector plan_action(const SearchResult& plan, int k, const IntervalBox& box) {
  if (k < plan.best_trajectory.length()) return plan.best_trajectory.actions[k];
  return box.center();
}

inline double prefix_return(const Trajectory& t, int len, double gamma) {
  const int n = std::min(len, static_cast<int>(t.stage_rewards.size()));
  return discounted_return(std::vector<double>(t.stage_rewards.begin(), t.stage_rewards.begin() + n), gamma);
}

/// The fresh plan from x, or the rest of `current` after `offset` steps if
/// that earns more over the next `remaining` steps.
inline SearchResult consistent_plan(const MdpDefinition& model, const Vector& x, SearchResult fresh,
                                    const SearchResult& current, int offset, int remaining) {
  const int tail_len = current.best_trajectory.length() - offset;
  if (tail_len <= 0) return fresh;
  const std::vector<Vector> tail(current.best_trajectory.actions.begin() + offset, current.best_trajectory.actions.end());
  Trajectory kept = rollout(model, x, tail);
  if (!kept.safe()) return fresh;
  const int len = std::min(remaining, tail_len);
  if (prefix_return(kept, len, model.discount) <= prefix_return(fresh.best_trajectory, len, model.discount)) return fresh;
  fresh.best_return = trajectory_return(model, kept);
  fresh.best_trajectory = std::move(kept);
  return fresh;
}

}  // namespace detail

/// Runs `total_steps` steps of receding-horizon control from `x0`. On entering
/// the unsafe set the step is logged as a safety event and the system stays
/// at its last safe state (or the run stops when `abort_on_unsafe`).
inline MpcLog mpc_run(const MdpDefinition& env, const Vector& x0, const MpcPlanner& planner, const MpcConfig& cfg,
                      int total_steps, Rng& rng) {
  cfg.validate();
  if (env.is_unsafe(x0)) throw std::invalid_argument("mpc_run: initial state is unsafe");
  MdpDefinition model = env;
  model.horizon = cfg.plan_horizon;

  MpcLog log;
  Vector x = x0;
  SearchResult current = planner(model, x, rng);
  ++log.plans;
  int step = 0;
  while (step < total_steps && !log.aborted) {
    const int window = std::min(cfg.replan_interval, total_steps - step);
    std::vector<Vector> actions;
    for (int k = 0; k < window; ++k) actions.push_back(detail::plan_action(current, k, env.action_box));

    SearchResult next;
    bool have_next = false;
    if (cfg.predict_ahead && step + window < total_steps) {
      Vector predicted = x;
      bool ok = true;
      for (const Vector& u : actions) {
        predicted = sets::step(model, predicted, clip_action(u, env.action_box));
        if (model.is_unsafe(predicted)) {
          ok = false;
          break;
        }
      }
      if (ok) {
        next = planner(model, predicted, rng);
        if (cfg.reuse_plan_tail) {
          next = detail::consistent_plan(model, predicted, std::move(next), current, window, total_steps - step - window);
        }
        have_next = true;
        ++log.plans;
      }
    }

    bool event = false;
    for (int k = 0; k < window; ++k) {
      MpcRecord rec;
      rec.t = step * env.dt;
      rec.step = step;
      rec.state = x;
      rec.action = clip_action(actions[k], env.action_box);
      rec.plan_value = current.best_return;
      const Vector nx = sets::step(env, x, rec.action);
      if (env.is_unsafe(nx)) {
        rec.safety_event = true;
        ++log.safety_events;
        event = true;
      } else {
        rec.reward = env.stage_reward(nx);
        x = nx;
      }
      log.records.push_back(std::move(rec));
      ++step;
      if (event) break;
    }
    if (event && cfg.abort_on_unsafe) {
      log.aborted = true;
      break;
    }
    if (step >= total_steps) break;
    if (!have_next || event) {
      next = planner(model, x, rng);
      if (cfg.reuse_plan_tail && !event) {
        next = detail::consistent_plan(model, x, std::move(next), current, window, total_steps - step);
      }
      ++log.plans;
    }
    current = std::move(next);
  }
  log.final_state = x;
  return log;
}

}  // namespace sets
