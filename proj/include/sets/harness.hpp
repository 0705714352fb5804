#pragma once

// Desk-scale studies: branch length vs simulation count grids, method
// comparisons, depth-confidence profiles and spectrum heatmaps. Every
// routine returns plain rows plus a CSV writer; output is deterministic for
// fixed seeds.

#include "sets/planner.hpp"

#include <algorithm>
#include <map>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

namespace sets {

struct ConvergenceRow {
  int H = 0;
  long L = 0;
  int seed = 0;
  double value = 0.0;
  double best_return = 0.0;
};

namespace detail {

/// One run to the largest budget, read back at every checkpoint. Equivalent
/// to separate runs because the search is anytime and seeded.
inline std::vector<ValueSample> history_at(const std::vector<ValueSample>& history, const std::vector<long>& budgets) {
  std::vector<ValueSample> out;
  for (long L : budgets) {
    if (L < 1 || static_cast<std::size_t>(L) > history.size()) throw std::invalid_argument("budget beyond run length");
    out.push_back(history[static_cast<std::size_t>(L) - 1]);
  }
  return out;
}

inline std::vector<long> sorted_budgets(std::vector<long> budgets) {
  if (budgets.empty()) throw std::invalid_argument("budget list is empty");
  std::sort(budgets.begin(), budgets.end());
  budgets.erase(std::unique(budgets.begin(), budgets.end()), budgets.end());
  if (budgets.front() < 1) throw std::invalid_argument("budgets must be positive");
  return budgets;
}

}  // namespace detail

/// SETS over every (H, seed), recording the root value estimate and best
/// return after each budget L. Rows are ordered by H, then L, then seed.
inline std::vector<ConvergenceRow> run_convergence_grid(const MdpDefinition& mdp, const Vector& x0,
                                                        const PlannerConfig& base, const std::vector<int>& H_list,
                                                        int seed_count, const std::vector<long>& budget_list) {
  if (H_list.empty() || seed_count < 1) throw std::invalid_argument("run_convergence_grid: empty grid");
  const std::vector<long> budgets = detail::sorted_budgets(budget_list);
  std::vector<ConvergenceRow> rows;
  for (int H : H_list) {
    PlannerConfig cfg = base;
    cfg.expansion.branch_len = H;
    cfg.budget = SearchBudget::iterations(budgets.back());
    std::vector<std::vector<ValueSample>> per_seed;
    for (int seed = 0; seed < seed_count; ++seed) {
      Rng rng(static_cast<Rng::result_type>(seed));
      per_seed.push_back(detail::history_at(plan(mdp, x0, cfg, rng).root_value_history, budgets));
    }
    for (std::size_t b = 0; b < budgets.size(); ++b) {
      for (int seed = 0; seed < seed_count; ++seed) {
        const ValueSample& s = per_seed[seed][b];
        rows.push_back({H, budgets[b], seed, s.value_estimate, s.best_return});
      }
    }
  }
  return rows;
}

inline void write_convergence_csv(std::ostream& out, const std::vector<ConvergenceRow>& rows) {
  out.precision(17);
  out << "H,L,seed,value,best_return\n";
  for (const auto& r : rows) out << r.H << ',' << r.L << ',' << r.seed << ',' << r.value << ',' << r.best_return << '\n';
}

struct ComparisonRow {
  Method method = Method::kSeMcts;
  int H = 0;
  int eta = 0;  // 0 when the method does not discretize
  long L = 0;
  int seed = 0;
  double value = 0.0;
  double best_return = 0.0;
  bool best_variant = false;
};

/// Value-vs-iterations curves for each method and variant. Within each
/// family (SE, UD, DPW) the variant with the highest seed-mean final value
/// is flagged.
inline std::vector<ComparisonRow> run_method_comparison(const MdpDefinition& mdp, const Vector& x0,
                                                        const std::vector<Method>& methods, const std::vector<int>& H_list,
                                                        const std::vector<int>& eta_list, int seed_count,
                                                        const std::vector<long>& checkpoints,
                                                        const PlannerConfig& base = {}) {
  if (methods.empty() || H_list.empty() || seed_count < 1) throw std::invalid_argument("run_method_comparison: empty grid");
  const std::vector<long> budgets = detail::sorted_budgets(checkpoints);
  std::vector<ComparisonRow> rows;
  // Mean final value per (method, H, eta) variant.
  std::map<std::tuple<int, int, int>, double> final_mean;
  for (Method m : methods) {
    const bool discretized = m == Method::kUdMcts || m == Method::kUdPs;
    const std::vector<int> etas = discretized ? eta_list : std::vector<int>{0};
    if (etas.empty()) throw std::invalid_argument("run_method_comparison: empty eta list");
    for (int H : H_list) {
      for (int eta : etas) {
        PlannerConfig cfg = base;
        cfg.method = m;
        cfg.expansion.branch_len = H;
        if (discretized) cfg.eta = eta;
        cfg.budget = SearchBudget::iterations(budgets.back());
        double final_sum = 0.0;
        for (int seed = 0; seed < seed_count; ++seed) {
          Rng rng(static_cast<Rng::result_type>(seed));
          const auto samples = detail::history_at(plan(mdp, x0, cfg, rng).root_value_history, budgets);
          for (std::size_t b = 0; b < budgets.size(); ++b) {
            rows.push_back({m, H, eta, budgets[b], seed, samples[b].value_estimate, samples[b].best_return, false});
          }
          final_sum += samples.back().value_estimate;
        }
        final_mean[{static_cast<int>(m), H, eta}] = final_sum / seed_count;
      }
    }
  }
  std::map<std::string, std::pair<std::tuple<int, int, int>, double>> best;
  for (const auto& [key, mean] : final_mean) {
    const std::string family = method_family(static_cast<Method>(std::get<0>(key)));
    auto it = best.find(family);
    if (it == best.end() || mean > it->second.second) best[family] = {key, mean};
  }
  for (auto& r : rows) {
    const auto& b = best.at(method_family(r.method));
    r.best_variant = b.first == std::tuple<int, int, int>{static_cast<int>(r.method), r.H, r.eta};
  }
  return rows;
}

inline void write_comparison_csv(std::ostream& out, const std::vector<ComparisonRow>& rows) {
  out.precision(17);
  out << "method,H,eta,L,seed,value,best_return,best_variant\n";
  for (const auto& r : rows) {
    out << to_string(r.method) << ',' << r.H << ',' << r.eta << ',' << r.L << ',' << r.seed << ',' << r.value << ','
        << r.best_return << ',' << (r.best_variant ? 1 : 0) << '\n';
  }
}

struct ConfidenceRow {
  long iterations = 0;
  int depth = 0;
  double confidence = 0.0;  // mean over seeds
};

/// Depth-confidence profile of SE-MCTS after each checkpoint, averaged over seeds.
inline std::vector<ConfidenceRow> run_confidence_profile(const MdpDefinition& mdp, const Vector& x0,
                                                         const PlannerConfig& base, int seed_count,
                                                         const std::vector<long>& checkpoints) {
  if (seed_count < 1) throw std::invalid_argument("run_confidence_profile: need at least one seed");
  const std::vector<long> budgets = detail::sorted_budgets(checkpoints);
  PlannerConfig cfg = base;
  cfg.budget = SearchBudget::iterations(budgets.back());
  std::map<std::pair<long, int>, double> sums;
  for (int seed = 0; seed < seed_count; ++seed) {
    Rng rng(static_cast<Rng::result_type>(seed));
    std::size_t next = 0;
    plan(mdp, x0, cfg, rng, [&](const SearchTree& tree, const ValueSample& s) {
      if (next < budgets.size() && s.iteration == budgets[next]) {
        for (int d = 0; d < tree.max_depth(); ++d) sums[{budgets[next], d}] += confidence_profile(tree, d);
        ++next;
      }
    });
  }
  std::vector<ConfidenceRow> rows;
  for (const auto& [key, sum] : sums) rows.push_back({key.first, key.second, sum / seed_count});
  return rows;
}

inline void write_confidence_csv(std::ostream& out, const std::vector<ConfidenceRow>& rows) {
  out.precision(17);
  out << "iterations,depth,confidence\n";
  for (const auto& r : rows) out << r.iterations << ',' << r.depth << ',' << r.confidence << '\n';
}

inline void write_value_history_csv(std::ostream& out, const std::vector<ValueSample>& history) {
  out.precision(17);
  out << "iteration,value_estimate,best_return\n";
  for (const auto& s : history) out << s.iteration << ',' << s.value_estimate << ',' << s.best_return << '\n';
}

/// |σ_i·v_i[r]| for the local spectrum at x over `steps` steps.
inline Matrix spectrum_at(const MdpDefinition& mdp, const Vector& x, int steps) {
  ExpansionOptions opts;
  opts.branch_len = steps;
  return spectrum_heatmap(prepare_spectral(mdp, x, opts, steps).decomp);
}

inline void write_spectrum_csv(std::ostream& out, const Matrix& heatmap) {
  out.precision(17);
  out << "state_index,mode_index,magnitude\n";
  for (Eigen::Index r = 0; r < heatmap.rows(); ++r) {
    for (Eigen::Index c = 0; c < heatmap.cols(); ++c) out << r << ',' << c << ',' << heatmap(r, c) << '\n';
  }
}

inline void write_trajectory_csv(std::ostream& out, const Trajectory& traj, double dt) {
  out.precision(17);
  out << "t,step";
  const Eigen::Index n = traj.states.empty() ? 0 : traj.states.front().size();
  const Eigen::Index m = traj.actions.empty() ? 0 : traj.actions.front().size();
  for (Eigen::Index i = 0; i < n; ++i) out << ",x" << i;
  for (Eigen::Index i = 0; i < m; ++i) out << ",u" << i;
  out << ",reward\n";
  for (int k = 0; k < traj.length(); ++k) {
    out << k * dt << ',' << k;
    for (Eigen::Index i = 0; i < n; ++i) out << ',' << traj.states[k][i];
    for (Eigen::Index i = 0; i < m; ++i) out << ',' << traj.actions[k][i];
    out << ',' << traj.stage_rewards[k] << '\n';
  }
}

}  // namespace sets
