#pragma once

// One entry point over the five planner variants: spectral, uniform or
// widening expansion, searched with UCB or predictive sampling.

#include "sets/baselines.hpp"
#include "sets/spectral_expansion.hpp"
#include "sets/tree_search.hpp"

#include <stdexcept>
#include <string>
#include <string_view>

namespace sets {

enum class Method { kSeMcts, kSePs, kUdMcts, kUdPs, kDpwMcts };

inline const char* to_string(Method m) {
  switch (m) {
    case Method::kSeMcts: return "SE-MCTS";
    case Method::kSePs: return "SE-PS";
    case Method::kUdMcts: return "UD-MCTS";
    case Method::kUdPs: return "UD-PS";
    case Method::kDpwMcts: return "DPW-MCTS";
  }
  return "?";
}

inline Method parse_method(std::string_view name) {
  for (Method m : {Method::kSeMcts, Method::kSePs, Method::kUdMcts, Method::kUdPs, Method::kDpwMcts}) {
    if (name == to_string(m)) return m;
  }
  throw std::invalid_argument("unknown planner method '" + std::string(name) + "'");
}

/// Spectral, uniform or widening family of a method.
inline std::string method_family(Method m) {
  switch (m) {
    case Method::kSeMcts:
    case Method::kSePs: return "SE";
    case Method::kUdMcts:
    case Method::kUdPs: return "UD";
    case Method::kDpwMcts: return "DPW";
  }
  return "?";
}

struct PlannerConfig {
  Method method = Method::kSeMcts;
  /// branch_len is shared by all methods (UD and DPW hold actions that long).
  ExpansionOptions expansion;
  int eta = 3;
  WideningParams widening;
  SearchConstants constants;
  SearchBudget budget = SearchBudget::iterations(1000);

  int branch_len() const { return expansion.branch_len; }
};

inline SearchResult plan(const MdpDefinition& mdp, const Vector& x0, const PlannerConfig& cfg, Rng& rng,
                         const SearchObserver& observer = {}) {
  SearchOptions opts;
  opts.constants = cfg.constants;
  opts.budget = cfg.budget;
  switch (cfg.method) {
    case Method::kSeMcts:
    case Method::kSePs: {
      const SpectralExpander ex(mdp, cfg.expansion);
      if (cfg.method == Method::kSePs) return predictive_sampling(mdp, x0, ex, cfg.budget, rng, observer);
      return search(mdp, x0, ex, opts, rng, observer);
    }
    case Method::kUdMcts:
    case Method::kUdPs: {
      const UniformExpander ex(mdp, UniformGrid{cfg.eta, cfg.branch_len()});
      if (cfg.method == Method::kUdPs) return predictive_sampling(mdp, x0, ex, cfg.budget, rng, observer);
      return search(mdp, x0, ex, opts, rng, observer);
    }
    case Method::kDpwMcts: {
      WideningParams w = cfg.widening;
      w.hold_len = cfg.branch_len();
      const WideningExpander ex(mdp, w);
      return search(mdp, x0, ex, opts, rng, observer);
    }
  }
  throw std::logic_error("plan: unhandled method");
}

}  // namespace sets
