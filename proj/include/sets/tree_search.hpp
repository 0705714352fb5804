#pragma once

// Anytime Monte Carlo tree search with a polynomial exploration bonus. The
// expansion strategy is a template parameter so spectral, uniform and
// progressive-widening planners share one search loop.

#include "sets/branch.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <concepts>
#include <limits>
#include <memory>
#include <optional>
#include <stdexcept>
#include <vector>

namespace sets {

/// Expansion strategy contract. `prepare` computes per-node data shared by
/// the node's children; `open_slots(visits)` is how many child slots a node
/// with that many visits may have expanded.
template <typename E>
concept Expander = requires(const E& e, const Vector& x, const typename E::Context& ctx, Rng& rng) {
  { e.branch_len() } -> std::convertible_to<int>;
  { e.branch_count() } -> std::convertible_to<int>;
  { e.open_slots(long{}) } -> std::convertible_to<int>;
  { e.prepare(x, int{}) } -> std::convertible_to<typename E::Context>;
  { e.expand(ctx, int{}, rng) } -> std::same_as<Branch>;
};

struct SearchConstants {
  double c1 = 1.0;
  double c2 = 1.0;
  double c3 = 0.5;
};

struct SearchBudget {
  std::optional<long> max_iterations;
  std::optional<std::chrono::microseconds> max_wall_time;

  static SearchBudget iterations(long n) { return SearchBudget{n, std::nullopt}; }
  static SearchBudget wall_time(std::chrono::microseconds t) { return SearchBudget{std::nullopt, t}; }
};

struct TreeNode {
  Vector state;
  int depth = 0;
  int parent = -1;
  /// Steps from the root to this node's state.
  int steps_from_root = 0;
  /// r(i): intra-branch discounted reward earned traversing into this node.
  double branch_reward = 0.0;
  double total_value = 0.0;
  long visits = 0;
  /// Rollouts that ended at this node.
  long terminations = 0;
  std::vector<int> children;  // -1 marks an unexpanded slot
  int expanded = 0;
  bool terminal = false;
  bool unsafe = false;
  Branch branch;  // edge from the parent; empty for the root

  double mean_value() const { return visits > 0 ? total_value / static_cast<double>(visits) : 0.0; }
};

class SearchTree {
 public:
  SearchTree(Vector root_state, int branch_count, int max_depth) : branch_count_(branch_count), max_depth_(max_depth) {
    TreeNode root;
    root.state = std::move(root_state);
    root.children.assign(branch_count, -1);
    nodes_.push_back(std::move(root));
  }

  const TreeNode& node(int id) const { return nodes_.at(id); }
  TreeNode& node(int id) { return nodes_.at(id); }
  int size() const { return static_cast<int>(nodes_.size()); }
  int max_depth() const { return max_depth_; }
  int branch_count() const { return branch_count_; }

  int attach(int parent, int slot, Branch branch, bool terminal_depth) {
    TreeNode child;
    child.state = branch.trajectory.states.back();
    child.depth = nodes_[parent].depth + 1;
    child.parent = parent;
    child.steps_from_root = nodes_[parent].steps_from_root + branch.trajectory.length();
    child.branch_reward = branch.branch_reward;
    child.unsafe = !branch.safe;
    child.terminal = child.unsafe || terminal_depth;
    child.children.assign(child.terminal ? 0 : branch_count_, -1);
    child.branch = std::move(branch);
    const int id = size();
    nodes_.push_back(std::move(child));
    nodes_[parent].children[slot] = id;
    nodes_[parent].expanded += 1;
    return id;
  }

 private:
  std::vector<TreeNode> nodes_;
  int branch_count_;
  int max_depth_;
};

/// V(i) + c1·T(parent)^c3 / T(i)^c2.
inline double ucb_score(double mean_value, long parent_visits, long child_visits, const SearchConstants& c) {
  return mean_value + c.c1 * std::pow(static_cast<double>(parent_visits), c.c3) /
                          std::pow(static_cast<double>(child_visits), c.c2);
}

/// Uniformly random unexpanded slot while the node may still widen, else the
/// argmax of the exploration score over expanded children (lowest index on ties).
inline int ucb_select(const SearchTree& tree, int node_id, const SearchConstants& c, Rng& rng, int open_slots) {
  const TreeNode& node = tree.node(node_id);
  if (node.terminal) throw std::logic_error("ucb_select: node is terminal");
  const int slots = static_cast<int>(node.children.size());
  if (node.expanded < std::min(open_slots, slots)) {
    const int unexpanded = slots - node.expanded;
    std::uniform_int_distribution<int> pick(0, unexpanded - 1);
    int target = pick(rng);
    for (int s = 0; s < slots; ++s) {
      if (node.children[s] >= 0) continue;
      if (target-- == 0) return s;
    }
  }
  int best = -1;
  double best_score = -std::numeric_limits<double>::infinity();
  for (int s = 0; s < slots; ++s) {
    const int id = node.children[s];
    if (id < 0) continue;
    const TreeNode& child = tree.node(id);
    const double score = child.visits == 0 ? std::numeric_limits<double>::infinity()
                                           : ucb_score(child.mean_value(), node.visits, child.visits, c);
    if (score > best_score) {
      best_score = score;
      best = s;
    }
  }
  if (best < 0) throw std::logic_error("ucb_select: node has no selectable child");
  return best;
}

/// Return of the rollout along `path` measured from the root, plus the
/// terminal reward when the leaf sits at the final depth and is safe.
inline double path_return(const SearchTree& tree, const std::vector<int>& path, const MdpDefinition& mdp) {
  double value = 0.0;
  for (std::size_t t = 1; t < path.size(); ++t) {
    const TreeNode& n = tree.node(path[t]);
    value += std::pow(mdp.discount, tree.node(path[t - 1]).steps_from_root) * n.branch_reward;
  }
  const TreeNode& leaf = tree.node(path.back());
  if (leaf.depth == tree.max_depth() && !leaf.unsafe && mdp.terminal_reward) {
    value += std::pow(mdp.discount, leaf.steps_from_root) * mdp.terminal_reward(leaf.state);
  }
  return value;
}

/// Node-relative backup: a non-root node at path position d gains
/// Σ_{t≥d} γ^(steps between the start of its branch and the start of p[t])·r(p[t]);
/// the root gains the full rollout return.
inline void backup(SearchTree& tree, const std::vector<int>& path, const MdpDefinition& mdp) {
  const double g = mdp.discount;
  const TreeNode& leaf = tree.node(path.back());
  double future = 0.0;
  if (leaf.depth == tree.max_depth() && !leaf.unsafe && mdp.terminal_reward) {
    future = mdp.terminal_reward(leaf.state);
  }
  for (std::size_t d = path.size() - 1; d >= 1; --d) {
    TreeNode& n = tree.node(path[d]);
    future = n.branch_reward + std::pow(g, n.branch.trajectory.length()) * future;
    n.total_value += future;
    n.visits += 1;
  }
  TreeNode& root = tree.node(path.front());
  root.total_value += future;
  root.visits += 1;
  tree.node(path.back()).terminations += 1;
}

/// Max child visits ÷ total child visits at the given depth along the
/// most-visited path; 0 when nothing at that depth has been visited.
inline double confidence_profile(const SearchTree& tree, int depth) {
  int id = 0;
  for (int d = 0; d < depth; ++d) {
    const TreeNode& n = tree.node(id);
    int next = -1;
    long most = 0;
    for (int c : n.children) {
      if (c >= 0 && tree.node(c).visits > most) {
        most = tree.node(c).visits;
        next = c;
      }
    }
    if (next < 0) return 0.0;
    id = next;
  }
  long total = 0;
  long most = 0;
  for (int c : tree.node(id).children) {
    if (c < 0) continue;
    total += tree.node(c).visits;
    most = std::max(most, tree.node(c).visits);
  }
  return total > 0 ? static_cast<double>(most) / static_cast<double>(total) : 0.0;
}

/// Concatenation of the branches along a root-to-leaf path.
inline Trajectory path_trajectory(const SearchTree& tree, const std::vector<int>& path) {
  Trajectory out;
  for (std::size_t t = 1; t < path.size(); ++t) out.append(tree.node(path[t]).branch.trajectory);
  return out;
}

struct ValueSample {
  long iteration = 0;
  double value_estimate = 0.0;
  double best_return = 0.0;
};

struct SearchResult {
  Trajectory best_trajectory;
  double best_return = 0.0;
  std::vector<int> best_path;
  std::vector<ValueSample> root_value_history;
  long iterations = 0;
  int node_count = 0;
  int max_depth = 0;
  /// confidence_profile at depths 0..max_depth-1.
  std::vector<double> confidence;
  /// Node states along the best path (root first).
  std::vector<Vector> best_path_states;
};

enum class SelectionRule { kUcb, kUniformRandom };

struct SearchOptions {
  SearchConstants constants;
  SearchBudget budget = SearchBudget::iterations(1000);
  SelectionRule rule = SelectionRule::kUcb;
};

/// Observer invoked after every iteration with the live tree.
using SearchObserver = std::function<void(const SearchTree&, const ValueSample&)>;

template <Expander E>
class TreeSearch {
 public:
  TreeSearch(const MdpDefinition& mdp, const E& expander, const Vector& x0)
      : mdp_(mdp),
        expander_(expander),
        depth_(static_cast<int>((mdp.horizon + expander.branch_len() - 1) / expander.branch_len())),
        tree_(x0, expander.branch_count(), depth_) {
    if (mdp.is_unsafe(x0)) throw std::invalid_argument("search: root state is unsafe");
    if (depth_ < 1) throw std::invalid_argument("search: depth budget must be at least 1");
  }

  const SearchTree& tree() const { return tree_; }

  /// Runs one descend/expand/backup iteration.
  ValueSample iterate(const SearchOptions& opts, Rng& rng) {
    std::vector<int> path{0};
    path.reserve(depth_ + 1);
    for (int d = 0; d < depth_; ++d) {
      const int cur = path.back();
      const TreeNode& node = tree_.node(cur);
      const int open = expander_.open_slots(node.visits + 1);
      int slot;
      if (opts.rule == SelectionRule::kUniformRandom) {
        std::uniform_int_distribution<int> pick(0, std::min<int>(open, static_cast<int>(node.children.size())) - 1);
        slot = pick(rng);
      } else {
        slot = ucb_select(tree_, cur, opts.constants, rng, open);
      }
      int child = tree_.node(cur).children[slot];
      if (child < 0) child = expand(cur, slot, rng);
      path.push_back(child);
      if (tree_.node(child).unsafe) break;
    }
    backup(tree_, path, mdp_);
    ++iterations_;
    const double ret = path_return(tree_, path, mdp_);
    if (best_path_.empty() || ret > best_return_) {
      best_return_ = ret;
      best_path_ = path;
    }
    ValueSample sample{iterations_, tree_.node(0).mean_value(), best_return_};
    history_.push_back(sample);
    return sample;
  }

  SearchResult run(const SearchOptions& opts, Rng& rng, const SearchObserver& observer = {}) {
    const auto& budget = opts.budget;
    if (!budget.max_iterations && !budget.max_wall_time) {
      throw std::invalid_argument("search: budget needs an iteration or wall-time bound");
    }
    const auto start = std::chrono::steady_clock::now();
    while (true) {
      if (budget.max_iterations && iterations_ >= *budget.max_iterations) break;
      if (budget.max_wall_time && iterations_ > 0 &&
          std::chrono::steady_clock::now() - start >= *budget.max_wall_time) {
        break;
      }
      const ValueSample s = iterate(opts, rng);
      if (observer) observer(tree_, s);
    }
    return result();
  }

  SearchResult result() const {
    SearchResult out;
    out.best_return = best_return_;
    out.best_path = best_path_;
    out.best_trajectory = path_trajectory(tree_, best_path_);
    out.root_value_history = history_;
    out.iterations = iterations_;
    out.node_count = tree_.size();
    out.max_depth = depth_;
    for (int d = 0; d < depth_; ++d) out.confidence.push_back(confidence_profile(tree_, d));
    for (int id : best_path_) out.best_path_states.push_back(tree_.node(id).state);
    return out;
  }

 private:
  int expand(int parent, int slot, Rng& rng) {
    const TreeNode& p = tree_.node(parent);
    const int steps = branch_steps(p.depth);
    if (contexts_.size() <= static_cast<std::size_t>(parent)) contexts_.resize(tree_.size());
    if (!contexts_[parent]) contexts_[parent] = std::make_shared<const typename E::Context>(expander_.prepare(p.state, steps));
    Branch b = expander_.expand(*contexts_[parent], slot, rng);
    const bool last = p.depth + 1 == depth_;
    const int id = tree_.attach(parent, slot, std::move(b), last);
    // Free the shared context once every slot has been expanded.
    if (tree_.node(parent).expanded == tree_.branch_count()) contexts_[parent].reset();
    return id;
  }

  /// H steps per level, with the final level trimmed to end at the horizon.
  int branch_steps(int parent_depth) const {
    const int H = expander_.branch_len();
    return parent_depth + 1 == depth_ ? mdp_.horizon - (depth_ - 1) * H : H;
  }

  const MdpDefinition& mdp_;
  const E& expander_;
  int depth_;
  SearchTree tree_;
  std::vector<std::shared_ptr<const typename E::Context>> contexts_;
  long iterations_ = 0;
  double best_return_ = 0.0;
  std::vector<int> best_path_;
  std::vector<ValueSample> history_;
};

/// Runs the tree search from x0 until the budget is exhausted.
template <Expander E>
SearchResult search(const MdpDefinition& mdp, const Vector& x0, const E& expander, const SearchOptions& opts, Rng& rng,
                    const SearchObserver& observer = {}) {
  TreeSearch<E> ts(mdp, expander, x0);
  return ts.run(opts, rng, observer);
}

}  // namespace sets
