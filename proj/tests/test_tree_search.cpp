#include "sets/env/double_integrator.hpp"
#include "sets/env/tracked_vehicle.hpp"
#include "sets/planner.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <functional>

using namespace sets;
using sets::testing::binary_tree_mdp;
using sets::testing::SlotExpander;

namespace {

Branch reward_branch(double reward, int len = 1) {
  Branch b;
  b.branch_reward = reward;
  b.trajectory.states.assign(len + 1, Vector::Zero(1));
  b.trajectory.actions.assign(len, Vector::Zero(1));
  b.trajectory.stage_rewards.assign(len, 0.0);
  b.trajectory.safe_prefix_len = len;
  return b;
}

/// Root with expanded children carrying the given mean values and visits.
SearchTree star(const std::vector<double>& means, const std::vector<long>& visits, int slots) {
  SearchTree tree(Vector::Zero(1), slots, 3);
  long total = 0;
  for (std::size_t i = 0; i < means.size(); ++i) {
    const int id = tree.attach(0, static_cast<int>(i), reward_branch(0.0), false);
    tree.node(id).visits = visits[i];
    tree.node(id).total_value = means[i] * static_cast<double>(visits[i]);
    total += visits[i];
  }
  tree.node(0).visits = total;
  return tree;
}

MdpDefinition goal_task() {
  env::DoubleIntegratorConfig c;
  c.goal = Eigen::Vector2d(3.0, 0.0);
  c.horizon = 60;
  c.state_box = IntervalBox((Vector(4) << -10, -10, -0.9, -0.9).finished(), (Vector(4) << 10, 10, 0.9, 0.9).finished());
  return env::make_double_integrator(c);
}

ExpansionOptions branch_of(int H) {
  ExpansionOptions o;
  o.branch_len = H;
  return o;
}

void check_tree_invariants(const SearchTree& tree, const MdpDefinition& mdp, long iterations) {
  ASSERT_EQ(tree.node(0).visits, iterations);
  const double bound = value_upper_bound(mdp, mdp.horizon);
  for (int id = 0; id < tree.size(); ++id) {
    const TreeNode& n = tree.node(id);
    long child_visits = 0;
    for (int c : n.children) {
      if (c >= 0) child_visits += tree.node(c).visits;
    }
    EXPECT_EQ(n.visits, child_visits + n.terminations) << "node " << id;
    if (n.visits > 0) {
      EXPECT_GE(n.mean_value(), -1e-12);
      EXPECT_LE(n.mean_value(), bound + 1e-9);
    }
  }
}

}  // namespace

TEST(Ucb, ScoreExample) {
  const SearchConstants c{1.0, 0.5, 1.0};
  EXPECT_DOUBLE_EQ(ucb_score(0.5, 4, 1, c), 4.5);
  EXPECT_NEAR(ucb_score(0.5, 4, 3, c), 0.5 + 4.0 / std::sqrt(3.0), 1e-15);
  EXPECT_NEAR(ucb_score(0.5, 4, 3, c), 2.809, 5e-4);
  Rng rng(0);
  EXPECT_EQ(ucb_select(star({0.5, 0.5}, {1, 3}, 2), 0, c, rng, 2), 0);
}

TEST(Ucb, GreedyWithoutExploration) {
  Rng rng(0);
  const SearchConstants greedy{0.0, 1.0, 0.5};
  EXPECT_EQ(ucb_select(star({0.1, 0.7, 0.3}, {50, 1, 9}, 3), 0, greedy, rng, 3), 1);
  // Ties go to the lowest index.
  EXPECT_EQ(ucb_select(star({0.4, 0.4}, {2, 5}, 2), 0, greedy, rng, 2), 0);
}

TEST(Ucb, UnexpandedSlotsChosenUniformly) {
  SearchTree tree = star({0.9}, {10}, 3);
  Rng rng(42);
  int counts[3] = {0, 0, 0};
  const int draws = 6000;
  for (int i = 0; i < draws; ++i) counts[ucb_select(tree, 0, SearchConstants{}, rng, 3)]++;
  EXPECT_EQ(counts[0], 0);
  EXPECT_NEAR(counts[1] / static_cast<double>(draws), 0.5, 0.03);
  EXPECT_NEAR(counts[2] / static_cast<double>(draws), 0.5, 0.03);
}

TEST(Ucb, TerminalNodeRejected) {
  SearchTree tree(Vector::Zero(1), 2, 1);
  const int leaf = tree.attach(0, 0, reward_branch(0.1), true);
  Rng rng(0);
  EXPECT_THROW(ucb_select(tree, leaf, SearchConstants{}, rng, 2), std::logic_error);
}

TEST(Backup, NodeRelativeSums) {
  const auto mdp = binary_tree_mdp(std::vector<double>(7, 0.0), 2, 1.0);
  SearchTree tree(Vector::Zero(1), 2, 2);
  const int a = tree.attach(0, 0, reward_branch(0.5), false);
  const int b = tree.attach(a, 1, reward_branch(0.3), true);
  backup(tree, {0, a, b}, mdp);
  EXPECT_DOUBLE_EQ(tree.node(a).total_value, 0.8);
  EXPECT_DOUBLE_EQ(tree.node(b).total_value, 0.3);
  EXPECT_DOUBLE_EQ(tree.node(0).total_value, 0.8);
  for (int id : {0, a, b}) EXPECT_EQ(tree.node(id).visits, 1);
  EXPECT_EQ(tree.node(b).terminations, 1);
}

TEST(Backup, ZeroDiscountKeepsOwnReward) {
  const auto mdp = binary_tree_mdp(std::vector<double>(7, 0.0), 2, 0.0);
  SearchTree tree(Vector::Zero(1), 2, 2);
  const int a = tree.attach(0, 0, reward_branch(0.5), false);
  const int b = tree.attach(a, 0, reward_branch(0.3), true);
  backup(tree, {0, a, b}, mdp);
  EXPECT_DOUBLE_EQ(tree.node(a).total_value, 0.5);
  EXPECT_DOUBLE_EQ(tree.node(b).total_value, 0.3);
}

TEST(Backup, DiscountsByBranchLength) {
  auto mdp = binary_tree_mdp(std::vector<double>(7, 0.0), 2, 0.5);
  mdp.terminal_reward = [](const Vector&) { return 1.0; };
  SearchTree tree(Vector::Zero(1), 2, 2);
  const int a = tree.attach(0, 0, reward_branch(0.5, 2), false);
  const int b = tree.attach(a, 0, reward_branch(0.3, 3), true);
  backup(tree, {0, a, b}, mdp);
  // Leaf: 0.3 + 0.5³·1; parent: 0.5 + 0.5²·(leaf).
  EXPECT_DOUBLE_EQ(tree.node(b).total_value, 0.3 + 0.125);
  EXPECT_DOUBLE_EQ(tree.node(a).total_value, 0.5 + 0.25 * 0.425);
}

TEST(Search, TwoArmedBandit) {
  const auto mdp = binary_tree_mdp({0.0, 0.2, 0.9}, 1, 0.99);
  const SlotExpander ex(mdp, 2);
  SearchOptions opts;
  opts.constants.c1 = 0.1;
  opts.budget = SearchBudget::iterations(40);
  Rng rng(1);
  TreeSearch<SlotExpander> ts(mdp, ex, Vector::Zero(1));
  ts.iterate(opts, rng);
  ts.iterate(opts, rng);
  EXPECT_EQ(ts.tree().node(0).expanded, 2);
  const int arm0 = ts.tree().node(0).children[0];
  for (int i = 2; i < 40; ++i) ts.iterate(opts, rng);
  EXPECT_EQ(ts.tree().node(arm0).visits, 1);
  const SearchResult r = ts.result();
  EXPECT_DOUBLE_EQ(r.best_return, 0.9);
  EXPECT_EQ(r.best_trajectory.states.back()[0], 2.0);
}

TEST(Search, SingleIterationReturnsThatBranch) {
  const auto mdp = goal_task();
  const SpectralExpander ex(mdp, branch_of(10));
  SearchOptions opts;
  opts.budget = SearchBudget::iterations(1);
  Rng rng(3);
  TreeSearch<SpectralExpander> ts(mdp, ex, Vector::Zero(4));
  const SearchResult r = ts.run(opts, rng);
  EXPECT_EQ(r.iterations, 1);
  EXPECT_LE(r.best_path.size(), static_cast<std::size_t>(r.max_depth + 1));
  EXPECT_EQ(r.node_count, static_cast<int>(r.best_path.size()));
  int steps = 0;
  for (std::size_t i = 1; i < r.best_path.size(); ++i) steps += ts.tree().node(r.best_path[i]).branch.trajectory.length();
  EXPECT_EQ(r.best_trajectory.length(), steps);
  EXPECT_NEAR(r.best_return, trajectory_return(mdp, r.best_trajectory), 1e-9);
}

TEST(Search, Deterministic) {
  const auto mdp = goal_task();
  PlannerConfig cfg;
  cfg.expansion.branch_len = 10;
  cfg.budget = SearchBudget::iterations(200);
  Rng a(5), b(5);
  const SearchResult ra = plan(mdp, Vector::Zero(4), cfg, a);
  const SearchResult rb = plan(mdp, Vector::Zero(4), cfg, b);
  ASSERT_EQ(ra.root_value_history.size(), rb.root_value_history.size());
  for (std::size_t i = 0; i < ra.root_value_history.size(); ++i) {
    EXPECT_EQ(ra.root_value_history[i].value_estimate, rb.root_value_history[i].value_estimate);
    EXPECT_EQ(ra.root_value_history[i].best_return, rb.root_value_history[i].best_return);
  }
  EXPECT_EQ(ra.best_path, rb.best_path);
  EXPECT_EQ(ra.node_count, rb.node_count);
  for (int k = 0; k < ra.best_trajectory.length(); ++k) EXPECT_EQ(ra.best_trajectory.actions[k], rb.best_trajectory.actions[k]);
}

TEST(Search, TreeInvariantsAndMonotoneBest) {
  const auto mdp = goal_task();
  for (int H : {5, 20}) {
    for (int seed = 0; seed < 5; ++seed) {
      const SpectralExpander ex(mdp, branch_of(H));
      SearchOptions opts;
      opts.budget = SearchBudget::iterations(150);
      Rng rng(seed);
      TreeSearch<SpectralExpander> ts(mdp, ex, Vector::Zero(4));
      const SearchResult r = ts.run(opts, rng);
      check_tree_invariants(ts.tree(), mdp, 150);
      for (std::size_t i = 1; i < r.root_value_history.size(); ++i) {
        EXPECT_GE(r.root_value_history[i].best_return, r.root_value_history[i - 1].best_return);
      }
      EXPECT_GE(r.best_return, ts.tree().node(0).mean_value() - 1e-12);
    }
  }
}

TEST(Search, UnsafeChildrenStayInTree) {
  env::DoubleIntegratorConfig c;
  c.goal = Eigen::Vector2d(3.0, 0.0);
  c.horizon = 40;
  c.obstacles.push_back({Eigen::Vector2d(0.3, 0.0), 0.2});
  const auto mdp = env::make_double_integrator(c);
  const SpectralExpander ex(mdp, branch_of(10));
  SearchOptions opts;
  opts.budget = SearchBudget::iterations(300);
  Rng rng(2);
  TreeSearch<SpectralExpander> ts(mdp, ex, Vector::Zero(4));
  ts.run(opts, rng);
  int unsafe = 0;
  for (int id = 0; id < ts.tree().size(); ++id) {
    const TreeNode& n = ts.tree().node(id);
    if (!n.unsafe) continue;
    ++unsafe;
    EXPECT_TRUE(n.terminal);
    EXPECT_TRUE(n.children.empty());
    EXPECT_GE(n.visits, 1);
  }
  EXPECT_GT(unsafe, 0);
  check_tree_invariants(ts.tree(), mdp, 300);
}

TEST(Search, ArgmaxInvariantUnderRewardScaling) {
  const auto base = goal_task();
  for (double scale : {2.0, 8.0}) {
    MdpDefinition scaled = base;
    scaled.stage_reward = [r = base.stage_reward, scale](const Vector& x) { return scale * r(x); };
    PlannerConfig a_cfg, b_cfg;
    a_cfg.expansion.branch_len = b_cfg.expansion.branch_len = 10;
    a_cfg.budget = b_cfg.budget = SearchBudget::iterations(150);
    b_cfg.constants.c1 = scale * a_cfg.constants.c1;
    std::vector<int> a_sizes, b_sizes;
    Rng ra(9), rb(9);
    plan(base, Vector::Zero(4), a_cfg, ra, [&](const SearchTree& t, const ValueSample&) { a_sizes.push_back(t.size()); });
    const SearchResult r = plan(scaled, Vector::Zero(4), b_cfg, rb,
                                [&](const SearchTree& t, const ValueSample&) { b_sizes.push_back(t.size()); });
    Rng rc(9);
    const SearchResult unscaled = plan(base, Vector::Zero(4), a_cfg, rc);
    EXPECT_EQ(a_sizes, b_sizes);
    EXPECT_EQ(r.best_path, unscaled.best_path);
    EXPECT_DOUBLE_EQ(r.best_return, scale * unscaled.best_return);
  }
}

TEST(Search, EnumeratedOptimumOnToyTree) {
  // Greedy-misleading rewards: the better first step leads to poor leaves.
  const std::vector<double> rewards{0.0, 0.6, 0.1, 0.0, 0.2, 0.9, 0.3};
  const auto mdp = binary_tree_mdp(rewards, 2, 0.9);
  double optimum = 0.0;
  for (int a = 0; a < 2; ++a) {
    for (int b = 0; b < 2; ++b) {
      const int n1 = 1 + a, n2 = 2 * n1 + 1 + b;
      optimum = std::max(optimum, rewards[n1] + 0.9 * rewards[n2]);
    }
  }
  const SlotExpander ex(mdp, 2);
  SearchOptions opts;
  opts.budget = SearchBudget::iterations(2000);
  for (int seed = 0; seed < 10; ++seed) {
    Rng rng(seed);
    const SearchResult r = search(mdp, Vector::Zero(1), ex, opts, rng);
    EXPECT_DOUBLE_EQ(r.best_return, optimum);
  }
}

TEST(Search, UnsafeRootRejected) {
  const auto mdp = goal_task();
  const SpectralExpander ex(mdp, branch_of(10));
  const Vector bad = (Vector(4) << 50, 0, 0, 0).finished();
  EXPECT_THROW(TreeSearch<SpectralExpander>(mdp, ex, bad), std::invalid_argument);
}

TEST(Search, BudgetRequired) {
  const auto mdp = goal_task();
  const SpectralExpander ex(mdp, branch_of(10));
  SearchOptions opts;
  opts.budget = SearchBudget{};
  Rng rng(0);
  EXPECT_THROW(search(mdp, Vector::Zero(4), ex, opts, rng), std::invalid_argument);
}

TEST(Search, WallClockBudgetStops) {
  const auto mdp = goal_task();
  const SpectralExpander ex(mdp, branch_of(10));
  SearchOptions opts;
  opts.budget = SearchBudget::wall_time(std::chrono::milliseconds(20));
  Rng rng(0);
  const auto start = std::chrono::steady_clock::now();
  const SearchResult r = search(mdp, Vector::Zero(4), ex, opts, rng);
  EXPECT_GE(r.iterations, 1);
  EXPECT_LT(std::chrono::steady_clock::now() - start, std::chrono::seconds(2));
}

TEST(Confidence, Examples) {
  SearchTree tree = star({0.1, 0.2, 0.3}, {7, 2, 1}, 3);
  EXPECT_DOUBLE_EQ(confidence_profile(tree, 0), 0.7);
  SearchTree single = star({0.1}, {4}, 3);
  EXPECT_DOUBLE_EQ(confidence_profile(single, 0), 1.0);
  EXPECT_DOUBLE_EQ(confidence_profile(single, 1), 0.0);
  SearchTree empty(Vector::Zero(1), 2, 2);
  EXPECT_DOUBLE_EQ(confidence_profile(empty, 0), 0.0);
}
