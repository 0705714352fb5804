// Command-line front end: one-shot planning, the experiment grids, spectrum
// dumps, receding-horizon runs and the driving service.

#include "sets/autonomy/server.hpp"
#include "sets/env/config.hpp"
#include "sets/harness.hpp"
#include "sets/mpc.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace sets;

namespace {

struct CommonFlags {
  std::string config;
  std::uint64_t seed = 0;
  std::string out = ".";
  long budget_iters = 0;
  long budget_ms = 0;
};

struct Loaded {
  env::Environment env;
  PlannerConfig planner;
};

Loaded load(const CommonFlags& f) {
  if (f.config.empty()) throw env::ConfigError("--config is required");
  const auto j = env::load_json_file(f.config);
  Loaded l{env::environment_from_json(j), env::planner_config_from(j)};
  if (f.budget_iters > 0 || f.budget_ms > 0) {
    l.planner.budget = SearchBudget{};
    if (f.budget_iters > 0) l.planner.budget.max_iterations = f.budget_iters;
    if (f.budget_ms > 0) l.planner.budget.max_wall_time = std::chrono::milliseconds(f.budget_ms);
  }
  return l;
}


std::ofstream open_out(const CommonFlags& f, const std::string& name) {
  fs::create_directories(f.out);
  const fs::path path = fs::path(f.out) / name;
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  std::cout << "wrote " << path.string() << "\n";
  return out;
}

std::vector<Method> parse_methods(const std::vector<std::string>& names) {
  std::vector<Method> out;
  for (const auto& n : names) {
    try {
      out.push_back(parse_method(n));
    } catch (const std::invalid_argument& e) {
      throw env::ConfigError(e.what());
    }
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"SETS planner: controllability-spectrum branching with tree search"};
  app.require_subcommand(1);
  CommonFlags f;
  auto add_common = [&f](CLI::App* sub) {
    sub->add_option("--config", f.config, "Environment/planner JSON");
    sub->add_option("--seed", f.seed, "Random seed");
    sub->add_option("--out", f.out, "Output directory");
    sub->add_option("--budget-iters", f.budget_iters, "Iteration budget per plan");
    sub->add_option("--budget-ms", f.budget_ms, "Wall-clock budget per plan in milliseconds");
  };

  auto* plan_cmd = app.add_subcommand("plan", "Plan once from the configured initial state");
  add_common(plan_cmd);

  std::vector<int> H_list{5, 10, 25, 50};
  std::vector<long> L_list{100, 1000, 10000};
  int seeds = 10;
  auto* grid_cmd = app.add_subcommand("grid", "Branch length vs simulation count grid");
  add_common(grid_cmd);
  grid_cmd->add_option("--H", H_list, "Branch lengths");
  grid_cmd->add_option("--L", L_list, "Simulation counts");
  grid_cmd->add_option("--seeds", seeds, "Seeds per cell");

  std::vector<std::string> methods{"SE-MCTS", "SE-PS", "UD-MCTS", "UD-PS", "DPW-MCTS"};
  std::vector<int> eta_list{3, 5};
  std::vector<long> checkpoints{10, 100, 1000};
  auto* compare_cmd = app.add_subcommand("compare", "Value curves for SE, UD and DPW planners");
  add_common(compare_cmd);
  compare_cmd->add_option("--methods", methods, "Methods to run");
  compare_cmd->add_option("--H", H_list, "Branch lengths");
  compare_cmd->add_option("--eta", eta_list, "Grid points per action dimension for UD");
  compare_cmd->add_option("--seeds", seeds, "Seeds per variant");
  compare_cmd->add_option("--checkpoints", checkpoints, "Iteration counts to record");

  auto* conf_cmd = app.add_subcommand("confidence", "Visit concentration by depth");
  add_common(conf_cmd);
  conf_cmd->add_option("--seeds", seeds, "Seeds to average");
  conf_cmd->add_option("--checkpoints", checkpoints, "Iteration counts to record");

  int spectrum_steps = 0;
  auto* spec_cmd = app.add_subcommand("spectrum", "Controllability spectrum at the initial state");
  add_common(spec_cmd);
  spec_cmd->add_option("--steps", spectrum_steps, "Linearization window (default: planner branch length)");

  int mpc_steps = 100, replan = 1, plan_horizon = 0;
  bool open_loop_predict = false;
  auto* mpc_cmd = app.add_subcommand("mpc", "Receding-horizon run");
  add_common(mpc_cmd);
  mpc_cmd->add_option("--steps", mpc_steps, "Executed steps");
  mpc_cmd->add_option("--replan", replan, "Steps between replans");
  mpc_cmd->add_option("--horizon", plan_horizon, "Steps per plan (default: config horizon)");
  mpc_cmd->add_flag("--no-predict", open_loop_predict, "Plan from the executed state instead of the predicted one");

  autonomy::ServerConfig server_cfg;
  server_cfg.handle_signals = true;
  bool no_planner = false;
  auto* serve_cmd = app.add_subcommand("serve", "Shared-control driving service");
  add_common(serve_cmd);
  serve_cmd->add_option("--address", server_cfg.address, "Bind address");
  serve_cmd->add_option("--port", server_cfg.port, "Port");
  serve_cmd->add_option("--time-scale", server_cfg.time_scale, "Simulated seconds per wall second");
  serve_cmd->add_flag("--no-planner", no_planner, "Pass driver commands straight through");

  CLI11_PARSE(app, argc, argv);

  try {
    if (plan_cmd->parsed()) {
      const Loaded l = load(f);
      Rng rng(f.seed);
      const SearchResult r = plan(l.env.mdp, l.env.initial_state, l.planner, rng);
      std::cout << "method " << to_string(l.planner.method) << "  iterations " << r.iterations << "  nodes "
                << r.node_count << "  best_return " << r.best_return << "\n";
      auto traj = open_out(f, "plan_trajectory.csv");
      write_trajectory_csv(traj, r.best_trajectory, l.env.mdp.dt);
      auto hist = open_out(f, "value_history.csv");
      write_value_history_csv(hist, r.root_value_history);
    } else if (grid_cmd->parsed()) {
      const Loaded l = load(f);
      const auto rows = run_convergence_grid(l.env.mdp, l.env.initial_state, l.planner, H_list, seeds, L_list);
      auto out = open_out(f, "grid.csv");
      write_convergence_csv(out, rows);
    } else if (compare_cmd->parsed()) {
      const Loaded l = load(f);
      const auto rows = run_method_comparison(l.env.mdp, l.env.initial_state, parse_methods(methods), H_list, eta_list,
                                              seeds, checkpoints, l.planner);
      auto out = open_out(f, "compare.csv");
      write_comparison_csv(out, rows);
    } else if (conf_cmd->parsed()) {
      const Loaded l = load(f);
      const auto rows = run_confidence_profile(l.env.mdp, l.env.initial_state, l.planner, seeds, checkpoints);
      auto out = open_out(f, "confidence.csv");
      write_confidence_csv(out, rows);
    } else if (spec_cmd->parsed()) {
      const Loaded l = load(f);
      const int steps = spectrum_steps > 0 ? spectrum_steps : l.planner.branch_len();
      auto out = open_out(f, "spectrum.csv");
      write_spectrum_csv(out, spectrum_at(l.env.mdp, l.env.initial_state, steps));
    } else if (mpc_cmd->parsed()) {
      const Loaded l = load(f);
      MpcConfig mc;
      mc.replan_interval = replan;
      mc.plan_horizon = plan_horizon > 0 ? plan_horizon : l.env.mdp.horizon;
      mc.budget = l.planner.budget;
      mc.predict_ahead = !open_loop_predict;
      try {
        mc.validate();
      } catch (const std::invalid_argument& e) {
        throw env::ConfigError(e.what());
      }
      Rng rng(f.seed);
      const MpcLog log = mpc_run(l.env.mdp, l.env.initial_state, make_mpc_planner(l.planner), mc, mpc_steps, rng);
      std::cout << "steps " << log.records.size() << "  plans " << log.plans << "  reward " << log.total_reward()
                << "  safety_events " << log.safety_events << "\n";
      auto out = open_out(f, "mpc_log.csv");
      log.write_csv(out);
    } else if (serve_cmd->parsed()) {
      autonomy::SessionConfig sc;
      sc.seed = f.seed;
      sc.planner_enabled = !no_planner;
      if (f.budget_ms > 0) sc.budget = SearchBudget::wall_time(std::chrono::milliseconds(f.budget_ms));
      if (f.budget_iters > 0) sc.budget.max_iterations = f.budget_iters;
      std::shared_ptr<const env::HazardGrid> hazard;
      if (!f.config.empty()) {
        const auto j = env::load_json_file(f.config);
        if (j.value("type", std::string()) != "tracked_vehicle") throw env::ConfigError("serve needs a tracked_vehicle config");
        sc.vehicle = env::tracked_vehicle_config_from(j);
        sc.vehicle.horizon = sc.plan_horizon;
        sc.vehicle.terminal_bonus = sc.plan_horizon;
        hazard = env::hazard_from(j);
      } else {
        hazard = std::make_shared<const env::HazardGrid>(env::make_chicane_map());
      }
      autonomy::DriveServer server(server_cfg, sc, hazard);
      std::cout << "listening on http://" << server_cfg.address << ":" << server.port() << " (ws /drive)" << std::endl;
      server.run();
    }
  } catch (const env::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
