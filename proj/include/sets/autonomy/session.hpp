#pragma once

// Shared-control driving loop. The driver's (v_d, ω_d) sets the reward the
// planner tracks; the planner's first action is what the vehicle executes.
// Network-free so it can run headless in tests.

#include "sets/autonomy/protocol.hpp"
#include "sets/env/hazard_grid.hpp"
#include "sets/env/tracked_vehicle.hpp"
#include "sets/planner.hpp"

#include <chrono>
#include <memory>
#include <random>
#include <vector>

namespace sets::autonomy {

struct SessionConfig {
  env::TrackedVehicleConfig vehicle;
  /// Steps per plan (1.6 s at 0.1 s per step).
  int plan_horizon = 16;
  int branch_len = 2;
  SearchBudget budget = SearchBudget::wall_time(std::chrono::milliseconds(80));
  SearchConstants constants;
  bool planner_enabled = true;
  /// Degradation flips on and off with periods drawn from
  /// [1 − jitter, 1 + jitter]·period; a period ≤ 0 disables it.
  double degradation_period_s = 10.0;
  double degradation_jitter = 0.2;
  std::array<double, 4> degradation_on{-0.25, 0.0, 0.0, 0.0};
  Vector initial_state = Vector::Zero(5);
  std::uint64_t seed = 0;

  SessionConfig() {
    vehicle.horizon = plan_horizon;
    vehicle.gamma = 1.0;
    // Every safe plan outranks every plan that hits a hazard.
    vehicle.terminal_bonus = plan_horizon;
  }
};

struct TickResult {
  StateReport state;
  PlanReport plan;
  std::vector<Event> events;
  Eigen::Vector2d executed{0.0, 0.0};
};

class DriveSession {
 public:
  DriveSession(SessionConfig cfg, std::shared_ptr<const env::HazardGrid> hazard)
      : cfg_(std::move(cfg)), hazard_(std::move(hazard)), x_(cfg_.initial_state), rng_(cfg_.seed) {
    if (x_.size() != 5) throw std::invalid_argument("DriveSession: initial state must have 5 entries");
    if (cfg_.plan_horizon < 1 || cfg_.branch_len < 1) throw std::invalid_argument("DriveSession: bad plan sizes");
    if (world(Command{}).is_unsafe(x_)) throw std::invalid_argument("DriveSession: initial state is unsafe");
    schedule_toggle();
  }

  void set_command(const Command& c) { command_ = clip_command(c); }
  void set_planner_enabled(bool on) { cfg_.planner_enabled = on; }
  bool planner_enabled() const { return cfg_.planner_enabled; }
  const Command& command() const { return command_; }
  const Vector& state() const { return x_; }
  long tick_count() const { return tick_; }
  int collisions() const { return collisions_; }
  bool degraded() const { return degraded_; }
  const std::array<double, 4>& degradation() const { return degradation_; }
  double dt() const { return cfg_.vehicle.dt; }

  /// Advances the world one step.
  TickResult tick() {
    TickResult out;
    const MdpDefinition mdp = world(command_);
    Vector u(2);
    if (cfg_.planner_enabled) {
      PlannerConfig pc;
      pc.method = Method::kSeMcts;
      pc.expansion.branch_len = cfg_.branch_len;
      // One branch heads straight for the commanded speeds.
      Vector goal = Vector::Zero(5);
      goal[3] = command_.v_d;
      goal[4] = command_.omega_d;
      pc.expansion.goal_bias = goal;
      pc.expansion.goal_coordinates = {3, 4};
      pc.constants = cfg_.constants;
      pc.budget = cfg_.budget;
      const SearchResult r = plan(mdp, x_, pc, rng_);
      u = r.best_trajectory.actions.front();
      out.plan.value = r.best_return;
      out.plan.confidence = r.confidence;
      for (const Vector& s : r.best_trajectory.states) out.plan.points.push_back({s[0], s[1]});
    } else {
      u << command_.v_d, command_.omega_d;
      out.plan.points.push_back({x_[0], x_[1]});
    }
    u = clip_action(u, mdp.action_box);
    out.executed = u;

    const Vector next = sets::step(mdp, x_, u);
    ++tick_;
    if (mdp.is_unsafe(next)) {
      // Contact stops the vehicle where it was.
      ++collisions_;
      x_[3] = 0.0;
      x_[4] = 0.0;
      out.events.push_back({"collision", tick_, ""});
    } else {
      x_ = next;
    }

    if (next_toggle_ > 0 && tick_ >= next_toggle_) {
      degraded_ = !degraded_;
      degradation_ = degraded_ ? cfg_.degradation_on : std::array<double, 4>{0.0, 0.0, 0.0, 0.0};
      out.events.push_back({degraded_ ? "degradation_on" : "degradation_off", tick_, ""});
      schedule_toggle();
    }

    out.state = report();
    return out;
  }

  StateReport report() const {
    StateReport s;
    s.tick = tick_;
    s.x = x_[0];
    s.y = x_[1];
    s.theta = x_[2];
    s.v = x_[3];
    s.omega = x_[4];
    s.degradation = degradation_;
    s.safety_count = collisions_;
    return s;
  }

  /// Tracked-vehicle MDP for the current command and actuator state.
  MdpDefinition world(const Command& c) const {
    env::TrackedVehicleConfig v = cfg_.vehicle;
    v.v_cmd = c.v_d;
    v.omega_cmd = c.omega_d;
    v.degradation = degradation_;
    v.horizon = cfg_.plan_horizon;
    return env::make_tracked_vehicle(v, hazard_);
  }

 private:
  void schedule_toggle() {
    if (!(cfg_.degradation_period_s > 0.0)) {
      next_toggle_ = -1;
      return;
    }
    std::uniform_real_distribution<double> jitter(1.0 - cfg_.degradation_jitter, 1.0 + cfg_.degradation_jitter);
    const double period = cfg_.degradation_period_s * jitter(toggle_rng_);
    next_toggle_ = tick_ + std::max<long>(1, std::lround(period / cfg_.vehicle.dt));
  }

  SessionConfig cfg_;
  std::shared_ptr<const env::HazardGrid> hazard_;
  Vector x_;
  Rng rng_;
  Rng toggle_rng_{cfg_.seed ^ 0x9e3779b97f4a7c15ULL};
  Command command_;
  long tick_ = 0;
  int collisions_ = 0;
  bool degraded_ = false;
  std::array<double, 4> degradation_{0.0, 0.0, 0.0, 0.0};
  long next_toggle_ = -1;
};

/// Seeded driver that mostly holds full throttle with wandering steering,
/// which on the chicane map runs into the baffles unless corrected.
class AdversarialDriver {
 public:
  explicit AdversarialDriver(std::uint64_t seed) : rng_(seed) {}

  Command command_at(long tick) {
    if (tick >= segment_end_) {
      std::uniform_int_distribution<int> len(10, 30);
      std::uniform_real_distribution<double> steer(-0.3, 0.3);
      std::uniform_real_distribution<double> speed(0.8, 1.0);
      segment_end_ = tick + len(rng_);
      current_ = {speed(rng_), steer(rng_)};
    }
    return current_;
  }

 private:
  Rng rng_;
  long segment_end_ = 0;
  Command current_;
};

}  // namespace sets::autonomy
