#pragma once

// Two thrusting spacecraft joined by a tension-only net, plus a passive
// target that interacts with the interior net nodes through stiff contact.
// All bodies are planar point masses integrated with forward Euler.
//
// State layout: particle i occupies [4i, 4i+4) as (px, py, vx, vy). Particles
// 0 and N-1 are the spacecraft, 1..N-2 the net nodes, N the target.

#include "sets/env/common.hpp"

#include <cmath>
#include <memory>
#include <stdexcept>
#include <vector>

namespace sets::env {

struct NetParams {
  double nominal_len = 1.0;        // l
  double stiffness = 0.25;         // k_n
  double damping = 0.0;            // c_n
  double contact_stiffness = 5.0;  // k_c
  double contact_damping = 0.0;    // c_c
  double target_radius = 0.3;      // r_t
};

struct SpacecraftNetConfig {
  int chain_nodes = 4;  // spacecraft at both ends plus interior net nodes
  double spacecraft_mass = 10.0;
  double node_mass = 1.0;
  double target_mass = 5.0;
  NetParams net;
  double c1 = 0.4, c2 = 0.3, c3 = 0.3;
  double a1 = 1.0, a2 = 1.0, a3 = 1.0;
  Eigen::Vector2d desired_velocity = Eigen::Vector2d(0.0, -0.1);
  double thrust_limit = 0.2;  // N per axis
  double dt = 0.1;
  int horizon = 100;
  double gamma = 0.99;
  double position_limit_lo = -3.0, position_limit_hi = 5.0;
  double velocity_limit = 0.25;
};

struct PairForce {
  double magnitude = 0.0;  // positive pulls the pair together
  Eigen::Vector2d on_first = Eigen::Vector2d::Zero();
  Eigen::Vector2d on_second = Eigen::Vector2d::Zero();
  bool degenerate = false;  // coincident points, no direction defined
};

/// Tension-only spring-damper between consecutive chain particles:
/// (l_i > l)(k_n(l_i − l) + c_n·l̇_i), directed along the segment.
inline PairForce net_segment_force(const Eigen::Vector2d& p_i, const Eigen::Vector2d& p_j, const Eigen::Vector2d& v_i,
                                   const Eigen::Vector2d& v_j, const NetParams& params) {
  PairForce f;
  const Eigen::Vector2d d = p_j - p_i;
  const double len = d.norm();
  if (len == 0.0) {
    f.degenerate = true;
    return f;
  }
  if (!(len > params.nominal_len)) return f;
  const Eigen::Vector2d dir = d / len;
  const double len_rate = dir.dot(v_j - v_i);
  f.magnitude = params.stiffness * (len - params.nominal_len) + params.damping * len_rate;
  f.on_first = f.magnitude * dir;
  f.on_second = -f.on_first;
  return f;
}

/// Stiff contact between a net node and the target:
/// (d_i < r_t)(k_c(d_i − r_t) + c_c·ḋ_i); negative magnitude pushes apart.
inline PairForce contact_force(const Eigen::Vector2d& p_node, const Eigen::Vector2d& v_node,
                               const Eigen::Vector2d& p_target, const Eigen::Vector2d& v_target,
                               const NetParams& params) {
  PairForce f;
  const Eigen::Vector2d d = p_target - p_node;
  const double dist = d.norm();
  if (!(dist < params.target_radius)) return f;
  if (dist == 0.0) {
    f.degenerate = true;
    return f;
  }
  const Eigen::Vector2d dir = d / dist;
  const double rate = dir.dot(v_target - v_node);
  f.magnitude = params.contact_stiffness * (dist - params.target_radius) + params.contact_damping * rate;
  f.on_first = f.magnitude * dir;
  f.on_second = -f.on_first;
  return f;
}

class SpacecraftNet {
 public:
  explicit SpacecraftNet(SpacecraftNetConfig cfg) : cfg_(std::move(cfg)) {
    if (cfg_.chain_nodes < 2) throw ConfigError("spacecraft net: need at least the two spacecraft");
    if (cfg_.c1 < 0 || cfg_.c2 < 0 || cfg_.c3 < 0 || cfg_.c1 + cfg_.c2 + cfg_.c3 > 1.0 + 1e-12) {
      throw ConfigError("spacecraft net: reward weights must be nonnegative and sum to at most 1");
    }
    const NetParams& p = cfg_.net;
    if (!(p.nominal_len > 0 && p.stiffness > 0 && p.contact_stiffness > 0 && p.target_radius > 0) ||
        p.damping < 0 || p.contact_damping < 0) {
      throw ConfigError("spacecraft net: net parameters must be positive");
    }
    if (!(cfg_.spacecraft_mass > 0 && cfg_.node_mass > 0 && cfg_.target_mass > 0)) {
      throw ConfigError("spacecraft net: masses must be positive");
    }
  }

  const SpacecraftNetConfig& config() const { return cfg_; }
  int particle_count() const { return cfg_.chain_nodes + 1; }
  int target_index() const { return cfg_.chain_nodes; }
  int state_dim() const { return 4 * particle_count(); }

  double mass(int i) const {
    if (i == target_index()) return cfg_.target_mass;
    if (i == 0 || i == cfg_.chain_nodes - 1) return cfg_.spacecraft_mass;
    return cfg_.node_mass;
  }

  static Eigen::Vector2d position(const Vector& x, int i) { return x.segment<2>(4 * i); }
  static Eigen::Vector2d velocity(const Vector& x, int i) { return x.segment<2>(4 * i + 2); }

  /// Net and contact forces on every particle (no thrust).
  std::vector<Eigen::Vector2d> internal_forces(const Vector& x) const {
    std::vector<Eigen::Vector2d> forces(particle_count(), Eigen::Vector2d::Zero());
    for (int i = 1; i < cfg_.chain_nodes; ++i) {
      const PairForce f = net_segment_force(position(x, i - 1), position(x, i), velocity(x, i - 1), velocity(x, i), cfg_.net);
      forces[i - 1] += f.on_first;
      forces[i] += f.on_second;
    }
    const int t = target_index();
    for (int i = 1; i + 1 < cfg_.chain_nodes; ++i) {
      const PairForce f = contact_force(position(x, i), velocity(x, i), position(x, t), velocity(x, t), cfg_.net);
      forces[i] += f.on_first;
      forces[t] += f.on_second;
    }
    return forces;
  }

  Vector step(const Vector& x, const Vector& u) const {
    std::vector<Eigen::Vector2d> forces = internal_forces(x);
    forces[0] += u.segment<2>(0);
    forces[cfg_.chain_nodes - 1] += u.segment<2>(2);
    Vector next(x.size());
    for (int i = 0; i < particle_count(); ++i) {
      next.segment<2>(4 * i) = position(x, i) + cfg_.dt * velocity(x, i);
      next.segment<2>(4 * i + 2) = velocity(x, i) + cfg_.dt * forces[i] / mass(i);
    }
    return next;
  }

  Eigen::Vector2d momentum(const Vector& x) const {
    Eigen::Vector2d p = Eigen::Vector2d::Zero();
    for (int i = 0; i < particle_count(); ++i) p += mass(i) * velocity(x, i);
    return p;
  }

  /// Kinetic energy plus stored spring energy of the net and contacts.
  double energy(const Vector& x) const {
    double e = 0.0;
    for (int i = 0; i < particle_count(); ++i) e += 0.5 * mass(i) * velocity(x, i).squaredNorm();
    const NetParams& p = cfg_.net;
    for (int i = 1; i < cfg_.chain_nodes; ++i) {
      const double len = (position(x, i) - position(x, i - 1)).norm();
      if (len > p.nominal_len) e += 0.5 * p.stiffness * (len - p.nominal_len) * (len - p.nominal_len);
    }
    for (int i = 1; i + 1 < cfg_.chain_nodes; ++i) {
      const double d = (position(x, i) - position(x, target_index())).norm();
      if (d < p.target_radius) e += 0.5 * p.contact_stiffness * (p.target_radius - d) * (p.target_radius - d);
    }
    return e;
  }

  double reward(const Vector& x) const {
    Eigen::Vector2d centroid = Eigen::Vector2d::Zero();
    Eigen::Vector2d centroid_vel = Eigen::Vector2d::Zero();
    for (int i = 0; i < cfg_.chain_nodes; ++i) {
      centroid += position(x, i);
      centroid_vel += velocity(x, i);
    }
    centroid /= cfg_.chain_nodes;
    centroid_vel /= cfg_.chain_nodes;
    const int t = target_index();
    return cfg_.c1 * normalized_distance_reward((centroid - position(x, t)).norm(), cfg_.a1) +
           cfg_.c2 * normalized_distance_reward((centroid_vel - cfg_.desired_velocity).norm(), cfg_.a2) +
           cfg_.c3 * normalized_distance_reward((velocity(x, t) - cfg_.desired_velocity).norm(), cfg_.a3);
  }

  IntervalBox state_box() const {
    Vector lo(state_dim()), hi(state_dim());
    for (int i = 0; i < particle_count(); ++i) {
      lo.segment<4>(4 * i) << cfg_.position_limit_lo, cfg_.position_limit_lo, -cfg_.velocity_limit, -cfg_.velocity_limit;
      hi.segment<4>(4 * i) << cfg_.position_limit_hi, cfg_.position_limit_hi, cfg_.velocity_limit, cfg_.velocity_limit;
    }
    return IntervalBox(lo, hi);
  }

 private:
  SpacecraftNetConfig cfg_;
};

inline MdpDefinition make_spacecraft_net(const SpacecraftNetConfig& cfg) {
  auto model = std::make_shared<const SpacecraftNet>(cfg);
  MdpDefinition mdp;
  mdp.state_dim = model->state_dim();
  mdp.action_dim = 4;
  mdp.dynamics = [model](const Vector& x, const Vector& u) { return model->step(x, u); };
  mdp.stage_reward = [model](const Vector& x) { return model->reward(x); };
  mdp.terminal_reward = [](const Vector&) { return 0.0; };
  mdp.state_box = model->state_box();
  mdp.action_box = IntervalBox::uniform(4, -cfg.thrust_limit, cfg.thrust_limit);
  mdp.horizon = cfg.horizon;
  mdp.discount = cfg.gamma;
  mdp.dt = cfg.dt;
  mdp.validate();
  return mdp;
}

/// Chain laid out along +x with every segment at 90% of its nominal length,
/// everything at rest, target at the given position.
inline Vector spacecraft_net_initial_state(const SpacecraftNetConfig& cfg, const Eigen::Vector2d& target_position) {
  const int particles = cfg.chain_nodes + 1;
  Vector x = Vector::Zero(4 * particles);
  for (int i = 0; i < cfg.chain_nodes; ++i) x.segment<2>(4 * i) = Eigen::Vector2d(0.9 * cfg.net.nominal_len * i, 0.0);
  x.segment<2>(4 * cfg.chain_nodes) = target_position;
  return x;
}

}  // namespace sets::env
