#pragma once

// Fixed-wing glider: 6-DOF rigid body in NED coordinates with a linear
// aerodynamic model, a thermal updraft, and a time-since-target-observed
// counter appended to the state.
//
// State (13): pn, pe, pd, u, v, w, φ, θ, ψ, p, q, r, ξ.
// Action (3): elevator, aileron, rudder deflections.

#include "sets/env/common.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <numbers>
#include <string>

namespace sets::env {

/// First-order stability and control derivatives.
struct AeroCoefficients {
  double CL0, CL_alpha, CL_q, CL_de;
  double CD0, CD_alpha, CD_q, CD_de;
  double Cm0, Cm_alpha, Cm_q, Cm_de;
  double CY0, CY_beta, CY_p, CY_r, CY_da, CY_dr;
  double Cl0, Cl_beta, Cl_p, Cl_r, Cl_da, Cl_dr;
  double Cn0, Cn_beta, Cn_p, Cn_r, Cn_da, Cn_dr;
};

struct GliderConfig {
  double mass = 0.0;
  double Jx = 0.0, Jy = 0.0, Jz = 0.0, Jxz = 0.0;
  double wing_area = 0.0;  // S
  double chord = 0.0;      // c
  double span = 0.0;       // b
  double air_density = 1.2682;
  double gravity = 9.81;
  AeroCoefficients aero{};
  /// Vertical cylinder over (north, east) with this radius.
  Eigen::Vector2d thermal_center = Eigen::Vector2d::Zero();
  double thermal_radius = 0.0;
  double thermal_force = 0.0;  // N, upward
  Eigen::Vector3d target = Eigen::Vector3d::Zero();  // NED
  double cone_half_angle_deg = 30.0;
  double cone_length = 100.0;
  double stay_alive_reward = 1.0;  // r0
  double observation_timescale = 100.0;  // T, in steps
  double target_distance_scale = 100.0;  // a
  /// Forward Euler is unstable on the pitch short-period mode above ~0.06 s
  /// for typical small-UAV coefficients.
  double dt = 0.02;
  int horizon = 1000;
  double gamma = 0.99;
};

/// Inertia combinations Γ1..Γ8 of the standard body-frame moment equations.
struct InertiaTerms {
  double g1, g2, g3, g4, g5, g6, g7, g8;
};

inline InertiaTerms inertia_terms(const GliderConfig& c) {
  const double G = c.Jx * c.Jz - c.Jxz * c.Jxz;
  return {c.Jxz * (c.Jx - c.Jy + c.Jz) / G,
          (c.Jz * (c.Jz - c.Jy) + c.Jxz * c.Jxz) / G,
          c.Jz / G,
          c.Jxz / G,
          (c.Jz - c.Jx) / c.Jy,
          c.Jxz / c.Jy,
          ((c.Jx - c.Jy) * c.Jx + c.Jxz * c.Jxz) / G,
          c.Jx / G};
}

/// Body-to-inertial rotation for roll φ, pitch θ, yaw ψ.
inline Eigen::Matrix3d body_to_inertial(double phi, double theta, double psi) {
  const double cf = std::cos(phi), sf = std::sin(phi);
  const double ct = std::cos(theta), st = std::sin(theta);
  const double cp = std::cos(psi), sp = std::sin(psi);
  Eigen::Matrix3d R;
  R << ct * cp, sf * st * cp - cf * sp, cf * st * cp + sf * sp,
       ct * sp, sf * st * sp + cf * cp, cf * st * sp - sf * cp,
       -st, sf * ct, cf * ct;
  return R;
}

class Glider {
 public:
  explicit Glider(GliderConfig cfg) : cfg_(std::move(cfg)), inertia_(inertia_terms(cfg_)) {
    if (!(cfg_.mass > 0.0)) throw ConfigError("glider: mass must be positive");
    if (!(cfg_.cone_half_angle_deg > 0.0 && cfg_.cone_half_angle_deg < 90.0)) {
      throw ConfigError("glider: cone half-angle must lie in (0, 90) degrees");
    }
    if (!(cfg_.Jx > 0 && cfg_.Jy > 0 && cfg_.Jz > 0 && cfg_.wing_area > 0 && cfg_.chord > 0 && cfg_.span > 0)) {
      throw ConfigError("glider: inertia and wing geometry must be positive");
    }
  }

  const GliderConfig& config() const { return cfg_; }

  /// Whether the target lies inside the body-x observation cone.
  bool target_observed(const Vector& x) const {
    const Eigen::Matrix3d R = body_to_inertial(x[6], x[7], x[8]);
    const Eigen::Vector3d rel = R.transpose() * (cfg_.target - x.head<3>());
    const double dist = rel.norm();
    if (dist > cfg_.cone_length) return false;
    if (dist == 0.0) return true;
    const double cos_limit = std::cos(cfg_.cone_half_angle_deg * std::numbers::pi / 180.0);
    return rel.x() / dist >= cos_limit;
  }

  bool in_thermal(const Vector& x) const {
    return (x.head<2>() - cfg_.thermal_center).norm() <= cfg_.thermal_radius;
  }

  /// Body-frame forces and moments (fx, fy, fz, l, m, n).
  Eigen::Matrix<double, 6, 1> loads(const Vector& x, const Vector& u) const {
    const AeroCoefficients& a = cfg_.aero;
    const double uu = x[3], vv = x[4], ww = x[5];
    const double phi = x[6], theta = x[7];
    const double p = x[9], q = x[10], r = x[11];
    const double de = u[0], da = u[1], dr = u[2];

    const double Va = std::sqrt(uu * uu + vv * vv + ww * ww);
    Eigen::Matrix<double, 6, 1> out = Eigen::Matrix<double, 6, 1>::Zero();
    if (Va > 1e-6) {
      const double alpha = std::atan2(ww, uu);
      const double beta = std::asin(std::clamp(vv / Va, -1.0, 1.0));
      const double qbar = 0.5 * cfg_.air_density * Va * Va * cfg_.wing_area;
      const double cq = cfg_.chord / (2.0 * Va);
      const double bq = cfg_.span / (2.0 * Va);
      const double CL = a.CL0 + a.CL_alpha * alpha + a.CL_q * cq * q + a.CL_de * de;
      const double CD = a.CD0 + a.CD_alpha * alpha + a.CD_q * cq * q + a.CD_de * de;
      const double Cm = a.Cm0 + a.Cm_alpha * alpha + a.Cm_q * cq * q + a.Cm_de * de;
      const double CY = a.CY0 + a.CY_beta * beta + a.CY_p * bq * p + a.CY_r * bq * r + a.CY_da * da + a.CY_dr * dr;
      const double Cl = a.Cl0 + a.Cl_beta * beta + a.Cl_p * bq * p + a.Cl_r * bq * r + a.Cl_da * da + a.Cl_dr * dr;
      const double Cn = a.Cn0 + a.Cn_beta * beta + a.Cn_p * bq * p + a.Cn_r * bq * r + a.Cn_da * da + a.Cn_dr * dr;
      const double lift = qbar * CL;
      const double drag = qbar * CD;
      const double ca = std::cos(alpha), sa = std::sin(alpha);
      out[0] = -drag * ca + lift * sa;
      out[1] = qbar * CY;
      out[2] = -drag * sa - lift * ca;
      out[3] = qbar * cfg_.span * Cl;
      out[4] = qbar * cfg_.chord * Cm;
      out[5] = qbar * cfg_.span * Cn;
    }
    const double mg = cfg_.mass * cfg_.gravity;
    out[0] += -mg * std::sin(theta);
    out[1] += mg * std::cos(theta) * std::sin(phi);
    out[2] += mg * std::cos(theta) * std::cos(phi);
    if (in_thermal(x)) {
      const Eigen::Matrix3d R = body_to_inertial(phi, theta, x[8]);
      out.head<3>() += R.transpose() * Eigen::Vector3d(0.0, 0.0, -cfg_.thermal_force);
    }
    return out;
  }

  Vector derivative(const Vector& x, const Vector& u) const {
    const double uu = x[3], vv = x[4], ww = x[5];
    const double phi = x[6], theta = x[7], psi = x[8];
    const double p = x[9], q = x[10], r = x[11];
    const auto f = loads(x, u);
    const InertiaTerms& G = inertia_;

    Vector dx = Vector::Zero(13);
    dx.head<3>() = body_to_inertial(phi, theta, psi) * Eigen::Vector3d(uu, vv, ww);
    dx[3] = r * vv - q * ww + f[0] / cfg_.mass;
    dx[4] = p * ww - r * uu + f[1] / cfg_.mass;
    dx[5] = q * uu - p * vv + f[2] / cfg_.mass;
    const double sf = std::sin(phi), cf = std::cos(phi), tt = std::tan(theta), ct = std::cos(theta);
    dx[6] = p + sf * tt * q + cf * tt * r;
    dx[7] = cf * q - sf * r;
    dx[8] = (sf / ct) * q + (cf / ct) * r;
    dx[9] = G.g1 * p * q - G.g2 * q * r + G.g3 * f[3] + G.g4 * f[5];
    dx[10] = G.g5 * p * r - G.g6 * (p * p - r * r) + f[4] / cfg_.Jy;
    dx[11] = G.g7 * p * q - G.g1 * q * r + G.g4 * f[3] + G.g8 * f[5];
    return dx;
  }

  /// Forward Euler on the rigid body; ξ resets when the target is in view at
  /// the pre-step state and otherwise counts up by one.
  Vector step(const Vector& x, const Vector& u) const {
    Vector next = x + cfg_.dt * derivative(x, u);
    next[12] = target_observed(x) ? 0.0 : x[12] + 1.0;
    return next;
  }

  double reward(const Vector& x) const {
    const bool fresh = x[12] < cfg_.observation_timescale;
    const double near = normalized_distance_reward((x.head<3>() - cfg_.target).norm(), cfg_.target_distance_scale);
    return 0.1 * cfg_.stay_alive_reward + 0.9 * (fresh ? 1.0 : 0.5 * near);
  }

  /// Kinetic plus potential energy (altitude = −pd).
  double energy(const Vector& x) const {
    return 0.5 * cfg_.mass * x.segment<3>(3).squaredNorm() - cfg_.mass * cfg_.gravity * x[2];
  }

  static IntervalBox default_state_box() {
    Vector lo(13), hi(13);
    lo << -1000, -1000, -750, -600, -600, -600, -2, -2, -100, -50, -50, -50, 0;
    hi << 1000, 1000, -0.2, 600, 600, 600, 2, 2, 100, 50, 50, 50, 1e9;
    return IntervalBox(lo, hi);
  }

 private:
  GliderConfig cfg_;
  InertiaTerms inertia_;
};

inline MdpDefinition make_glider(const GliderConfig& cfg) {
  auto model = std::make_shared<const Glider>(cfg);
  MdpDefinition mdp;
  mdp.state_dim = 13;
  mdp.action_dim = 3;
  mdp.dynamics = [model](const Vector& x, const Vector& u) { return model->step(x, u); };
  mdp.stage_reward = [model](const Vector& x) { return model->reward(x); };
  mdp.terminal_reward = [](const Vector&) { return 0.0; };
  mdp.state_box = Glider::default_state_box();
  mdp.action_box = IntervalBox::uniform(3, -0.5, 0.5);
  mdp.horizon = cfg.horizon;
  mdp.discount = cfg.gamma;
  mdp.dt = cfg.dt;
  mdp.validate();
  return mdp;
}

inline AeroCoefficients aero_from_json(const nlohmann::json& j) {
  const char* keys[] = {"CL0", "CL_alpha", "CL_q", "CL_de", "CD0", "CD_alpha", "CD_q", "CD_de",
                        "Cm0", "Cm_alpha", "Cm_q", "Cm_de", "CY0", "CY_beta", "CY_p", "CY_r",
                        "CY_da", "CY_dr", "Cl0", "Cl_beta", "Cl_p", "Cl_r", "Cl_da", "Cl_dr",
                        "Cn0", "Cn_beta", "Cn_p", "Cn_r", "Cn_da", "Cn_dr"};
  double values[30];
  for (int i = 0; i < 30; ++i) {
    if (!j.contains(keys[i]) || !j[keys[i]].is_number()) {
      throw ConfigError(std::string("glider: missing aerodynamic coefficient '") + keys[i] + "'");
    }
    values[i] = j[keys[i]].get<double>();
  }
  AeroCoefficients a;
  double* fields[] = {&a.CL0, &a.CL_alpha, &a.CL_q, &a.CL_de, &a.CD0, &a.CD_alpha, &a.CD_q, &a.CD_de,
                      &a.Cm0, &a.Cm_alpha, &a.Cm_q, &a.Cm_de, &a.CY0, &a.CY_beta, &a.CY_p, &a.CY_r,
                      &a.CY_da, &a.CY_dr, &a.Cl0, &a.Cl_beta, &a.Cl_p, &a.Cl_r, &a.Cl_da, &a.Cl_dr,
                      &a.Cn0, &a.Cn_beta, &a.Cn_p, &a.Cn_r, &a.Cn_da, &a.Cn_dr};
  for (int i = 0; i < 30; ++i) *fields[i] = values[i];
  return a;
}

}  // namespace sets::env
