#pragma once

#include "sets/mdp.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace sets::env {

/// Distance shaping s(d, a) = 1 − (2/π)·arctan(d/a), which maps [0, ∞) onto (0, 1].
inline double normalized_distance_reward(double d, double a) {
  return 1.0 - (2.0 / std::numbers::pi) * std::atan(d / a);
}

/// Raised for malformed or incomplete environment configuration.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An MDP together with the start state its config describes.
struct Environment {
  std::string type;
  MdpDefinition mdp;
  Vector initial_state;
};

}  // namespace sets::env
