#pragma once

#include <random>

#include "phdae/double_pendulum.hpp"
#include "phdae/system.hpp"
#include "phdae/types.hpp"

namespace phdae::testing {

inline Vector vec2(Real a, Real b) {
  Vector v(2);
  v << a, b;
  return v;
}

inline Vector vec4(Real a, Real b, Real c, Real d) {
  Vector v(4);
  v << a, b, c, d;
  return v;
}

/// Both links straight down: r = (0, -0.6, 0, -0.9) at rest.
inline State hanging_rest() {
  return State{vec4(0.0, -0.6, 0.0, -0.9), Vector::Zero(4)};
}

/// The swinging benchmark initial condition q = (-pi/2 + 0.5, 0.3), p = 0.
inline State swinging_start(const PendulumParams& params = {}) {
  return lift_state(params,
                    ExplicitState{Vector2(-M_PI / 2.0 + 0.5, 0.3), Vector2(0.0, 0.0)});
}

/// Deterministic on-manifold sample states with nonzero momentum.
inline std::vector<State> random_on_manifold(int count, unsigned seed = 7) {
  const PendulumParams params;
  std::mt19937 rng(seed);
  std::uniform_real_distribution<Real> angle(-2.5, 2.5);
  std::uniform_real_distribution<Real> momentum(-0.5, 0.5);
  std::vector<State> states;
  states.reserve(count);
  for (int i = 0; i < count; ++i) {
    const Vector2 q(angle(rng), angle(rng));
    const Vector2 p_hat(momentum(rng), momentum(rng));
    states.push_back(lift_state(params, ExplicitState{q, p_hat}));
  }
  return states;
}

}  // namespace phdae::testing
