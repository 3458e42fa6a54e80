#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "phdae/double_pendulum.hpp"
#include "phdae/errors.hpp"
#include "phdae/split_methods.hpp"
#include "phdae/system.hpp"

using namespace phdae;
using namespace phdae::testing;

namespace {

// First-order splitting: drift applied first, then the kick, with the exact
// closed-form inverse (undo the kick, then undo the drift).
UnconstrainedMethod drift_then_kick() {
  UnconstrainedMethod method;
  method.step = [](const ImplicitPHSystem& s, const State& x, const Vector& u,
                   Real h) { return kick(s, drift(s, x, h), u, h); };
  method.inverse_step = [](const ImplicitPHSystem& s, const State& y,
                           const Vector& u, Real h) {
    return drift(s, kick(s, y, u, -h), -h);
  };
  method.declared_order = 1;
  method.symplectic_at_zero_input = true;
  return method;
}

Real state_gap(const State& a, const State& b) {
  return std::max(inf_norm(a.r - b.r), inf_norm(a.p - b.p));
}

}  // namespace

TEST_CASE("split flows require a separable system") {
  ImplicitPHSystem opaque = build_implicit({});
  opaque.mass_inverse.reset();
  opaque.potential = nullptr;
  const State x = hanging_rest();
  CHECK_THROWS_AS(kick(opaque, x, vec2(0.0, 0.0), 0.1), UnsupportedError);
  CHECK_THROWS_AS(drift(opaque, x, 0.1), UnsupportedError);
  CHECK_THROWS_AS(stormer_verlet(opaque), UnsupportedError);
}

TEST_CASE("kick and drift elementary properties") {
  const ImplicitPHSystem sys = build_implicit({});

  SUBCASE("zero step size is the identity") {
    for (const State& x : random_on_manifold(3)) {
      CHECK(state_gap(kick(sys, x, vec2(0.4, -0.2), 0.0), x) == 0.0);
      CHECK(state_gap(drift(sys, x, 0.0), x) == 0.0);
    }
  }
  SUBCASE("kick moves only momenta, drift moves only positions") {
    const State x = swinging_start();
    const State kicked = kick(sys, x, vec2(0.3, 0.7), 0.05);
    CHECK(inf_norm(kicked.r - x.r) == 0.0);
    const State drifted = drift(sys, x, 0.05);
    CHECK(inf_norm(drifted.p - x.p) == 0.0);
  }
  SUBCASE("zero-input kick applies the gravity impulse") {
    const State out = kick(sys, hanging_rest(), vec2(0.0, 0.0), 0.1);
    CHECK(out.p[0] == 0.0);
    CHECK(out.p[1] == doctest::Approx(-0.1 * 9.81 * 0.2).epsilon(1e-14));
    CHECK(out.p[2] == 0.0);
    CHECK(out.p[3] == doctest::Approx(-0.1 * 9.81 * 0.6).epsilon(1e-14));
  }
  SUBCASE("drift moves along M^-1 p") {
    State x = hanging_rest();
    x.p = vec4(0.2, 0.0, -0.6, 0.0);
    const State out = drift(sys, x, 0.5);
    CHECK(out.r[0] == doctest::Approx(0.5).epsilon(1e-14));   // 0.5 * 0.2/0.2
    CHECK(out.r[2] == doctest::Approx(-0.5).epsilon(1e-14));  // 0.5 * -0.6/0.6
    CHECK(out.r[1] == doctest::Approx(-0.6).epsilon(1e-14));
    CHECK(out.r[3] == doctest::Approx(-0.9).epsilon(1e-14));
  }
}

TEST_CASE("stormer_verlet against the exact ballistic flow") {
  // The ambient potential is linear in r, so one Verlet step coincides with
  // the exact flow of the full unconstrained Hamiltonian.
  const ImplicitPHSystem sys = build_implicit({});
  const UnconstrainedMethod sv = stormer_verlet(sys);
  CHECK(sv.declared_order == 2);
  CHECK(sv.is_symmetric);
  CHECK(sv.symplectic_at_zero_input);

  SUBCASE("matches exact_drift at zero input") {
    const Vector u0 = Vector::Zero(2);
    for (const State& x : random_on_manifold(5)) {
      const State stepped = sv.step(sys, x, u0, 0.02);
      const State exact = exact_drift(PendulumParams{}, x, 0.02);
      CHECK(state_gap(stepped, exact) <= 1e-13);
    }
  }
  SUBCASE("a step of -h undoes a step of h") {
    const Vector u = vec2(0.8, -0.5);
    for (const State& x : random_on_manifold(5)) {
      const State back = sv.step(sys, sv.step(sys, x, u, 0.01), u, -0.01);
      CHECK(state_gap(back, x) <= 1e-13);
    }
  }
  SUBCASE("inverse_step inverts step") {
    const Vector u = vec2(-0.3, 0.9);
    const State x = swinging_start();
    const State y = sv.step(sys, x, u, 0.02);
    CHECK(state_gap(sv.inverse_step(sys, y, u, 0.02), x) <= 1e-13);
  }
  SUBCASE("horizontal momentum is conserved at zero input") {
    // Gravity is vertical, so the total horizontal momentum is a first
    // integral of the unconstrained dynamics and Verlet preserves it exactly.
    const Vector u0 = Vector::Zero(2);
    State x = swinging_start();
    const Real px0 = x.p[0] + x.p[2];
    for (int i = 0; i < 100; ++i) x = sv.step(sys, x, u0, 0.01);
    CHECK(x.p[0] + x.p[2] == px0);
  }
}

TEST_CASE("adjoint combinator") {
  const ImplicitPHSystem sys = build_implicit({});
  const Vector u = vec2(0.4, -0.2);

  SUBCASE("adjoint of a symmetric method reproduces it") {
    const UnconstrainedMethod sv = stormer_verlet(sys);
    const UnconstrainedMethod adj = adjoint(sv);
    for (const State& x : random_on_manifold(4)) {
      CHECK(state_gap(adj.step(sys, x, u, 0.02), sv.step(sys, x, u, 0.02)) <=
            1e-15);
    }
    CHECK(adj.declared_order == 2);
    CHECK(adj.is_symmetric);
    CHECK(adj.symplectic_at_zero_input);
  }
  SUBCASE("adjoint swaps the composition order of the two flows") {
    const UnconstrainedMethod adj = adjoint(drift_then_kick());
    for (const State& x : random_on_manifold(4)) {
      const State expected = drift(sys, kick(sys, x, u, 0.02), 0.02);
      CHECK(state_gap(adj.step(sys, x, u, 0.02), expected) <= 1e-15);
    }
  }
  SUBCASE("the adjoint is an involution") {
    const UnconstrainedMethod twice = adjoint(adjoint(drift_then_kick()));
    const UnconstrainedMethod base = drift_then_kick();
    for (const State& x : random_on_manifold(4)) {
      CHECK(state_gap(twice.step(sys, x, u, 0.02),
                      base.step(sys, x, u, 0.02)) <= 1e-15);
    }
  }
  SUBCASE("fixed-point fallback agrees with the closed-form inverse") {
    UnconstrainedMethod blind = drift_then_kick();
    blind.inverse_step = nullptr;
    const UnconstrainedMethod adj_fp = adjoint(blind);
    const UnconstrainedMethod adj_cf = adjoint(drift_then_kick());
    for (const State& x : random_on_manifold(3)) {
      CHECK(state_gap(adj_fp.step(sys, x, u, 0.01),
                      adj_cf.step(sys, x, u, 0.01)) <= 1e-10);
    }
  }
  SUBCASE("a non-invertible step makes the fallback fail loudly") {
    UnconstrainedMethod constant;
    constant.step = [](const ImplicitPHSystem&, const State&, const Vector&,
                       Real) {
      return State{Vector::Zero(4), Vector::Zero(4)};
    };
    const UnconstrainedMethod adj = adjoint(constant);
    CHECK_THROWS_AS(adj.step(sys, swinging_start(), u, 0.01), SolverError);
  }
}

TEST_CASE("symmetrize combinator") {
  const ImplicitPHSystem sys = build_implicit({});
  const UnconstrainedMethod composed = symmetrize(drift_then_kick());
  const UnconstrainedMethod sv = stormer_verlet(sys);

  SUBCASE("symmetrizing the first-order splitting yields Verlet") {
    const Vector u = vec2(0.6, -0.4);
    for (const State& x : random_on_manifold(5)) {
      CHECK(state_gap(composed.step(sys, x, u, 0.02),
                      sv.step(sys, x, u, 0.02)) <= 1e-12);
    }
  }
  SUBCASE("bookkeeping is promoted") {
    CHECK(composed.declared_order == 2);
    CHECK(composed.is_symmetric);
    CHECK(composed.symplectic_at_zero_input);
    CHECK(static_cast<bool>(composed.inverse_step));
  }
  SUBCASE("a symmetrized map is its own adjoint") {
    const UnconstrainedMethod adj = adjoint(composed);
    const Vector u = vec2(0.1, 0.2);
    const State x = swinging_start();
    CHECK(state_gap(adj.step(sys, x, u, 0.03),
                    composed.step(sys, x, u, 0.03)) <= 1e-15);
  }
}
