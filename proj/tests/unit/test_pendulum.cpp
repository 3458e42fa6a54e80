#include <doctest.h>

#include <cmath>
#include <random>

#include "helpers.hpp"
#include "phdae/double_pendulum.hpp"
#include "phdae/errors.hpp"
#include "phdae/system.hpp"

using namespace phdae;
using namespace phdae::testing;

TEST_CASE("default parameters are the reference table values") {
  const PendulumParams params;
  CHECK(params.l_a == 0.6);
  CHECK(params.l_b == 0.3);
  CHECK(params.m_a == 0.2);
  CHECK(params.m_b == 0.6);
  CHECK(params.g_bar == 9.81);
  CHECK_THROWS_AS(build_implicit(PendulumParams{-0.6, 0.3, 0.2, 0.6, 9.81}),
                  Error);
}

TEST_CASE("implicit system structure") {
  const ImplicitPHSystem sys = build_implicit({});
  CHECK(sys.n == 4);
  CHECK(sys.k == 2);
  CHECK(sys.m == 2);
  CHECK(is_separable(sys));

  SUBCASE("both circles pass through the hanging position") {
    const Vector g = sys.constraint(vec4(0.0, -0.6, 0.0, -0.9));
    CHECK(inf_norm(g) <= 1e-15);
  }
  SUBCASE("constraint Jacobian rows at the hanging position") {
    const Matrix G = sys.constraint_jacobian(vec4(0.0, -0.6, 0.0, -0.9));
    CHECK(G(0, 0) == 0.0);
    CHECK(G(0, 1) == doctest::Approx(-1.2));
    CHECK(G(0, 2) == 0.0);
    CHECK(G(0, 3) == 0.0);
    CHECK(G(1, 0) == 0.0);
    CHECK(G(1, 1) == doctest::Approx(0.6));
    CHECK(G(1, 2) == 0.0);
    CHECK(G(1, 3) == doctest::Approx(-0.6));
  }
  SUBCASE("input map first column at the hanging position") {
    const Matrix U = sys.input_map(vec4(0.0, -0.6, 0.0, -0.9));
    CHECK(U(0, 0) == doctest::Approx(1.0 / 0.6).epsilon(1e-14));
    CHECK(U(1, 0) == 0.0);
    CHECK(U(2, 0) == 0.0);
    CHECK(U(3, 0) == 0.0);
  }
  SUBCASE("potential gradient is the constant gravity covector") {
    for (const State& x : random_on_manifold(3)) {
      const Vector grad = sys.grad_r_H(x.r, x.p);
      CHECK(grad[0] == 0.0);
      CHECK(grad[1] == doctest::Approx(9.81 * 0.2));
      CHECK(grad[2] == 0.0);
      CHECK(grad[3] == doctest::Approx(9.81 * 0.6));
    }
  }
}

TEST_CASE("exact_drift is the ballistic flow") {
  const PendulumParams params;

  SUBCASE("free fall from rest over one second") {
    const State out = exact_drift(params, hanging_rest(), 1.0);
    CHECK(out.r[1] == doctest::Approx(-0.6 - 4.905).epsilon(1e-14));
    CHECK(out.r[3] == doctest::Approx(-0.9 - 4.905).epsilon(1e-14));
    CHECK(out.r[0] == 0.0);
    CHECK(out.p[1] == doctest::Approx(-0.2 * 9.81).epsilon(1e-14));
    CHECK(out.p[3] == doctest::Approx(-0.6 * 9.81).epsilon(1e-14));
  }
  SUBCASE("zero step is the identity") {
    for (const State& x : random_on_manifold(3)) {
      const State out = exact_drift(params, x, 0.0);
      CHECK(inf_norm(out.r - x.r) == 0.0);
      CHECK(inf_norm(out.p - x.p) == 0.0);
    }
  }
  SUBCASE("energy is invariant under the exact flow") {
    const ImplicitPHSystem sys = build_implicit(params);
    for (const State& x : random_on_manifold(5)) {
      const State out = exact_drift(params, x, 0.37);
      CHECK(energy(sys, out) == doctest::Approx(energy(sys, x)).epsilon(1e-12));
    }
  }
}

TEST_CASE("exact_kick is the input flow at frozen positions") {
  const PendulumParams params;
  const ImplicitPHSystem sys = build_implicit(params);

  SUBCASE("zero input is the identity") {
    for (const State& x : random_on_manifold(3)) {
      const State out = exact_kick(params, x, Vector::Zero(2), 0.5);
      CHECK(inf_norm(out.p - x.p) == 0.0);
    }
  }
  SUBCASE("unit shoulder torque at the hanging position") {
    const State out = exact_kick(params, hanging_rest(), vec2(1.0, 0.0), 1.0);
    CHECK(out.p[0] == doctest::Approx(1.0 / 0.6).epsilon(1e-14));
    CHECK(out.p[1] == 0.0);
    CHECK(out.p[2] == 0.0);
    CHECK(out.p[3] == 0.0);
  }
  SUBCASE("impulse equals h U(r) u for arbitrary inputs") {
    for (const State& x : random_on_manifold(4)) {
      const Vector u = vec2(0.8, -1.1);
      const State out = exact_kick(params, x, u, 0.02);
      const Vector expected = 0.02 * (sys.input_map(x.r) * u);
      CHECK(inf_norm((out.p - x.p) - expected) <= 1e-15);
      CHECK(inf_norm(out.r - x.r) == 0.0);
    }
  }
  SUBCASE("kicks compose additively in u at fixed r") {
    const State x = swinging_start();
    const Vector u1 = vec2(0.3, -0.4);
    const Vector u2 = vec2(-1.2, 0.9);
    const State once = exact_kick(params, x, u1 + u2, 0.05);
    const State twice = exact_kick(params, exact_kick(params, x, u1, 0.05), u2, 0.05);
    CHECK(inf_norm(once.p - twice.p) <= 1e-15);
  }
}

TEST_CASE("pendulum_method composes the exact flows symmetrically") {
  const PendulumParams params;
  const ImplicitPHSystem sys = build_implicit(params);
  const UnconstrainedMethod method = pendulum_method(params);
  CHECK(method.declared_order == 2);
  CHECK(method.is_symmetric);
  CHECK(method.symplectic_at_zero_input);

  SUBCASE("collapses to the exact ballistic flow at zero input") {
    for (const State& x : random_on_manifold(4)) {
      const State stepped = method.step(sys, x, Vector::Zero(2), 0.01);
      const State ballistic = exact_drift(params, x, 0.01);
      CHECK(inf_norm(stepped.r - ballistic.r) <= 1e-15);
      CHECK(inf_norm(stepped.p - ballistic.p) <= 1e-15);
    }
  }
  SUBCASE("a step of -h undoes a step of h") {
    const Vector u = vec2(0.5, -0.3);
    for (const State& x : random_on_manifold(4)) {
      const State there = method.step(sys, x, u, 0.01);
      const State back = method.step(sys, there, u, -0.01);
      CHECK(inf_norm(back.r - x.r) <= 1e-13);
      CHECK(inf_norm(back.p - x.p) <= 1e-13);
    }
  }
}

TEST_CASE("embedding and chart invert each other") {
  const PendulumParams params;

  SUBCASE("hanging angles map to the hanging position") {
    const Vector r = embedding(params, Vector2(-M_PI / 2.0, 0.0));
    CHECK(inf_norm(r - vec4(0.0, -0.6, 0.0, -0.9)) <= 1e-15);
  }
  SUBCASE("chart of embedding is the identity on a grid") {
    for (const Real q1 : {-2.9, -1.3, 0.0, 0.7, 2.5}) {
      for (const Real q2 : {-2.8, -0.9, 0.0, 1.1, 3.0}) {
        const Vector2 q(q1, q2);
        const Vector2 back = chart(params, embedding(params, q));
        CHECK(std::abs(back[0] - q1) <= 1e-12);
        CHECK(std::abs(back[1] - q2) <= 1e-12);
      }
    }
  }
  SUBCASE("embedded positions satisfy both constraints") {
    const ImplicitPHSystem sys = build_implicit(params);
    for (const Real q1 : {-2.0, 0.4, 1.9}) {
      for (const Real q2 : {-1.7, 0.2, 2.4}) {
        CHECK(inf_norm(sys.constraint(embedding(params, Vector2(q1, q2)))) <=
              1e-15);
      }
    }
  }
  SUBCASE("off-manifold positions are rejected") {
    CHECK_THROWS_AS(chart(params, vec4(0.0, -0.7, 0.0, -0.9)),
                    InvalidStateError);
  }
  SUBCASE("embedding Jacobian matches finite differences") {
    const Vector2 q(0.8, -1.2);
    const Matrix Di = embedding_jacobian(params, q);
    const Real eps = 1e-6;
    for (int j = 0; j < 2; ++j) {
      Vector2 plus = q, minus = q;
      plus[j] += eps;
      minus[j] -= eps;
      const Vector col =
          (embedding(params, plus) - embedding(params, minus)) / (2.0 * eps);
      CHECK(inf_norm(Di.col(j) - col) <= 1e-9);
    }
  }
}

TEST_CASE("generalized mass matrix and the momentum lift") {
  const PendulumParams params;
  const Matrix M = Vector(vec4(0.2, 0.2, 0.6, 0.6)).asDiagonal();

  SUBCASE("straight-elbow value") {
    const Matrix2 M_hat = mass_matrix_hat(params, Vector2(0.4, 0.0));
    CHECK(M_hat(0, 0) == doctest::Approx(0.558).epsilon(1e-14));
    CHECK(M_hat(0, 1) == doctest::Approx(0.162).epsilon(1e-14));
    CHECK(M_hat(1, 0) == doctest::Approx(0.162).epsilon(1e-14));
    CHECK(M_hat(1, 1) == doctest::Approx(0.054).epsilon(1e-14));
  }
  SUBCASE("pullback of the ambient metric reproduces it") {
    std::mt19937 rng(11);
    std::uniform_real_distribution<Real> angle(-3.0, 3.0);
    for (int i = 0; i < 50; ++i) {
      const Vector2 q(angle(rng), angle(rng));
      const Matrix Di = embedding_jacobian(params, q);
      const Matrix2 M_hat = mass_matrix_hat(params, q);
      CHECK((Matrix(Di.transpose() * M * Di) - M_hat).cwiseAbs().maxCoeff() <=
            1e-10);
    }
  }
  SUBCASE("pullback inverts the lift") {
    std::mt19937 rng(13);
    std::uniform_real_distribution<Real> dist(-1.0, 1.0);
    for (int i = 0; i < 20; ++i) {
      const Vector2 q(3.0 * dist(rng), 3.0 * dist(rng));
      const Vector2 p_hat(dist(rng), dist(rng));
      const Vector p = lift_momentum(params, q, p_hat);
      CHECK(inf_norm(Vector(pullback_momentum(params, q, p) - p_hat)) <= 1e-10);
    }
  }
  SUBCASE("lifted states sit on the manifold with vanishing hidden constraint") {
    const ImplicitPHSystem sys = build_implicit(params);
    for (const State& x : random_on_manifold(10)) {
      const Residuals res = residuals(sys, x);
      CHECK(res.g <= 1e-10);
      CHECK(res.f <= 1e-10);
    }
  }
}

TEST_CASE("the two energy representations agree through the lift") {
  const PendulumParams params;
  const ImplicitPHSystem sys = build_implicit(params);
  std::mt19937 rng(17);
  std::uniform_real_distribution<Real> angle(-3.0, 3.0);
  std::uniform_real_distribution<Real> momentum(-1.5, 1.5);
  for (int i = 0; i < 200; ++i) {
    const ExplicitState z{Vector2(angle(rng), angle(rng)),
                          Vector2(momentum(rng), momentum(rng))};
    const State x = lift_state(params, z);
    CHECK(std::abs(energy(sys, x) - explicit_hamiltonian(params, z)) <= 1e-10);
  }
}

TEST_CASE("ambient output equals the generalized velocity") {
  // U^T is a left inverse of the embedding Jacobian on momenta: the port
  // output of a lifted state reads back qdot.
  const PendulumParams params;
  const ImplicitPHSystem sys = build_implicit(params);
  std::mt19937 rng(19);
  std::uniform_real_distribution<Real> angle(-3.0, 3.0);
  std::uniform_real_distribution<Real> momentum(-1.0, 1.0);
  for (int i = 0; i < 50; ++i) {
    const ExplicitState z{Vector2(angle(rng), angle(rng)),
                          Vector2(momentum(rng), momentum(rng))};
    const Vector2 qdot = mass_matrix_hat(params, z.q).llt().solve(z.p_hat);
    const Vector y = output(sys, lift_state(params, z));
    CHECK(std::abs(y[0] - qdot[0]) <= 1e-10);
    CHECK(std::abs(y[1] - qdot[1]) <= 1e-10);
  }
}

TEST_CASE("explicit right-hand side") {
  const PendulumParams params;

  SUBCASE("qdot is the unconstrained velocity") {
    const ExplicitState z{Vector2(0.3, -0.8), Vector2(0.2, -0.1)};
    const ExplicitState dz = explicit_rhs(params, z, Vector2::Zero());
    const Vector2 qdot = mass_matrix_hat(params, z.q).llt().solve(z.p_hat);
    CHECK(inf_norm(Vector(dz.q - qdot)) <= 1e-14);
  }
  SUBCASE("the hanging equilibrium is a fixed point") {
    const ExplicitState z{Vector2(-M_PI / 2.0, 0.0), Vector2::Zero()};
    const ExplicitState dz = explicit_rhs(params, z, Vector2::Zero());
    CHECK(inf_norm(Vector(dz.q)) <= 1e-15);
    CHECK(inf_norm(Vector(dz.p_hat)) <= 1e-14);
  }
  SUBCASE("the input enters additively") {
    const ExplicitState z{Vector2(0.9, 1.2), Vector2(-0.3, 0.4)};
    const ExplicitState d0 = explicit_rhs(params, z, Vector2::Zero());
    const ExplicitState d1 = explicit_rhs(params, z, Vector2(0.7, -0.2));
    CHECK(inf_norm(Vector((d1.p_hat - d0.p_hat) - Vector2(0.7, -0.2))) <= 1e-14);
    CHECK(inf_norm(Vector(d1.q - d0.q)) == 0.0);
  }
  SUBCASE("build_explicit bundles the same callbacks") {
    const ExplicitPendulum explicit_sys = build_explicit(params);
    const ExplicitState z{Vector2(0.5, -0.5), Vector2(0.1, 0.2)};
    CHECK(explicit_sys.hamiltonian(z) ==
          doctest::Approx(explicit_hamiltonian(params, z)).epsilon(1e-15));
    const ExplicitState a = explicit_sys.rhs(z, Vector2(0.1, 0.1));
    const ExplicitState b = explicit_rhs(params, z, Vector2(0.1, 0.1));
    CHECK(inf_norm(Vector(a.q - b.q)) == 0.0);
    CHECK(inf_norm(Vector(a.p_hat - b.p_hat)) == 0.0);
  }
}

TEST_CASE("RK4 reference quality") {
  const PendulumParams params;
  const Vector2 q0(-M_PI / 2.0 + 0.5, 0.3);
  const Vector2 p0(0.0, 0.0);

  SUBCASE("energy error shrinks by about 2^4 when h_ref halves") {
    const auto max_dH = [&](Real h_ref, int steps) {
      const auto traj = rk4_reference(params, q0, p0, h_ref, steps);
      const Real H0 = explicit_hamiltonian(params, traj.front());
      Real worst = 0.0;
      for (const ExplicitState& z : traj) {
        worst = std::max(worst, std::abs(explicit_hamiltonian(params, z) - H0));
      }
      return worst;
    };
    const Real coarse = max_dH(2e-3, 250);
    const Real fine = max_dH(1e-3, 500);
    CHECK(coarse / fine == doctest::Approx(16.0).epsilon(0.5));
  }
  SUBCASE("the equilibrium stays fixed") {
    const auto traj =
        rk4_reference(params, Vector2(-M_PI / 2.0, 0.0), Vector2::Zero(), 1e-3, 200);
    CHECK(inf_norm(Vector(traj.back().q - Vector2(-M_PI / 2.0, 0.0))) <= 1e-14);
    CHECK(inf_norm(Vector(traj.back().p_hat)) <= 1e-13);
  }
  SUBCASE("lifted reference states satisfy both constraint levels") {
    const ImplicitPHSystem sys = build_implicit(params);
    const auto traj = rk4_reference(params, q0, p0, 1e-3, 100);
    for (const ExplicitState& z : traj) {
      const Residuals res = residuals(sys, lift_state(params, z));
      CHECK(res.g <= 1e-10);
      CHECK(res.f <= 1e-10);
    }
  }
  SUBCASE("ZOH variant with a zero source matches the plain reference") {
    const auto plain = rk4_reference(params, q0, p0, 1e-3, 40);
    const auto zoh = rk4_reference_zoh(params, q0, p0, 1e-3, 1e-2, 4,
                                       zero_source(2));
    CHECK(inf_norm(Vector(zoh.back().q - plain.back().q)) <= 1e-15);
    CHECK(inf_norm(Vector(zoh.back().p_hat - plain.back().p_hat)) <= 1e-15);
  }
  SUBCASE("ZOH period must be a multiple of the substep") {
    CHECK_THROWS_AS(
        rk4_reference_zoh(params, q0, p0, 3e-3, 1e-2, 2, zero_source(2)),
        Error);
  }
}
