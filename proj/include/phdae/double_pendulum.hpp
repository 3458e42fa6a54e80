#pragma once

#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "phdae/control.hpp"
#include "phdae/errors.hpp"
#include "phdae/split_methods.hpp"
#include "phdae/system.hpp"
#include "phdae/types.hpp"

namespace phdae {

/// Double planar pendulum: two point masses, two rigid links, gravity along
/// -y. The ambient state orders coordinates as r = (a_x, a_y, b_x, b_y).
struct PendulumParams {
  Real l_a = 0.6;    ///< length of the first link [m]
  Real l_b = 0.3;    ///< length of the second link [m]
  Real m_a = 0.2;    ///< first mass [kg]
  Real m_b = 0.6;    ///< second mass [kg]
  Real g_bar = 9.81; ///< gravity [m/s^2]
};

namespace detail {

inline void require_valid(const PendulumParams& params) {
  if (!(params.l_a > 0.0 && params.l_b > 0.0 && params.m_a > 0.0 &&
        params.m_b > 0.0 && params.g_bar > 0.0)) {
    throw Error("pendulum parameters must be strictly positive");
  }
}

}  // namespace detail

/// Torque-to-force map U(r): column 1 applies torque u_1 at the pivot,
/// column 2 torque u_2 at the elbow, with the elbow reaction acting back on
/// the first mass so that the generalized force pulled back through the
/// chart is exactly (u_1, u_2).
inline Matrix pendulum_input_map(const PendulumParams& params, const Vector& r) {
  Matrix U(4, 2);
  const Real dx = r[2] - r[0];
  const Real dy = r[3] - r[1];
  const Real la2 = params.l_a * params.l_a;
  const Real lb2 = params.l_b * params.l_b;
  U.col(0) << -r[1] / la2, r[0] / la2, 0.0, 0.0;
  U.col(1) << dy / lb2, -dx / lb2, -dy / lb2, dx / lb2;
  U.col(1) -= U.col(0);
  return U;
}

/// The implicit Cartesian DAE representation: separable H with constant
/// diagonal mass matrix and linear potential, quadratic link constraints
/// g^1 = |r^a|^2 - l_a^2 and g^2 = |r^b - r^a|^2 - l_b^2, and the true
/// constraint Jacobian (with factor 2).
inline ImplicitPHSystem build_implicit(const PendulumParams& params) {
  detail::require_valid(params);
  ImplicitPHSystem sys;
  sys.n = 4;
  sys.k = 2;
  sys.m = 2;

  Matrix mass_inv = Matrix::Zero(4, 4);
  mass_inv.diagonal() << 1.0 / params.m_a, 1.0 / params.m_a, 1.0 / params.m_b,
      1.0 / params.m_b;
  sys.mass_inverse = mass_inv;

  const Real g_bar = params.g_bar;
  const Real m_a = params.m_a;
  const Real m_b = params.m_b;
  sys.potential = [g_bar, m_a, m_b](const Vector& r) -> Real {
    return g_bar * (m_a * r[1] + m_b * r[3]);
  };
  sys.hamiltonian = [mass_inv, pot = sys.potential](const Vector& r,
                                                    const Vector& p) -> Real {
    return 0.5 * p.dot(mass_inv * p) + pot(r);
  };
  sys.grad_r_H = [g_bar, m_a, m_b](const Vector&, const Vector&) -> Vector {
    Vector grad(4);
    grad << 0.0, g_bar * m_a, 0.0, g_bar * m_b;
    return grad;
  };
  sys.grad_p_H = [mass_inv](const Vector&, const Vector& p) -> Vector {
    return mass_inv * p;
  };

  const Real la2 = params.l_a * params.l_a;
  const Real lb2 = params.l_b * params.l_b;
  sys.constraint = [la2, lb2](const Vector& r) -> Vector {
    const Real dx = r[2] - r[0];
    const Real dy = r[3] - r[1];
    Vector g(2);
    g << r[0] * r[0] + r[1] * r[1] - la2, dx * dx + dy * dy - lb2;
    return g;
  };
  sys.constraint_jacobian = [](const Vector& r) -> Matrix {
    const Real dx = r[2] - r[0];
    const Real dy = r[3] - r[1];
    Matrix G(2, 4);
    G.row(0) << 2.0 * r[0], 2.0 * r[1], 0.0, 0.0;
    G.row(1) << -2.0 * dx, -2.0 * dy, 2.0 * dx, 2.0 * dy;
    return G;
  };
  sys.input_map = [params](const Vector& r) -> Matrix {
    return pendulum_input_map(params, r);
  };
  return sys;
}

/// Exact ballistic flow of the drift field: both masses in free fall.
inline State exact_drift(const PendulumParams& params, const State& x, Real h) {
  State out = x;
  const Real fall = 0.5 * params.g_bar * h * h;
  out.r[0] += (h / params.m_a) * x.p[0];
  out.r[1] += (h / params.m_a) * x.p[1] - fall;
  out.r[2] += (h / params.m_b) * x.p[2];
  out.r[3] += (h / params.m_b) * x.p[3] - fall;
  out.p[1] -= params.m_a * params.g_bar * h;
  out.p[3] -= params.m_b * params.g_bar * h;
  return out;
}

/// Exact flow of the input field at frozen r: p <- p + h U(r) u.
inline State exact_kick(const PendulumParams& params, const State& x,
                        const Vector& u, Real h) {
  State out = x;
  out.p += h * (pendulum_input_map(params, x.r) * u);
  return out;
}

/// Symmetric second-order splitting drift(h/2) . kick(h) . drift(h/2) built
/// from the two exact flows; with u = 0 it collapses to the exact ballistic
/// flow and is symplectic. The system argument of the step callbacks is
/// ignored — the flows are closed-form in the parameters.
inline UnconstrainedMethod pendulum_method(const PendulumParams& params) {
  detail::require_valid(params);
  UnconstrainedMethod method;
  method.step = [params](const ImplicitPHSystem&, const State& x,
                         const Vector& u, Real h) {
    return exact_drift(params,
                       exact_kick(params, exact_drift(params, x, 0.5 * h), u, h),
                       0.5 * h);
  };
  method.inverse_step = [step = method.step](const ImplicitPHSystem& s,
                                             const State& y, const Vector& u,
                                             Real h) { return step(s, y, u, -h); };
  method.declared_order = 2;
  method.is_symmetric = true;
  method.symplectic_at_zero_input = true;
  return method;
}

// ---------------------------------------------------------------------------
// Chart, embedding, and the explicit generalized-coordinate representation.
// ---------------------------------------------------------------------------

/// Generalized state: q = (q^1, q^2) with q^1 the first link's angle from
/// the +x axis and q^2 the elbow angle relative to the first link, both in
/// (-pi, pi); p_hat the conjugate momenta.
struct ExplicitState {
  Vector2 q;
  Vector2 p_hat;
};

/// Embedding r = i(q) of the chart into the ambient plane.
inline Vector embedding(const PendulumParams& params, const Vector2& q) {
  const Real qt = q[0] + q[1];
  Vector r(4);
  r << params.l_a * std::cos(q[0]), params.l_a * std::sin(q[0]),
      params.l_a * std::cos(q[0]) + params.l_b * std::cos(qt),
      params.l_a * std::sin(q[0]) + params.l_b * std::sin(qt);
  return r;
}

/// Jacobian Di(q), 4x2.
inline Matrix embedding_jacobian(const PendulumParams& params, const Vector2& q) {
  const Real qt = q[0] + q[1];
  const Real s1 = std::sin(q[0]);
  const Real c1 = std::cos(q[0]);
  const Real st = std::sin(qt);
  const Real ct = std::cos(qt);
  Matrix Di(4, 2);
  Di << -params.l_a * s1, 0.0,
      params.l_a * c1, 0.0,
      -params.l_a * s1 - params.l_b * st, -params.l_b * st,
      params.l_a * c1 + params.l_b * ct, params.l_b * ct;
  return Di;
}

/// Inverse of the embedding for on-manifold r; both angles land in
/// (-pi, pi]. Throws when r is off the constraint manifold (tolerance 1e-8
/// on |g|_inf).
inline Vector2 chart(const PendulumParams& params, const Vector& r) {
  const Real dx = r[2] - r[0];
  const Real dy = r[3] - r[1];
  const Real g1 = r[0] * r[0] + r[1] * r[1] - params.l_a * params.l_a;
  const Real g2 = dx * dx + dy * dy - params.l_b * params.l_b;
  if (std::max(std::abs(g1), std::abs(g2)) > 1e-8) {
    throw InvalidStateError("chart requires an on-manifold position");
  }
  const Real q1 = std::atan2(r[1], r[0]);
  const Real qt = std::atan2(dy, dx);
  const Real two_pi = 2.0 * M_PI;
  Real q2 = std::remainder(qt - q1, two_pi);
  Vector2 q;
  q << q1, q2;
  return q;
}

/// Generalized mass matrix M_hat(q) of the explicit representation.
inline Matrix2 mass_matrix_hat(const PendulumParams& params, const Vector2& q) {
  const Real m_t = params.m_a + params.m_b;
  const Real la2 = params.l_a * params.l_a;
  const Real lb2 = params.l_b * params.l_b;
  const Real cross = params.m_b * params.l_a * params.l_b * std::cos(q[1]);
  Matrix2 M_hat;
  M_hat << m_t * la2 + params.m_b * lb2 + 2.0 * cross, params.m_b * lb2 + cross,
      params.m_b * lb2 + cross, params.m_b * lb2;
  return M_hat;
}

namespace detail {

inline Vector2 solve_mass_hat(const PendulumParams& params, const Vector2& q,
                              const Vector2& rhs) {
  const Matrix2 M_hat = mass_matrix_hat(params, q);
  Eigen::LLT<Matrix2> llt(M_hat);
  if (llt.info() != Eigen::Success) {
    throw AssumptionError("generalized mass matrix is not positive definite");
  }
  return llt.solve(rhs);
}

}  // namespace detail

/// Total energy in chart coordinates.
inline Real explicit_hamiltonian(const PendulumParams& params,
                                 const ExplicitState& z) {
  const Real m_t = params.m_a + params.m_b;
  const Real qt = z.q[0] + z.q[1];
  const Vector2 w = detail::solve_mass_hat(params, z.q, z.p_hat);
  return 0.5 * z.p_hat.dot(w) +
         params.g_bar * (m_t * params.l_a * std::sin(z.q[0]) +
                         params.m_b * params.l_b * std::sin(qt));
}

/// Right-hand side of the explicit ODE: qdot = M_hat^-1 p_hat and
/// p_hat_dot = -grad_q V - grad_q T + u, returned as an ExplicitState whose
/// fields hold the derivatives.
inline ExplicitState explicit_rhs(const PendulumParams& params,
                                  const ExplicitState& z, const Vector2& u) {
  const Real m_t = params.m_a + params.m_b;
  const Real qt = z.q[0] + z.q[1];
  const Vector2 w = detail::solve_mass_hat(params, z.q, z.p_hat);

  Vector2 grad_V;
  grad_V << params.g_bar * (m_t * params.l_a * std::cos(z.q[0]) +
                            params.m_b * params.l_b * std::cos(qt)),
      params.g_bar * params.m_b * params.l_b * std::cos(qt);

  // Only q^2 enters M_hat; dT/dq^2 = m_b l_a l_b sin(q^2) (w1^2 + w1 w2).
  Vector2 grad_T;
  grad_T << 0.0,
      params.m_b * params.l_a * params.l_b * std::sin(z.q[1]) *
          (w[0] * w[0] + w[0] * w[1]);

  ExplicitState dz;
  dz.q = w;
  dz.p_hat = -grad_V - grad_T + u;
  return dz;
}

/// Explicit representation bundled as callbacks over ExplicitState, for
/// callers that want a system object rather than the free functions.
struct ExplicitPendulum {
  PendulumParams params;
  std::function<Real(const ExplicitState&)> hamiltonian;
  std::function<ExplicitState(const ExplicitState&, const Vector2& u)> rhs;
  std::function<Matrix2(const Vector2& q)> mass_matrix;
};

inline ExplicitPendulum build_explicit(const PendulumParams& params) {
  detail::require_valid(params);
  ExplicitPendulum sys;
  sys.params = params;
  sys.hamiltonian = [params](const ExplicitState& z) {
    return explicit_hamiltonian(params, z);
  };
  sys.rhs = [params](const ExplicitState& z, const Vector2& u) {
    return explicit_rhs(params, z, u);
  };
  sys.mass_matrix = [params](const Vector2& q) {
    return mass_matrix_hat(params, q);
  };
  return sys;
}

/// Cotangent lift of the chart: the ambient momentum whose kinetic energy
/// and constrained motion match (q, p_hat); p = M Di(q) M_hat(q)^-1 p_hat.
/// Correctness rests on the identity M_hat = Di^T M Di.
inline Vector lift_momentum(const PendulumParams& params, const Vector2& q,
                            const Vector2& p_hat) {
  const Matrix Di = embedding_jacobian(params, q);
  const Vector2 qdot = detail::solve_mass_hat(params, q, p_hat);
  Vector rdot = Di * qdot;
  Vector p(4);
  p << params.m_a * rdot[0], params.m_a * rdot[1], params.m_b * rdot[2],
      params.m_b * rdot[3];
  return p;
}

/// Pullback p_hat = Di(q)^T p; left inverse of lift_momentum.
inline Vector2 pullback_momentum(const PendulumParams& params, const Vector2& q,
                                 const Vector& p) {
  return embedding_jacobian(params, q).transpose() * p;
}

/// Full ambient state from chart data.
inline State lift_state(const PendulumParams& params, const ExplicitState& z) {
  return State{embedding(params, z.q), lift_momentum(params, z.q, z.p_hat)};
}

namespace detail {

inline ExplicitState rk4_step(const PendulumParams& params,
                              const ExplicitState& z, const Vector2& u, Real h) {
  const ExplicitState k1 = explicit_rhs(params, z, u);
  ExplicitState z2{z.q + 0.5 * h * k1.q, z.p_hat + 0.5 * h * k1.p_hat};
  const ExplicitState k2 = explicit_rhs(params, z2, u);
  ExplicitState z3{z.q + 0.5 * h * k2.q, z.p_hat + 0.5 * h * k2.p_hat};
  const ExplicitState k3 = explicit_rhs(params, z3, u);
  ExplicitState z4{z.q + h * k3.q, z.p_hat + h * k3.p_hat};
  const ExplicitState k4 = explicit_rhs(params, z4, u);
  ExplicitState out;
  out.q = z.q + (h / 6.0) * (k1.q + 2.0 * k2.q + 2.0 * k3.q + k4.q);
  out.p_hat =
      z.p_hat + (h / 6.0) * (k1.p_hat + 2.0 * k2.p_hat + 2.0 * k3.p_hat + k4.p_hat);
  return out;
}

}  // namespace detail

/// Classical fixed-step RK4 reference on the explicit ODE with u = 0.
/// Returns the trajectory including the initial state (steps + 1 entries).
inline std::vector<ExplicitState> rk4_reference(const PendulumParams& params,
                                                const Vector2& q0,
                                                const Vector2& p_hat0,
                                                Real h_ref, int steps) {
  if (!(h_ref > 0.0)) throw Error("rk4_reference requires h_ref > 0");
  if (steps < 0) throw Error("rk4_reference requires steps >= 0");
  std::vector<ExplicitState> traj;
  traj.reserve(static_cast<std::size_t>(steps) + 1);
  traj.push_back(ExplicitState{q0, p_hat0});
  const Vector2 u = Vector2::Zero();
  for (int i = 0; i < steps; ++i) {
    traj.push_back(detail::rk4_step(params, traj.back(), u, h_ref));
  }
  return traj;
}

/// RK4 reference driven by a ZOH control source: the source is queried at
/// each sampling instant with the explicit output y = qdot, and the command
/// is held for h_zoh, which must be an integer multiple of h_ref. The
/// trajectory is logged once per sampling instant (zoh_intervals + 1
/// entries), matching the sampled-data loop's cadence.
inline std::vector<ExplicitState> rk4_reference_zoh(
    const PendulumParams& params, const Vector2& q0, const Vector2& p_hat0,
    Real h_ref, Real h_zoh, int zoh_intervals, const ControlSource& source) {
  if (!(h_ref > 0.0) || !(h_zoh > 0.0)) {
    throw Error("rk4_reference_zoh requires positive step sizes");
  }
  const Real ratio = h_zoh / h_ref;
  const int substeps = static_cast<int>(std::lround(ratio));
  if (substeps < 1 || std::abs(ratio - substeps) > 1e-9 * ratio) {
    throw Error("h_zoh must be an integer multiple of h_ref");
  }
  std::vector<ExplicitState> traj;
  traj.reserve(static_cast<std::size_t>(zoh_intervals) + 1);
  traj.push_back(ExplicitState{q0, p_hat0});
  for (int alpha = 0; alpha < zoh_intervals; ++alpha) {
    ExplicitState z = traj.back();
    const Vector2 y = detail::solve_mass_hat(params, z.q, z.p_hat);  // y = qdot
    const Vector u_full = source.next(alpha, y);
    if (u_full.size() != 2) {
      throw EvaluationError("control source must produce a 2-port command");
    }
    const Vector2 u(u_full[0], u_full[1]);
    for (int i = 0; i < substeps; ++i) {
      z = detail::rk4_step(params, z, u, h_ref);
    }
    traj.push_back(z);
  }
  return traj;
}

}  // namespace phdae
