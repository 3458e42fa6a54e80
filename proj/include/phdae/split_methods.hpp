#pragma once

#include <algorithm>
#include <functional>
#include <limits>
#include <utility>

#include "phdae/errors.hpp"
#include "phdae/system.hpp"
#include "phdae/types.hpp"

namespace phdae {

/// A one-step map for the unconstrained part of the dynamics, together with
/// the structural facts the diagnostics rely on. `step` accepts a signed
/// step size; `inverse_step`, when non-null, solves step(x, u, h) = y for x
/// in closed form (the adjoint combinator falls back to a fixed-point solve
/// otherwise).
struct UnconstrainedMethod {
  using StepFn =
      std::function<State(const ImplicitPHSystem&, const State&, const Vector&, Real)>;

  StepFn step;
  StepFn inverse_step;  ///< may be empty
  int declared_order = 1;
  bool is_symmetric = false;
  bool symplectic_at_zero_input = false;
};

namespace detail {

inline void require_separable(const ImplicitPHSystem& sys, const char* op) {
  if (!is_separable(sys)) {
    throw UnsupportedError(std::string(op) +
                           " requires a separable system "
                           "(constant mass_inverse and a declared potential)");
  }
}

}  // namespace detail

/// Exact flow of the potential-plus-input field at frozen r:
/// p <- p + h (-grad V(r) + U(r) u). For a separable system grad_r H is
/// exactly grad V, independent of p.
inline State kick(const ImplicitPHSystem& sys, const State& x, const Vector& u,
                  Real h) {
  detail::require_separable(sys, "kick");
  State out = x;
  out.p += h * (-sys.grad_r_H(x.r, x.p) + sys.input_map(x.r) * u);
  return out;
}

/// Exact flow of the kinetic field: r <- r + h M^-1 p.
inline State drift(const ImplicitPHSystem& sys, const State& x, Real h) {
  detail::require_separable(sys, "drift");
  State out = x;
  out.r += h * (*sys.mass_inverse * x.p);
  return out;
}

/// Strang composition kick(h/2) . drift(h) . kick(h/2): second order,
/// symmetric, symplectic when u = 0 (the u-kick is generally not the flow
/// of a Hamiltonian field).
inline UnconstrainedMethod stormer_verlet(const ImplicitPHSystem& sys) {
  detail::require_separable(sys, "stormer_verlet");
  UnconstrainedMethod method;
  method.step = [](const ImplicitPHSystem& s, const State& x, const Vector& u,
                   Real h) {
    return kick(s, drift(s, kick(s, x, u, 0.5 * h), h), u, 0.5 * h);
  };
  // Symmetric, so the inverse of the h-step is the (-h)-step.
  method.inverse_step = [step = method.step](const ImplicitPHSystem& s,
                                             const State& y, const Vector& u,
                                             Real h) { return step(s, y, u, -h); };
  method.declared_order = 2;
  method.is_symmetric = true;
  method.symplectic_at_zero_input = true;
  return method;
}

namespace detail {

/// Solves method.step(x, u, h) = y for x by damped fixed-point iteration
/// x <- x + relax (y - step(x)), halving the relaxation whenever the
/// residual fails to decrease. Used only when no closed-form inverse exists.
inline State invert_step(const UnconstrainedMethod::StepFn& step,
                         const ImplicitPHSystem& sys, const State& y,
                         const Vector& u, Real h) {
  constexpr Real tol = 1e-12;
  constexpr int max_iter = 100;

  // A step of -h from y lands O(h^2) from the solution.
  State x = step(sys, y, u, -h);
  Real relax = 1.0;
  Real best = std::numeric_limits<Real>::infinity();
  for (int it = 0; it < max_iter; ++it) {
    const State image = step(sys, x, u, h);
    const Vector dr = y.r - image.r;
    const Vector dp = y.p - image.p;
    const Real residual = std::max(inf_norm(dr), inf_norm(dp));
    if (residual <= tol) return x;
    if (residual < best) {
      best = residual;
    } else {
      relax *= 0.5;
      if (relax < 1e-8) break;
    }
    x.r += relax * dr;
    x.p += relax * dp;
  }
  throw SolverError("fixed-point inversion of the one-step map did not converge",
                    best, max_iter);
}

}  // namespace detail

/// Adjoint method psi*_h = (psi_{-h})^-1. Preserves order, symmetry, and
/// zero-input symplecticity; for a symmetric method it reproduces the
/// original map.
inline UnconstrainedMethod adjoint(const UnconstrainedMethod& method) {
  UnconstrainedMethod out;
  if (method.inverse_step) {
    out.step = [inv = method.inverse_step](const ImplicitPHSystem& s,
                                           const State& x, const Vector& u,
                                           Real h) { return inv(s, x, u, -h); };
  } else {
    out.step = [fwd = method.step](const ImplicitPHSystem& s, const State& x,
                                   const Vector& u, Real h) {
      return detail::invert_step(fwd, s, x, u, -h);
    };
  }
  // (psi*_h)^-1 = psi_{-h}, available in closed form from the original step.
  out.inverse_step = [fwd = method.step](const ImplicitPHSystem& s,
                                         const State& y, const Vector& u,
                                         Real h) { return fwd(s, y, u, -h); };
  out.declared_order = method.declared_order;
  out.is_symmetric = method.is_symmetric;
  out.symplectic_at_zero_input = method.symplectic_at_zero_input;
  return out;
}

/// Symmetric composition Psi_h = psi_{h/2} . psi*_{h/2}; raises the order
/// to at least the next even integer.
inline UnconstrainedMethod symmetrize(const UnconstrainedMethod& method) {
  UnconstrainedMethod out;
  const UnconstrainedMethod adj = adjoint(method);
  out.step = [fwd = method.step, adj_step = adj.step](
                 const ImplicitPHSystem& s, const State& x, const Vector& u,
                 Real h) { return fwd(s, adj_step(s, x, u, 0.5 * h), u, 0.5 * h); };
  out.inverse_step = [step = out.step](const ImplicitPHSystem& s, const State& y,
                                       const Vector& u, Real h) {
    return step(s, y, u, -h);
  };
  const int even_order = method.declared_order + (method.declared_order % 2);
  out.declared_order = std::max(even_order, 2);
  out.is_symmetric = true;
  out.symplectic_at_zero_input = method.symplectic_at_zero_input;
  return out;
}

}  // namespace phdae
