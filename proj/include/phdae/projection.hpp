#pragma once

#include <cmath>
#include <optional>
#include <sstream>
#include <tuple>
#include <utility>

#include <Eigen/Dense>

#include "phdae/errors.hpp"
#include "phdae/split_methods.hpp"
#include "phdae/system.hpp"
#include "phdae/types.hpp"

namespace phdae {

/// Settings for the implicit multiplier solves.
struct NewtonConfig {
  Real tol = 1e-12;         ///< absolute tolerance on |g|_inf and |f|_inf
  int max_iter = 50;
  Real fd_step_scale = 1e-7;  ///< Jacobian FD step = scale * (1 + |nu|_inf)
};

/// Converged multipliers of one constrained step, with solver statistics.
struct MultiplierSolution {
  Vector nu;
  Vector mu;
  int newton_iters = 0;
  Real g_residual = 0.0;
  Real f_residual = 0.0;
};

/// Momentum shift p <- p - h G(r)^T lam; the first-order symplectic flow of
/// the constraint-force field at frozen r.
inline State projection_map(const ImplicitPHSystem& sys, const State& x,
                            const Vector& lam, Real h) {
  State out = x;
  if (h != 0.0 && lam.size() > 0) {
    out.p -= h * (sys.constraint_jacobian(x.r).transpose() * lam);
  }
  return out;
}

/// Result of the position-level (nu) solve: the converged multiplier and
/// the post-step state before the momentum half-projection.
struct PositionSolve {
  Vector nu;
  State x_mid;
  int iters = 0;
  Real g_residual = 0.0;
};

/// Finds nu such that the position reached by
///   method.step(projection_map(x, nu, h/2), u, h)
/// lies on g = 0, by Newton iteration on the k-dimensional residual with a
/// forward finite-difference Jacobian. Warm-started from the caller's
/// guess when given, otherwise from the continuous multipliers at x.
inline PositionSolve solve_position_multiplier(
    const ImplicitPHSystem& sys, const UnconstrainedMethod& method,
    const State& x, const Vector& u, Real h, const NewtonConfig& cfg,
    const std::optional<Vector>& warm_start = std::nullopt) {
  if (h == 0.0) {
    return PositionSolve{Vector::Zero(sys.k), method.step(sys, x, u, 0.0), 0, 0.0};
  }

  Vector nu = warm_start && warm_start->size() == sys.k
                  ? *warm_start
                  : continuous_multipliers(sys, x, u).lambda;

  const auto residual_of = [&](const Vector& trial) {
    const State mid = method.step(sys, projection_map(sys, x, trial, 0.5 * h), u, h);
    return std::make_pair(Vector(sys.constraint(mid.r)), mid);
  };

  auto [res, mid] = residual_of(nu);
  Real res_norm = inf_norm(res);
  const Real diverged = 1e6 * (1.0 + res_norm);

  for (int it = 1; it <= cfg.max_iter; ++it) {
    if (res_norm <= cfg.tol) {
      return PositionSolve{nu, mid, it - 1, res_norm};
    }

    const Real step = cfg.fd_step_scale * (1.0 + inf_norm(nu));
    Matrix jac(sys.k, sys.k);
    for (int j = 0; j < sys.k; ++j) {
      Vector trial = nu;
      trial[j] += step;
      jac.col(j) = (residual_of(trial).first - res) / step;
    }

    nu -= Eigen::PartialPivLU<Matrix>(jac).solve(res);
    std::tie(res, mid) = residual_of(nu);
    res_norm = inf_norm(res);
    if (!std::isfinite(res_norm) || res_norm > diverged) {
      throw SolverError(
          "position multiplier solve diverged; consider reducing the step size",
          res_norm, it);
    }
  }
  if (res_norm <= cfg.tol) {
    return PositionSolve{nu, mid, cfg.max_iter, res_norm};
  }
  std::ostringstream os;
  os << "position multiplier solve did not reach tolerance " << cfg.tol
     << " (residual " << res_norm << "); consider reducing the step size";
  throw SolverError(os.str(), res_norm, cfg.max_iter);
}

/// Result of the momentum-level (mu) solve: the converged multiplier and
/// the final on-manifold state.
struct MomentumSolve {
  Vector mu;
  State x_next;
  int iters = 0;
  Real f_residual = 0.0;
};

/// Finds mu with f(r+, p~ - (h/2) G(r+)^T mu) = 0. For separable systems f
/// is linear in p and one solve of (h/2) A mu = f(r+, p~) finishes the job;
/// otherwise Newton with the multiplier matrix as Jacobian.
inline MomentumSolve solve_momentum_multiplier(const ImplicitPHSystem& sys,
                                               const State& x_mid, Real h,
                                               const NewtonConfig& cfg) {
  if (h == 0.0) {
    return MomentumSolve{Vector::Zero(sys.k), x_mid, 0,
                         inf_norm(hidden_constraint(sys, x_mid))};
  }

  if (is_separable(sys)) {
    const Matrix A = multiplier_matrix(sys, x_mid);
    const Vector f = hidden_constraint(sys, x_mid);
    const Vector mu = Eigen::PartialPivLU<Matrix>(0.5 * h * A).solve(f);
    const State x_next = projection_map(sys, x_mid, mu, 0.5 * h);
    return MomentumSolve{mu, x_next, 1, inf_norm(hidden_constraint(sys, x_next))};
  }

  Vector mu = Vector::Zero(sys.k);
  State x_next = x_mid;
  Real res_norm = inf_norm(hidden_constraint(sys, x_next));
  for (int it = 1; it <= cfg.max_iter; ++it) {
    if (res_norm <= cfg.tol) {
      return MomentumSolve{mu, x_next, it - 1, res_norm};
    }
    const Matrix jac = -0.5 * h * multiplier_matrix(sys, x_next);
    mu -= Eigen::PartialPivLU<Matrix>(jac).solve(hidden_constraint(sys, x_next));
    x_next = projection_map(sys, x_mid, mu, 0.5 * h);
    res_norm = inf_norm(hidden_constraint(sys, x_next));
    if (!std::isfinite(res_norm)) {
      throw SolverError("momentum multiplier solve produced non-finite residual",
                        res_norm, it);
    }
  }
  if (res_norm <= cfg.tol) {
    return MomentumSolve{mu, x_next, cfg.max_iter, res_norm};
  }
  std::ostringstream os;
  os << "momentum multiplier solve did not reach tolerance " << cfg.tol
     << " (residual " << res_norm << "); consider reducing the step size";
  throw SolverError(os.str(), res_norm, cfg.max_iter);
}

}  // namespace phdae
