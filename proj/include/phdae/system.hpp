#pragma once

#include <functional>
#include <optional>
#include <sstream>
#include <vector>

#include <Eigen/Dense>

#include "phdae/errors.hpp"
#include "phdae/types.hpp"

namespace phdae {

/// An implicit (DAE-form) port-Hamiltonian system on T*R^n.
///
/// The dynamics are
///   rdot = grad_p H,   pdot = -grad_r H - G(r)^T lambda + U(r) u,
///   0    = g(r),       y    = U(r)^T grad_p H,
/// where G = dg/dr is the true constraint Jacobian (including any factor 2
/// coming from quadratic constraints). A system is *separable* when it
/// declares a constant inverse mass matrix and a potential, in which case
/// grad_p H(r,p) = mass_inverse * p and grad_r H depends on r only.
///
/// Instances are immutable after construction and safe to share across
/// threads; every operation below is a pure function of its inputs.
struct ImplicitPHSystem {
  int n = 0;  ///< ambient configuration dimension
  int k = 0;  ///< number of holonomic constraints
  int m = 0;  ///< number of input/output ports

  std::function<Real(const Vector& r, const Vector& p)> hamiltonian;
  std::function<Vector(const Vector& r, const Vector& p)> grad_r_H;
  std::function<Vector(const Vector& r, const Vector& p)> grad_p_H;

  /// Constant M^-1 for separable systems (fast path); must be SPD.
  std::optional<Matrix> mass_inverse;
  /// Potential energy V(r); empty when the system is not declared separable.
  std::function<Real(const Vector& r)> potential;

  std::function<Vector(const Vector& r)> constraint;          ///< g : R^n -> R^k
  std::function<Matrix(const Vector& r)> constraint_jacobian;  ///< G(r), k x n
  std::function<Matrix(const Vector& r)> input_map;            ///< U(r), n x m
};

inline bool is_separable(const ImplicitPHSystem& sys) {
  return sys.mass_inverse.has_value() && static_cast<bool>(sys.potential);
}

namespace detail {

inline void check_dim(const Vector& v, int expected, const char* what) {
  if (v.size() != expected) {
    std::ostringstream os;
    os << what << " has dimension " << v.size() << ", expected " << expected;
    throw EvaluationError(os.str());
  }
}

inline void check_dims(const Matrix& a, int rows, int cols, const char* what) {
  if (a.rows() != rows || a.cols() != cols) {
    std::ostringstream os;
    os << what << " is " << a.rows() << "x" << a.cols() << ", expected "
       << rows << "x" << cols;
    throw EvaluationError(os.str());
  }
}

}  // namespace detail

/// Total energy H(r,p).
inline Real energy(const ImplicitPHSystem& sys, const State& x) {
  const Real H = sys.hamiltonian(x.r, x.p);
  if (!std::isfinite(H)) {
    std::ostringstream os;
    os << "non-finite Hamiltonian at r = [" << x.r.transpose() << "], p = ["
       << x.p.transpose() << "]";
    throw EvaluationError(os.str());
  }
  return H;
}

/// Hidden (velocity-level) constraints f(r,p) = G(r) grad_p H(r,p).
inline Vector hidden_constraint(const ImplicitPHSystem& sys, const State& x) {
  const Matrix G = sys.constraint_jacobian(x.r);
  detail::check_dims(G, sys.k, sys.n, "constraint Jacobian");
  return G * sys.grad_p_H(x.r, x.p);
}

/// Port output y = U(r)^T grad_p H(r,p).
inline Vector output(const ImplicitPHSystem& sys, const State& x) {
  const Matrix U = sys.input_map(x.r);
  detail::check_dims(U, sys.n, sys.m, "input map");
  return U.transpose() * sys.grad_p_H(x.r, x.p);
}

/// Hessian of H in p: exact M^-1 for separable systems, otherwise central
/// differences of grad_p_H with step 1e-5 * (1 + |p|_inf), symmetrized.
inline Matrix momentum_hessian(const ImplicitPHSystem& sys, const State& x) {
  if (sys.mass_inverse) return *sys.mass_inverse;
  const Real step = 1e-5 * (1.0 + inf_norm(x.p));
  Matrix hess(sys.n, sys.n);
  Vector p = x.p;
  for (int j = 0; j < sys.n; ++j) {
    const Real pj = p[j];
    p[j] = pj + step;
    const Vector plus = sys.grad_p_H(x.r, p);
    p[j] = pj - step;
    const Vector minus = sys.grad_p_H(x.r, p);
    p[j] = pj;
    hess.col(j) = (plus - minus) / (2.0 * step);
  }
  return 0.5 * (hess + hess.transpose());
}

/// The k x k matrix A(r,p) = G H_pp G^T that determines the Lagrange
/// multipliers. Throws AssumptionError when A is singular to tolerance
/// (condition estimate above 1e12).
inline Matrix multiplier_matrix(const ImplicitPHSystem& sys, const State& x) {
  const Matrix G = sys.constraint_jacobian(x.r);
  detail::check_dims(G, sys.k, sys.n, "constraint Jacobian");
  const Matrix A = G * momentum_hessian(sys, x) * G.transpose();
  if (sys.k > 0) {
    Eigen::JacobiSVD<Matrix> svd(A);
    const auto& sv = svd.singularValues();
    if (sv[0] == 0.0 || sv[sv.size() - 1] <= sv[0] * 1e-12) {
      throw AssumptionError(
          "multiplier matrix G H_pp G^T is singular to tolerance");
    }
  }
  return A;
}

/// Lagrange multipliers of the continuous dynamics under input u, obtained
/// from A lambda = X_{H,u}(f): the r-part of the directional derivative is
/// taken by central differences of f, the p-part uses the exact H_pp.
inline Multipliers continuous_multipliers(const ImplicitPHSystem& sys,
                                          const State& x, const Vector& u) {
  detail::check_dim(u, sys.m, "input");
  if (sys.k == 0) return Multipliers{Vector(0)};

  const Matrix G = sys.constraint_jacobian(x.r);
  const Matrix A = multiplier_matrix(sys, x);
  const Vector v = sys.grad_p_H(x.r, x.p);

  // d/dr f along v, by central differences of f(., p).
  const Real vnorm = inf_norm(v);
  Vector r_part = Vector::Zero(sys.k);
  if (vnorm > 0.0) {
    const Real step = 1e-6 * (1.0 + inf_norm(x.r)) / vnorm;
    const Vector f_plus =
        sys.constraint_jacobian(x.r + step * v) * sys.grad_p_H(x.r + step * v, x.p);
    const Vector f_minus =
        sys.constraint_jacobian(x.r - step * v) * sys.grad_p_H(x.r - step * v, x.p);
    r_part = (f_plus - f_minus) / (2.0 * step);
    if (!r_part.allFinite()) {
      throw EvaluationError("finite-difference derivative of f is non-finite");
    }
  }

  // d/dp f along pdot = -grad_r H + U u, using the exact momentum Hessian.
  const Vector pdot = -sys.grad_r_H(x.r, x.p) + sys.input_map(x.r) * u;
  const Vector p_part = G * (momentum_hessian(sys, x) * pdot);

  Multipliers out;
  out.lambda = Eigen::PartialPivLU<Matrix>(A).solve(r_part + p_part);
  return out;
}

/// Constraint residuals (|g|_inf, |f|_inf) of a state.
struct Residuals {
  Real g;
  Real f;
};

inline Residuals residuals(const ImplicitPHSystem& sys, const State& x) {
  return Residuals{inf_norm(sys.constraint(x.r)),
                   inf_norm(hidden_constraint(sys, x))};
}

inline bool on_manifold(const ImplicitPHSystem& sys, const State& x,
                        Real tol_g, Real tol_f) {
  const Residuals res = residuals(sys, x);
  return res.g <= tol_g && res.f <= tol_f;
}

/// Per-sample verdicts of the standing assumptions: full rank of G(r) and
/// positive definiteness of the momentum Hessian.
struct AssumptionReport {
  struct Entry {
    int sample;
    int rank;
    bool rank_ok;
    bool spd_ok;
  };
  std::vector<Entry> entries;
  bool all_ok = true;
};

/// Checks rank(G) = k (singular values above 1e-10 relative) and a
/// Cholesky-style SPD test of H_pp at each sample. Failures are reported,
/// not thrown.
inline AssumptionReport check_assumptions(const ImplicitPHSystem& sys,
                                          const std::vector<State>& samples) {
  if (samples.empty()) {
    throw EvaluationError("check_assumptions requires at least one sample");
  }
  AssumptionReport report;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const State& x = samples[i];
    const Matrix G = sys.constraint_jacobian(x.r);
    int rank = 0;
    if (sys.k > 0) {
      Eigen::JacobiSVD<Matrix> svd(G);
      const auto& sv = svd.singularValues();
      for (int j = 0; j < sv.size(); ++j) {
        if (sv[j] > 1e-10 * sv[0]) ++rank;
      }
    }
    const Matrix hess = momentum_hessian(sys, x);
    const bool spd_ok =
        Eigen::LLT<Matrix>(hess).info() == Eigen::Success;
    const bool rank_ok = rank == sys.k;
    report.entries.push_back({static_cast<int>(i), rank, rank_ok, spd_ok});
    if (!rank_ok || !spd_ok) report.all_ok = false;
  }
  return report;
}

/// Max relative deviation between constraint_jacobian and a central finite
/// difference of constraint over the given positions.
inline Real max_jacobian_fd_error(const ImplicitPHSystem& sys,
                                  const std::vector<Vector>& positions) {
  Real worst = 0.0;
  for (const Vector& r : positions) {
    const Matrix G = sys.constraint_jacobian(r);
    const Real step = 1e-6 * (1.0 + inf_norm(r));
    Matrix fd(sys.k, sys.n);
    Vector rr = r;
    for (int j = 0; j < sys.n; ++j) {
      const Real rj = rr[j];
      rr[j] = rj + step;
      const Vector plus = sys.constraint(rr);
      rr[j] = rj - step;
      const Vector minus = sys.constraint(rr);
      rr[j] = rj;
      fd.col(j) = (plus - minus) / (2.0 * step);
    }
    const Real scale = std::max(1.0, G.cwiseAbs().maxCoeff());
    worst = std::max(worst, (G - fd).cwiseAbs().maxCoeff() / scale);
  }
  return worst;
}

}  // namespace phdae
