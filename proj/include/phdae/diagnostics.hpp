#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <sstream>
#include <vector>

#include <Eigen/Dense>

#include "phdae/control.hpp"
#include "phdae/errors.hpp"
#include "phdae/stepper.hpp"
#include "phdae/system.hpp"
#include "phdae/types.hpp"

namespace phdae {

/// Convergence measurements at a ladder of step sizes. observed_orders[i]
/// is log2(errors[i] / errors[i+1]); NaN when either error sits at rounding
/// level and the ratio is meaningless.
struct OrderStudyReport {
  std::vector<Real> h_values;
  std::vector<Real> global_errors;
  std::vector<Real> observed_orders;
};

/// Produces the reference ambient state at a requested horizon.
using ReferenceProducer = std::function<State(Real T)>;

namespace detail {

inline Real state_distance(const State& a, const State& b) {
  return std::max(inf_norm(a.r - b.r), inf_norm(a.p - b.p));
}

inline int steps_for(Real T, Real h) {
  const int steps = static_cast<int>(std::lround(T / h));
  if (steps < 1 || std::abs(T - steps * h) > 1e-9 * std::abs(T)) {
    std::ostringstream os;
    os << "step size " << h << " does not divide the horizon " << T;
    throw Error(os.str());
  }
  return steps;
}

}  // namespace detail

/// Global-error convergence study: integrates to the horizon T at each h,
/// measures the ambient-space distance to the reference state, and reports
/// log2 error ratios for adjacent step sizes. h_values must decrease by
/// exact factors of 2 and divide T.
inline OrderStudyReport order_study(const ImplicitPHSystem& sys,
                                    const UnconstrainedMethod& method,
                                    const State& x0, const ControlSource& source,
                                    Real T, const std::vector<Real>& h_values,
                                    const ReferenceProducer& reference,
                                    const NewtonConfig& newton = {}) {
  if (h_values.size() < 2) {
    throw Error("order_study requires at least two step sizes");
  }
  for (std::size_t i = 0; i + 1 < h_values.size(); ++i) {
    if (std::abs(h_values[i] - 2.0 * h_values[i + 1]) > 1e-12 * h_values[i]) {
      throw Error("order_study step sizes must halve at each rung");
    }
  }

  const State x_ref = reference(T);
  OrderStudyReport report;
  for (const Real h : h_values) {
    const int steps = detail::steps_for(T, h);
    IntegratorConfig cfg;
    cfg.h = h;
    cfg.newton = newton;
    cfg.log_every = steps;  // only the endpoints are needed
    const SimulationResult run = simulate(sys, method, x0, source, cfg, steps);
    if (!run.completed) {
      throw SolverError("order_study run failed at h = " + std::to_string(h) +
                            ": " + run.error,
                        0.0, run.failed_step);
    }
    report.h_values.push_back(h);
    report.global_errors.push_back(
        detail::state_distance(run.trajectory.records.back().state, x_ref));
  }
  constexpr Real rounding_floor = 1e-13;
  for (std::size_t i = 0; i + 1 < report.global_errors.size(); ++i) {
    const Real e0 = report.global_errors[i];
    const Real e1 = report.global_errors[i + 1];
    report.observed_orders.push_back(
        e0 > rounding_floor && e1 > rounding_floor
            ? std::log2(e0 / e1)
            : std::numeric_limits<Real>::quiet_NaN());
  }
  return report;
}

/// Forward `steps` of +h then `steps` of -h with the same held command;
/// returns the ambient distance back to the start. Zero (to solver
/// tolerance) for symmetric methods.
inline Real symmetry_roundtrip(const ImplicitPHSystem& sys,
                               const UnconstrainedMethod& method,
                               const State& x0, const Vector& u, Real h,
                               int steps, const NewtonConfig& newton = {}) {
  IntegratorConfig cfg;
  cfg.newton = newton;
  State x = x0;
  std::optional<Vector> warm;
  cfg.h = h;
  for (int i = 0; i < steps; ++i) {
    const StepResult s = constrained_step(sys, method, x, u, cfg, warm);
    x = s.state;
    warm = s.multipliers.nu;
  }
  cfg.h = -h;
  warm.reset();
  for (int i = 0; i < steps; ++i) {
    const StepResult s = constrained_step(sys, method, x, u, cfg, warm);
    x = s.state;
    warm = s.multipliers.nu;
  }
  return detail::state_distance(x, x0);
}

/// Symplecticity defect of the *unconstrained* one-step map at fixed u:
/// assembles the central-finite-difference Jacobian M of z = (r, p) and
/// returns the largest entry of |M^T J M - J|, with J the canonical block
/// matrix. Zero (up to FD error) exactly when the map is symplectic.
inline Real symplecticity_check(const ImplicitPHSystem& sys,
                                const UnconstrainedMethod& method,
                                const State& x, const Vector& u, Real h) {
  const int n = sys.n;
  const Real scale = std::max(inf_norm(x.r), inf_norm(x.p));
  const Real step = 1e-6 * (1.0 + scale);

  Matrix jac(2 * n, 2 * n);
  for (int j = 0; j < 2 * n; ++j) {
    State plus = x;
    State minus = x;
    if (j < n) {
      plus.r[j] += step;
      minus.r[j] -= step;
    } else {
      plus.p[j - n] += step;
      minus.p[j - n] -= step;
    }
    const State fp = method.step(sys, plus, u, h);
    const State fm = method.step(sys, minus, u, h);
    jac.col(j).head(n) = (fp.r - fm.r) / (2.0 * step);
    jac.col(j).tail(n) = (fp.p - fm.p) / (2.0 * step);
  }

  Matrix J = Matrix::Zero(2 * n, 2 * n);
  J.topRightCorner(n, n) = Matrix::Identity(n, n);
  J.bottomLeftCorner(n, n) = -Matrix::Identity(n, n);
  return (jac.transpose() * J * jac - J).cwiseAbs().maxCoeff();
}

/// Energy statistics of a zero-input run: the largest |H_alpha - H_0| and
/// the least-squares slope of H against t (secular-drift detector).
struct EnergyDriftReport {
  Real max_deviation = 0.0;
  Real fitted_slope = 0.0;
};

/// Computes the energy statistics from an already-logged trajectory.
inline EnergyDriftReport energy_stats(const Trajectory& traj) {
  if (traj.records.empty()) {
    throw Error("energy_stats requires a non-empty trajectory");
  }
  const auto& records = traj.records;
  const Real H0 = records.front().H;
  EnergyDriftReport report;
  Real t_sum = 0.0, H_sum = 0.0;
  for (const TrajectoryRecord& rec : records) {
    report.max_deviation = std::max(report.max_deviation, std::abs(rec.H - H0));
    t_sum += rec.t;
    H_sum += rec.H;
  }
  const Real count = static_cast<Real>(records.size());
  const Real t_mean = t_sum / count;
  const Real H_mean = H_sum / count;
  Real cov = 0.0, var = 0.0;
  for (const TrajectoryRecord& rec : records) {
    cov += (rec.t - t_mean) * (rec.H - H_mean);
    var += (rec.t - t_mean) * (rec.t - t_mean);
  }
  report.fitted_slope = var > 0.0 ? cov / var : 0.0;
  return report;
}

inline EnergyDriftReport energy_drift_study(const ImplicitPHSystem& sys,
                                            const UnconstrainedMethod& method,
                                            const State& x0, Real h, int steps,
                                            const NewtonConfig& newton = {}) {
  IntegratorConfig cfg;
  cfg.h = h;
  cfg.newton = newton;
  const SimulationResult run =
      simulate(sys, method, x0, zero_source(sys.m), cfg, steps);
  if (!run.completed) {
    throw SolverError("energy_drift_study run failed: " + run.error, 0.0,
                      run.failed_step);
  }
  return energy_stats(run.trajectory);
}

/// Verdict of the discrete dissipation inequality H_{alpha+1} <= H_alpha
/// (with 1e-12 absolute slack) over a logged trajectory.
struct DissipationReport {
  bool monotone = true;
  int first_violation = -1;  ///< record index of the first increase
  /// Largest H_{alpha+1} - H_alpha observed (most negative = steepest
  /// decay); 0 for trajectories with fewer than two records.
  Real max_increase = 0.0;
};

inline DissipationReport dissipation_check(const Trajectory& traj) {
  constexpr Real slack = 1e-12;
  DissipationReport report;
  if (traj.records.size() < 2) return report;
  report.max_increase = -std::numeric_limits<Real>::infinity();
  for (std::size_t a = 0; a + 1 < traj.records.size(); ++a) {
    const Real dH = traj.records[a + 1].H - traj.records[a].H;
    report.max_increase = std::max(report.max_increase, dH);
    if (dH > slack && report.monotone) {
      report.monotone = false;
      report.first_violation = static_cast<int>(a);
    }
  }
  return report;
}

}  // namespace phdae
