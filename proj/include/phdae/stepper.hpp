#pragma once

#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "phdae/control.hpp"
#include "phdae/errors.hpp"
#include "phdae/projection.hpp"
#include "phdae/split_methods.hpp"
#include "phdae/system.hpp"
#include "phdae/types.hpp"

namespace phdae {

/// Settings for a sampled-data run. h may be negative for reverse-time
/// integration; log_every thins the trajectory log.
struct IntegratorConfig {
  Real h = 0.01;
  NewtonConfig newton;
  int log_every = 1;
};

/// One constrained step: the post-step state, the converged multipliers,
/// the pre-step sampled output y (which fed the command u), and the energy
/// after the step.
struct StepResult {
  State state;
  MultiplierSolution multipliers;
  Vector y;
  Vector u;
  Real H = 0.0;
};

/// One logged sample. The multipliers, command, and Newton count belong to
/// the step that *starts* at this record (zeros on the final record, where
/// no step follows); y is the output sampled at this record's state.
struct TrajectoryRecord {
  Real t = 0.0;
  State state;
  MultiplierSolution multipliers;
  Vector y;
  Vector u;
  Real H = 0.0;
  Real g_residual = 0.0;
  Real f_residual = 0.0;
};

struct Trajectory {
  std::vector<TrajectoryRecord> records;
  Real h = 0.0;
  int log_every = 1;
};

/// Outcome of simulate: the (possibly partial) trajectory plus failure
/// context when a multiplier solve gave out mid-run.
struct SimulationResult {
  Trajectory trajectory;
  bool completed = true;
  int failed_step = -1;
  std::string error;
};

/// The constrained step Phi_{mu,h/2} . psi_{H,u,h} . Phi_{nu,h/2}: project,
/// run the unconstrained method with the held command, project again. The
/// returned state satisfies g = 0 and f = 0 to cfg.newton.tol.
inline StepResult constrained_step(
    const ImplicitPHSystem& sys, const UnconstrainedMethod& method,
    const State& x, const Vector& u, const IntegratorConfig& cfg,
    const std::optional<Vector>& warm_start = std::nullopt) {
  StepResult result;
  result.y = output(sys, x);
  result.u = u;

  const PositionSolve pos =
      solve_position_multiplier(sys, method, x, u, cfg.h, cfg.newton, warm_start);
  const MomentumSolve mom =
      solve_momentum_multiplier(sys, pos.x_mid, cfg.h, cfg.newton);

  result.state = mom.x_next;
  result.multipliers.nu = pos.nu;
  result.multipliers.mu = mom.mu;
  result.multipliers.newton_iters = pos.iters + mom.iters;
  result.multipliers.g_residual = pos.g_residual;
  result.multipliers.f_residual = mom.f_residual;
  result.H = energy(sys, result.state);
  return result;
}

/// Runs the ZOH sampled-data loop for `steps` constrained steps: sample
/// y_alpha, query u_alpha from the source, step, repeat. The trajectory
/// always contains the t=0 record; on a solver failure the partial
/// trajectory is returned with the failing step index and message.
inline SimulationResult simulate(const ImplicitPHSystem& sys,
                                 const UnconstrainedMethod& method,
                                 const State& x0, const ControlSource& source,
                                 const IntegratorConfig& cfg, int steps) {
  if (cfg.h == 0.0) throw Error("simulate requires a nonzero step size");
  if (cfg.log_every < 1) throw Error("log_every must be at least 1");
  if (steps < 0) throw Error("steps must be non-negative");

  {
    const Residuals res = residuals(sys, x0);
    if (res.g > cfg.newton.tol || res.f > cfg.newton.tol) {
      std::ostringstream os;
      os << "initial state is off the constraint manifold: |g| = " << res.g
         << ", |f| = " << res.f << " (tolerance " << cfg.newton.tol << ")";
      throw InvalidStateError(os.str());
    }
  }

  SimulationResult result;
  result.trajectory.h = cfg.h;
  result.trajectory.log_every = cfg.log_every;

  State x = x0;
  std::optional<Vector> warm;
  for (int alpha = 0; alpha <= steps; ++alpha) {
    const Vector y = output(sys, x);
    const Vector u = source.next(alpha, y);
    if (u.size() != sys.m) {
      throw EvaluationError("control source produced a command of wrong dimension");
    }

    const bool log_now = alpha % cfg.log_every == 0 || alpha == steps;
    TrajectoryRecord record;
    if (log_now) {
      record.t = alpha * cfg.h;
      record.state = x;
      record.y = y;
      record.u = u;
      record.H = energy(sys, x);
      const Residuals res = residuals(sys, x);
      record.g_residual = res.g;
      record.f_residual = res.f;
      record.multipliers.nu = Vector::Zero(sys.k);
      record.multipliers.mu = Vector::Zero(sys.k);
    }
    if (alpha == steps) {
      if (log_now) result.trajectory.records.push_back(std::move(record));
      break;
    }

    StepResult step;
    try {
      step = constrained_step(sys, method, x, u, cfg, warm);
    } catch (const SolverError& err) {
      if (log_now) result.trajectory.records.push_back(std::move(record));
      result.completed = false;
      result.failed_step = alpha;
      result.error = err.what();
      return result;
    }
    if (log_now) {
      record.multipliers = step.multipliers;
      result.trajectory.records.push_back(std::move(record));
    }
    x = step.state;
    warm = step.multipliers.nu;
  }
  return result;
}

/// Per-step sampled power-balance errors
///   e_alpha = (H_{alpha+1} - H_alpha) - h u_alpha . (y_alpha + y_{alpha+1})/2
/// (trapezoidal estimate of the supplied-energy integral). Requires a
/// trajectory logged every step.
inline std::vector<Real> power_balance_audit(const Trajectory& traj) {
  if (traj.log_every != 1) {
    throw Error("power_balance_audit requires a trajectory logged every step");
  }
  std::vector<Real> errors;
  if (traj.records.size() < 2) return errors;
  errors.reserve(traj.records.size() - 1);
  for (std::size_t a = 0; a + 1 < traj.records.size(); ++a) {
    const TrajectoryRecord& cur = traj.records[a];
    const TrajectoryRecord& nxt = traj.records[a + 1];
    const Real supplied = traj.h * cur.u.dot(0.5 * (cur.y + nxt.y));
    errors.push_back((nxt.H - cur.H) - supplied);
  }
  return errors;
}

}  // namespace phdae
