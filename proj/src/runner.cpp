#include "phdae/runner.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "phdae/csv.hpp"
#include "phdae/diagnostics.hpp"
#include "phdae/double_pendulum.hpp"
#include "phdae/errors.hpp"

namespace phdae {

namespace {

namespace fs = std::filesystem;

IntegratorConfig integrator_config(const RunConfig& config, int log_every) {
  IntegratorConfig cfg;
  cfg.h = config.h;
  cfg.newton.tol = config.tol;
  cfg.newton.max_iter = config.max_iter;
  cfg.log_every = log_every;
  return cfg;
}

/// Chart-coordinate view of the configured initial condition; raw (r, p)
/// configs are pulled back through the chart (and must be on-manifold).
struct ChartInitial {
  Vector2 q;
  Vector2 p_hat;
};

ChartInitial chart_initial_of(const RunConfig& config) {
  if (config.chart_initial) {
    return ChartInitial{config.q0, config.p_hat0};
  }
  const Vector2 q = chart(config.params, config.r0);
  return ChartInitial{q, pullback_momentum(config.params, q, config.p0)};
}

/// Keeps every log_every-th record (plus the final one) of a trajectory
/// that was logged at full resolution.
Trajectory thin_trajectory(const Trajectory& full, int log_every) {
  if (log_every <= 1) return full;
  Trajectory out;
  out.h = full.h;
  out.log_every = log_every;
  const std::size_t count = full.records.size();
  for (std::size_t i = 0; i < count; ++i) {
    if (i % static_cast<std::size_t>(log_every) == 0 || i + 1 == count) {
      out.records.push_back(full.records[i]);
    }
  }
  return out;
}

std::ofstream open_text(const fs::path& path) {
  std::ofstream os(path);
  if (!os) {
    throw Error("cannot open " + path.string() + " for writing");
  }
  return os;
}

void require_control_mode(const RunConfig& config,
                          RunConfig::ControlMode required, const char* why) {
  if (config.control_mode != required) {
    throw ConfigError(why);
  }
}

int run_simulate(const RunConfig& config, const ImplicitPHSystem& sys,
                 const UnconstrainedMethod& method, const fs::path& out) {
  const State x0 = initial_state(config);
  const ControlSource source = control_source(config);
  const SimulationResult result = simulate(
      sys, method, x0, source, integrator_config(config, config.log_every),
      config.steps);
  write_trajectory_csv(out / "trajectory.csv", result.trajectory,
                       result.completed, result.failed_step, result.error);

  Real max_g = 0.0, max_f = 0.0;
  for (const TrajectoryRecord& rec : result.trajectory.records) {
    max_g = std::max(max_g, rec.g_residual);
    max_f = std::max(max_f, rec.f_residual);
  }
  auto report = open_text(out / "report.txt");
  report << "experiment: simulate\n"
         << "h = " << format_value(config.h) << "\n"
         << "steps requested = " << config.steps << "\n"
         << "records logged = " << result.trajectory.records.size() << "\n"
         << "H initial = " << format_value(result.trajectory.records.front().H)
         << "\n"
         << "H final = " << format_value(result.trajectory.records.back().H)
         << "\n"
         << "max |g| over logged records = " << format_value(max_g) << "\n"
         << "max |f| over logged records = " << format_value(max_f) << "\n";
  if (result.completed) {
    report << "status: ok\n";
    return 0;
  }
  report << "status: failed at step " << result.failed_step << ": "
         << result.error << "\n";
  return 3;
}

int run_order_study(const RunConfig& config, const ImplicitPHSystem& sys,
                    const UnconstrainedMethod& method, const fs::path& out) {
  require_control_mode(config, RunConfig::ControlMode::kZero,
                       "order_study requires control mode zero");
  const ChartInitial ci = chart_initial_of(config);
  const State x0 = lift_state(config.params, ExplicitState{ci.q, ci.p_hat});

  const PendulumParams params = config.params;
  const Real h_ref = config.h_ref;
  const ReferenceProducer reference = [params, ci, h_ref](Real T) {
    const int steps = static_cast<int>(std::lround(T / h_ref));
    if (steps < 1 || std::abs(T - steps * h_ref) > 1e-9 * T) {
      throw Error("h_ref must divide the horizon");
    }
    const std::vector<ExplicitState> traj =
        rk4_reference(params, ci.q, ci.p_hat, h_ref, steps);
    return lift_state(params, traj.back());
  };

  NewtonConfig newton;
  newton.tol = config.tol;
  newton.max_iter = config.max_iter;
  const OrderStudyReport report =
      order_study(sys, method, x0, zero_source(sys.m), config.horizon,
                  config.h_values, reference, newton);

  auto csv = open_text(out / "order_study.csv");
  csv << "h,global_error,observed_order\n";
  for (std::size_t i = 0; i < report.h_values.size(); ++i) {
    csv << format_value(report.h_values[i]) << ','
        << format_value(report.global_errors[i]) << ',';
    if (i == 0) {
      csv << "n/a";
    } else {
      csv << format_value(report.observed_orders[i - 1]);
    }
    csv << '\n';
  }

  auto txt = open_text(out / "report.txt");
  txt << "experiment: order_study\n"
      << "horizon = " << format_value(config.horizon) << "\n"
      << "reference: RK4 on the explicit model, h_ref = "
      << format_value(config.h_ref) << "\n";
  for (std::size_t i = 0; i < report.h_values.size(); ++i) {
    txt << "h = " << format_value(report.h_values[i])
        << "  global error = " << format_value(report.global_errors[i]);
    if (i > 0) {
      txt << "  observed order = " << format_value(report.observed_orders[i - 1]);
    }
    txt << "\n";
  }
  return 0;
}

int run_energy_study(const RunConfig& config, const ImplicitPHSystem& sys,
                     const UnconstrainedMethod& method, const fs::path& out) {
  require_control_mode(config, RunConfig::ControlMode::kZero,
                       "energy_study requires control mode zero");
  const State x0 = initial_state(config);
  const ControlSource source = zero_source(sys.m);

  const SimulationResult fine =
      simulate(sys, method, x0, source, integrator_config(config, 1), config.steps);
  write_trajectory_csv(out / "trajectory.csv",
                       thin_trajectory(fine.trajectory, config.log_every),
                       fine.completed, fine.failed_step, fine.error);
  if (!fine.completed) {
    auto report = open_text(out / "report.txt");
    report << "experiment: energy_study\n"
           << "status: failed at step " << fine.failed_step << ": " << fine.error
           << "\n";
    return 3;
  }
  const EnergyDriftReport stats = energy_stats(fine.trajectory);

  RunConfig coarse_config = config;
  coarse_config.h = 2.0 * config.h;
  const SimulationResult coarse = simulate(
      sys, method, x0, source, integrator_config(coarse_config, 1),
      config.steps / 2);

  auto report = open_text(out / "report.txt");
  report << "experiment: energy_study\n"
         << "h = " << format_value(config.h) << ", steps = " << config.steps
         << "\n"
         << "max |H - H0| = " << format_value(stats.max_deviation) << "\n"
         << "fitted slope of H vs t = " << format_value(stats.fitted_slope)
         << "\n"
         << "|slope| * T = "
         << format_value(std::abs(stats.fitted_slope) * config.steps * config.h)
         << "\n";
  if (coarse.completed) {
    const EnergyDriftReport coarse_stats = energy_stats(coarse.trajectory);
    report << "max |H - H0| at 2h = " << format_value(coarse_stats.max_deviation)
           << "\n"
           << "deviation ratio 2h/h = "
           << format_value(coarse_stats.max_deviation / stats.max_deviation)
           << "\n"
           << "status: ok\n";
    return 0;
  }
  report << "status: comparison run at 2h failed at step " << coarse.failed_step
         << ": " << coarse.error << "\n";
  return 3;
}

int run_symmetry_check(const RunConfig& config, const ImplicitPHSystem& sys,
                       const UnconstrainedMethod& method, const fs::path& out) {
  require_control_mode(config, RunConfig::ControlMode::kZero,
                       "symmetry_check requires control mode zero");
  const State x0 = initial_state(config);
  const SimulationResult forward = simulate(
      sys, method, x0, zero_source(sys.m),
      integrator_config(config, config.log_every), config.steps);
  write_trajectory_csv(out / "trajectory.csv", forward.trajectory,
                       forward.completed, forward.failed_step, forward.error);
  if (!forward.completed) {
    auto report = open_text(out / "report.txt");
    report << "experiment: symmetry_check\n"
           << "status: failed at step " << forward.failed_step << ": "
           << forward.error << "\n";
    return 3;
  }

  NewtonConfig newton;
  newton.tol = config.tol;
  newton.max_iter = config.max_iter;
  const Real roundtrip = symmetry_roundtrip(
      sys, method, x0, Vector::Zero(sys.m), config.h, config.steps, newton);

  auto report = open_text(out / "report.txt");
  report << "experiment: symmetry_check\n"
         << "h = " << format_value(config.h) << ", steps = " << config.steps
         << "\n"
         << "roundtrip error |x_final - x0| = " << format_value(roundtrip)
         << "\n"
         << "status: ok\n";
  return 0;
}

int run_dissipation_check(const RunConfig& config, const ImplicitPHSystem& sys,
                          const UnconstrainedMethod& method,
                          const fs::path& out) {
  require_control_mode(config, RunConfig::ControlMode::kDamping,
                       "dissipation_check requires control mode damping");
  const State x0 = initial_state(config);
  const SimulationResult result =
      simulate(sys, method, x0, control_source(config),
               integrator_config(config, 1), config.steps);
  write_trajectory_csv(out / "trajectory.csv",
                       thin_trajectory(result.trajectory, config.log_every),
                       result.completed, result.failed_step, result.error);
  if (!result.completed) {
    auto report = open_text(out / "report.txt");
    report << "experiment: dissipation_check\n"
           << "status: failed at step " << result.failed_step << ": "
           << result.error << "\n";
    return 3;
  }

  const DissipationReport verdict = dissipation_check(result.trajectory);
  auto report = open_text(out / "report.txt");
  report << "experiment: dissipation_check\n"
         << "h = " << format_value(config.h) << ", steps = " << config.steps
         << ", gain = " << format_value(config.gain) << "\n"
         << "monotone decrease (slack 1e-12): "
         << (verdict.monotone ? "yes" : "no") << "\n"
         << "max per-step H increase = " << format_value(verdict.max_increase)
         << "\n";
  if (!verdict.monotone) {
    report << "first violation at record " << verdict.first_violation << "\n";
  }
  report << "status: ok\n";
  return 0;
}

}  // namespace

State initial_state(const RunConfig& config) {
  if (config.chart_initial) {
    return lift_state(config.params, ExplicitState{config.q0, config.p_hat0});
  }
  return State{config.r0, config.p0};
}

ControlSource control_source(const RunConfig& config) {
  switch (config.control_mode) {
    case RunConfig::ControlMode::kZero:
      return zero_source(2);
    case RunConfig::ControlMode::kDamping: {
      DampingGain gain;
      gain.K = config.gain * Matrix::Identity(2, 2);
      return damping_source(gain);
    }
    case RunConfig::ControlMode::kOpenLoop:
      return sequence_source(read_input_rows(fs::path(config.input_file), 2));
  }
  throw Error("unreachable control mode");
}

int run(const RunConfig& config, const std::string& out_override) {
  const fs::path out = out_override.empty() ? fs::path(config.out_dir)
                                            : fs::path(out_override);
  fs::create_directories(out);

  const ImplicitPHSystem sys = build_implicit(config.params);
  const UnconstrainedMethod method = pendulum_method(config.params);

  switch (config.experiment) {
    case RunConfig::ExperimentMode::kSimulate:
      return run_simulate(config, sys, method, out);
    case RunConfig::ExperimentMode::kOrderStudy:
      return run_order_study(config, sys, method, out);
    case RunConfig::ExperimentMode::kEnergyStudy:
      return run_energy_study(config, sys, method, out);
    case RunConfig::ExperimentMode::kSymmetryCheck:
      return run_symmetry_check(config, sys, method, out);
    case RunConfig::ExperimentMode::kDissipationCheck:
      return run_dissipation_check(config, sys, method, out);
  }
  throw Error("unreachable experiment mode");
}

int run_file(const std::filesystem::path& config_path,
             const std::string& out_override, std::ostream& err) {
  try {
    const RunConfig config = load_config(config_path);
    validate_config(config);
    return run(config, out_override);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return 2;
  } catch (const InvalidStateError& e) {
    err << "config error: " << e.what() << '\n';
    return 2;
  } catch (const SolverError& e) {
    err << "solver error: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 3;
  }
}

}  // namespace phdae
