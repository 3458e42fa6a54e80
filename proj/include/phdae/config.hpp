#pragma once

#include <cmath>
#include <filesystem>
#include <string>
#include <vector>

#include "phdae/double_pendulum.hpp"
#include "phdae/types.hpp"

namespace phdae {

/// Parsed batch-run configuration. Sections: [system], [integrator],
/// [control], [initial], [experiment], [output]; every field below has the
/// default shown, so an empty config is a valid zero-input hanging-pendulum
/// simulation.
struct RunConfig {
  // [system]  name = double_pendulum; l_a/l_b/m_a/m_b/g_bar override Table
  // defaults.
  std::string system_name = "double_pendulum";
  PendulumParams params;

  // [integrator]
  Real h = 0.01;
  Real tol = 1e-12;
  int max_iter = 50;

  // [control]
  enum class ControlMode { kZero, kDamping, kOpenLoop };
  ControlMode control_mode = ControlMode::kZero;
  Real gain = 0.0;          ///< damping: K = gain * I
  std::string input_file;   ///< open_loop: CSV of u rows

  // [initial]  either chart coordinates (q, p_hat) or raw ambient (r, p);
  // specifying both families is a config error.
  bool chart_initial = true;
  Vector2 q0{-M_PI / 2.0, 0.0};
  Vector2 p_hat0{0.0, 0.0};
  Vector r0;
  Vector p0;

  // [experiment]
  enum class ExperimentMode {
    kSimulate,
    kOrderStudy,
    kEnergyStudy,
    kSymmetryCheck,
    kDissipationCheck,
  };
  ExperimentMode experiment = ExperimentMode::kSimulate;
  int steps = 1000;                               ///< all modes except order_study
  Real horizon = 1.0;                             ///< order_study: T [s]
  std::vector<Real> h_values{0.004, 0.002, 0.001};  ///< order_study ladder
  Real h_ref = 1e-5;                              ///< order_study reference step

  // [output]
  std::string out_dir = "out";
  int log_every = 1;
};

/// Parses the sectioned key=value text. Unknown sections or keys, malformed
/// numbers, duplicate keys, h = 0, and conflicting initial-condition
/// families all raise ConfigError with a 1-based line number where one is
/// known.
RunConfig parse_config(const std::string& text);

/// Reads and parses a config file.
RunConfig load_config(const std::filesystem::path& path);

/// Cross-field validation that needs the filesystem (e.g. the open-loop
/// input file must exist). parse_config already ran the in-memory checks.
void validate_config(const RunConfig& config);

}  // namespace phdae
