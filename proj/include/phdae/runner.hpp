#pragma once

#include <filesystem>
#include <ostream>
#include <string>

#include "phdae/config.hpp"
#include "phdae/control.hpp"
#include "phdae/stepper.hpp"
#include "phdae/types.hpp"

namespace phdae {

/// Ambient initial state from the config: chart coordinates are lifted
/// through the embedding and the momentum lift, raw (r, p) pass through
/// unchanged.
State initial_state(const RunConfig& config);

/// Control source from the config ([control] section).
ControlSource control_source(const RunConfig& config);

/// Executes the configured experiment and writes its artifacts (CSV files
/// and report.txt) under the output directory (out_override wins when
/// non-empty). Returns 0 on success and 3 when the solver failed mid-run
/// (partial outputs are still written). Throws ConfigError for invalid
/// configurations or inputs.
int run(const RunConfig& config, const std::string& out_override = "");

/// CLI entry: loads + validates + runs the config, printing diagnostics to
/// `err`. Maps errors to exit codes: 0 success, 2 config error, 3 solver
/// or runtime failure.
int run_file(const std::filesystem::path& config_path,
             const std::string& out_override, std::ostream& err);

}  // namespace phdae
