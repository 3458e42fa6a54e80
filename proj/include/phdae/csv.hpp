#pragma once

#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

#include "phdae/stepper.hpp"
#include "phdae/types.hpp"

namespace phdae {

/// Writes a trajectory as CSV: a '#' comment preamble, a header row naming
/// the columns (t, r1..rn, p1..pn, nu1..nuk, mu1..muk, H, g_res, f_res,
/// y1..ym, u1..um, newton_iters), then one data row per record. Floating
/// values are printed with 17 significant digits so they round-trip
/// exactly. When `completed` is false a failure footer comment is appended.
void write_trajectory_csv(std::ostream& os, const Trajectory& traj,
                          bool completed = true, int failed_step = -1,
                          const std::string& error = "");

void write_trajectory_csv(const std::filesystem::path& path,
                          const Trajectory& traj, bool completed = true,
                          int failed_step = -1, const std::string& error = "");

/// Reads an input-sequence CSV: one row per sample with exactly m
/// comma-separated numeric columns; blank lines and '#' comments are
/// skipped. Throws ConfigError with the 1-based line number on malformed
/// input.
std::vector<Vector> read_input_rows(std::istream& is, int m);

std::vector<Vector> read_input_rows(const std::filesystem::path& path, int m);

/// Formats a double with 17 significant digits ("%.17g").
std::string format_value(Real value);

}  // namespace phdae
