#include "phdae/csv.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "phdae/errors.hpp"

namespace phdae {

std::string format_value(Real value) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", value);
  return buf;
}

namespace {

void append_vector(std::ostream& os, const Vector& v) {
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    os << ',' << format_value(v[i]);
  }
}

void append_names(std::ostream& os, const char* stem, int count) {
  for (int i = 1; i <= count; ++i) {
    os << ',' << stem << i;
  }
}

}  // namespace

void write_trajectory_csv(std::ostream& os, const Trajectory& traj,
                          bool completed, int failed_step,
                          const std::string& error) {
  const int n = traj.records.empty() ? 0 : static_cast<int>(traj.records.front().state.r.size());
  const int k = traj.records.empty() ? 0 : static_cast<int>(traj.records.front().multipliers.nu.size());
  const int m = traj.records.empty() ? 0 : static_cast<int>(traj.records.front().y.size());

  os << "# h=" << format_value(traj.h) << " log_every=" << traj.log_every
     << '\n';
  os << "# multipliers, u, and newton_iters on each row belong to the step "
        "starting at that row's t\n";

  os << 't';
  append_names(os, "r", n);
  append_names(os, "p", n);
  append_names(os, "nu", k);
  append_names(os, "mu", k);
  os << ",H,g_res,f_res";
  append_names(os, "y", m);
  append_names(os, "u", m);
  os << ",newton_iters\n";

  for (const TrajectoryRecord& rec : traj.records) {
    os << format_value(rec.t);
    append_vector(os, rec.state.r);
    append_vector(os, rec.state.p);
    append_vector(os, rec.multipliers.nu);
    append_vector(os, rec.multipliers.mu);
    os << ',' << format_value(rec.H) << ',' << format_value(rec.g_residual)
       << ',' << format_value(rec.f_residual);
    append_vector(os, rec.y);
    append_vector(os, rec.u);
    os << ',' << rec.multipliers.newton_iters << '\n';
  }

  if (!completed) {
    os << "# simulation failed at step " << failed_step << ": " << error
       << '\n';
  }
}

void write_trajectory_csv(const std::filesystem::path& path,
                          const Trajectory& traj, bool completed,
                          int failed_step, const std::string& error) {
  std::ofstream os(path);
  if (!os) {
    throw Error("cannot open " + path.string() + " for writing");
  }
  write_trajectory_csv(os, traj, completed, failed_step, error);
}

namespace {

Real parse_number(const std::string& field, int line_no) {
  const char* first = field.data();
  const char* last = field.data() + field.size();
  while (first < last && (*first == ' ' || *first == '\t')) ++first;
  while (last > first && (last[-1] == ' ' || last[-1] == '\t')) --last;
  Real value = 0.0;
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc{} || ptr != last || first == last) {
    throw ConfigError("malformed number '" + field + "'", line_no);
  }
  return value;
}

}  // namespace

std::vector<Vector> read_input_rows(std::istream& is, int m) {
  std::vector<Vector> rows;
  std::string line;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    const std::size_t start = line.find_first_not_of(" \t\r");
    if (start == std::string::npos || line[start] == '#') continue;

    std::vector<std::string> fields;
    std::size_t pos = 0;
    while (true) {
      const std::size_t comma = line.find(',', pos);
      fields.push_back(line.substr(pos, comma - pos));
      if (comma == std::string::npos) break;
      pos = comma + 1;
    }
    if (static_cast<int>(fields.size()) != m) {
      std::ostringstream os;
      os << "expected " << m << " columns, found " << fields.size();
      throw ConfigError(os.str(), line_no);
    }
    Vector row(m);
    for (int i = 0; i < m; ++i) {
      row[i] = parse_number(fields[i], line_no);
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<Vector> read_input_rows(const std::filesystem::path& path, int m) {
  std::ifstream is(path);
  if (!is) {
    throw ConfigError("cannot open input file " + path.string());
  }
  return read_input_rows(is, m);
}

}  // namespace phdae
