#include "phdae/config.hpp"

#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include "phdae/errors.hpp"

namespace phdae {

namespace {

std::string trim(const std::string& s) {
  const std::size_t first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return "";
  const std::size_t last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

Real parse_real(const std::string& value, int line) {
  Real out = 0.0;
  const char* first = value.data();
  const char* last = value.data() + value.size();
  const auto [ptr, ec] = std::from_chars(first, last, out);
  if (ec != std::errc{} || ptr != last || first == last) {
    throw ConfigError("malformed number '" + value + "'", line);
  }
  return out;
}

int parse_int(const std::string& value, int line) {
  int out = 0;
  const char* first = value.data();
  const char* last = value.data() + value.size();
  const auto [ptr, ec] = std::from_chars(first, last, out);
  if (ec != std::errc{} || ptr != last || first == last) {
    throw ConfigError("malformed integer '" + value + "'", line);
  }
  return out;
}

std::vector<Real> parse_real_list(const std::string& value, int line) {
  std::vector<Real> out;
  std::size_t pos = 0;
  while (true) {
    const std::size_t comma = value.find(',', pos);
    out.push_back(parse_real(trim(value.substr(pos, comma - pos)), line));
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return out;
}

Vector parse_vector(const std::string& value, int line, int expected,
                    const char* key) {
  const std::vector<Real> list = parse_real_list(value, line);
  if (static_cast<int>(list.size()) != expected) {
    std::ostringstream os;
    os << key << " expects " << expected << " comma-separated values, found "
       << list.size();
    throw ConfigError(os.str(), line);
  }
  Vector out(expected);
  for (int i = 0; i < expected; ++i) out[i] = list[i];
  return out;
}

Real parse_positive(const std::string& value, int line, const char* key) {
  const Real out = parse_real(value, line);
  if (!(out > 0.0)) {
    throw ConfigError(std::string(key) + " must be positive", line);
  }
  return out;
}

}  // namespace

RunConfig parse_config(const std::string& text) {
  RunConfig config;

  std::set<std::string> seen_keys;
  std::string section;
  bool saw_chart_initial = false;
  bool saw_raw_initial = false;
  bool saw_r = false;
  bool saw_p = false;

  std::istringstream stream(text);
  std::string raw_line;
  int line_no = 0;
  while (std::getline(stream, raw_line)) {
    ++line_no;
    const std::string line = trim(raw_line);
    if (line.empty() || line[0] == '#') continue;

    if (line.front() == '[') {
      if (line.back() != ']') {
        throw ConfigError("malformed section header '" + line + "'", line_no);
      }
      section = trim(line.substr(1, line.size() - 2));
      static const std::set<std::string> known = {
          "system", "integrator", "control", "initial", "experiment", "output"};
      if (known.count(section) == 0) {
        throw ConfigError("unknown section [" + section + "]", line_no);
      }
      continue;
    }

    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("expected 'key = value', got '" + line + "'", line_no);
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError("empty key", line_no);
    if (value.empty()) throw ConfigError("empty value for '" + key + "'", line_no);
    if (section.empty()) {
      throw ConfigError("key '" + key + "' appears before any [section]", line_no);
    }
    if (!seen_keys.insert(section + "." + key).second) {
      throw ConfigError("duplicate key '" + key + "' in [" + section + "]",
                        line_no);
    }

    if (section == "system") {
      if (key == "name") {
        config.system_name = value;
      } else if (key == "l_a") {
        config.params.l_a = parse_positive(value, line_no, "l_a");
      } else if (key == "l_b") {
        config.params.l_b = parse_positive(value, line_no, "l_b");
      } else if (key == "m_a") {
        config.params.m_a = parse_positive(value, line_no, "m_a");
      } else if (key == "m_b") {
        config.params.m_b = parse_positive(value, line_no, "m_b");
      } else if (key == "g_bar") {
        config.params.g_bar = parse_positive(value, line_no, "g_bar");
      } else {
        throw ConfigError("unknown key '" + key + "' in [system]", line_no);
      }
    } else if (section == "integrator") {
      if (key == "h") {
        config.h = parse_positive(value, line_no, "h");
      } else if (key == "tol") {
        config.tol = parse_positive(value, line_no, "tol");
      } else if (key == "max_iter") {
        config.max_iter = parse_int(value, line_no);
        if (config.max_iter < 1) {
          throw ConfigError("max_iter must be at least 1", line_no);
        }
      } else {
        throw ConfigError("unknown key '" + key + "' in [integrator]", line_no);
      }
    } else if (section == "control") {
      if (key == "mode") {
        if (value == "zero") {
          config.control_mode = RunConfig::ControlMode::kZero;
        } else if (value == "damping") {
          config.control_mode = RunConfig::ControlMode::kDamping;
        } else if (value == "open_loop") {
          config.control_mode = RunConfig::ControlMode::kOpenLoop;
        } else {
          throw ConfigError(
              "control mode must be zero, damping, or open_loop; got '" + value +
                  "'",
              line_no);
        }
      } else if (key == "gain") {
        config.gain = parse_real(value, line_no);
        if (config.gain < 0.0) {
          throw ConfigError("gain must be non-negative", line_no);
        }
      } else if (key == "input_file") {
        config.input_file = value;
      } else {
        throw ConfigError("unknown key '" + key + "' in [control]", line_no);
      }
    } else if (section == "initial") {
      if (key == "q") {
        const Vector q = parse_vector(value, line_no, 2, "q");
        config.q0 = Vector2(q[0], q[1]);
        saw_chart_initial = true;
      } else if (key == "p_hat") {
        const Vector ph = parse_vector(value, line_no, 2, "p_hat");
        config.p_hat0 = Vector2(ph[0], ph[1]);
        saw_chart_initial = true;
      } else if (key == "r") {
        config.r0 = parse_vector(value, line_no, 4, "r");
        saw_raw_initial = true;
        saw_r = true;
      } else if (key == "p") {
        config.p0 = parse_vector(value, line_no, 4, "p");
        saw_raw_initial = true;
        saw_p = true;
      } else {
        throw ConfigError("unknown key '" + key + "' in [initial]", line_no);
      }
      if (saw_chart_initial && saw_raw_initial) {
        throw ConfigError(
            "conflicting initial conditions: give either q/p_hat or r/p, not "
            "both",
            line_no);
      }
    } else if (section == "experiment") {
      if (key == "mode") {
        if (value == "simulate") {
          config.experiment = RunConfig::ExperimentMode::kSimulate;
        } else if (value == "order_study") {
          config.experiment = RunConfig::ExperimentMode::kOrderStudy;
        } else if (value == "energy_study") {
          config.experiment = RunConfig::ExperimentMode::kEnergyStudy;
        } else if (value == "symmetry_check") {
          config.experiment = RunConfig::ExperimentMode::kSymmetryCheck;
        } else if (value == "dissipation_check") {
          config.experiment = RunConfig::ExperimentMode::kDissipationCheck;
        } else {
          throw ConfigError("unknown experiment mode '" + value + "'", line_no);
        }
      } else if (key == "steps") {
        config.steps = parse_int(value, line_no);
        if (config.steps < 0) {
          throw ConfigError("steps must be non-negative", line_no);
        }
      } else if (key == "horizon") {
        config.horizon = parse_positive(value, line_no, "horizon");
      } else if (key == "h_values") {
        config.h_values = parse_real_list(value, line_no);
        for (const Real h : config.h_values) {
          if (!(h > 0.0)) {
            throw ConfigError("h_values must all be positive", line_no);
          }
        }
      } else if (key == "h_ref") {
        config.h_ref = parse_positive(value, line_no, "h_ref");
      } else {
        throw ConfigError("unknown key '" + key + "' in [experiment]", line_no);
      }
    } else if (section == "output") {
      if (key == "dir") {
        config.out_dir = value;
      } else if (key == "log_every") {
        config.log_every = parse_int(value, line_no);
        if (config.log_every < 1) {
          throw ConfigError("log_every must be at least 1", line_no);
        }
      } else {
        throw ConfigError("unknown key '" + key + "' in [output]", line_no);
      }
    }
  }

  if (config.system_name != "double_pendulum") {
    throw ConfigError("unknown system '" + config.system_name +
                      "'; only double_pendulum is available");
  }
  if (saw_r != saw_p) {
    throw ConfigError("raw initial conditions require both r and p");
  }
  if (config.control_mode == RunConfig::ControlMode::kOpenLoop &&
      config.input_file.empty()) {
    throw ConfigError("open_loop control requires input_file");
  }
  if (saw_raw_initial) config.chart_initial = false;
  return config;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) {
    throw ConfigError("cannot open config file " + path.string());
  }
  std::ostringstream buffer;
  buffer << is.rdbuf();
  return parse_config(buffer.str());
}

void validate_config(const RunConfig& config) {
  if (config.control_mode == RunConfig::ControlMode::kOpenLoop &&
      !std::filesystem::exists(config.input_file)) {
    throw ConfigError("input file does not exist: " + config.input_file);
  }
}

}  // namespace phdae
