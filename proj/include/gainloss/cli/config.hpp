#ifndef GAINLOSS_CLI_CONFIG_HPP
#define GAINLOSS_CLI_CONFIG_HPP

#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "gainloss/errors.hpp"
#include "gainloss/model.hpp"

namespace gainloss::cli {

inline constexpr std::string_view kVersion = "0.1.0";

/// Canonical parameter names, as used by flags, sweeps and config files.
inline constexpr std::string_view kParamNames[] = {"g", "gamma-l", "gamma-g", "big-gamma-g"};

inline std::string canonical_param(std::string name) {
  for (auto& c : name) {
    if (c == '_') c = '-';
  }
  if (name == "coupling") name = "g";
  for (const auto n : kParamNames) {
    if (name == n) return name;
  }
  throw ConfigError("unknown parameter '" + name +
                    "' (expected g, gamma-l, gamma-g or big-gamma-g)");
}

inline double& param_ref(ModelParams& p, const std::string& name) {
  const std::string c = canonical_param(name);
  if (c == "g") return p.coupling;
  if (c == "gamma-l") return p.loss_l;
  if (c == "gamma-g") return p.loss_g;
  return p.gain_g;
}

inline double param_value(const ModelParams& p, const std::string& name) {
  ModelParams q = p;
  return param_ref(q, name);
}

struct SweepSpec {
  std::string param = "gamma-l";
  double min = 0.0;
  double max = 0.0;
  int count = 1;
  bool log = false;

  bool operator==(const SweepSpec&) const = default;
};

/// Parses name:min:max:count[:log].
inline SweepSpec parse_sweep(const std::string& text) {
  std::vector<std::string> parts;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ':')) parts.push_back(item);
  if (parts.size() != 4 && parts.size() != 5) {
    throw ConfigError("--sweep expects name:min:max:count[:log], got '" + text + "'");
  }
  SweepSpec s;
  s.param = canonical_param(parts[0]);
  auto number = [&](const std::string& v) {
    std::size_t used = 0;
    double x = 0.0;
    try {
      x = std::stod(v, &used);
    } catch (const std::exception&) {
      throw ConfigError("--sweep: '" + v + "' is not a number");
    }
    if (used != v.size() || !std::isfinite(x)) {
      throw ConfigError("--sweep: '" + v + "' is not a finite number");
    }
    return x;
  };
  s.min = number(parts[1]);
  s.max = number(parts[2]);
  const double count = number(parts[3]);
  if (count < 1 || count != std::floor(count) || count > 1e7) {
    throw ConfigError("--sweep: count must be a positive integer");
  }
  s.count = static_cast<int>(count);
  if (parts.size() == 5) {
    if (parts[4] != "log" && parts[4] != "lin") {
      throw ConfigError("--sweep: scale must be 'log' or 'lin'");
    }
    s.log = parts[4] == "log";
  }
  if (s.log && (s.min <= 0.0 || s.max <= 0.0)) {
    throw ConfigError("--sweep: log sweeps need positive bounds");
  }
  return s;
}

inline std::string to_string(const SweepSpec& s) {
  std::ostringstream o;
  o.precision(17);
  o << s.param << ':' << s.min << ':' << s.max << ':' << s.count << (s.log ? ":log" : "");
  return o.str();
}

inline std::vector<double> sweep_values(const SweepSpec& s) {
  std::vector<double> v(static_cast<std::size_t>(s.count));
  for (int i = 0; i < s.count; ++i) {
    const double f = s.count == 1 ? 0.0 : static_cast<double>(i) / (s.count - 1);
    v[i] = s.log ? s.min * std::pow(s.max / s.min, f) : s.min + (s.max - s.min) * f;
  }
  if (s.count > 1) v.back() = s.max;
  return v;
}

enum class Format { Csv, Json };

struct TimeSpec {
  /// Final time, in units of 1/g unless absolute is set.
  double t_max = 20.0;
  int samples = 201;
  bool absolute = false;
};

struct RunConfig {
  ModelParams params{1.0, 0.5, 0.0, 0.5};
  std::optional<SweepSpec> sweep;
  TimeSpec time;
  Format format = Format::Csv;
  std::string out;  ///< empty: standard output
  std::optional<std::string> preset;
  /// Points per axis of the (Gamma_G, gamma_G) grid in asymptotic-discord.
  int grid = 100;
};

/// Raw key=value settings, from a config file or from flags.
using Settings = std::map<std::string, std::string>;

inline constexpr std::string_view kSettingKeys[] = {
    "g",      "gamma-l", "gamma-g", "big-gamma-g",   "sweep", "t-max",
    "samples", "format", "out",     "absolute-time", "grid"};

/// Reads a key=value file. Blank lines and lines starting with '#' are
/// skipped; keys use the long flag names without dashes in front.
inline Settings read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  Settings s;
  std::string line;
  int lineno = 0;
  auto trim = [](std::string x) {
    const auto b = x.find_first_not_of(" \t\r");
    if (b == std::string::npos) return std::string();
    const auto e = x.find_last_not_of(" \t\r");
    return x.substr(b, e - b + 1);
  };
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(path + ":" + std::to_string(lineno) + ": expected key=value");
    }
    std::string key = trim(t.substr(0, eq));
    for (auto& c : key) {
      if (c == '_') c = '-';
    }
    bool known = false;
    for (const auto k : kSettingKeys) known = known || key == k;
    if (!known) throw ConfigError(path + ":" + std::to_string(lineno) + ": unknown key '" + key + "'");
    s[key] = trim(t.substr(eq + 1));
  }
  return s;
}

namespace detail {

inline double to_number(const std::string& key, const std::string& v) {
  std::size_t used = 0;
  double x = 0.0;
  try {
    x = std::stod(v, &used);
  } catch (const std::exception&) {
    throw ConfigError(key + ": '" + v + "' is not a number");
  }
  if (used != v.size() || !std::isfinite(x)) throw ConfigError(key + ": '" + v + "' is not finite");
  return x;
}

inline int to_count(const std::string& key, const std::string& v) {
  const double x = to_number(key, v);
  if (x < 1 || x != std::floor(x) || x > 1e8) throw ConfigError(key + " must be a positive integer");
  return static_cast<int>(x);
}

inline bool to_bool(const std::string& key, const std::string& v) {
  if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
  if (v == "0" || v == "false" || v == "no" || v == "off") return false;
  throw ConfigError(key + ": expected a boolean, got '" + v + "'");
}

}  // namespace detail

/// Overwrites the fields named in s.
inline void apply_settings(RunConfig& c, const Settings& s) {
  for (const auto& [key, value] : s) {
    if (key == "g" || key == "gamma-l" || key == "gamma-g" || key == "big-gamma-g") {
      param_ref(c.params, key) = detail::to_number(key, value);
    } else if (key == "sweep") {
      c.sweep = parse_sweep(value);
    } else if (key == "t-max") {
      c.time.t_max = detail::to_number(key, value);
    } else if (key == "samples") {
      c.time.samples = detail::to_count(key, value);
    } else if (key == "format") {
      if (value == "csv") {
        c.format = Format::Csv;
      } else if (value == "json") {
        c.format = Format::Json;
      } else {
        throw ConfigError("format must be csv or json");
      }
    } else if (key == "out") {
      c.out = value;
    } else if (key == "absolute-time") {
      c.time.absolute = detail::to_bool(key, value);
    } else if (key == "grid") {
      c.grid = detail::to_count(key, value);
    } else {
      throw ConfigError("unknown setting '" + key + "'");
    }
  }
}

inline void check_config(const RunConfig& c) {
  try {
    validate(c.params);
  } catch (const InvalidParameters& e) {
    throw ConfigError(e.what());
  }
  if (!(c.time.t_max >= 0.0) || !std::isfinite(c.time.t_max)) {
    throw ConfigError("t-max must be finite and >= 0");
  }
  if (c.time.samples < 1) throw ConfigError("samples must be >= 1");
}

}  // namespace gainloss::cli

#endif  // GAINLOSS_CLI_CONFIG_HPP
