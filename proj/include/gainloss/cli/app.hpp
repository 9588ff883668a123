#ifndef GAINLOSS_CLI_APP_HPP
#define GAINLOSS_CLI_APP_HPP

#include <fstream>
#include <iostream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "gainloss/cli/commands.hpp"
#include "gainloss/cli/config.hpp"
#include "gainloss/cli/output.hpp"
#include "gainloss/cli/presets.hpp"
#include "gainloss/errors.hpp"

namespace gainloss::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitConfig = 1,
  kExitNumerical = 2,
  kExitOracle = 3,
};

/// Flag values as given on the command line; unset flags stay empty.
struct Flags {
  std::optional<double> g, gamma_l, gamma_g, big_gamma_g, t_max;
  std::optional<int> samples, grid;
  std::optional<std::string> sweep, format, out, config;
  bool absolute_time = false;

  Settings settings() const {
    Settings s;
    auto put = [&s](const char* key, const auto& v) {
      if (v) {
        std::ostringstream o;
        o.precision(17);
        o << *v;
        s[key] = o.str();
      }
    };
    put("g", g);
    put("gamma-l", gamma_l);
    put("gamma-g", gamma_g);
    put("big-gamma-g", big_gamma_g);
    put("t-max", t_max);
    put("samples", samples);
    put("grid", grid);
    put("sweep", sweep);
    put("format", format);
    put("out", out);
    if (absolute_time) s["absolute-time"] = "true";
    return s;
  }
};

inline void add_common_options(CLI::App& sub, Flags& f) {
  sub.add_option("--g", f.g, "Coupling rate g");
  sub.add_option("--gamma-l", f.gamma_l, "Loss rate on mode L");
  sub.add_option("--gamma-g", f.gamma_g, "Loss rate on mode G");
  sub.add_option("--big-gamma-g", f.big_gamma_g, "Gain rate on mode G");
  sub.add_option("--sweep", f.sweep, "Parameter sweep name:min:max:count[:log]");
  sub.add_option("--t-max", f.t_max, "Final time (units of 1/g unless --absolute-time)");
  sub.add_option("--samples", f.samples, "Number of time samples");
  sub.add_option("--format", f.format, "Output format")->check(CLI::IsMember({"csv", "json"}));
  sub.add_option("--out", f.out, "Output file (default: standard output)");
  sub.add_option("--config", f.config, "key=value config file; flags take precedence");
  sub.add_flag("--absolute-time", f.absolute_time, "Interpret times in absolute units");
}

namespace detail {

/// Preset defaults, then the config file, then flags.
inline RunConfig build_config(const Flags& f, const Preset* preset) {
  RunConfig c;
  if (preset) {
    c.preset = preset->name;
    c.params = preset->base;
    c.sweep = preset->sweep;
    c.time = preset->time;
    c.grid = preset->grid;
  }
  if (f.config) apply_settings(c, read_config_file(*f.config));
  apply_settings(c, f.settings());
  return c;
}

/// Parameter overrides from the config file and flags, applied to each
/// series of a multi-series preset.
inline Settings param_overrides(const Flags& f) {
  Settings all;
  if (f.config) all = read_config_file(*f.config);
  for (const auto& [k, v] : f.settings()) all[k] = v;
  Settings only;
  for (const auto n : kParamNames) {
    const auto it = all.find(std::string(n));
    if (it != all.end()) only[it->first] = it->second;
  }
  return only;
}

inline void emit(const Table& t, const RunConfig& c, std::ostream& out) {
  const std::string stamp = rfc3339_now();
  auto write = [&](std::ostream& os) {
    if (c.format == Format::Json) {
      write_json(os, t, stamp);
    } else {
      write_csv(os, t, stamp);
    }
  };
  if (c.out.empty()) {
    write(out);
    return;
  }
  std::ofstream file(c.out);
  if (!file) throw ConfigError("cannot open output file '" + c.out + "'");
  write(file);
  if (!file) throw ConfigError("failed writing '" + c.out + "'");
}

inline Table run_command(const std::string& command, const RunConfig& c, const Flags& f,
                         const Preset* preset) {
  if (command == "spectrum") return cmd_spectrum(c);
  if (command == "steady") return cmd_steady(c);
  if (command == "asymptotic-discord") return cmd_asymptotic_discord(c);
  if (command == "evolve") {
    if (preset && !preset->series.empty() && !f.sweep) {
      std::vector<SeriesSpec> series = preset->series;
      const Settings overrides = param_overrides(f);
      for (auto& s : series) {
        RunConfig tmp;
        tmp.params = s.params;
        apply_settings(tmp, overrides);
        s.params = tmp.params;
      }
      return evolve_series(c, series);
    }
    return cmd_evolve(c);
  }
  throw ConfigError("unknown command '" + command + "'");
}

}  // namespace detail

/// Runs the command line and returns the process exit code.
inline int run(int argc, const char* const* argv, std::ostream& out = std::cout,
               std::ostream& err = std::cerr) {
  CLI::App app{"Gain-loss dimer: spectra, correlation dynamics and stationary states"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kVersion));

  Flags f;
  std::string preset_name;
  OracleOptionsCli oracle_opt;
  bool corrupt = false;

  struct Verb {
    const char* name;
    const char* help;
  };
  const Verb verbs[] = {
      {"spectrum", "Mean-field eigenvalues and regime, at a point or along a sweep"},
      {"evolve", "Correlation dynamics from the vacuum"},
      {"steady", "Stationary correlations"},
      {"asymptotic-discord", "Long-time discord on the PT line over (Gamma_G, gamma_G)"},
  };
  for (const auto& v : verbs) {
    CLI::App* sub = app.add_subcommand(v.name, v.help);
    add_common_options(*sub, f);
    if (std::string(v.name) == "asymptotic-discord") {
      sub->add_option("--grid", f.grid, "Points per grid axis");
    }
  }
  CLI::App* preset = app.add_subcommand("preset", "Reproduce a figure data set");
  preset->add_option("name", preset_name, "fig2, fig4, fig6, fig7 or fig8")->required();
  add_common_options(*preset, f);
  preset->add_option("--grid", f.grid, "Points per grid axis (fig4)");

  CLI::App* oracle = app.add_subcommand("oracle-check", "Cross-check against the Fock-space solver");
  oracle->add_option("--cutoff", oracle_opt.cutoff, "Fock cutoff per mode");
  oracle->add_flag("--corrupt-diffusion", corrupt, "Fault injection: perturb the diffusion");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (oracle->parsed()) {
      if (corrupt) oracle_opt.diffusion_scale = 1.05;
      const auto checks = cmd_oracle_check(oracle_opt);
      bool ok = true;
      for (const auto& c : checks) {
        out << (c.passed ? "PASS " : "FAIL ") << c.name << " max_deviation="
            << format_double(c.deviation) << " tolerance=" << format_double(c.tolerance);
        if (!c.reason.empty()) out << " reason=\"" << c.reason << '"';
        out << '\n';
        ok = ok && c.passed;
      }
      return ok ? kExitOk : kExitOracle;
    }

    std::string command;
    const Preset* p = nullptr;
    if (preset->parsed()) {
      p = &find_preset(preset_name);
      command = p->command;
    } else {
      for (const auto& v : verbs) {
        if (app.got_subcommand(v.name)) command = v.name;
      }
    }
    const RunConfig c = detail::build_config(f, p);
    const Table t = detail::run_command(command, c, f, p);
    detail::emit(t, c, out);
    return kExitOk;
  } catch (const InputError& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const NumericalFailure& e) {
    err << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  }
}

}  // namespace gainloss::cli

#endif  // GAINLOSS_CLI_APP_HPP
