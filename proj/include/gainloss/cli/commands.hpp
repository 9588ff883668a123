#ifndef GAINLOSS_CLI_COMMANDS_HPP
#define GAINLOSS_CLI_COMMANDS_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "gainloss/cli/config.hpp"
#include "gainloss/cli/output.hpp"
#include "gainloss/cli/presets.hpp"
#include "gainloss/dynamics.hpp"
#include "gainloss/fock_oracle.hpp"
#include "gainloss/gaussian.hpp"
#include "gainloss/model.hpp"

namespace gainloss::cli {

namespace detail {

inline std::string params_text(const ModelParams& p) {
  return "g=" + format_double(p.coupling) + " gamma_l=" + format_double(p.loss_l) +
         " gamma_g=" + format_double(p.loss_g) + " big_gamma_g=" + format_double(p.gain_g);
}

inline void provenance(Table& t, const std::string& command, const RunConfig& c,
                       const std::string& method) {
  t.metadata.emplace_back("gainloss_cli", std::string(kVersion));
  t.metadata.emplace_back("command", command);
  if (c.preset) t.metadata.emplace_back("preset", *c.preset);
  t.metadata.emplace_back("params", params_text(c.params));
  if (c.sweep) t.metadata.emplace_back("sweep", to_string(*c.sweep));
  t.metadata.emplace_back("method", method);
}

/// (label, params) pairs for a run: the sweep points, or the single point.
inline std::vector<SeriesSpec> points(const RunConfig& c) {
  std::vector<SeriesSpec> out;
  if (!c.sweep) {
    out.push_back({"point", c.params});
    return out;
  }
  for (const double v : sweep_values(*c.sweep)) {
    ModelParams p = c.params;
    param_ref(p, c.sweep->param) = v;
    out.push_back({c.sweep->param + "=" + format_double(v), p});
  }
  return out;
}

inline std::string sweep_name(const RunConfig& c) { return c.sweep ? c.sweep->param : "gamma-l"; }

inline double sweep_value(const RunConfig& c, const ModelParams& p) {
  return param_value(p, sweep_name(c));
}

}  // namespace detail

// --------------------------------------------------------------------------

inline Table cmd_spectrum(const RunConfig& c) {
  check_config(c);
  Table t;
  t.columns = {"sweep_param", "sweep_value", "re_e_plus",  "im_e_plus",
               "re_e_minus",  "im_e_minus",  "regime",     "stable"};
  detail::provenance(t, "spectrum", c, "closed-form eigenvalues; Hurwitz stability");
  for (const auto& pt : detail::points(c)) {
    const ModelParams& p = pt.params;
    validate(p);
    const Spectrum s = eigenvalues(p);
    const Regime r = classify_regime(p);
    t.add_row({detail::sweep_name(c), detail::sweep_value(c, p), s.e_plus.real(), s.e_plus.imag(),
               s.e_minus.real(), s.e_minus.imag(), std::string(to_string(r.kind)), r.stable()});
  }
  return t;
}

// --------------------------------------------------------------------------

/// Time series from the vacuum for each series. Times are in units of 1/g
/// unless the config asks for absolute time.
inline Table evolve_series(const RunConfig& c, const std::vector<SeriesSpec>& series) {
  check_config(c);
  Table t;
  t.columns = {"series",          "g",          "gamma_l",    "gamma_g",  "big_gamma_g",
               "t",               "mutual_information",       "discord_lg", "discord_gl",
               "nu_minus",        "nu_plus",    "s_total"};
  detail::provenance(t, "evolve", c,
                     "vacuum start; exact exponential stepping of the second moments");
  t.metadata.emplace_back("time_unit", c.time.absolute ? "absolute" : "1/g");
  for (const auto& s : series) {
    const ModelParams& p = s.params;
    validate(p);
    double unit = 1.0;
    if (!c.time.absolute) {
      if (!(p.coupling > 0.0)) {
        throw ConfigError("time in units of 1/g needs g > 0 (use --absolute-time)");
      }
      unit = 1.0 / p.coupling;
    }
    std::vector<double> shown;
    if (c.time.t_max == 0.0 || c.time.samples == 1) {
      shown.push_back(c.time.samples == 1 ? c.time.t_max : 0.0);
    } else {
      for (int i = 0; i < c.time.samples; ++i) {
        shown.push_back(c.time.t_max * i / (c.time.samples - 1));
      }
    }
    std::vector<double> phys(shown.size());
    for (std::size_t i = 0; i < shown.size(); ++i) phys[i] = shown[i] * unit;
    const auto samples = correlation_series(vacuum_covariance(), p, phys);
    for (std::size_t i = 0; i < samples.size(); ++i) {
      std::vector<Cell> row = {s.label, p.coupling, p.loss_l, p.loss_g, p.gain_g, shown[i]};
      if (samples[i].diverged) {
        for (int k = 0; k < 6; ++k) row.emplace_back(std::string("diverged"));
      } else {
        const CorrelationReport& r = samples[i].report;
        row.insert(row.end(), {r.mutual_information, r.discord_lg, r.discord_gl, r.nu_minus,
                               r.nu_plus, r.s_total});
      }
      t.add_row(std::move(row));
    }
  }
  return t;
}

inline Table cmd_evolve(const RunConfig& c) { return evolve_series(c, detail::points(c)); }

// --------------------------------------------------------------------------

inline Table cmd_steady(const RunConfig& c) {
  check_config(c);
  Table t;
  t.columns = {"sweep_param", "sweep_value", "stability",  "mutual_information",
               "discord_lg",  "discord_gl",  "entangled"};
  detail::provenance(t, "steady", c, "stationary Lyapunov solve (vectorised)");
  for (const auto& pt : detail::points(c)) {
    const ModelParams& p = pt.params;
    validate(p);
    const StabilityReport st = is_stable(p);
    std::vector<Cell> row = {detail::sweep_name(c), detail::sweep_value(c, p),
                             std::string(to_string(st.stability))};
    if (st.stability != Stability::Stable) {
      const std::string mark(to_string(st.stability));
      row.insert(row.end(), {mark, mark, mark, mark});
    } else {
      const CorrelationReport r = correlation_report(to_quadrature(stationary(p)));
      row.insert(row.end(), {r.mutual_information, r.discord_lg, r.discord_gl,
                             r.entangled_by_discord});
    }
    t.add_row(std::move(row));
  }
  return t;
}

// --------------------------------------------------------------------------

struct PlateauResult {
  CorrelationReport report;
  double t_final = 0.0;
  bool converged = false;
  bool diverged = false;
};

/// Evolves the vacuum in steps of h until D_LG changes by less than
/// rate_tol * h per step over a full 1/g window (after t >= 5/g), or until
/// t_max. A diverging state ends the run with the last finite report.
inline PlateauResult discord_plateau(const ModelParams& p, double t_max, double h,
                                     double rate_tol) {
  const double g = p.coupling;
  PhaseInsensitiveCovariance c;
  const PhaseInsensitiveStep step(p, h);
  PlateauResult out;
  out.report = correlation_report(c);
  const int window = std::max(1, static_cast<int>(std::ceil(1.0 / (g * h))));
  int quiet = 0;
  const auto n_steps = static_cast<long>(std::ceil(t_max / h - 1e-9));
  for (long k = 1; k <= n_steps; ++k) {
    const PhaseInsensitiveCovariance next = step.apply(c);
    if (!(next.normal.cwiseAbs().maxCoeff() <= kDivergenceCap) || !std::isfinite(next.det_normal)) {
      out.diverged = true;
      return out;
    }
    c = next;
    const CorrelationReport r = correlation_report(c);
    const double rate = std::abs(r.discord_lg - out.report.discord_lg) / h;
    out.report = r;
    out.t_final = k * h;
    quiet = rate < rate_tol ? quiet + 1 : 0;
    if (out.t_final >= 5.0 / g && quiet >= window) {
      out.converged = true;
      return out;
    }
  }
  return out;
}

inline Table cmd_asymptotic_discord(const RunConfig& c) {
  check_config(c);
  const double g = c.params.coupling;
  if (!(g > 0.0)) throw ConfigError("asymptotic-discord needs g > 0");
  if (c.grid < 1) throw ConfigError("grid must be >= 1");
  const double unit = c.time.absolute ? 1.0 : 1.0 / g;
  const double t_max = c.time.t_max * unit;
  const double h = 0.1 / g;
  Table t;
  t.columns = {"big_gamma_g", "gamma_g",  "gamma_l",      "regime",     "discord_lg",
               "discord_gl",  "mutual_information", "t_final", "converged", "diverged"};
  detail::provenance(t, "asymptotic-discord", c,
                     "PT line gamma_l = big_gamma_g - gamma_g; vacuum start; stop when "
                     "|dD_lg/dt| < 1e-6 g");
  t.metadata.emplace_back("grid", "big_gamma_g in (0, 4g], gamma_g in [0, big_gamma_g), " +
                                      std::to_string(c.grid) + " x " + std::to_string(c.grid));
  t.metadata.emplace_back("time_unit", c.time.absolute ? "absolute" : "1/g");
  for (int i = 1; i <= c.grid; ++i) {
    const double gain = 4.0 * g * i / c.grid;
    for (int j = 0; j < c.grid; ++j) {
      const double loss_g = gain * j / c.grid;
      const ModelParams p{g, gain - loss_g, loss_g, gain};
      const PlateauResult r = discord_plateau(p, t_max, h, 1e-6 * g);
      t.add_row({gain, loss_g, p.loss_l, std::string(to_string(classify_regime(p).kind)),
                 r.report.discord_lg, r.report.discord_gl, r.report.mutual_information,
                 r.t_final / unit, r.converged, r.diverged});
    }
  }
  return t;
}

// --------------------------------------------------------------------------
// Oracle cross-validation

struct OracleCheck {
  std::string name;
  double deviation = 0.0;
  double tolerance = 0.0;
  bool passed = false;
  std::string reason;
};

struct OracleOptionsCli {
  /// Fock cutoff per mode.
  int cutoff = 60;
  /// Multiplies the Gaussian diffusion matrix; anything but 1 is a fault.
  double diffusion_scale = 1.0;
};

inline std::vector<OracleCheck> cmd_oracle_check(const OracleOptionsCli& opt = {}) {
  std::vector<OracleCheck> out;
  ModelParams fig8 = non_pt_base();
  fig8.loss_l = 0.8 * fig8.coupling;
  const double g = fig8.coupling;
  std::vector<double> grid;
  for (int i = 1; i <= 4; ++i) grid.push_back(0.125 * i / g);

  DriftDiffusion dd = build_drift_diffusion(fig8);
  dd.d *= opt.diffusion_scale;

  auto run = [&](const std::string& name, double tol, auto&& body) {
    OracleCheck c;
    c.name = name;
    c.tolerance = tol;
    try {
      c.deviation = body();
      c.passed = c.deviation <= tol;
      if (!c.passed) c.reason = "deviation above tolerance";
    } catch (const CutoffExceeded& e) {
      c.deviation = std::numeric_limits<double>::infinity();
      c.reason = std::string("CutoffExceeded: ") + e.what();
    } catch (const Error& e) {
      c.deviation = std::numeric_limits<double>::infinity();
      c.reason = e.what();
    }
    out.push_back(c);
  };

  std::vector<CovarianceAA> vacuum_run;
  run("vacuum-vs-lyapunov", 1e-6, [&] {
    double worst = 0.0;
    fock::OracleDiagnostics diag;
    const auto states = fock::integrate(fock::vacuum_state(opt.cutoff), fig8, grid, {}, &diag);
    for (std::size_t i = 0; i < states.size(); ++i) {
      const CovarianceAA o = fock::covariance_from_state(states[i]);
      vacuum_run.push_back(o);
      const CovarianceAA e = propagate(vacuum_covariance(), dd, grid[i]).sigma;
      worst = std::max(worst, (o.matrix() - e.matrix()).cwiseAbs().maxCoeff());
    }
    return worst;
  });
  run("coherent-amplitude-independence", 1e-7, [&] {
    if (vacuum_run.size() != grid.size()) throw Error("vacuum run unavailable");
    double worst = 0.0;
    const auto states =
        fock::integrate(fock::coherent_state(1.0, 0.5, opt.cutoff, 2), fig8, grid);
    for (std::size_t i = 0; i < states.size(); ++i) {
      const CovarianceAA o = fock::covariance_from_state(states[i]);
      worst = std::max(worst, (o.matrix() - vacuum_run[i].matrix()).cwiseAbs().maxCoeff());
    }
    return worst;
  });
  run("single-mode-gain", 1e-7, [&] {
    const ModelParams gain{0.0, 0.0, 0.0, 0.5};
    const std::vector<double> ts{0.1, 0.2};
    const auto states = fock::integrate(fock::vacuum_state(opt.cutoff), gain, ts);
    double worst = 0.0;
    for (std::size_t i = 0; i < ts.size(); ++i) {
      const double n = fock::expectation(states[i], 0, 1, 0, 1).real();
      worst = std::max(worst, std::abs(n - std::expm1(2.0 * gain.gain_g * ts[i])));
    }
    return worst;
  });
  run("trace-preservation", 1e-9, [&] {
    fock::OracleDiagnostics diag;
    fock::integrate(fock::vacuum_state(opt.cutoff), fig8, grid, {}, &diag);
    double worst = 0.0;
    for (const double d : diag.trace_drift) worst = std::max(worst, d);
    return worst;
  });
  return out;
}

}  // namespace gainloss::cli

#endif  // GAINLOSS_CLI_COMMANDS_HPP
