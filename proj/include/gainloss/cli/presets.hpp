#ifndef GAINLOSS_CLI_PRESETS_HPP
#define GAINLOSS_CLI_PRESETS_HPP

// Figure presets. All parameter values live in this one table.

#include <optional>
#include <string>
#include <vector>

#include "gainloss/cli/config.hpp"
#include "gainloss/errors.hpp"
#include "gainloss/model.hpp"

namespace gainloss::cli {

struct SeriesSpec {
  std::string label;
  ModelParams params;
};

struct Preset {
  std::string name;
  std::string command;  ///< spectrum, evolve, steady or asymptotic-discord
  std::string description;
  ModelParams base;
  std::vector<SeriesSpec> series;  ///< evolve presets only
  std::optional<SweepSpec> sweep;
  TimeSpec time;
  int grid = 100;
};

/// g = 2, gamma_G = 0.6 g, Gamma_G = 1.16 g; gamma_L left at zero.
inline ModelParams non_pt_base() { return {2.0, 0.0, 1.2, 2.32}; }

inline std::vector<Preset> make_presets() {
  std::vector<Preset> out;

  {
    // PT line gamma_L = Gamma_G - gamma_G, g = 1.
    Preset p;
    p.name = "fig2";
    p.command = "evolve";
    p.description = "PT-line correlation dynamics, pure and dissipative gain";
    p.base = {1.0, 0.5, 0.0, 0.5};
    auto pt = [](const std::string& label, double gain, double loss_g) {
      return SeriesSpec{label, ModelParams{1.0, gain - loss_g, loss_g, gain}};
    };
    p.series = {pt("pure-unbroken", 0.5, 0.0),       pt("pure-ep", 1.0, 0.0),
                pt("pure-broken", 1.5, 0.0),         pt("dissipative-unbroken", 1.0, 0.5),
                pt("dissipative-ep", 2.0, 1.0),      pt("dissipative-broken", 3.0, 1.5)};
    p.time = {40.0, 401, false};
    out.push_back(p);
  }
  {
    Preset p;
    p.name = "fig4";
    p.command = "asymptotic-discord";
    p.description = "Long-time discord on the PT line over (Gamma_G, gamma_G)";
    p.base = {1.0, 0.0, 0.0, 0.0};
    p.time = {200.0, 2001, false};
    p.grid = 100;
    out.push_back(p);
  }
  {
    Preset p;
    p.name = "fig6";
    p.command = "spectrum";
    p.description = "Mean-field spectrum against gamma_L";
    p.base = non_pt_base();
    p.base.loss_l = 1.6;
    const double th_paper = thresholds(p.base).gamma_l_th_paper;
    p.sweep = SweepSpec{"gamma-l", 0.0, th_paper, 401, false};
    out.push_back(p);
  }
  {
    Preset p;
    p.name = "fig7";
    p.command = "steady";
    p.description = "Stationary correlations between the PT line and the lasing edge";
    p.base = non_pt_base();
    p.base.loss_l = 1.6;
    const Thresholds th = thresholds(p.base);
    const double margin = 1e-3 * p.base.coupling;
    p.sweep = SweepSpec{"gamma-l", th.gamma_l_pt + margin, *th.gamma_l_th_numeric - margin, 400,
                        false};
    out.push_back(p);
  }
  {
    Preset p;
    p.name = "fig8";
    p.command = "evolve";
    p.description = "Transient correlations below, at and above the exceptional point";
    p.base = non_pt_base();
    p.base.loss_l = 1.6;
    const double ep = thresholds(p.base).gamma_l_ep;
    auto at = [](const std::string& label, double loss_l) {
      ModelParams q = non_pt_base();
      q.loss_l = loss_l;
      return SeriesSpec{label, q};
    };
    p.series = {at("below-ep", 1.6), at("at-ep", ep), at("above-ep", 3.2)};
    p.time = {10.0, 1001, false};
    out.push_back(p);
  }
  return out;
}

inline const std::vector<Preset>& presets() {
  static const std::vector<Preset> table = make_presets();
  return table;
}

inline const Preset& find_preset(const std::string& name) {
  for (const auto& p : presets()) {
    if (p.name == name) return p;
  }
  throw ConfigError("unknown preset '" + name + "' (expected fig2, fig4, fig6, fig7 or fig8)");
}

}  // namespace gainloss::cli

#endif  // GAINLOSS_CLI_PRESETS_HPP
