#ifndef GAINLOSS_MODEL_HPP
#define GAINLOSS_MODEL_HPP

// Two coupled bosonic modes L and G. Mode L leaks at rate loss_l, mode G
// leaks at rate loss_g and is incoherently pumped at rate gain_g; the modes
// exchange excitations at rate coupling. First moments evolve under the 2x2
// non-Hermitian mean-field Hamiltonian built here.

#include <algorithm>
#include <cmath>
#include <complex>
#include <optional>
#include <sstream>
#include <string_view>

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include "gainloss/errors.hpp"

namespace gainloss {

using cplx = std::complex<double>;

/// Rates of the dissipative gain-loss dimer, all in one frequency unit.
struct ModelParams {
  double coupling = 0.0;  ///< g, coherent exchange rate between L and G
  double loss_l = 0.0;    ///< gamma_L, loss on mode L
  double loss_g = 0.0;    ///< gamma_G, loss on mode G
  double gain_g = 0.0;    ///< Gamma_G, incoherent gain on mode G

  bool operator==(const ModelParams&) const = default;
};

inline void validate(const ModelParams& p) {
  const double rates[] = {p.coupling, p.loss_l, p.loss_g, p.gain_g};
  const char* names[] = {"coupling", "loss_l", "loss_g", "gain_g"};
  for (int i = 0; i < 4; ++i) {
    if (!std::isfinite(rates[i]) || rates[i] < 0.0) {
      std::ostringstream msg;
      msg << "ModelParams: " << names[i] << " must be finite and >= 0 (got "
          << rates[i] << ")";
      throw InvalidParameters(msg.str());
    }
  }
}

/// Net gain of mode G, gain_g - loss_g. May be negative.
inline double effective_gain(const ModelParams& p) { return p.gain_g - p.loss_g; }

/// All four rates multiplied by the same positive factor.
inline ModelParams scaled(const ModelParams& p, double factor) {
  return {p.coupling * factor, p.loss_l * factor, p.loss_g * factor, p.gain_g * factor};
}

/// Largest rate magnitude entering the mean-field matrix; used to turn
/// relative tolerances into absolute ones when the coupling vanishes.
inline double rate_scale(const ModelParams& p) {
  const double s = std::max({p.coupling, p.loss_l, std::abs(effective_gain(p))});
  return s > 0.0 ? s : 1.0;
}

/// Mean-field generator in the basis (<a_L>, <a_G>): i dPsi/dt = H Psi.
inline Eigen::Matrix2cd mean_field_hamiltonian(const ModelParams& p) {
  const cplx i(0.0, 1.0);
  Eigen::Matrix2cd h;
  h << -i * p.loss_l, p.coupling,  //
      p.coupling, i * effective_gain(p);
  return h;
}

/// Drift of the second moments in the ladder ordering (a_L, a_G, a_L^+, a_G^+):
/// blockdiag(-iH, +iH^dagger).
inline Eigen::Matrix4cd drift_matrix(const ModelParams& p) {
  const cplx i(0.0, 1.0);
  const Eigen::Matrix2cd h = mean_field_hamiltonian(p);
  Eigen::Matrix4cd y = Eigen::Matrix4cd::Zero();
  y.topLeftCorner<2, 2>() = -i * h;
  y.bottomRightCorner<2, 2>() = i * h.adjoint();
  return y;
}

struct Spectrum {
  cplx e_plus;
  cplx e_minus;
  bool is_coalesced = false;
  /// Absolute bound on |e_plus - e_minus| used for the coalescence flag.
  double coalescence_tol = 0.0;
};

/// Default coalescence bound. Rounding in the discriminant is amplified by the
/// square root, so decimal EP inputs land ~1e-8 g apart; 1e-6 g absorbs that.
inline double default_coalescence_tol(const ModelParams& p) {
  return 1e-6 * (p.coupling > 0.0 ? p.coupling : rate_scale(p));
}

/// Closed-form eigenvalues of the mean-field Hamiltonian. Labels follow the
/// sign in front of the principal square root, never a sort order, so sweeps
/// stay continuous except at the exceptional point itself.
inline Spectrum eigenvalues(const ModelParams& p, double tol_abs = -1.0) {
  const cplx i(0.0, 1.0);
  const double gt = effective_gain(p);
  const double half_sum = 0.5 * (p.loss_l + gt);
  const cplx centre = -i * (0.5 * (p.loss_l - gt));
  const cplx root = std::sqrt(cplx(p.coupling * p.coupling - half_sum * half_sum, 0.0));
  Spectrum s;
  s.e_plus = centre + root;
  s.e_minus = centre - root;
  s.coalescence_tol = tol_abs >= 0.0 ? tol_abs : default_coalescence_tol(p);
  s.is_coalesced = std::abs(s.e_plus - s.e_minus) <= s.coalescence_tol;
  return s;
}

/// Whether loss on L balances the effective gain on G within tol * coupling.
inline bool is_pt_symmetric(const ModelParams& p, double tol = 1e-9) {
  return std::abs(p.loss_l - effective_gain(p)) <= tol * p.coupling;
}

/// Eigenvalues on the balanced line, +-sqrt(g^2 - gain^2).
inline Spectrum pt_eigenvalues(const ModelParams& p, double tol = 1e-9) {
  if (!is_pt_symmetric(p, tol)) {
    std::ostringstream msg;
    msg << "pt_eigenvalues: loss_l=" << p.loss_l << " does not balance the effective gain "
        << effective_gain(p);
    throw NotPTSymmetric(msg.str());
  }
  const double gt = effective_gain(p);
  const cplx root = std::sqrt(cplx(p.coupling * p.coupling - gt * gt, 0.0));
  Spectrum s;
  s.e_plus = root;
  s.e_minus = -root;
  s.coalescence_tol = default_coalescence_tol(p);
  s.is_coalesced = std::abs(s.e_plus - s.e_minus) <= s.coalescence_tol;
  return s;
}

/// Largest real part over eig(drift_matrix), from a dense eigensolver.
inline double spectral_abscissa(const ModelParams& p) {
  Eigen::ComplexEigenSolver<Eigen::Matrix4cd> es(drift_matrix(p), false);
  return es.eigenvalues().real().maxCoeff();
}

enum class Stability { Stable, Marginal, Unstable };

struct StabilityReport {
  Stability stability = Stability::Marginal;
  /// Numerical spectral abscissa of the drift (negative when stable).
  double abscissa = 0.0;
};

/// Hurwitz test on the drift. Both diagonal blocks of the drift share the
/// characteristic polynomial x^2 + (loss_l - gain) x + (g^2 - loss_l * gain),
/// so its coefficients decide stability without the square-root sensitivity
/// that eigenvalues suffer at exceptional points.
inline StabilityReport drift_stability(const ModelParams& p, double tol = 1e-10) {
  const double s = rate_scale(p);
  const double gt = effective_gain(p);
  const double damping = p.loss_l - gt;
  const double stiffness = p.coupling * p.coupling - p.loss_l * gt;
  StabilityReport r;
  r.abscissa = spectral_abscissa(p);
  if (damping > tol * s && stiffness > tol * s * s) {
    r.stability = Stability::Stable;
  } else if (damping < -tol * s || stiffness < -tol * s * s) {
    r.stability = Stability::Unstable;
  } else {
    r.stability = Stability::Marginal;
  }
  return r;
}

struct Thresholds {
  double gamma_l_pt = 0.0;        ///< balanced-gain line, gain_g - loss_g
  double gamma_l_ep = 0.0;        ///< exceptional point, 2g + loss_g - gain_g
  double gamma_l_th_paper = 0.0;  ///< closed form 2 g^2 / (gain_g - loss_g)
  /// Upper edge of the stable window in loss_l, located by bisection on the
  /// spectral abscissa; empty when no stable window exists (gain >= g).
  std::optional<double> gamma_l_th_numeric;
};

/// Critical loss rates on mode L. Only the loss_l field of p is ignored.
inline Thresholds thresholds(const ModelParams& p) {
  const double gt = effective_gain(p);
  if (!(gt > 0.0)) {
    std::ostringstream msg;
    msg << "thresholds: effective gain must be positive (got " << gt << ")";
    throw NonPositiveEffectiveGain(msg.str());
  }
  const double g = p.coupling;
  Thresholds t;
  t.gamma_l_pt = gt;
  t.gamma_l_ep = 2.0 * g - gt;
  t.gamma_l_th_paper = 2.0 * g * g / gt;

  auto abscissa_at = [&](double loss_l) {
    ModelParams q = p;
    q.loss_l = loss_l;
    return spectral_abscissa(q);
  };
  // Between the balanced line and the lasing edge the slowest decay rate is
  // -(g - gain) at the exceptional point, so that is a safe stable bracket.
  if (gt < g) {
    double lo = t.gamma_l_ep;
    double hi = 2.0 * lo + g;
    while (abscissa_at(hi) <= 0.0) hi *= 2.0;
    while (hi - lo > 1e-10 * hi) {
      const double mid = 0.5 * (lo + hi);
      (abscissa_at(mid) > 0.0 ? hi : lo) = mid;
    }
    t.gamma_l_th_numeric = 0.5 * (lo + hi);
  }
  return t;
}

enum class RegimeKind {
  PTUnbroken,
  PTExceptionalPoint,
  PTBroken,
  NonPTBelowEP,
  NonPTAtEP,
  NonPTAboveEP,
};

inline std::string_view to_string(RegimeKind k) {
  switch (k) {
    case RegimeKind::PTUnbroken: return "PTUnbroken";
    case RegimeKind::PTExceptionalPoint: return "PTExceptionalPoint";
    case RegimeKind::PTBroken: return "PTBroken";
    case RegimeKind::NonPTBelowEP: return "NonPTBelowEP";
    case RegimeKind::NonPTAtEP: return "NonPTAtEP";
    case RegimeKind::NonPTAboveEP: return "NonPTAboveEP";
  }
  return "unknown";
}

inline std::string_view to_string(Stability s) {
  switch (s) {
    case Stability::Stable: return "stable";
    case Stability::Marginal: return "marginal";
    case Stability::Unstable: return "unstable";
  }
  return "unknown";
}

struct Regime {
  RegimeKind kind = RegimeKind::NonPTBelowEP;
  Stability stability = Stability::Marginal;

  bool stable() const { return stability == Stability::Stable; }
  bool operator==(const Regime&) const = default;
};

/// tol is relative to the coupling; it sets both the width of the PT band and
/// of the exceptional-point band.
inline Regime classify_regime(const ModelParams& p, double tol = 1e-9) {
  const double gt = effective_gain(p);
  const double g = p.coupling;
  const double band = tol * g;
  Regime r;
  r.stability = drift_stability(p).stability;
  if (std::abs(p.loss_l - gt) <= band) {
    if (std::abs(gt - g) <= band) {
      r.kind = RegimeKind::PTExceptionalPoint;
    } else {
      r.kind = gt < g ? RegimeKind::PTUnbroken : RegimeKind::PTBroken;
    }
  } else {
    const double sum = p.loss_l + gt;
    if (std::abs(sum - 2.0 * g) <= band) {
      r.kind = RegimeKind::NonPTAtEP;
    } else {
      r.kind = sum < 2.0 * g ? RegimeKind::NonPTBelowEP : RegimeKind::NonPTAboveEP;
    }
  }
  return r;
}

/// Mean field after time t: exp(-i H t) psi0.
inline Eigen::Vector2cd mean_field_evolve(const Eigen::Vector2cd& psi0, const ModelParams& p,
                                          double t) {
  if (t < 0.0) throw InputError("mean_field_evolve: t must be >= 0");
  const Eigen::Matrix2cd gen = cplx(0.0, -t) * mean_field_hamiltonian(p);
  return gen.exp() * psi0;
}

}  // namespace gainloss

#endif  // GAINLOSS_MODEL_HPP
