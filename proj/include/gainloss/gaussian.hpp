#ifndef GAINLOSS_GAUSSIAN_HPP
#define GAINLOSS_GAUSSIAN_HPP

// Two-mode Gaussian covariance matrices and the entropic quantities built on
// them: von Neumann entropies, mutual information and Gaussian discord.
//
// Conventions. Ladder-basis covariances use the operator vector
// A = (a_L, a_G, a_L^+, a_G^+) and the Hermitian form
//     sigma_ij = <{A_i, A_j^+}> - 2 <A_i><A_j^+>,
// for which vacuum and coherent states give the identity. Quadrature
// covariances are real, mode-major (x_L, p_L, x_G, p_G) with
// x = (a + a^+)/sqrt2, p = -i(a - a^+)/sqrt2, again normalised so that the
// vacuum is the identity. Entropies are in nats.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <numbers>
#include <sstream>
#include <utility>

#include <Eigen/Dense>

#include "gainloss/errors.hpp"

namespace gainloss {

using cplx = std::complex<double>;

inline constexpr double kNatsToBits = 1.0 / std::numbers::ln2;

/// Ladder-basis covariance (see file comment for the convention).
class CovarianceAA {
 public:
  CovarianceAA() : m_(Eigen::Matrix4cd::Identity()) {}

  /// Validates Hermiticity and the creation/annihilation reality structure
  /// sigma^T = X sigma X, both relative to the largest entry.
  static CovarianceAA from_matrix(const Eigen::Matrix4cd& m, double tol = 1e-10) {
    const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
    if ((m - m.adjoint()).cwiseAbs().maxCoeff() > tol * scale) {
      throw NonPhysical("CovarianceAA: matrix is not Hermitian");
    }
    if ((m.transpose() - swap_blocks(m)).cwiseAbs().maxCoeff() > tol * scale) {
      throw NonPhysical("CovarianceAA: creation/annihilation blocks are inconsistent");
    }
    return CovarianceAA(m);
  }

  /// No validation; for values produced by code that preserves the structure.
  static CovarianceAA unchecked(const Eigen::Matrix4cd& m) { return CovarianceAA(m); }

  const Eigen::Matrix4cd& matrix() const { return m_; }

  /// <{a_i, a_j^+}> block in the order (L, G).
  Eigen::Matrix2cd normal_block() const { return m_.topLeftCorner<2, 2>(); }
  /// <{a_i, a_j}> block; vanishes for phase-insensitive states.
  Eigen::Matrix2cd anomalous_block() const { return m_.topRightCorner<2, 2>(); }

  /// X sigma X, where X exchanges the annihilation and creation halves.
  static Eigen::Matrix4cd swap_blocks(const Eigen::Matrix4cd& m) {
    Eigen::Matrix4cd r;
    r.topLeftCorner<2, 2>() = m.bottomRightCorner<2, 2>();
    r.bottomRightCorner<2, 2>() = m.topLeftCorner<2, 2>();
    r.topRightCorner<2, 2>() = m.bottomLeftCorner<2, 2>();
    r.bottomLeftCorner<2, 2>() = m.topRightCorner<2, 2>();
    return r;
  }

 private:
  explicit CovarianceAA(const Eigen::Matrix4cd& m) : m_(m) {}
  Eigen::Matrix4cd m_;
};

/// Quadrature covariance [[L, C], [C^T, G]].
class CovarianceXP {
 public:
  CovarianceXP() : m_(Eigen::Matrix4d::Identity()) {}

  static CovarianceXP from_matrix(const Eigen::Matrix4d& m, double tol = 1e-10) {
    const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
    if (!m.allFinite()) throw NonPhysical("CovarianceXP: non-finite entries");
    if ((m - m.transpose()).cwiseAbs().maxCoeff() > tol * scale) {
      throw NonPhysical("CovarianceXP: matrix is not symmetric");
    }
    return CovarianceXP(0.5 * (m + m.transpose()));
  }

  const Eigen::Matrix4d& matrix() const { return m_; }
  Eigen::Matrix2d block_l() const { return m_.topLeftCorner<2, 2>(); }
  Eigen::Matrix2d block_g() const { return m_.bottomRightCorner<2, 2>(); }
  Eigen::Matrix2d block_c() const { return m_.topRightCorner<2, 2>(); }

 private:
  explicit CovarianceXP(const Eigen::Matrix4d& m) : m_(m) {}
  Eigen::Matrix4d m_;
};

inline CovarianceAA vacuum_covariance() { return CovarianceAA(); }

namespace detail {

// Ladder (a_L, a_G, a_L^+, a_G^+) -> quadratures (x_L, p_L, x_G, p_G).
// Unitary, so its inverse is its adjoint.
inline Eigen::Matrix4cd ladder_to_quadrature() {
  const double s = std::numbers::sqrt2 / 2.0;
  const cplx i(0.0, 1.0);
  Eigen::Matrix4cd t = Eigen::Matrix4cd::Zero();
  t(0, 0) = s;       t(0, 2) = s;       // x_L
  t(1, 0) = -i * s;  t(1, 2) = i * s;   // p_L
  t(2, 1) = s;       t(2, 3) = s;       // x_G
  t(3, 1) = -i * s;  t(3, 3) = i * s;   // p_G
  return t;
}

}  // namespace detail

/// Congruence sigma_xp = T sigma T^+. Fails when the result carries an
/// imaginary part beyond 1e-10 of its largest entry.
inline CovarianceXP to_quadrature(const CovarianceAA& sigma) {
  const Eigen::Matrix4cd t = detail::ladder_to_quadrature();
  const Eigen::Matrix4cd xp = t * sigma.matrix() * t.adjoint();
  const double scale = xp.cwiseAbs().maxCoeff();
  if (xp.imag().cwiseAbs().maxCoeff() > 1e-10 * scale) {
    throw NonPhysical("to_quadrature: ladder covariance violates the reality structure");
  }
  return CovarianceXP::from_matrix(xp.real());
}

inline CovarianceAA to_ladder(const CovarianceXP& sigma) {
  const Eigen::Matrix4cd t = detail::ladder_to_quadrature();
  const Eigen::Matrix4cd m = t.adjoint() * sigma.matrix().cast<cplx>() * t;
  return CovarianceAA::unchecked(0.5 * (m + m.adjoint()));
}

/// Exchanges the roles of modes L and G.
inline CovarianceXP swap_modes(const CovarianceXP& sigma) {
  Eigen::Matrix4d p = Eigen::Matrix4d::Zero();
  p(0, 2) = p(1, 3) = p(2, 0) = p(3, 1) = 1.0;
  return CovarianceXP::from_matrix(p * sigma.matrix() * p.transpose());
}

/// Thermal occupations n_l, n_g on the two modes, uncorrelated.
inline CovarianceXP thermal_xp(double n_l, double n_g) {
  Eigen::Vector4d d(2 * n_l + 1, 2 * n_l + 1, 2 * n_g + 1, 2 * n_g + 1);
  return CovarianceXP::from_matrix(d.asDiagonal().toDenseMatrix());
}

/// Two-mode squeezed vacuum with squeezing parameter r.
inline CovarianceXP two_mode_squeezed_xp(double r) {
  const double c = std::cosh(2 * r), s = std::sinh(2 * r);
  Eigen::Matrix4d m;
  m << c, 0, s, 0,  //
      0, c, 0, -s,  //
      s, 0, c, 0,   //
      0, -s, 0, c;
  return CovarianceXP::from_matrix(m);
}

// --------------------------------------------------------------------------
// Symplectic spectrum and entropies

struct SymplecticSpectrum {
  double nu_minus = 1.0;
  double nu_plus = 1.0;
};

/// Number of times a symplectic eigenvalue in (1 - 1e-6, 1 - 1e-9) was
/// silently raised to 1. Diagnostic only.
inline std::atomic<std::size_t>& symplectic_clamp_count() {
  static std::atomic<std::size_t> count{0};
  return count;
}

namespace detail {

inline double clamp_unit(double nu, const char* where) {
  if (nu >= 1.0) return nu;
  if (!(nu >= 1.0 - 1e-6)) {
    std::ostringstream msg;
    msg << where << ": symplectic eigenvalue " << nu << " violates the uncertainty bound";
    throw NonPhysical(msg.str());
  }
  if (nu < 1.0 - 1e-9) symplectic_clamp_count().fetch_add(1, std::memory_order_relaxed);
  return 1.0;
}

}  // namespace detail

/// Delta = det L + det G + 2 det C, the symplectic invariant
/// nu_-^2 + nu_+^2.
inline double delta_invariant(const CovarianceXP& sigma) {
  return sigma.block_l().determinant() + sigma.block_g().determinant() +
         2.0 * sigma.block_c().determinant();
}

/// The spectrum of the Hermitian matrix i sigma^{1/2} Omega sigma^{1/2} is
/// {-nu_+, -nu_-, nu_-, nu_+}. Equivalent to 2 nu^2 = Delta -+ sqrt(Delta^2 -
/// 4 det sigma), but that root loses half the digits when nu_- ~ nu_+ (every
/// pure state), while a Hermitian eigenproblem does not.
inline SymplecticSpectrum symplectic_eigenvalues(const CovarianceXP& sigma) {
  const Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> es(sigma.matrix());
  if (!(es.eigenvalues().minCoeff() > 0.0)) {
    throw NonPhysical("symplectic_eigenvalues: covariance is not positive definite");
  }
  const Eigen::Matrix4d root = es.operatorSqrt();
  Eigen::Matrix4d omega = Eigen::Matrix4d::Zero();
  omega(0, 1) = omega(2, 3) = 1.0;
  omega(1, 0) = omega(3, 2) = -1.0;
  const Eigen::Matrix4d a = root * omega * root;
  const Eigen::Matrix4cd h = cplx(0.0, 1.0) * (0.5 * (a - a.transpose())).cast<cplx>();
  const Eigen::SelfAdjointEigenSolver<Eigen::Matrix4cd> hs(h, Eigen::EigenvaluesOnly);
  const Eigen::Vector4d ev = hs.eigenvalues();
  SymplecticSpectrum s;
  s.nu_minus = detail::clamp_unit(0.5 * (ev[2] - ev[1]), "symplectic_eigenvalues");
  s.nu_plus = detail::clamp_unit(0.5 * (ev[3] - ev[0]), "symplectic_eigenvalues");
  return s;
}

/// Entropy of a single-mode thermal state with symplectic eigenvalue x:
/// f(x) = (x+1)/2 ln((x+1)/2) - (x-1)/2 ln((x-1)/2).
inline double entropy_f(double x) {
  if (!(x >= 1.0 - 1e-6)) {
    std::ostringstream msg;
    msg << "entropy_f: argument " << x << " is below 1";
    throw DomainError(msg.str());
  }
  if (x <= 1.0) return 0.0;
  const double hi = 0.5 * (x + 1.0);
  const double lo = 0.5 * (x - 1.0);
  // Rewritten as ln(hi) + lo ln(hi/lo): no cancellation for large x and the
  // lo -> 0 limit is exact.
  return std::log(hi) + lo * std::log1p(1.0 / lo);
}

// --------------------------------------------------------------------------
// Correlations

enum class DiscordDirection {
  LG,  ///< D_LG: measurement performed on mode G
  GL,  ///< D_GL: measurement performed on mode L
};

struct CorrelationReport {
  double s_total = 0.0;
  double s_l = 0.0;
  double s_g = 0.0;
  double mutual_information = 0.0;
  double discord_lg = 0.0;
  double discord_gl = 0.0;
  double nu_minus = 1.0;
  double nu_plus = 1.0;
  bool entangled_by_discord = false;
};

namespace detail {

inline double clamp_discord(double d) { return (d < 0.0 && d > -1e-10) ? 0.0 : d; }

// E_min for a measurement on the mode with local determinant `measured`,
// `other` being the local determinant of the unmeasured mode.
inline double discord_emin(double other, double measured, double c, double d) {
  const double dev = d - other * measured;
  const double c2 = c * c;
  const double delta = dev * dev - c2 * (measured + 1.0) * (d + other);
  const double delta_scale = dev * dev + c2 * (measured + 1.0) * (d + other);
  const bool boundary = std::abs(delta) <= 1e-12 * delta_scale;

  double best = std::numeric_limits<double>::infinity();
  const double bm1 = measured - 1.0;
  if ((delta < 0.0 || boundary) && bm1 > 1e-12) {
    const double inner = std::max(0.0, c2 + bm1 * (d - other));
    const double e = (2.0 * c2 + bm1 * (d - other) + 2.0 * std::abs(c) * std::sqrt(inner)) /
                     (bm1 * bm1);
    best = std::min(best, e);
  }
  if (delta > 0.0 || boundary || !std::isfinite(best)) {
    const double inner =
        std::max(0.0, c2 * c2 + dev * dev - 2.0 * c2 * (d + other * measured));
    const double e = (other * measured - c2 + d - std::sqrt(inner)) / (2.0 * measured);
    best = std::min(best, e);
  }
  return std::max(1.0, best);
}

}  // namespace detail

/// Gaussian discord in nats. LG measures mode G, GL measures mode L.
inline double gaussian_discord(const CovarianceXP& sigma, DiscordDirection dir) {
  const SymplecticSpectrum nu = symplectic_eigenvalues(sigma);
  const double det_l = sigma.block_l().determinant();
  const double det_g = sigma.block_g().determinant();
  const double c = sigma.block_c().determinant();
  const double d = sigma.matrix().determinant();
  const double measured = dir == DiscordDirection::LG ? det_g : det_l;
  const double other = dir == DiscordDirection::LG ? det_l : det_g;
  const double emin = detail::discord_emin(other, measured, c, d);
  const double s = entropy_f(nu.nu_minus) + entropy_f(nu.nu_plus);
  return detail::clamp_discord(entropy_f(std::sqrt(measured)) - s +
                               entropy_f(std::sqrt(emin)));
}

inline CorrelationReport correlation_report(const CovarianceXP& sigma) {
  const SymplecticSpectrum nu = symplectic_eigenvalues(sigma);
  CorrelationReport r;
  r.nu_minus = nu.nu_minus;
  r.nu_plus = nu.nu_plus;
  r.s_total = entropy_f(nu.nu_minus) + entropy_f(nu.nu_plus);
  r.s_l = entropy_f(std::sqrt(std::max(0.0, sigma.block_l().determinant())));
  r.s_g = entropy_f(std::sqrt(std::max(0.0, sigma.block_g().determinant())));
  r.mutual_information = r.s_l + r.s_g - r.s_total;
  r.discord_lg = gaussian_discord(sigma, DiscordDirection::LG);
  r.discord_gl = gaussian_discord(sigma, DiscordDirection::GL);
  r.entangled_by_discord = std::max(r.discord_lg, r.discord_gl) > 1.0;
  return r;
}

// --------------------------------------------------------------------------
// Phase-insensitive states
//
// When <a_i a_j> = 0 the covariance is fixed by the 2x2 Hermitian block
// N = <{a_i, a_j^+}>. Its eigenvalues are the symplectic eigenvalues, the
// local determinants are N_LL^2 and N_GG^2, det C = |N_LG|^2 and
// det sigma = (det N)^2. Keeping det N as a separately tracked number lets
// the formulas below stay accurate when N grows without bound, where
// N_LL N_GG - |N_LG|^2 would cancel to noise.

struct PhaseInsensitiveCovariance {
  Eigen::Matrix2cd normal = Eigen::Matrix2cd::Identity();
  double det_normal = 1.0;

  static PhaseInsensitiveCovariance from_normal(const Eigen::Matrix2cd& n) {
    PhaseInsensitiveCovariance c;
    c.normal = n;
    c.det_normal = (n(0, 0) * n(1, 1) - n(0, 1) * n(1, 0)).real();
    return c;
  }
};

inline PhaseInsensitiveCovariance phase_insensitive(const CovarianceAA& sigma,
                                                    double tol = 1e-10) {
  const double scale = std::max(1.0, sigma.matrix().cwiseAbs().maxCoeff());
  if (sigma.anomalous_block().cwiseAbs().maxCoeff() > tol * scale) {
    throw InputError("phase_insensitive: covariance has a non-zero <a a> block");
  }
  return PhaseInsensitiveCovariance::from_normal(sigma.normal_block());
}

inline CovarianceAA to_ladder(const PhaseInsensitiveCovariance& c) {
  Eigen::Matrix4cd m = Eigen::Matrix4cd::Zero();
  m.topLeftCorner<2, 2>() = c.normal;
  m.bottomRightCorner<2, 2>() = c.normal.conjugate();
  return CovarianceAA::unchecked(m);
}

namespace detail {

// sqrt(E_min) for a measurement on the mode with diagonal entry n_meas. In
// this family the case discriminant is -(N_LL N_GG - d)^2 (n_other -
// n_meas d)^2 <= 0, so only the first case applies and it factorises.
inline double phase_insensitive_sqrt_emin(double n_other, double n_meas, double d) {
  if (n_other > n_meas * d && n_meas - 1.0 > 1e-12) {
    return (n_other - d) / (n_meas - 1.0);
  }
  return (n_other + d) / (n_meas + 1.0);
}

}  // namespace detail

inline CorrelationReport correlation_report(const PhaseInsensitiveCovariance& c) {
  const double n_l = c.normal(0, 0).real();
  const double n_g = c.normal(1, 1).real();
  const double z2 = std::norm(c.normal(0, 1));
  const double d = c.det_normal;
  const double split = std::sqrt((n_l - n_g) * (n_l - n_g) + 4.0 * z2);
  const double nu_plus = 0.5 * (n_l + n_g + split);
  const double nu_minus = d / nu_plus;

  CorrelationReport r;
  r.nu_minus = detail::clamp_unit(nu_minus, "correlation_report");
  r.nu_plus = detail::clamp_unit(nu_plus, "correlation_report");
  r.s_total = entropy_f(r.nu_minus) + entropy_f(r.nu_plus);
  r.s_l = entropy_f(n_l);
  r.s_g = entropy_f(n_g);
  r.mutual_information = r.s_l + r.s_g - r.s_total;
  const double e_lg = std::max(1.0, detail::phase_insensitive_sqrt_emin(n_l, n_g, d));
  const double e_gl = std::max(1.0, detail::phase_insensitive_sqrt_emin(n_g, n_l, d));
  r.discord_lg = detail::clamp_discord(r.s_g - r.s_total + entropy_f(e_lg));
  r.discord_gl = detail::clamp_discord(r.s_l - r.s_total + entropy_f(e_gl));
  r.entangled_by_discord = std::max(r.discord_lg, r.discord_gl) > 1.0;
  return r;
}

}  // namespace gainloss

#endif  // GAINLOSS_GAUSSIAN_HPP
