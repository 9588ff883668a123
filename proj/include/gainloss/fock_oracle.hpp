#ifndef GAINLOSS_FOCK_ORACLE_HPP
#define GAINLOSS_FOCK_ORACLE_HPP

// Reference solver: the full master equation
//   d rho/dt = -i[H, rho] + 2 gamma_L D[a_L] rho + 2 gamma_G D[a_G] rho
//              + 2 Gamma_G D[a_G^+] rho,      H = g (a_L^+ a_G + a_G^+ a_L),
// integrated on the truncated Fock space {|j, b> : 0 <= j, b <= N}, with
// no Gaussian assumption.
//
// Storage. The generator conserves the charge k = m_ket - m_bra, where
// m = j + b is the total excitation number, so rho splits into independent
// charge bands. Band k holds one block per ket sector m (rows: ket states
// of total m, cols: bra states of total m - k), indexed by j. Only bands
// 0..max_band are kept; band -k is the adjoint of band k. Band 0 is exact
// for vacuum, thermal and Fock inputs; first and second moments need bands
// up to 2, third moments up to 3.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <span>
#include <sstream>
#include <vector>

#include <Eigen/Dense>

#include "gainloss/errors.hpp"
#include "gainloss/gaussian.hpp"
#include "gainloss/model.hpp"
#include "gainloss/ode.hpp"

namespace gainloss::fock {

/// Block layout of a charge-banded density operator with per-mode cutoff N.
class SectorLayout {
 public:
  SectorLayout() = default;

  SectorLayout(int cutoff, int max_band) : n_(cutoff), band_(max_band) {
    if (cutoff < 1) throw InputError("fock: cutoff must be >= 1");
    if (max_band < 0 || max_band > 2 * cutoff) throw InputError("fock: invalid band");
    offset_.assign(static_cast<std::size_t>((band_ + 1) * (2 * n_ + 1)), -1);
    std::ptrdiff_t pos = 0;
    for (int k = 0; k <= band_; ++k) {
      for (int m = k; m <= 2 * n_; ++m) {
        offset_[index(k, m)] = pos;
        pos += static_cast<std::ptrdiff_t>(dim(m)) * dim(m - k);
      }
    }
    size_ = pos;
  }

  int cutoff() const { return n_; }
  int max_band() const { return band_; }
  std::ptrdiff_t size() const { return size_; }

  /// Smallest and largest j with j + b = m, 0 <= j, b <= N.
  int lo(int m) const { return std::max(0, m - n_); }
  int hi(int m) const { return std::min(m, n_); }
  int dim(int m) const { return (m < 0 || m > 2 * n_) ? 0 : hi(m) - lo(m) + 1; }

  /// Start of block (k, m), or -1 when the block does not exist.
  std::ptrdiff_t offset(int k, int m) const {
    if (k < 0 || k > band_ || m < k || m > 2 * n_) return -1;
    return offset_[index(k, m)];
  }

 private:
  std::size_t index(int k, int m) const {
    return static_cast<std::size_t>(k * (2 * n_ + 1) + m);
  }

  int n_ = 0;
  int band_ = 0;
  std::ptrdiff_t size_ = 0;
  std::vector<std::ptrdiff_t> offset_;
};

class TruncatedState {
 public:
  TruncatedState() = default;
  TruncatedState(const SectorLayout& layout, Eigen::VectorXcd data, bool projected = false)
      : layout_(layout), data_(std::move(data)), projected_(projected) {
    if (data_.size() != layout_.size()) throw InputError("TruncatedState: size mismatch");
  }

  static TruncatedState zero(int cutoff, int max_band) {
    SectorLayout l(cutoff, max_band);
    return TruncatedState(l, Eigen::VectorXcd::Zero(l.size()));
  }

  const SectorLayout& layout() const { return layout_; }
  int cutoff() const { return layout_.cutoff(); }
  int max_band() const { return layout_.max_band(); }
  const Eigen::VectorXcd& data() const { return data_; }
  Eigen::VectorXcd& data() { return data_; }
  /// True when coherences outside the stored bands were discarded, so the
  /// stored blocks are not a complete density operator.
  bool projected() const { return projected_; }

  /// <j, b| rho |j2, b2>; zero outside the stored bands.
  cplx element(int j, int b, int j2, int b2) const {
    const int n = cutoff();
    if (j < 0 || b < 0 || j2 < 0 || b2 < 0 || j > n || b > n || j2 > n || b2 > n) return 0.0;
    const int m = j + b;
    const int m2 = j2 + b2;
    const int k = m - m2;
    if (k < 0) return std::conj(element(j2, b2, j, b));
    const std::ptrdiff_t off = layout_.offset(k, m);
    if (off < 0) return 0.0;
    const int cols = layout_.dim(m2);
    return data_[off + static_cast<std::ptrdiff_t>(j - layout_.lo(m)) * cols +
                 (j2 - layout_.lo(m2))];
  }

  void set(int j, int b, int j2, int b2, cplx v) {
    const int m = j + b;
    const int m2 = j2 + b2;
    const int k = m - m2;
    const std::ptrdiff_t off = layout_.offset(k, m);
    if (off < 0) throw InputError("TruncatedState::set: element outside stored bands");
    data_[off + static_cast<std::ptrdiff_t>(j - layout_.lo(m)) * layout_.dim(m2) +
          (j2 - layout_.lo(m2))] = v;
  }

 private:
  SectorLayout layout_;
  Eigen::VectorXcd data_;
  bool projected_ = false;
};

// --------------------------------------------------------------------------
// Builders

/// Keeps the bands 0..max_band of a dense operator on the (N+1)^2 space,
/// basis index j * (N+1) + b.
inline TruncatedState from_dense(const Eigen::MatrixXcd& rho, int cutoff, int max_band) {
  const int d = (cutoff + 1) * (cutoff + 1);
  if (rho.rows() != d || rho.cols() != d) throw InputError("fock::from_dense: wrong dimension");
  TruncatedState s = TruncatedState::zero(cutoff, max_band);
  bool dropped = false;
  for (int j = 0; j <= cutoff; ++j) {
    for (int b = 0; b <= cutoff; ++b) {
      for (int j2 = 0; j2 <= cutoff; ++j2) {
        for (int b2 = 0; b2 <= cutoff; ++b2) {
          const cplx v = rho(j * (cutoff + 1) + b, j2 * (cutoff + 1) + b2);
          const int k = (j + b) - (j2 + b2);
          if (k < 0) continue;
          if (k > max_band) {
            dropped = dropped || v != 0.0;
            continue;
          }
          s.set(j, b, j2, b2, v);
        }
      }
    }
  }
  return TruncatedState(s.layout(), s.data(), dropped);
}

/// Dense (N+1)^2 matrix; bands beyond max_band read as zero.
inline Eigen::MatrixXcd to_dense(const TruncatedState& s) {
  const int n = s.cutoff();
  const int d = (n + 1) * (n + 1);
  Eigen::MatrixXcd rho(d, d);
  for (int j = 0; j <= n; ++j)
    for (int b = 0; b <= n; ++b)
      for (int j2 = 0; j2 <= n; ++j2)
        for (int b2 = 0; b2 <= n; ++b2)
          rho(j * (n + 1) + b, j2 * (n + 1) + b2) = s.element(j, b, j2, b2);
  return rho;
}

inline TruncatedState vacuum_state(int cutoff, int max_band = 0) {
  TruncatedState s = TruncatedState::zero(cutoff, max_band);
  s.set(0, 0, 0, 0, 1.0);
  return s;
}

inline TruncatedState fock_state(int j, int b, int cutoff, int max_band = 0) {
  if (j < 0 || b < 0 || j > cutoff || b > cutoff) throw InputError("fock_state: outside cutoff");
  TruncatedState s = TruncatedState::zero(cutoff, max_band);
  s.set(j, b, j, b, 1.0);
  return s;
}

/// Product of geometric distributions with means n_l, n_g, renormalised on
/// the truncated space.
inline TruncatedState thermal_state(double n_l, double n_g, int cutoff, int max_band = 0) {
  if (!(n_l >= 0.0) || !(n_g >= 0.0)) throw InputError("thermal_state: occupations must be >= 0");
  auto weights = [cutoff](double nbar) {
    std::vector<double> w(static_cast<std::size_t>(cutoff + 1));
    const double r = nbar / (nbar + 1.0);
    double p = 1.0 / (nbar + 1.0);
    double total = 0.0;
    for (auto& x : w) {
      x = p;
      total += p;
      p *= r;
    }
    for (auto& x : w) x /= total;
    return w;
  };
  const auto wl = weights(n_l);
  const auto wg = weights(n_g);
  TruncatedState s = TruncatedState::zero(cutoff, max_band);
  for (int j = 0; j <= cutoff; ++j)
    for (int b = 0; b <= cutoff; ++b) s.set(j, b, j, b, wl[j] * wg[b]);
  return s;
}

/// |alpha>|beta>, normalised on the truncated space. Coherences between
/// sectors further apart than max_band are discarded (they never feed back
/// into the kept bands).
inline TruncatedState coherent_state(cplx alpha, cplx beta, int cutoff, int max_band = 2) {
  auto amplitudes = [cutoff](cplx a) {
    std::vector<cplx> c(static_cast<std::size_t>(cutoff + 1));
    c[0] = 1.0;
    for (int n = 1; n <= cutoff; ++n) c[n] = c[n - 1] * a / std::sqrt(static_cast<double>(n));
    double norm = 0.0;
    for (const auto& x : c) norm += std::norm(x);
    for (auto& x : c) x /= std::sqrt(norm);
    return c;
  };
  const auto cl = amplitudes(alpha);
  const auto cg = amplitudes(beta);
  TruncatedState s = TruncatedState::zero(cutoff, max_band);
  bool dropped = false;
  for (int j = 0; j <= cutoff; ++j)
    for (int b = 0; b <= cutoff; ++b)
      for (int j2 = 0; j2 <= cutoff; ++j2)
        for (int b2 = 0; b2 <= cutoff; ++b2) {
          const int k = (j + b) - (j2 + b2);
          if (k < 0) continue;
          const cplx v = cl[j] * cg[b] * std::conj(cl[j2] * cg[b2]);
          if (k > max_band) {
            dropped = dropped || v != 0.0;
            continue;
          }
          s.set(j, b, j2, b2, v);
        }
  return TruncatedState(s.layout(), s.data(), dropped);
}

// --------------------------------------------------------------------------
// Generator

/// Precomputed per-element data for the master-equation right-hand side.
class Generator {
 public:
  Generator(const SectorLayout& layout, const ModelParams& p) : layout_(layout), p_(p) {
    const int n = layout.cutoff();
    sq_.resize(static_cast<std::size_t>(n + 2));
    for (int i = 0; i <= n + 1; ++i) sq_[i] = std::sqrt(static_cast<double>(i));
    zeros_.assign(static_cast<std::size_t>(n + 2), cplx(0.0));
    bra_.resize(static_cast<std::size_t>(2 * n + 1));
    for (int m2 = 0; m2 <= 2 * n; ++m2) {
      BraSector& bs = bra_[m2];
      const int lo2 = layout.lo(m2), hi2 = layout.hi(m2);
      const int cols = hi2 - lo2 + 1;
      for (auto* v : {&bs.h_dn, &bs.h_up, &bs.decay, &bs.w_l, &bs.w_g, &bs.w_p}) {
        v->assign(static_cast<std::size_t>(cols), 0.0);
      }
      for (int j2 = lo2; j2 <= hi2; ++j2) {
        const int b2 = m2 - j2;
        const int c = j2 - lo2;
        if (j2 > lo2) bs.h_dn[c] = sq_[j2] * sq_[b2 + 1];
        if (j2 < hi2) bs.h_up[c] = sq_[j2 + 1] * sq_[b2];
        bs.decay[c] = half_decay(j2, b2);
        if (j2 + 1 <= n) bs.w_l[c] = sq_[j2 + 1];
        if (b2 + 1 <= n) bs.w_g[c] = sq_[b2 + 1];
        if (b2 >= 1) bs.w_p[c] = sq_[b2];
      }
      // Column of bra (j2 + 1, b2), (j2, b2 + 1) and (j2, b2 - 1) in the
      // neighbouring sectors, relative to c.
      bs.shift_l = 1 - (layout.lo(m2 + 1) - lo2);
      bs.shift_g = lo2 - layout.lo(m2 + 1);
      bs.shift_p = lo2 - layout.lo(m2 - 1);
    }
  }

  const SectorLayout& layout() const { return layout_; }

  /// Half the anticommutator weight of |j, b>: (2 gL j + 2 gG b + 2 GG (b+1)) / 2,
  /// with the pump term absent on the top layer b = N, where a_G^+ vanishes.
  double half_decay(int j, int b) const {
    const int n = layout_.cutoff();
    return p_.loss_l * j + p_.loss_g * b + p_.gain_g * (b < n ? b + 1 : 0);
  }

  void operator()(const Eigen::VectorXcd& rho, Eigen::VectorXcd& out) const {
    const int n = layout_.cutoff();
    const double g = p_.coupling;
    const cplx* in = rho.data();
    cplx* o = out.data();
    const cplx* zeros = zeros_.data();
    for (int k = 0; k <= layout_.max_band(); ++k) {
      for (int m = k; m <= 2 * n; ++m) {
        const int m2 = m - k;
        const BraSector& bs = bra_[m2];
        const int lo = layout_.lo(m), hi = layout_.hi(m);
        const int cols = layout_.dim(m2);
        const std::ptrdiff_t off = layout_.offset(k, m);
        const std::ptrdiff_t up = layout_.offset(k, m + 1);
        const std::ptrdiff_t down = m2 >= 1 ? layout_.offset(k, m - 1) : -1;
        const int lo_up = layout_.lo(m + 1);
        const int lo_dn = layout_.lo(m - 1);
        const int cols_up = layout_.dim(m2 + 1);
        const int cols_dn = layout_.dim(m2 - 1);
        for (int j = lo; j <= hi; ++j) {
          const int b = m - j;
          const cplx* row = in + off + static_cast<std::ptrdiff_t>(j - lo) * cols;
          cplx* orow = o + off + static_cast<std::ptrdiff_t>(j - lo) * cols;
          const double hk_dn = j > lo ? sq_[j] * sq_[b + 1] : 0.0;  // from ket j-1
          const double hk_up = j < hi ? sq_[j + 1] * sq_[b] : 0.0;  // from ket j+1
          const double dk = half_decay(j, b);
          const cplx* row_dn = j > lo ? row - cols : row;
          const cplx* row_up = j < hi ? row + cols : row;
          // Rows of neighbouring sectors feeding this one through quantum
          // jumps, already offset so that column c lines up; a zero row
          // stands in where the jump does not exist.
          const bool has_l = up >= 0 && j + 1 <= n;
          const bool has_g = up >= 0 && b + 1 <= n;
          const bool has_p = down >= 0 && b >= 1;
          const cplx* r_l =
              has_l ? in + up + static_cast<std::ptrdiff_t>(j + 1 - lo_up) * cols_up : zeros;
          const cplx* r_g =
              has_g ? in + up + static_cast<std::ptrdiff_t>(j - lo_up) * cols_up : zeros;
          const cplx* r_p =
              has_p ? in + down + static_cast<std::ptrdiff_t>(j - lo_dn) * cols_dn : zeros;
          const double cl = has_l ? 2.0 * p_.loss_l * sq_[j + 1] : 0.0;
          const double cg = has_g ? 2.0 * p_.loss_g * sq_[b + 1] : 0.0;
          const double cp = has_p ? 2.0 * p_.gain_g * sq_[b] : 0.0;
          const int sl = has_l ? bs.shift_l : 0;
          const int sg = has_g ? bs.shift_g : 0;
          const int sp = has_p ? bs.shift_p : 0;

          auto column = [&](int c, int cm, int cp1, int il, int ig, int ip) {
            const cplx ham = hk_dn * row_dn[c] + hk_up * row_up[c] - bs.h_dn[c] * row[cm] -
                             bs.h_up[c] * row[cp1];
            return cplx(g * ham.imag(), -g * ham.real()) - (dk + bs.decay[c]) * row[c] +
                   cl * bs.w_l[c] * r_l[il] + cg * bs.w_g[c] * r_g[ig] +
                   cp * bs.w_p[c] * r_p[ip];
          };
          // Edge columns clamp their neighbour indices (the matching weights
          // are zero there); interior columns run without checks.
          auto clamp_l = [&](int c) { return has_l ? std::clamp(c + sl, 0, cols_up - 1) : 0; };
          auto clamp_g = [&](int c) { return has_g ? std::clamp(c + sg, 0, cols_up - 1) : 0; };
          auto clamp_p = [&](int c) { return has_p ? std::clamp(c + sp, 0, cols_dn - 1) : 0; };
          const int last = cols - 1;
          // Band-0 blocks are Hermitian, and so are their derivatives: fill
          // the upper triangle here and mirror it below.
          int c = k == 0 ? j - lo : 0;
          if (c == 0) {
            orow[0] = column(0, 0, std::min(1, last), clamp_l(0), clamp_g(0), clamp_p(0));
            c = 1;
          }
          for (; c < last; ++c) {
            orow[c] = column(c, c - 1, c + 1, has_l ? c + sl : 0, has_g ? c + sg : 0,
                             has_p ? c + sp : 0);
          }
          if (c == last && last > 0) {
            orow[last] = column(last, last - 1, last, clamp_l(last), clamp_g(last),
                                clamp_p(last));
          }
        }
        if (k == 0) {
          cplx* blk = o + off;
          constexpr int tile = 16;
          for (int r0 = 0; r0 < cols; r0 += tile) {
            for (int c0 = 0; c0 <= r0; c0 += tile) {
              const int r1 = std::min(r0 + tile, cols);
              for (int r = r0; r < r1; ++r) {
                const int c1 = std::min(c0 + tile, r);
                for (int c = c0; c < c1; ++c) blk[r * cols + c] = std::conj(blk[c * cols + r]);
              }
            }
          }
        }
      }
    }
  }

 private:
  // Weights that depend only on the bra sector m2, per column j2 - lo(m2).
  struct BraSector {
    std::vector<double> h_dn, h_up, decay, w_l, w_g, w_p;
    int shift_l = 0, shift_g = 0, shift_p = 0;
  };

  SectorLayout layout_;
  ModelParams p_;
  std::vector<double> sq_;
  std::vector<BraSector> bra_;
  std::vector<cplx> zeros_;
};

inline TruncatedState lindblad_rhs(const TruncatedState& rho, const ModelParams& p) {
  Generator gen(rho.layout(), p);
  Eigen::VectorXcd out(rho.data().size());
  gen(rho.data(), out);
  return TruncatedState(rho.layout(), out, rho.projected());
}

// --------------------------------------------------------------------------
// Observables

/// Tr rho, from the band-0 diagonal.
inline cplx trace(const TruncatedState& s) {
  cplx t = 0.0;
  const int n = s.cutoff();
  for (int j = 0; j <= n; ++j)
    for (int b = 0; b <= n; ++b) t += s.element(j, b, j, b);
  return t;
}

/// Population with either mode in its top Fock level N.
inline double top_layer_population(const TruncatedState& s) {
  const int n = s.cutoff();
  double p = 0.0;
  for (int i = 0; i <= n; ++i) {
    p += s.element(n, i, n, i).real();
    if (i < n) p += s.element(i, n, i, n).real();
  }
  return p;
}

/// Largest |B - B^+| over the band-0 blocks.
inline double hermiticity_residual(const TruncatedState& s) {
  const auto& l = s.layout();
  double r = 0.0;
  for (int m = 0; m <= 2 * s.cutoff(); ++m) {
    const int d = l.dim(m);
    Eigen::Map<const Eigen::MatrixXcd> blk(s.data().data() + l.offset(0, m), d, d);
    r = std::max(r, (blk - blk.adjoint()).cwiseAbs().maxCoeff());
  }
  return r;
}

/// Smallest eigenvalue of rho. With only band 0 stored rho is block diagonal
/// and each block is diagonalised separately; otherwise the dense operator
/// is assembled.
inline double min_eigenvalue(const TruncatedState& s) {
  if (s.projected()) throw InputError("min_eigenvalue: state holds only some bands");
  const auto& l = s.layout();
  if (s.max_band() == 0) {
    double e = 1.0;
    for (int m = 0; m <= 2 * s.cutoff(); ++m) {
      const int d = l.dim(m);
      Eigen::Map<const Eigen::MatrixXcd> blk(s.data().data() + l.offset(0, m), d, d);
      const Eigen::MatrixXcd h = 0.5 * (blk + blk.adjoint());
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h, Eigen::EigenvaluesOnly);
      e = std::min(e, es.eigenvalues().minCoeff());
    }
    return e;
  }
  const Eigen::MatrixXcd rho = to_dense(s);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(0.5 * (rho + rho.adjoint()),
                                                     Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

/// Normal-ordered moment <a_L^+p a_G^+q a_L^r a_G^s>, with the ladder
/// operators truncated at N.
inline cplx expectation(const TruncatedState& s, int p, int q, int r, int t) {
  if (std::abs((r + t) - (p + q)) > s.max_band()) {
    throw InputError("fock::expectation: moment needs bands that are not stored");
  }
  const int n = s.cutoff();
  auto falling = [](int x, int k) {  // sqrt(x! / (x-k)!)
    double v = 1.0;
    for (int i = 0; i < k; ++i) v *= std::sqrt(static_cast<double>(x - i));
    return v;
  };
  cplx sum = 0.0;
  // Tr(X rho) = sum_u <v|X|u> rho_uv with v = (j - r + p, b - t + q).
  for (int j = r; j <= n; ++j) {
    for (int b = t; b <= n; ++b) {
      const int j2 = j - r + p;
      const int b2 = b - t + q;
      if (j2 > n || b2 > n) continue;
      const double x = falling(j, r) * falling(j2, p) * falling(b, t) * falling(b2, q);
      sum += x * s.element(j, b, j2, b2);
    }
  }
  return sum;
}

/// Ladder covariance <{A_i, A_j^+}> - 2 <A_i><A_j^+> from the stored moments.
inline CovarianceAA covariance_from_state(const TruncatedState& s) {
  const bool first = s.max_band() >= 1;
  const bool anomalous = s.max_band() >= 2;
  const cplx al = first ? expectation(s, 0, 0, 1, 0) : cplx(0.0);
  const cplx ag = first ? expectation(s, 0, 0, 0, 1) : cplx(0.0);
  const cplx mean[2] = {al, ag};
  // <a_j^+ a_i>
  cplx nn[2][2];
  nn[0][0] = expectation(s, 1, 0, 1, 0);
  nn[1][1] = expectation(s, 0, 1, 0, 1);
  nn[1][0] = expectation(s, 0, 1, 1, 0);  // <a_G^+ a_L>
  nn[0][1] = std::conj(nn[1][0]);
  // <a_i a_j>
  cplx aa[2][2] = {{0.0, 0.0}, {0.0, 0.0}};
  if (anomalous) {
    aa[0][0] = expectation(s, 0, 0, 2, 0);
    aa[1][1] = expectation(s, 0, 0, 0, 2);
    aa[0][1] = aa[1][0] = expectation(s, 0, 0, 1, 1);
  }
  Eigen::Matrix4cd m;
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      const double kd = i == j ? 1.0 : 0.0;
      m(i, j) = 2.0 * nn[j][i] + kd - 2.0 * mean[i] * std::conj(mean[j]);
      m(i, j + 2) = 2.0 * aa[i][j] - 2.0 * mean[i] * mean[j];
      m(i + 2, j) = std::conj(m(i, j + 2));
      m(i + 2, j + 2) = std::conj(m(i, j));
    }
  }
  return CovarianceAA::unchecked(m);
}

/// Largest normal-ordered third cumulant over all products of three of
/// (a_L^+, a_G^+, a_L, a_G). Zero for Gaussian states. Needs band 3.
inline double max_third_cumulant(const TruncatedState& s) {
  // Exponent vector (p, q, r, t) of a monomial.
  using Exp = std::array<int, 4>;
  auto moment = [&s](const Exp& e) { return expectation(s, e[0], e[1], e[2], e[3]); };
  auto add = [](Exp a, const Exp& b) {
    for (int i = 0; i < 4; ++i) a[i] += b[i];
    return a;
  };
  const Exp unit[4] = {Exp{1, 0, 0, 0}, Exp{0, 1, 0, 0}, Exp{0, 0, 1, 0}, Exp{0, 0, 0, 1}};
  double worst = 0.0;
  for (int x = 0; x < 4; ++x)
    for (int y = x; y < 4; ++y)
      for (int z = y; z < 4; ++z) {
        const Exp& ex = unit[x];
        const Exp& ey = unit[y];
        const Exp& ez = unit[z];
        const cplx mx = moment(ex), my = moment(ey), mz = moment(ez);
        const cplx k3 = moment(add(add(ex, ey), ez)) - moment(add(ex, ey)) * mz -
                        moment(add(ex, ez)) * my - moment(add(ey, ez)) * mx +
                        2.0 * mx * my * mz;
        worst = std::max(worst, std::abs(k3));
      }
  return worst;
}

// --------------------------------------------------------------------------
// Time integration

struct OracleOptions {
  double rtol = 1e-10;
  double atol = 1e-12;
  /// Largest tolerated population in the top Fock layer.
  double leakage_tol = 1e-6;
};

struct OracleDiagnostics {
  ode::Stats stats;
  /// |Tr rho(t) - Tr rho(0)| at each sample; recorded, never corrected.
  std::vector<double> trace_drift;
  double max_leakage = 0.0;
};

/// Integrates from rho0 at t = 0 and calls observer(i, t, state) for each
/// t_grid[i]. Throws CutoffExceeded as soon as a sample leaks more than
/// leakage_tol into the top layer.
template <typename Observer>
OracleDiagnostics integrate_each(const TruncatedState& rho0, const ModelParams& p,
                                 std::span<const double> t_grid, Observer&& observer,
                                 const OracleOptions& opt = {}) {
  validate(p);
  OracleDiagnostics diag;
  if (t_grid.empty()) return diag;
  if (t_grid.front() < 0.0) throw InputError("fock::integrate: times must be >= 0");
  std::vector<double> times;
  const bool prepend = t_grid.front() > 0.0;
  if (prepend) times.push_back(0.0);
  times.insert(times.end(), t_grid.begin(), t_grid.end());

  const Generator gen(rho0.layout(), p);
  const cplx tr0 = trace(rho0);
  ode::AdaptiveOptions ao;
  ao.rtol = opt.rtol;
  ao.atol = opt.atol;
  auto rhs = [&gen](double, const Eigen::VectorXcd& y, Eigen::VectorXcd& dy) { gen(y, dy); };
  diag.stats = ode::integrate(
      rhs, Eigen::VectorXcd(rho0.data()), std::span<const double>(times), ao,
      [&](std::size_t i, double t, const Eigen::VectorXcd& y) {
        const TruncatedState s(rho0.layout(), y, rho0.projected());
        const double leak = top_layer_population(s);
        diag.max_leakage = std::max(diag.max_leakage, leak);
        if (leak > opt.leakage_tol) {
          std::ostringstream msg;
          msg << "fock::integrate: top-layer population " << leak << " at t=" << t
              << " exceeds " << opt.leakage_tol << " (cutoff N=" << rho0.cutoff() << ")";
          throw CutoffExceeded(msg.str());
        }
        if (prepend && i == 0) return;
        diag.trace_drift.push_back(std::abs(trace(s) - tr0));
        observer(prepend ? i - 1 : i, t, s);
      });
  return diag;
}

inline std::vector<TruncatedState> integrate(const TruncatedState& rho0, const ModelParams& p,
                                             std::span<const double> t_grid,
                                             const OracleOptions& opt = {},
                                             OracleDiagnostics* diagnostics = nullptr) {
  std::vector<TruncatedState> out;
  out.reserve(t_grid.size());
  OracleDiagnostics d = integrate_each(
      rho0, p, t_grid,
      [&out](std::size_t, double, const TruncatedState& s) { out.push_back(s); }, opt);
  if (diagnostics) *diagnostics = std::move(d);
  return out;
}

}  // namespace gainloss::fock

#endif  // GAINLOSS_FOCK_ORACLE_HPP
