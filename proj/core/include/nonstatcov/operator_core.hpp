#pragma once

// Finite sections of block operators and the matrix bounds shared by the
// rest of the library.
//
// A BlockWindow is the restriction of an infinite block matrix
// (A_{t,tau}; t, tau in Z) with p x p blocks to t_lo <= t, tau <= t_hi. It is
// stored flattened in time-major order: block row t occupies rows
// (t - t_lo) * p ... (t - t_lo + 1) * p - 1.

#include <algorithm>
#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace nonstatcov {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using CMatrix = Eigen::MatrixXcd;

/// gu(j) = max(1, |j|).
double gu(long j);

/// zeta(j) = max(1, log gu(j)) / gu(j); equals 1 for |j| <= 1.
double zeta(long j);

struct DecayWeights {
  double gu;
  double zeta;
};

DecayWeights decay_weights(long j);

struct EigRange {
  double lambda_min;
  double lambda_max;

  double condition() const { return lambda_max / lambda_min; }
};

/// lambda_min / lambda_max at or below this is treated as singular.
inline constexpr double kSpdThreshold = 1e-12;

class BlockWindow {
 public:
  /// Zero window over [t_lo, t_hi] with p x p blocks.
  BlockWindow(long t_lo, long t_hi, int p);

  /// Wraps a flattened (L p) x (L p) matrix. With `symmetric`, the matrix
  /// must be exactly symmetric or an InputError is thrown.
  BlockWindow(long t_lo, int p, Matrix flat, bool symmetric);

  /// Builds a symmetric window from the blocks on and above the diagonal;
  /// block(tau, t) is set to block(t, tau)^T exactly.
  template <class BlockFn>
  static BlockWindow symmetric_from(long t_lo, long t_hi, int p, BlockFn&& upper_block);

  /// Same as symmetric_from but upper_block(t, tau) is called only for
  /// tau - t <= bandwidth; everything further out is zero.
  template <class BlockFn>
  static BlockWindow symmetric_banded_from(long t_lo, long t_hi, int p, long bandwidth,
                                           BlockFn&& upper_block);

  /// General (not necessarily symmetric) window from block(t, tau).
  template <class BlockFn>
  static BlockWindow from_blocks(long t_lo, long t_hi, int p, BlockFn&& block);

  long t_lo() const { return t_lo_; }
  long t_hi() const { return t_hi_; }
  int p() const { return p_; }
  long length() const { return t_hi_ - t_lo_ + 1; }
  Eigen::Index dim() const { return flat_.rows(); }
  bool symmetric() const { return symmetric_; }
  bool contains(long t) const { return t >= t_lo_ && t <= t_hi_; }

  /// Row offset of block row t in the flattened matrix.
  Eigen::Index offset(long t) const { return static_cast<Eigen::Index>(t - t_lo_) * p_; }

  Matrix block(long t, long tau) const;
  const Matrix& flat() const { return flat_; }

  /// Sub-window [lo, hi] (must lie inside this window).
  BlockWindow section(long lo, long hi) const;

  /// Window scaled by c (symmetry preserved).
  BlockWindow scaled(double c) const;

 private:
  long t_lo_;
  long t_hi_;
  int p_;
  bool symmetric_;
  Matrix flat_;
};

class BandedBlockWindow {
 public:
  BandedBlockWindow(BlockWindow base, long bandwidth);

  const BlockWindow& window() const { return base_; }
  long bandwidth() const { return bandwidth_; }

 private:
  BlockWindow base_;
  long bandwidth_;
};

/// Largest singular value. Throws InputError on non-finite entries.
double spectral_norm(const Matrix& a);

/// Extremal eigenvalues of a symmetric window. Throws InputError if the
/// window is not exactly symmetric.
EigRange sym_eig_range(const BlockWindow& w);
EigRange sym_eig_range(const Matrix& symmetric);

/// Copies blocks with |t - tau| <= bandwidth and zeroes the rest.
BandedBlockWindow band_truncate(const BlockWindow& w, long bandwidth);

/// 2K/(kappa-1) (M-1)^{1-kappa}: bound on ||C - B_M||_2 when every
/// off-diagonal block satisfies ||C_{t,tau}|| <= K gu(t-tau)^{-kappa}.
double banded_error_bound(double k, double kappa, long bandwidth);

/// Geometric bound (1 + sqrt r)^2 / b * rho^{floor(|lag|/M) + 1} on the
/// off-diagonal blocks of the inverse of an SPD block-banded matrix with
/// spectrum in [a, b], r = b/a, rho = (sqrt r - 1)/(sqrt r + 1).
double demko_bound(double a, double b, long bandwidth, long lag);

/// A - B E^{-1} B^T. Throws ConditioningError if E is (numerically) singular.
Matrix schur_complement(const Matrix& a, const Matrix& b, const BlockWindow& e);
Matrix schur_complement(const Matrix& a, const Matrix& b, const Matrix& e);

/// Inverse of [[A, B], [C, D]] assembled blockwise from
/// A~ = (A - B D^{-1} C)^{-1}.
struct PartitionedInverse {
  Matrix top_left;
  Matrix top_right;
  Matrix bottom_left;
  Matrix bottom_right;

  Matrix assemble() const;
};

PartitionedInverse partitioned_inverse(const Matrix& a, const Matrix& b, const Matrix& c,
                                       const Matrix& d);

/// Inverse of a symmetric positive definite matrix, symmetrised exactly.
/// Throws ConditioningError when the Cholesky factorisation fails or the
/// reciprocal condition estimate is below kSpdThreshold.
Matrix spd_inverse(const Matrix& a);

/// max_t sum_tau ||block(t, tau)||_2 — bounds the spectral norm of a symmetric window.
double block_row_sum_bound(const BlockWindow& w);

/// (sum_l ||A_l||_2^2)^{1/2} — bounds the operator norm of the row [A_1 A_2 ...].
double stacked_row_bound(std::span<const Matrix> blocks);

/// max over |t - tau| = lag of ||block(t, tau)||_2, for lag = 0 .. L-1.
std::vector<double> max_norm_by_lag(const BlockWindow& w);

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
};

/// Ordinary least-squares line through (x_i, y_i). Needs at least two distinct x.
LineFit least_squares_line(std::span<const double> x, std::span<const double> y);

struct InequalityCheck {
  double lhs = 0.0;
  double rhs = 0.0;

  bool holds(double slack = 0.0) const { return lhs <= rhs + slack; }
};

/// ||cov(Y, X)||_2^2 against ||var(X)||_2 ||var(Y)||_2 for the sample
/// covariances of paired draws stored as the columns of x and y.
InequalityCheck matrix_cauchy_schwarz(const Matrix& x, const Matrix& y);

/// sum_j gu(j)^{-power} gu(j + y)^{-power} against (pi^2 + 3) gu(|y| - 1)^{-power}.
/// The sum runs over |j| <= j_max and adds a bound on the remaining tail;
/// j_max must be at least 2 |y| + 2.
InequalityCheck convolution_bound(int power, long y, long j_max = 1000000);

/// Per-block spectral norms, (L x L) with entry (i, j) = ||block(t_lo+i, t_lo+j)||_2.
Matrix block_norms(const BlockWindow& w);

// ---------------------------------------------------------------------------

template <class BlockFn>
BlockWindow BlockWindow::symmetric_from(long t_lo, long t_hi, int p, BlockFn&& upper_block) {
  return symmetric_banded_from(t_lo, t_hi, p, t_hi - t_lo, std::forward<BlockFn>(upper_block));
}

template <class BlockFn>
BlockWindow BlockWindow::symmetric_banded_from(long t_lo, long t_hi, int p, long bandwidth,
                                               BlockFn&& upper_block) {
  BlockWindow w(t_lo, t_hi, p);
  for (long t = t_lo; t <= t_hi; ++t) {
    const long last = std::min(t_hi, t + bandwidth);
    for (long tau = t; tau <= last; ++tau) {
      const Matrix blk = upper_block(t, tau);
      w.flat_.block(w.offset(t), w.offset(tau), p, p) = blk;
      if (tau != t) w.flat_.block(w.offset(tau), w.offset(t), p, p) = blk.transpose();
    }
  }
  // Diagonal blocks are symmetrised so the whole matrix is exactly symmetric.
  for (long t = t_lo; t <= t_hi; ++t) {
    auto d = w.flat_.block(w.offset(t), w.offset(t), p, p);
    const Matrix sym = 0.5 * (d + d.transpose());
    d = sym;
  }
  w.symmetric_ = true;
  return w;
}

template <class BlockFn>
BlockWindow BlockWindow::from_blocks(long t_lo, long t_hi, int p, BlockFn&& block) {
  BlockWindow w(t_lo, t_hi, p);
  for (long t = t_lo; t <= t_hi; ++t)
    for (long tau = t_lo; tau <= t_hi; ++tau)
      w.flat_.block(w.offset(t), w.offset(tau), p, p) = block(t, tau);
  w.symmetric_ = w.flat_ == w.flat_.transpose();
  return w;
}

}  // namespace nonstatcov
