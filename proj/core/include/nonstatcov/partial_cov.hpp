#pragma once

// Partial covariances between two components after removing the linear
// influence of every lag of the remaining components, computed as Schur
// complements of the component-grouped covariance window.

#include <complex>
#include <vector>

#include "nonstatcov/models.hpp"
#include "nonstatcov/operator_core.hpp"
#include "nonstatcov/reports.hpp"

namespace nonstatcov {

/// Component-grouped view of a BlockWindow: lag(a, b)(i, k) = block(t_lo + i, t_lo + k)(a, b).
class GroupedWindow {
 public:
  GroupedWindow(long t_lo, int p, std::vector<Matrix> lags, bool symmetric);

  long t_lo() const { return t_lo_; }
  long t_hi() const { return t_lo_ + length() - 1; }
  int p() const { return p_; }
  long length() const { return lags_.front().rows(); }
  bool symmetric() const { return symmetric_; }
  const Matrix& lag(int a, int b) const { return lags_[static_cast<std::size_t>(a * p_ + b)]; }

  /// (pL) x (pL) matrix with component-major ordering: row a * L + i is X^{(a)}_{t_lo + i}.
  Matrix flat() const;

 private:
  long t_lo_;
  int p_;
  bool symmetric_;
  std::vector<Matrix> lags_;
};

GroupedWindow regroup_by_component(const BlockWindow& c);
BlockWindow ungroup(const GroupedWindow& g);

struct PartialPair {
  int a = 0;
  int b = 0;
  /// 2 x 2 blocks Delta_{t,tau} over the interior window.
  BlockWindow deltas;
  std::vector<int> conditioning_set;
  long pad = 0;
};

/// Schur complement of the grouped window onto components {a, b}, conditioning
/// on every time index of the other components; reports [t_lo + pad, t_hi - pad].
PartialPair partial_cov_pair(const BlockWindow& c, int a, int b, long pad = 0);

/// rho^{(a,a)}_{t,tau} on the interior window: the Schur complement with S = {a}.
Matrix self_partial_cov(const BlockWindow& c, int a, long pad = 0);

/// Delta_r(u) for r = 0 .. max_lag from the centre of a Toeplitz section padded by `pad`.
std::vector<Matrix> stationary_partial_pair(const ModelSpec& m, double u, int a, int b,
                                            long max_lag, long pad);

/// ||Delta_{t,tau,N} - Delta_{tau-t}(t/N)|| for t in [t_lo, t_hi] (every
/// `t_stride`-th) and |t - tau| <= max_lag, against zeta^{kappa-2} min(1/N, zeta).
GapReport partial_smoothness_gap(const ModelSpec& m, long n, int a, int b, long t_lo, long t_hi,
                                 long max_lag, long pad, long t_stride = 1);

/// ||Delta_r(u) - Delta_r(v)|| for |r| <= max_lag against |u - v| zeta(r)^{kappa-1}.
GapReport partial_lipschitz_gap(const ModelSpec& m, double u, double v, int a, int b, long max_lag,
                                long pad);

/// g_{a,b}(omega; u) = -Gamma_ab / sqrt(Gamma_aa Gamma_bb) with Gamma = f(omega; u)^{-1}.
std::vector<std::complex<double>> partial_spectral_coherence(const ModelSpec& m, double u, int a,
                                                             int b,
                                                             const std::vector<double>& omegas);

struct CoherenceReport {
  /// |assembled - g| per omega (t = omega index, tau = 0).
  GapReport gaps;
  std::vector<std::complex<double>> assembled;
  std::vector<std::complex<double>> target;
  /// Largest |Im| of the self-partial Fourier sums.
  double imag_residue = 0.0;
  bool imag_flag = false;
  long max_lag = 0;
};

/// Coherence assembled from the nonstationary partial covariances
/// rho_{t,t+r,N}, |r| <= max_lag, compared with g_{a,b}(omega; t/N).
CoherenceReport coherence_consistency_gap(const ModelSpec& m, long n, long t, int a, int b,
                                          const std::vector<double>& omegas, long max_lag,
                                          long pad);

/// Smallest lag beyond which every partial covariance norm at u is below `tol`.
long default_partial_max_lag(const ModelSpec& m, double u, int a, int b, long pad,
                             double tol = 1e-8, long cap = 200);

}  // namespace nonstatcov
