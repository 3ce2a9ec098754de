#pragma once

// Finite-section inverses of covariance windows, banded Neumann
// approximations, and measured decay and smoothness of the inverse operator.

#include <vector>

#include "nonstatcov/models.hpp"
#include "nonstatcov/operator_core.hpp"
#include "nonstatcov/reports.hpp"

namespace nonstatcov {

struct InverseWindow {
  /// Interior section of the inverse.
  BlockWindow base;
  /// Blocks discarded on each side of the inverted source window.
  long source_pad = 0;
  /// Eigenvalue range of the inverted source window.
  EigRange conditioning{};
  /// ||C D - I||_inf on the source window.
  double residual = 0.0;
};

/// Inverts the (already padded) window C and keeps [t_lo + pad, t_hi - pad].
InverseWindow finite_section_inverse(const BlockWindow& c, long pad);

/// finite_section_inverse of cov_window over [t_lo - pad, t_hi + pad].
InverseWindow model_inverse(const ModelSpec& m, long n, long t_lo, long t_hi, long pad);

/// D_r(u) = block (t, t + r) of the inverse of the frozen covariance operator,
/// for r = 0 .. max_lag, read from the centre of a Toeplitz section padded by `pad`.
std::vector<Matrix> stationary_inverse_lags(const ModelSpec& m, double u, long max_lag, long pad);

/// d/du D_r(u) from the identity D' = -D C' D on the same Toeplitz section.
std::vector<Matrix> stationary_inverse_derivative(const ModelSpec& m, double u, long max_lag,
                                                  long pad);

struct NeumannResult {
  BlockWindow approx;
  /// Bound on ||approx - C^{-1}||_2: geometric tail plus 1e-12 ||B_M^{-1}||_2 / (1 - q) for rounding.
  double certificate = 0.0;
  /// Contraction factor q used in the certificate.
  double contraction = 0.0;
  /// ||B_M^{-1} (C - B_M)||_2 measured directly.
  double measured_contraction = 0.0;
  /// banded_error_bound(K_hat, kappa_hat, M) * ||B_M^{-1}||_2, or +inf when unavailable.
  double certified_contraction = 0.0;
  double k_hat = 0.0;
  double kappa_hat = 0.0;
};

/// sum_{s <= terms} (-B_M^{-1} (C - B_M))^s B_M^{-1} with a geometric tail
/// certificate. Throws DivergenceError when the contraction factor is not below 1.
NeumannResult neumann_inverse(const BlockWindow& c, long bandwidth, long terms);

/// Regression of log max_{|t-tau| = l} ||D_{t,tau}|| on log zeta(l) over
/// l in [2, L/3]. `exponent` is the fitted slope, `constant` the smallest K with
/// ||D_{t,tau}|| <= K zeta(t - tau)^{kappa_ref - 1} over the whole window.
DecayProfile inverse_decay_fit(const InverseWindow& d, double kappa_ref);

/// Inverse of the one-sided section (C_{t,tau}; T - L <= t, tau <= T).
InverseWindow one_sided_inverse(const ModelSpec& m, long n, long big_t, long depth);

/// ||[D^(N) - D(t/N)]_{t,tau}|| for t in [t_lo, t_hi] (every `t_stride`-th) and
/// |t - tau| <= max_lag, against zeta^{kappa-2} min(1/N, 2 zeta) and, as the
/// alternative shape, zeta^{kappa-2} min(1/N, 2/gu).
GapReport inverse_smoothness_gap(const ModelSpec& m, long n, long t_lo, long t_hi, long max_lag,
                                 long pad, long t_stride = 1);

/// ||D_r(u) - D_r(v)|| for |r| <= max_lag against |u - v| zeta(r)^{kappa-1}.
GapReport inverse_lipschitz_gap(const ModelSpec& m, double u, double v, long max_lag, long pad);

}  // namespace nonstatcov
