#pragma once

// Autoregressive coefficients embedded in the rows of inverse covariance
// sections: VAR(infinity) coefficients, finite-order projections, their
// distance from each other and from the stationary approximation.

#include <vector>

#include "nonstatcov/models.hpp"
#include "nonstatcov/reports.hpp"

namespace nonstatcov {

struct VarCoefficients {
  long t = 0;
  int order = 0;
  /// phis[j - 1] = Phi_j, j = 1 .. order.
  std::vector<Matrix> phis;
  Matrix sigma;
  /// Largest entrywise difference between the two computation paths (finite order only).
  double path_discrepancy = 0.0;
};

/// Coefficients from the bottom block row of the inverse of a section whose
/// last time index is the prediction target: Sigma = (D_TT)^{-1},
/// Phi_j = -Sigma D_{T,T-j}.
VarCoefficients var_from_section(const BlockWindow& c, int order);

/// VAR(infinity) coefficients Phi_{T,1..J} from the one-sided section
/// [T - depth, T]. depth < 0 selects J + 100; depth must be at least J + 50.
VarCoefficients var_coeffs_infinite(const ModelSpec& m, long n, long big_t, int big_j,
                                    long depth = -1);

/// Largest change of the bottom-row coefficients when depth grows by 50.
double var_truncation_drift(const ModelSpec& m, long n, long big_t, int big_j, long depth);

/// Best linear predictor of X_T from X_{T-1..T-d}. Computed both from the
/// bottom row of C(T-d, T)^{-1} and from the block normal equations; throws
/// ConditioningError if the two disagree by more than 1e-8.
VarCoefficients var_coeffs_finite(const ModelSpec& m, long n, long big_t, int d);

/// Same two-path projection on an arbitrary symmetric section whose last
/// time index is the target.
VarCoefficients var_projection(const BlockWindow& c, int d);

struct BaxterReport {
  /// ||Phi_{T,d,j} - Phi_{T,j}|| against zeta(d)^{kappa-3/2} zeta(d-j)^{kappa-3/2}.
  GapReport per_lag;
  double summed = 0.0;
  /// zeta(d)^{kappa-3/2}.
  double summed_envelope = 0.0;
  double summed_constant = 0.0;
};

BaxterReport baxter_gaps(const ModelSpec& m, long n, long big_t, int d, int big_j);

/// Stationary VAR(d) of X_t(u) by block Yule-Walker.
VarCoefficients stationary_var_coeffs(const ModelSpec& m, double u, int d);

/// Stationary VAR(infinity) coefficients Phi_{1..J}(u) from a one-sided
/// Toeplitz section of length depth + 1.
VarCoefficients stationary_var_coeffs_infinite(const ModelSpec& m, double u, int big_j,
                                               long depth = -1);

struct VarSmoothness {
  /// ||Sigma_T^(N) - Sigma(T/N)|| against 1/N (a single entry).
  GapReport sigma;
  /// ||Phi_{T,j}^(N) - Phi_j(T/N)|| against zeta(j)^{kappa-2} min(2 zeta(j), 1/N).
  GapReport phi;
};

VarSmoothness var_smoothness_gap(const ModelSpec& m, long n, long big_t, int big_j,
                                 long depth = -1);

struct CombinedGap {
  double measured = 0.0;
  /// 1/N + zeta(d)^{kappa-3/2}.
  double envelope = 0.0;
};

/// sum_j ||Phi_{T,d,j} - Phi_{d,j}(T/N)||.
CombinedGap finite_order_combined_gap(const ModelSpec& m, long n, long big_t, int d);

struct KolmogorovGap {
  /// log det Sigma_T^(N).
  double lhs = 0.0;
  /// (2 pi)^{-1} \int_0^{2 pi} log det f(omega; T/N) d omega.
  double rhs = 0.0;
  double gap = 0.0;
};

KolmogorovGap kolmogorov_gap(const ModelSpec& m, long n, long big_t, long depth = 300);

}  // namespace nonstatcov
