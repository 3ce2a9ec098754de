#pragma once

// Locally stationary process families and their second-order structure.
//
// Covariance convention: block (t, tau) of a covariance window is
// cov(X_t, X_tau), so the stationary approximation C_r(u) is the block
// (t, t + r) of the frozen process and C_{-r}(u) = C_r(u)^T. The local
// spectral density is f(omega; u) = sum_r C_r(u) e^{i r omega} with no 2 pi
// factor; C_r(u) = (2 pi)^{-1} \int_0^{2 pi} f(omega; u) e^{-i r omega} d omega.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "nonstatcov/operator_core.hpp"
#include "nonstatcov/reports.hpp"

namespace nonstatcov {

/// Matrix-valued function of rescaled time u.
class CoefficientFn {
 public:
  enum class Form { Constant, Affine, Sinusoidal, PiecewiseLinear };

  /// value(u) = c.
  static CoefficientFn constant(Matrix c);
  /// value(u) = intercept + slope * clamp(u, lo, hi).
  static CoefficientFn affine(Matrix intercept, Matrix slope, double lo = 0.0, double hi = 1.0);
  /// value(u) = base + amplitude * sin(2 pi frequency u + phase).
  static CoefficientFn sinusoidal(Matrix base, Matrix amplitude, double frequency,
                                  double phase = 0.0);
  /// Linear interpolation between (knots[i], values[i]); constant outside the knots.
  static CoefficientFn piecewise_linear(std::vector<double> knots, std::vector<Matrix> values);

  /// The 1 x 1 zero constant.
  CoefficientFn() : a_(Matrix::Zero(1, 1)), b_(Matrix::Zero(1, 1)) {}

  Matrix operator()(double u) const;
  /// Derivative in u (one-sided at kinks and clamp edges, from the right).
  Matrix derivative(double u) const;
  /// Lipschitz constant in spectral norm.
  double lipschitz() const;
  /// sup_u of the spectral norm.
  double sup_norm() const;

  Form form() const { return form_; }
  Eigen::Index rows() const { return a_.rows(); }
  Eigen::Index cols() const { return a_.cols(); }
  bool is_constant() const;

  // Payload accessors, meaning depends on form.
  const Matrix& a() const { return a_; }
  const Matrix& b() const { return b_; }
  double lo() const { return lo_; }
  double hi() const { return hi_; }
  double frequency() const { return frequency_; }
  double phase() const { return phase_; }
  const std::vector<double>& knots() const { return knots_; }
  const std::vector<Matrix>& values() const { return values_; }

  /// The same function multiplied by a scalar.
  CoefficientFn scaled(double c) const;
  /// The function frozen at u0 (constant form).
  CoefficientFn frozen(double u0) const { return constant((*this)(u0)); }

 private:
  Form form_ = Form::Constant;
  Matrix a_;
  Matrix b_;
  double lo_ = 0.0;
  double hi_ = 1.0;
  double frequency_ = 0.0;
  double phase_ = 0.0;
  std::vector<double> knots_;
  std::vector<Matrix> values_;
};

enum class Family { TvVMA, TvVAR, TvARCH, SRE };

std::string to_string(Family f);
Family family_from_string(const std::string& s);

/// Coefficient layout per family:
///   TvVMA : coefficients[j] = Psi_j for j = 0..order (innovations have identity variance).
///   TvVAR : coefficients[j-1] = Phi_j for j = 1..order; innovation_variance = Sigma(u).
///   TvARCH: p = 1; coefficients[0] = a_0, coefficients[j] = a_j for j = 1..order.
///           Second-order quantities refer to the squared process X_t^2.
///   SRE   : coefficients = {A0, A1, B}; X_t = (A0 + eta_t A1) X_{t-1} + B z_t with
///           eta_t ~ N(0, 1) and z_t ~ N(0, I_p).
struct ModelSpec {
  Family family = Family::TvVMA;
  int p = 1;
  int order = 0;
  std::vector<CoefficientFn> coefficients;
  std::optional<CoefficientFn> innovation_variance;
  std::optional<double> kappa;
  std::string name;

  /// Model with every coefficient frozen at u0.
  ModelSpec frozen(double u0) const;
  bool is_time_invariant() const;
};

/// Decay exponent used for envelopes: `kappa` when set, else 4.
double model_kappa(const ModelSpec& m);

/// Throws ModelError if the family invariants fail on a u-grid over [0, 1].
void validate_model(const ModelSpec& m);

struct StabilityReport {
  /// max over the u-grid of the companion (or recurrence) spectral radius.
  double spectral_radius = 0.0;
  /// min over the u-grid and |z| in {1, 1 + delta} of sigma_min(I - sum_j Phi_j(u) z^j).
  double margin = 0.0;
};

StabilityReport var_stability(const ModelSpec& m, double delta = 0.01);

/// Number of lags after which dependence is negligible at the model's decay rate.
long effective_memory(const ModelSpec& m);

/// Pad width used when a finite section stands in for a bi-infinite window.
long default_pad(const ModelSpec& m);

/// cov(X_{t,N}, X_{tau,N}). Throws UnsupportedError for SRE.
Matrix cov_block(const ModelSpec& m, long n, long t, long tau);

/// Symmetric window of cov_block over [t_lo, t_hi].
BlockWindow cov_window(const ModelSpec& m, long n, long t_lo, long t_hi);

/// C_r(u) of the frozen process; C_{-r}(u) = C_r(u)^T.
Matrix stationary_cov(const ModelSpec& m, double u, long r);

/// C_0(u) ... C_{max_lag}(u).
std::vector<Matrix> stationary_cov_sequence(const ModelSpec& m, double u, long max_lag);

/// d/du C_r(u) for r = 0 .. max_lag (tv-VMA and tv-VAR).
std::vector<Matrix> stationary_cov_derivative(const ModelSpec& m, double u, long max_lag);

/// Block-Toeplitz window [0, length) built from C_r(u).
BlockWindow stationary_window(const ModelSpec& m, double u, long length);

/// f(omega; u), Hermitian positive definite.
CMatrix local_spectral_density(const ModelSpec& m, double u, double omega);

EigRange spectral_eig_range(const ModelSpec& m, const std::vector<double>& u_grid,
                            const std::vector<double>& omega_grid);

struct SamplePath {
  long t_lo = 0;
  long n = 1;
  std::uint64_t seed = 0;
  /// p x (t_hi - t_lo + 1); column k is X_{t_lo + k}.
  Matrix data;

  long t_hi() const { return t_lo + data.cols() - 1; }
  Vector at(long t) const { return data.col(t - t_lo); }
};

SamplePath simulate_path(const ModelSpec& m, long n, long t_lo, long t_hi, std::uint64_t seed);

struct PhysicalDependence {
  double value = 0.0;
  double std_error = 0.0;
};

/// Monte Carlo estimate of ||var(X_{t,N} - X_{t,N|{t-j}})||_2, where the
/// coupled copy replaces the innovation at time t - j by an independent draw.
PhysicalDependence physical_dep_estimate(const ModelSpec& m, long n, long t, long j, long reps,
                                         std::uint64_t seed);

struct AssumptionFit {
  DecayProfile decay;
  /// sup ||C_{t,tau} - C_{tau-t}(t/N)|| / (gu^{1-kappa} min(1/N, 2/gu)).
  double smoothness_gu = 0.0;
  /// Same with min(1/N, 2 zeta) in place of min(1/N, 2/gu).
  double smoothness_zeta = 0.0;
  /// sup ||C_{t,tau} - C_{tau-t}(t/N)|| over the window.
  double max_gap = 0.0;
};

/// Least-squares decay fit of log ||C_{t,tau}|| on log gu(t - tau) over lags >= 2
/// plus the measured smoothness constants. Throws FitError with fewer than 4 usable lags.
AssumptionFit assumption_fit(const ModelSpec& m, long n, long t_lo, long t_hi);

}  // namespace nonstatcov
