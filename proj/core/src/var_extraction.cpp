#include "nonstatcov/var_extraction.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "nonstatcov/errors.hpp"

namespace nonstatcov {
namespace {

double rescaled(long t, long n) { return static_cast<double>(t) / static_cast<double>(n); }

double max_abs_diff(const VarCoefficients& a, const VarCoefficients& b) {
  double d = (a.sigma - b.sigma).cwiseAbs().maxCoeff();
  for (std::size_t j = 0; j < a.phis.size() && j < b.phis.size(); ++j)
    d = std::max(d, (a.phis[j] - b.phis[j]).cwiseAbs().maxCoeff());
  return d;
}

Matrix symmetrized(const Matrix& a) { return 0.5 * (a + a.transpose()); }

double log_det_spd(const Matrix& a) {
  Eigen::LLT<Matrix> llt(a);
  if (llt.info() != Eigen::Success) throw ConditioningError("log_det: matrix is not positive definite");
  return 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
}

double log_det_hpd(const CMatrix& a) {
  Eigen::LLT<CMatrix> llt(a);
  if (llt.info() != Eigen::Success) throw ModelError("log_det: spectral density is not positive definite");
  double s = 0.0;
  for (Eigen::Index i = 0; i < a.rows(); ++i) s += std::log(std::real(llt.matrixLLT()(i, i)));
  return 2.0 * s;
}

}  // namespace

VarCoefficients var_from_section(const BlockWindow& c, int order) {
  if (!c.symmetric()) throw InputError("var_from_section: window must be symmetric");
  if (order < 0 || order > c.length() - 1) throw InputError("var_from_section: order exceeds the section");
  const int p = c.p();
  const Matrix d = spd_inverse(c.flat());
  const long big_t = c.t_hi();
  const Eigen::Index row = c.offset(big_t);
  VarCoefficients out;
  out.t = big_t;
  out.order = order;
  out.sigma = spd_inverse(symmetrized(d.block(row, row, p, p)));
  for (int j = 1; j <= order; ++j)
    out.phis.push_back(-out.sigma * d.block(row, c.offset(big_t - j), p, p));
  return out;
}

VarCoefficients var_projection(const BlockWindow& c, int d) {
  if (!c.symmetric()) throw InputError("var_projection: window must be symmetric");
  if (d < 0 || d > c.length() - 1) throw InputError("var_projection: order exceeds the section");
  const long big_t = c.t_hi();
  const int p = c.p();
  if (d == 0) {
    VarCoefficients out;
    out.t = big_t;
    out.sigma = c.block(big_t, big_t);
    return out;
  }
  const BlockWindow sub = c.section(big_t - d, big_t);
  VarCoefficients via_inverse = var_from_section(sub, d);

  // Block normal equations: C_{T,T-k} = sum_j Phi_j C_{T-j,T-k}, k = 1..d.
  const Eigen::Index dp = static_cast<Eigen::Index>(d) * p;
  Matrix g(dp, dp);
  Matrix rhs(p, dp);
  for (int j = 1; j <= d; ++j) {
    rhs.middleCols((j - 1) * p, p) = sub.block(big_t, big_t - j);
    for (int k = 1; k <= d; ++k) g.block((j - 1) * p, (k - 1) * p, p, p) = sub.block(big_t - j, big_t - k);
  }
  Eigen::LLT<Matrix> llt(g);
  if (llt.info() != Eigen::Success) throw ConditioningError("var_projection: past section is not positive definite");
  const Matrix stacked = llt.solve(Matrix(rhs.transpose())).transpose();
  VarCoefficients via_normal;
  via_normal.t = big_t;
  via_normal.order = d;
  Matrix sigma = sub.block(big_t, big_t);
  for (int j = 1; j <= d; ++j) {
    via_normal.phis.push_back(stacked.middleCols((j - 1) * p, p));
    sigma -= via_normal.phis.back() * sub.block(big_t - j, big_t);
  }
  via_normal.sigma = symmetrized(sigma);

  double scale = 1.0;
  for (const auto& phi : via_inverse.phis) scale = std::max(scale, phi.cwiseAbs().maxCoeff());
  scale = std::max(scale, via_inverse.sigma.cwiseAbs().maxCoeff());
  via_inverse.path_discrepancy = max_abs_diff(via_inverse, via_normal);
  if (!(via_inverse.path_discrepancy <= 1e-8 * scale))
    throw ConditioningError("var_projection: inverse-row and normal-equation paths differ by " +
                            std::to_string(via_inverse.path_discrepancy));
  return via_inverse;
}

VarCoefficients var_coeffs_infinite(const ModelSpec& m, long n, long big_t, int big_j, long depth) {
  if (big_j < 1) throw InputError("var_coeffs_infinite: J must be at least 1");
  if (depth < 0) depth = big_j + 100L;
  if (depth < big_j + 50L) throw InputError("var_coeffs_infinite: depth must be at least J + 50");
  return var_from_section(cov_window(m, n, big_t - depth, big_t), big_j);
}

double var_truncation_drift(const ModelSpec& m, long n, long big_t, int big_j, long depth) {
  return max_abs_diff(var_coeffs_infinite(m, n, big_t, big_j, depth),
                      var_coeffs_infinite(m, n, big_t, big_j, depth + 50));
}

VarCoefficients var_coeffs_finite(const ModelSpec& m, long n, long big_t, int d) {
  if (d < 0) throw InputError("var_coeffs_finite: d must be nonnegative");
  return var_projection(cov_window(m, n, big_t - d, big_t), d);
}

BaxterReport baxter_gaps(const ModelSpec& m, long n, long big_t, int d, int big_j) {
  if (d < 1) throw InputError("baxter_gaps: d must be at least 1");
  if (big_j < d) throw InputError("baxter_gaps: J must be at least d");
  const VarCoefficients finite = var_coeffs_finite(m, n, big_t, d);
  const VarCoefficients infinite = var_coeffs_infinite(m, n, big_t, big_j);
  const double e = model_kappa(m) - 1.5;
  BaxterReport rep;
  rep.per_lag.quantity = "baxter_gap";
  for (int j = 1; j <= d; ++j) {
    const double gap = spectral_norm(finite.phis[static_cast<std::size_t>(j - 1)] -
                                     infinite.phis[static_cast<std::size_t>(j - 1)]);
    rep.per_lag.add(big_t, j, gap, std::pow(zeta(d), e) * std::pow(zeta(d - j), e));
    rep.summed += gap;
  }
  rep.summed_envelope = std::pow(zeta(d), e);
  rep.summed_constant = rep.summed / rep.summed_envelope;
  return rep;
}

VarCoefficients stationary_var_coeffs(const ModelSpec& m, double u, int d) {
  if (d < 0) throw InputError("stationary_var_coeffs: d must be nonnegative");
  return var_projection(stationary_window(m, u, d + 1), d);
}

VarCoefficients stationary_var_coeffs_infinite(const ModelSpec& m, double u, int big_j, long depth) {
  if (big_j < 1) throw InputError("stationary_var_coeffs_infinite: J must be at least 1");
  if (depth < 0) depth = big_j + 100L;
  if (depth < big_j + 50L) throw InputError("stationary_var_coeffs_infinite: depth must be at least J + 50");
  return var_from_section(stationary_window(m, u, depth + 1), big_j);
}

VarSmoothness var_smoothness_gap(const ModelSpec& m, long n, long big_t, int big_j, long depth) {
  const VarCoefficients ns = var_coeffs_infinite(m, n, big_t, big_j, depth);
  const VarCoefficients st = stationary_var_coeffs_infinite(m, rescaled(big_t, n), big_j, depth);
  const double kappa = model_kappa(m);
  const double inv_n = 1.0 / static_cast<double>(n);
  VarSmoothness out;
  out.sigma.quantity = "sigma_gap";
  out.sigma.add(big_t, 0, spectral_norm(ns.sigma - st.sigma), inv_n);
  out.phi.quantity = "phi_gap";
  for (int j = 1; j <= big_j; ++j) {
    const double z = zeta(j);
    out.phi.add(big_t, j,
                spectral_norm(ns.phis[static_cast<std::size_t>(j - 1)] -
                              st.phis[static_cast<std::size_t>(j - 1)]),
                std::pow(z, kappa - 2.0) * std::min(2.0 * z, inv_n));
  }
  return out;
}

CombinedGap finite_order_combined_gap(const ModelSpec& m, long n, long big_t, int d) {
  if (d < 1) throw InputError("finite_order_combined_gap: d must be at least 1");
  const VarCoefficients ns = var_coeffs_finite(m, n, big_t, d);
  const VarCoefficients st = stationary_var_coeffs(m, rescaled(big_t, n), d);
  CombinedGap out;
  for (int j = 0; j < d; ++j)
    out.measured += spectral_norm(ns.phis[static_cast<std::size_t>(j)] - st.phis[static_cast<std::size_t>(j)]);
  out.envelope = 1.0 / static_cast<double>(n) + std::pow(zeta(d), model_kappa(m) - 1.5);
  return out;
}

KolmogorovGap kolmogorov_gap(const ModelSpec& m, long n, long big_t, long depth) {
  if (depth < 51) throw InputError("kolmogorov_gap: depth must be at least 51");
  const VarCoefficients c = var_coeffs_infinite(m, n, big_t, 1, depth);
  KolmogorovGap out;
  out.lhs = log_det_spd(c.sigma);
  // Periodic trapezoid rule on 2^12 points: the mean of the integrand.
  constexpr int kPoints = 1 << 12;
  const double u = rescaled(big_t, n);
  double sum = 0.0;
  for (int k = 0; k < kPoints; ++k)
    sum += log_det_hpd(local_spectral_density(m, u, 2.0 * std::numbers::pi * k / kPoints));
  out.rhs = sum / kPoints;
  out.gap = std::abs(out.lhs - out.rhs);
  return out;
}

}  // namespace nonstatcov
