#include "nonstatcov/inverse_analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "nonstatcov/errors.hpp"
#include "nonstatcov/parallel.hpp"

namespace nonstatcov {
namespace {

double rescaled(long t, long n) { return static_cast<double>(t) / static_cast<double>(n); }

double inf_norm(const Matrix& a) { return a.cwiseAbs().rowwise().sum().maxCoeff(); }

// Inverse of the centre of a Toeplitz section of length 2 (max_lag + pad) + 1.
Matrix stationary_section_inverse(const ModelSpec& m, double u, long max_lag, long pad,
                                  BlockWindow* section_out = nullptr) {
  const long len = 2 * (max_lag + pad) + 1;
  BlockWindow w = stationary_window(m, u, len);
  Matrix d = spd_inverse(w.flat());
  if (section_out != nullptr) *section_out = std::move(w);
  return d;
}

Matrix read_block(const Matrix& flat, int p, long i, long k) {
  return flat.block(static_cast<Eigen::Index>(i) * p, static_cast<Eigen::Index>(k) * p, p, p);
}

}  // namespace

InverseWindow finite_section_inverse(const BlockWindow& c, long pad) {
  if (!c.symmetric()) throw InputError("finite_section_inverse: window must be symmetric");
  if (pad < 0) throw InputError("finite_section_inverse: pad must be nonnegative");
  if (2 * pad >= c.length()) throw InputError("finite_section_inverse: pad leaves no interior");
  const EigRange range = sym_eig_range(c);
  if (!(range.lambda_min > kSpdThreshold * std::abs(range.lambda_max)))
    throw ConditioningError("finite_section_inverse: window is singular or indefinite");
  const Matrix d = spd_inverse(c.flat());
  const Eigen::Index dim = c.dim();
  const double residual = inf_norm(c.flat() * d - Matrix::Identity(dim, dim));
  if (!(residual <= 1e-8))
    throw ConditioningError("finite_section_inverse: residual " + std::to_string(residual) +
                            " exceeds 1e-8");
  const long lo = c.t_lo() + pad;
  const long hi = c.t_hi() - pad;
  const Eigen::Index off = c.offset(lo);
  const Eigen::Index len = static_cast<Eigen::Index>(hi - lo + 1) * c.p();
  return {BlockWindow(lo, c.p(), d.block(off, off, len, len), true), pad, range, residual};
}

InverseWindow model_inverse(const ModelSpec& m, long n, long t_lo, long t_hi, long pad) {
  return finite_section_inverse(cov_window(m, n, t_lo - pad, t_hi + pad), pad);
}

std::vector<Matrix> stationary_inverse_lags(const ModelSpec& m, double u, long max_lag, long pad) {
  if (max_lag < 0 || pad < 0) throw InputError("stationary_inverse_lags: negative size");
  const Matrix d = stationary_section_inverse(m, u, max_lag, pad);
  const long centre = pad + max_lag;
  std::vector<Matrix> out;
  for (long r = 0; r <= max_lag; ++r) out.push_back(read_block(d, m.p, centre, centre + r));
  return out;
}

std::vector<Matrix> stationary_inverse_derivative(const ModelSpec& m, double u, long max_lag,
                                                  long pad) {
  if (max_lag < 0 || pad < 0) throw InputError("stationary_inverse_derivative: negative size");
  const long len = 2 * (max_lag + pad) + 1;
  const Matrix d = stationary_section_inverse(m, u, max_lag, pad);
  const auto dc = stationary_cov_derivative(m, u, len - 1);
  const BlockWindow dcw = BlockWindow::symmetric_from(0, len - 1, m.p, [&](long t, long tau) {
    return dc[static_cast<std::size_t>(tau - t)];
  });
  const Matrix dd = -d * dcw.flat() * d;
  const long centre = pad + max_lag;
  std::vector<Matrix> out;
  for (long r = 0; r <= max_lag; ++r) out.push_back(read_block(dd, m.p, centre, centre + r));
  return out;
}

constexpr double kNeumannRounding = 1e-12;

NeumannResult neumann_inverse(const BlockWindow& c, long bandwidth, long terms) {
  if (!c.symmetric()) throw InputError("neumann_inverse: window must be symmetric");
  if (bandwidth < 0 || terms < 0) throw InputError("neumann_inverse: negative bandwidth or terms");
  const Matrix b = band_truncate(c, bandwidth).window().flat();
  const Matrix r = c.flat() - b;

  Eigen::SelfAdjointEigenSolver<Matrix> es(b);
  if (es.info() != Eigen::Success) throw ConditioningError("neumann_inverse: eigensolver failed");
  const Vector ev = es.eigenvalues();
  const double min_abs = ev.cwiseAbs().minCoeff();
  const double max_abs = ev.cwiseAbs().maxCoeff();
  if (!(min_abs > kSpdThreshold * max_abs))
    throw ConditioningError("neumann_inverse: banded part is singular");
  Matrix b_inv = es.eigenvectors() * ev.cwiseInverse().asDiagonal() * es.eigenvectors().transpose();
  b_inv = (0.5 * (b_inv + b_inv.transpose())).eval();
  const double b_inv_norm = 1.0 / min_abs;

  NeumannResult out{c, 0.0, 0.0, 0.0, std::numeric_limits<double>::infinity(), 0.0, 0.0};

  // Envelope ||C_{t,tau}|| <= K gu^{-kappa} measured from the window itself.
  const auto by_lag = max_norm_by_lag(c);
  const double floor = 1e-13 * std::max(by_lag.front(), 1e-300);
  std::vector<double> xs, ys;
  for (std::size_t lag = 2; lag < by_lag.size(); ++lag)
    if (by_lag[lag] > floor) {
      xs.push_back(std::log(gu(static_cast<long>(lag))));
      ys.push_back(std::log(by_lag[lag]));
    }
  if (xs.size() >= 2) {
    out.kappa_hat = -least_squares_line(xs, ys).slope;
    for (std::size_t lag = static_cast<std::size_t>(bandwidth) + 1; lag < by_lag.size(); ++lag)
      out.k_hat = std::max(out.k_hat, by_lag[lag] * std::pow(gu(static_cast<long>(lag)), out.kappa_hat));
    if (out.kappa_hat > 1.0 && bandwidth >= 2)
      out.certified_contraction = banded_error_bound(out.k_hat, out.kappa_hat, bandwidth) * b_inv_norm;
  }

  const Matrix step = -b_inv * r;
  out.measured_contraction = spectral_norm(step);
  out.contraction = std::min(out.measured_contraction, out.certified_contraction);
  if (!(out.contraction < 1.0))
    throw DivergenceError("neumann_inverse: contraction factor " +
                              std::to_string(out.contraction) + " is not below 1",
                          out.contraction);

  Matrix term = b_inv;
  Matrix sum = b_inv;
  for (long s = 1; s <= terms; ++s) {
    term = (step * term).eval();
    sum += term;
  }
  const Matrix sym = 0.5 * (sum + sum.transpose());
  out.approx = BlockWindow(c.t_lo(), c.p(), sym, true);
  const double q = out.contraction;
  const double tail = q == 0.0 ? 0.0 : b_inv_norm * std::pow(q, static_cast<double>(terms + 1)) / (1.0 - q);
  // Rounding in the products and in any dense reference inverse.
  const double rounding = kNeumannRounding * b_inv_norm / (1.0 - q);
  out.certificate = tail + rounding;
  return out;
}

DecayProfile inverse_decay_fit(const InverseWindow& d, double kappa_ref) {
  const BlockWindow& w = d.base;
  const long len = w.length();
  if (len < 20) throw InputError("inverse_decay_fit: interior window shorter than 20");
  const auto by_lag = max_norm_by_lag(w);
  const double top = *std::max_element(by_lag.begin(), by_lag.end());
  if (!(top >= 1e-14)) throw FitError("inverse_decay_fit: all interior norms are below 1e-14");

  DecayProfile prof;
  const double zero_level = 1e-9 * top;
  long last_nonzero = 0;
  for (std::size_t lag = 0; lag < by_lag.size(); ++lag)
    if (by_lag[lag] > zero_level) last_nonzero = static_cast<long>(lag);
  if (last_nonzero < len - 1) {
    prof.band_limited = true;
    prof.band_lag = last_nonzero;
  }

  for (std::size_t lag = 0; lag < by_lag.size(); ++lag)
    prof.constant = std::max(prof.constant, by_lag[lag] / std::pow(zeta(static_cast<long>(lag)), kappa_ref - 1.0));

  std::vector<double> xs, ys;
  for (long lag = 2; lag <= len / 3; ++lag) {
    const double v = by_lag[static_cast<std::size_t>(lag)];
    if (!(v > zero_level)) continue;
    prof.lags.push_back(lag);
    prof.norms.push_back(v);
    xs.push_back(std::log(zeta(lag)));
    ys.push_back(std::log(v));
  }
  if (xs.size() >= 2) {
    const LineFit line = least_squares_line(xs, ys);
    prof.exponent = line.slope;
    for (std::size_t i = 0; i < xs.size(); ++i)
      prof.residuals.push_back(ys[i] - (line.intercept + line.slope * xs[i]));
  } else if (prof.band_limited) {
    prof.exponent = std::numeric_limits<double>::infinity();
  } else {
    throw FitError("inverse_decay_fit: fewer than two usable lags");
  }
  return prof;
}

InverseWindow one_sided_inverse(const ModelSpec& m, long n, long big_t, long depth) {
  if (depth < 50) throw InputError("one_sided_inverse: depth must be at least 50");
  return finite_section_inverse(cov_window(m, n, big_t - depth, big_t), 0);
}

GapReport inverse_smoothness_gap(const ModelSpec& m, long n, long t_lo, long t_hi, long max_lag,
                                 long pad, long t_stride) {
  if (t_stride < 1) throw InputError("inverse_smoothness_gap: stride must be positive");
  if (max_lag < 0) throw InputError("inverse_smoothness_gap: max_lag must be nonnegative");
  const InverseWindow dn = model_inverse(m, n, t_lo - max_lag, t_hi + max_lag, pad);
  std::vector<long> ts;
  for (long t = t_lo; t <= t_hi; t += t_stride) ts.push_back(t);
  std::vector<std::vector<Matrix>> stat(ts.size());
  parallel_for(ts.size(), [&](std::size_t i) {
    stat[i] = stationary_inverse_lags(m, rescaled(ts[i], n), max_lag, pad);
  });
  const double kappa = model_kappa(m);
  const double inv_n = 1.0 / static_cast<double>(n);
  GapReport rep;
  rep.quantity = "inverse_smoothness";
  for (std::size_t i = 0; i < ts.size(); ++i) {
    const long t = ts[i];
    for (long r = -max_lag; r <= max_lag; ++r) {
      const Matrix target = r >= 0 ? stat[i][static_cast<std::size_t>(r)]
                                   : Matrix(stat[i][static_cast<std::size_t>(-r)].transpose());
      const double gap = spectral_norm(dn.base.block(t, t + r) - target);
      const double z = zeta(r);
      const double base = std::pow(z, kappa - 2.0);
      rep.add(t, t + r, gap, base * std::min(inv_n, 2.0 * z), base * std::min(inv_n, 2.0 / gu(r)));
    }
  }
  return rep;
}

GapReport inverse_lipschitz_gap(const ModelSpec& m, double u, double v, long max_lag, long pad) {
  const auto du = stationary_inverse_lags(m, u, max_lag, pad);
  const auto dv = stationary_inverse_lags(m, v, max_lag, pad);
  const double kappa = model_kappa(m);
  GapReport rep;
  rep.quantity = "inverse_lipschitz";
  for (long r = -max_lag; r <= max_lag; ++r) {
    const std::size_t k = static_cast<std::size_t>(std::abs(r));
    const double gap = spectral_norm(du[k] - dv[k]);
    rep.add(0, r, gap, std::abs(u - v) * std::pow(zeta(r), kappa - 1.0));
  }
  return rep;
}

}  // namespace nonstatcov
