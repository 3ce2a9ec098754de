#include "nonstatcov/partial_cov.hpp"

#include <algorithm>
#include <cmath>

#include "nonstatcov/errors.hpp"
#include "nonstatcov/parallel.hpp"

namespace nonstatcov {
namespace {

double rescaled(long t, long n) { return static_cast<double>(t) / static_cast<double>(n); }

void check_components(int p, int a, int b) {
  if (a < 0 || a >= p || b < 0 || b >= p) throw InputError("component index out of range");
  if (a == b) throw InputError("partial pair needs two distinct components");
}

std::vector<int> component_rows(int comp, long len) {
  std::vector<int> rows(static_cast<std::size_t>(len));
  for (long i = 0; i < len; ++i) rows[static_cast<std::size_t>(i)] = static_cast<int>(comp * len + i);
  return rows;
}

// Schur complement of the grouped window onto the components in `keep`, in the given order.
Matrix grouped_schur(const BlockWindow& c, const std::vector<int>& keep) {
  if (!c.symmetric()) throw InputError("partial covariance needs a symmetric window");
  const long len = c.length();
  const Matrix g = regroup_by_component(c).flat();
  std::vector<int> s, rest;
  for (int comp : keep) {
    const auto r = component_rows(comp, len);
    s.insert(s.end(), r.begin(), r.end());
  }
  for (int comp = 0; comp < c.p(); ++comp) {
    if (std::find(keep.begin(), keep.end(), comp) != keep.end()) continue;
    const auto r = component_rows(comp, len);
    rest.insert(rest.end(), r.begin(), r.end());
  }
  const Matrix a = g(s, s);
  const Matrix b = g(s, rest);
  const Matrix e = g(rest, rest);
  return schur_complement(a, b, e);
}

}  // namespace

GroupedWindow::GroupedWindow(long t_lo, int p, std::vector<Matrix> lags, bool symmetric)
    : t_lo_(t_lo), p_(p), symmetric_(symmetric), lags_(std::move(lags)) {
  if (p <= 0 || lags_.size() != static_cast<std::size_t>(p) * static_cast<std::size_t>(p))
    throw InputError("grouped window needs p * p lag matrices");
  for (const auto& l : lags_)
    if (l.rows() != lags_.front().rows() || l.cols() != l.rows() || l.rows() == 0)
      throw InputError("grouped window lag matrices must be square and equal-sized");
}

Matrix GroupedWindow::flat() const {
  const long len = length();
  Matrix out(static_cast<Eigen::Index>(p_) * len, static_cast<Eigen::Index>(p_) * len);
  for (int a = 0; a < p_; ++a)
    for (int b = 0; b < p_; ++b) out.block(a * len, b * len, len, len) = lag(a, b);
  return out;
}

GroupedWindow regroup_by_component(const BlockWindow& c) {
  const int p = c.p();
  const long len = c.length();
  std::vector<Matrix> lags(static_cast<std::size_t>(p) * static_cast<std::size_t>(p), Matrix(len, len));
  const Matrix& f = c.flat();
  for (int a = 0; a < p; ++a)
    for (int b = 0; b < p; ++b) {
      Matrix& l = lags[static_cast<std::size_t>(a * p + b)];
      for (long i = 0; i < len; ++i)
        for (long k = 0; k < len; ++k) l(i, k) = f(i * p + a, k * p + b);
    }
  return GroupedWindow(c.t_lo(), p, std::move(lags), c.symmetric());
}

BlockWindow ungroup(const GroupedWindow& g) {
  const int p = g.p();
  const long len = g.length();
  Matrix f(static_cast<Eigen::Index>(p) * len, static_cast<Eigen::Index>(p) * len);
  for (int a = 0; a < p; ++a)
    for (int b = 0; b < p; ++b) {
      const Matrix& l = g.lag(a, b);
      for (long i = 0; i < len; ++i)
        for (long k = 0; k < len; ++k) f(i * p + a, k * p + b) = l(i, k);
    }
  return BlockWindow(g.t_lo(), p, std::move(f), g.symmetric());
}

PartialPair partial_cov_pair(const BlockWindow& c, int a, int b, long pad) {
  check_components(c.p(), a, b);
  const long len = c.length();
  if (pad < 0 || 2 * pad >= len) throw InputError("partial_cov_pair: pad leaves no interior");
  const Matrix delta = grouped_schur(c, {a, b});
  const long inner = len - 2 * pad;
  Matrix f(2 * inner, 2 * inner);
  for (long i = 0; i < inner; ++i)
    for (long k = 0; k < inner; ++k)
      for (int x = 0; x < 2; ++x)
        for (int y = 0; y < 2; ++y) f(2 * i + x, 2 * k + y) = delta(x * len + pad + i, y * len + pad + k);
  PartialPair out{a, b, BlockWindow(c.t_lo() + pad, 2, std::move(f), true), {}, pad};
  for (int comp = 0; comp < c.p(); ++comp)
    if (comp != a && comp != b) out.conditioning_set.push_back(comp);
  return out;
}

Matrix self_partial_cov(const BlockWindow& c, int a, long pad) {
  if (a < 0 || a >= c.p()) throw InputError("component index out of range");
  const long len = c.length();
  if (pad < 0 || 2 * pad >= len) throw InputError("self_partial_cov: pad leaves no interior");
  const Matrix rho = grouped_schur(c, {a});
  return rho.block(pad, pad, len - 2 * pad, len - 2 * pad);
}

std::vector<Matrix> stationary_partial_pair(const ModelSpec& m, double u, int a, int b,
                                            long max_lag, long pad) {
  check_components(m.p, a, b);
  if (max_lag < 0 || pad < 0) throw InputError("stationary_partial_pair: negative size");
  const long len = 2 * (max_lag + pad) + 1;
  const PartialPair pp = partial_cov_pair(stationary_window(m, u, len), a, b, 0);
  const long centre = pad + max_lag;
  std::vector<Matrix> out;
  for (long r = 0; r <= max_lag; ++r) out.push_back(pp.deltas.block(centre, centre + r));
  return out;
}

GapReport partial_smoothness_gap(const ModelSpec& m, long n, int a, int b, long t_lo, long t_hi,
                                 long max_lag, long pad, long t_stride) {
  if (t_stride < 1) throw InputError("partial_smoothness_gap: stride must be positive");
  const long lo = t_lo - max_lag;
  const long hi = t_hi + max_lag;
  const PartialPair ns = partial_cov_pair(cov_window(m, n, lo - pad, hi + pad), a, b, pad);
  std::vector<long> ts;
  for (long t = t_lo; t <= t_hi; t += t_stride) ts.push_back(t);
  std::vector<std::vector<Matrix>> stat(ts.size());
  parallel_for(ts.size(), [&](std::size_t i) {
    stat[i] = stationary_partial_pair(m, rescaled(ts[i], n), a, b, max_lag, pad);
  });
  const double kappa = model_kappa(m);
  const double inv_n = 1.0 / static_cast<double>(n);
  GapReport rep;
  rep.quantity = "partial_smoothness";
  for (std::size_t i = 0; i < ts.size(); ++i) {
    const long t = ts[i];
    for (long r = -max_lag; r <= max_lag; ++r) {
      const Matrix target = r >= 0 ? stat[i][static_cast<std::size_t>(r)]
                                   : Matrix(stat[i][static_cast<std::size_t>(-r)].transpose());
      const double z = zeta(r);
      rep.add(t, t + r, spectral_norm(ns.deltas.block(t, t + r) - target),
              std::pow(z, kappa - 2.0) * std::min(inv_n, z));
    }
  }
  return rep;
}

GapReport partial_lipschitz_gap(const ModelSpec& m, double u, double v, int a, int b, long max_lag,
                                long pad) {
  const auto du = stationary_partial_pair(m, u, a, b, max_lag, pad);
  const auto dv = stationary_partial_pair(m, v, a, b, max_lag, pad);
  const double kappa = model_kappa(m);
  GapReport rep;
  rep.quantity = "partial_lipschitz";
  for (long r = -max_lag; r <= max_lag; ++r) {
    const std::size_t k = static_cast<std::size_t>(std::abs(r));
    rep.add(0, r, spectral_norm(du[k] - dv[k]), std::abs(u - v) * std::pow(zeta(r), kappa - 1.0));
  }
  return rep;
}

std::vector<std::complex<double>> partial_spectral_coherence(const ModelSpec& m, double u, int a,
                                                             int b,
                                                             const std::vector<double>& omegas) {
  check_components(m.p, a, b);
  std::vector<std::complex<double>> out;
  out.reserve(omegas.size());
  for (double w : omegas) {
    const CMatrix f = local_spectral_density(m, u, w);
    Eigen::JacobiSVD<CMatrix> svd(f);
    const auto& sv = svd.singularValues();
    if (!(sv(sv.size() - 1) > 1e-12 * sv(0)))
      throw ModelError("partial_spectral_coherence: spectral density is singular");
    const CMatrix gamma = f.partialPivLu().inverse();
    const double aa = std::real(gamma(a, a));
    const double bb = std::real(gamma(b, b));
    out.push_back(-gamma(a, b) / std::sqrt(aa * bb));
  }
  return out;
}

CoherenceReport coherence_consistency_gap(const ModelSpec& m, long n, long t, int a, int b,
                                          const std::vector<double>& omegas, long max_lag,
                                          long pad) {
  check_components(m.p, a, b);
  if (max_lag < 0) throw InputError("coherence_consistency_gap: max_lag must be nonnegative");
  const long lo = t - max_lag;
  const long hi = t + max_lag;
  const PartialPair pp = partial_cov_pair(cov_window(m, n, lo - pad, hi + pad), a, b, pad);
  std::vector<Matrix> rows;
  for (long r = -max_lag; r <= max_lag; ++r) rows.push_back(pp.deltas.block(t, t + r));

  CoherenceReport rep;
  rep.max_lag = max_lag;
  rep.gaps.quantity = "coherence_gap";
  rep.target = partial_spectral_coherence(m, rescaled(t, n), a, b, omegas);
  for (std::size_t k = 0; k < omegas.size(); ++k) {
    std::complex<double> s_aa = 0.0, s_bb = 0.0, s_ab = 0.0;
    for (long r = -max_lag; r <= max_lag; ++r) {
      const Matrix& d = rows[static_cast<std::size_t>(r + max_lag)];
      const std::complex<double> e = std::polar(1.0, static_cast<double>(r) * omegas[k]);
      s_aa += d(0, 0) * e;
      s_bb += d(1, 1) * e;
      s_ab += d(0, 1) * e;
    }
    if (std::abs(s_aa) < 1e-8 || std::abs(s_bb) < 1e-8)
      throw ConditioningError("coherence_consistency_gap: self-partial Fourier sum vanishes");
    rep.imag_residue = std::max({rep.imag_residue, std::abs(s_aa.imag()), std::abs(s_bb.imag())});
    const std::complex<double> g = s_ab / std::sqrt(s_aa * s_bb);
    rep.assembled.push_back(g);
    rep.gaps.add(static_cast<long>(k), 0, std::abs(g - rep.target[k]), 1.0 / static_cast<double>(n));
  }
  rep.imag_flag = rep.imag_residue > 1e-8;
  return rep;
}

long default_partial_max_lag(const ModelSpec& m, double u, int a, int b, long pad, double tol,
                             long cap) {
  const auto d = stationary_partial_pair(m, u, a, b, cap, pad);
  long last = 0;
  for (long r = 0; r <= cap; ++r)
    if (spectral_norm(d[static_cast<std::size_t>(r)]) >= tol) last = r;
  return std::min(cap, last + 1);
}

}  // namespace nonstatcov
