#include "nonstatcov/operator_core.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "nonstatcov/errors.hpp"

namespace nonstatcov {

double gu(long j) { return std::max(1.0, std::abs(static_cast<double>(j))); }

double zeta(long j) {
  const double g = gu(j);
  return std::max(1.0, std::log(g)) / g;
}

DecayWeights decay_weights(long j) { return {gu(j), zeta(j)}; }

// --- BlockWindow -------------------------------------------------------------

BlockWindow::BlockWindow(long t_lo, long t_hi, int p)
    : t_lo_(t_lo), t_hi_(t_hi), p_(p), symmetric_(true) {
  if (p <= 0) throw InputError("block dimension must be positive");
  if (t_hi < t_lo) throw InputError("window must contain at least one time index");
  const Eigen::Index n = static_cast<Eigen::Index>(length()) * p;
  flat_ = Matrix::Zero(n, n);
}

BlockWindow::BlockWindow(long t_lo, int p, Matrix flat, bool symmetric)
    : t_lo_(t_lo), p_(p), symmetric_(symmetric), flat_(std::move(flat)) {
  if (p <= 0) throw InputError("block dimension must be positive");
  if (flat_.rows() != flat_.cols() || flat_.rows() == 0 || flat_.rows() % p != 0)
    throw InputError("flattened window must be square with size a positive multiple of p");
  t_hi_ = t_lo + flat_.rows() / p - 1;
  if (symmetric && flat_ != flat_.transpose())
    throw InputError("window flagged symmetric is not exactly symmetric");
}

Matrix BlockWindow::block(long t, long tau) const {
  if (!contains(t) || !contains(tau)) throw InputError("block index outside window");
  return flat_.block(offset(t), offset(tau), p_, p_);
}

BlockWindow BlockWindow::section(long lo, long hi) const {
  if (lo > hi || !contains(lo) || !contains(hi)) throw InputError("section outside window");
  const Eigen::Index n = static_cast<Eigen::Index>(hi - lo + 1) * p_;
  return BlockWindow(lo, p_, flat_.block(offset(lo), offset(lo), n, n), symmetric_);
}

BlockWindow BlockWindow::scaled(double c) const {
  return BlockWindow(t_lo_, p_, Matrix(c * flat_), symmetric_);
}

BandedBlockWindow::BandedBlockWindow(BlockWindow base, long bandwidth)
    : base_(std::move(base)), bandwidth_(bandwidth) {
  if (bandwidth < 0) throw InputError("bandwidth must be nonnegative");
}

// --- norms and spectra ------------------------------------------------------

double spectral_norm(const Matrix& a) {
  if (a.size() == 0) return 0.0;
  if (!a.allFinite()) throw InputError("spectral_norm: non-finite entry");
  if (std::min(a.rows(), a.cols()) <= 32) {
    Eigen::JacobiSVD<Matrix> svd(a);
    return svd.singularValues()(0);
  }
  Eigen::BDCSVD<Matrix> svd(a);
  return svd.singularValues()(0);
}

EigRange sym_eig_range(const Matrix& symmetric) {
  if (!symmetric.allFinite()) throw InputError("sym_eig_range: non-finite entry");
  if (symmetric != symmetric.transpose()) throw InputError("sym_eig_range: matrix is not symmetric");
  Eigen::SelfAdjointEigenSolver<Matrix> es(symmetric, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw ConditioningError("eigensolver failed to converge");
  const auto& ev = es.eigenvalues();
  return {ev(0), ev(ev.size() - 1)};
}

EigRange sym_eig_range(const BlockWindow& w) {
  if (!w.symmetric()) throw InputError("sym_eig_range: window is not symmetric");
  return sym_eig_range(w.flat());
}

BandedBlockWindow band_truncate(const BlockWindow& w, long bandwidth) {
  if (bandwidth < 0) throw InputError("band_truncate: bandwidth must be nonnegative");
  Matrix flat = w.flat();
  const int p = w.p();
  for (long t = w.t_lo(); t <= w.t_hi(); ++t)
    for (long tau = w.t_lo(); tau <= w.t_hi(); ++tau)
      if (std::abs(t - tau) > bandwidth) flat.block(w.offset(t), w.offset(tau), p, p).setZero();
  return BandedBlockWindow(BlockWindow(w.t_lo(), p, std::move(flat), w.symmetric()), bandwidth);
}

double banded_error_bound(double k, double kappa, long bandwidth) {
  if (!(kappa > 1.0)) throw DomainError("banded_error_bound: kappa must exceed 1");
  if (bandwidth < 2) throw DomainError("banded_error_bound: bandwidth must be at least 2");
  return 2.0 * k / (kappa - 1.0) * std::pow(static_cast<double>(bandwidth - 1), 1.0 - kappa);
}

double demko_bound(double a, double b, long bandwidth, long lag) {
  if (!(a > 0.0)) throw DomainError("demko_bound: a must be positive");
  if (b < a) throw DomainError("demko_bound: b must be at least a");
  if (bandwidth < 1) throw DomainError("demko_bound: bandwidth must be at least 1");
  const double sr = std::sqrt(b / a);
  const double rho = (sr - 1.0) / (sr + 1.0);
  const long n = std::abs(lag) / bandwidth;
  return (1.0 + sr) * (1.0 + sr) / b * std::pow(rho, static_cast<double>(n + 1));
}

// --- Schur complements and inverses -------------------------------------------

Matrix spd_inverse(const Matrix& a) {
  if (!a.allFinite()) throw InputError("spd_inverse: non-finite entry");
  Eigen::LLT<Matrix> llt(a);
  if (llt.info() != Eigen::Success) throw ConditioningError("matrix is not positive definite");
  const double rcond = llt.rcond();
  if (!(rcond > kSpdThreshold))
    throw ConditioningError("matrix is singular to working precision (rcond " +
                            std::to_string(rcond) + ")");
  Matrix inv = llt.solve(Matrix::Identity(a.rows(), a.cols()));
  const Matrix sym = 0.5 * (inv + inv.transpose());
  return sym;
}

Matrix schur_complement(const Matrix& a, const Matrix& b, const Matrix& e) {
  if (b.rows() != a.rows() || a.rows() != a.cols() || b.cols() != e.rows() || e.rows() != e.cols())
    throw InputError("schur_complement: dimensions are not conformable");
  if (e.size() == 0) return a;
  if (e != e.transpose()) throw InputError("schur_complement: E must be symmetric");
  Eigen::LLT<Matrix> llt(e);
  if (llt.info() != Eigen::Success || !(llt.rcond() > kSpdThreshold))
    throw ConditioningError("schur_complement: E is singular or indefinite");
  Matrix out = a - b * llt.solve(b.transpose());
  if (a == a.transpose()) {
    const Matrix sym = 0.5 * (out + out.transpose());
    out = sym;
  }
  return out;
}

Matrix schur_complement(const Matrix& a, const Matrix& b, const BlockWindow& e) {
  if (!e.symmetric()) throw InputError("schur_complement: E must be symmetric");
  return schur_complement(a, b, e.flat());
}

Matrix PartitionedInverse::assemble() const {
  Matrix out(top_left.rows() + bottom_left.rows(), top_left.cols() + top_right.cols());
  out << top_left, top_right, bottom_left, bottom_right;
  return out;
}

PartitionedInverse partitioned_inverse(const Matrix& a, const Matrix& b, const Matrix& c,
                                       const Matrix& d) {
  Eigen::PartialPivLU<Matrix> d_lu(d);
  const Matrix d_inv_c = d_lu.solve(c);
  const Matrix schur = a - b * d_inv_c;
  Eigen::PartialPivLU<Matrix> s_lu(schur);
  const Matrix a_tilde = s_lu.inverse();
  // B D^{-1} = (D^{-T} B^T)^T.
  Eigen::PartialPivLU<Matrix> dt_lu(Matrix(d.transpose()));
  const Matrix bd = dt_lu.solve(Matrix(b.transpose())).transpose();
  PartitionedInverse out;
  out.top_left = a_tilde;
  out.top_right = -a_tilde * bd;
  out.bottom_left = -d_inv_c * a_tilde;
  out.bottom_right = d_lu.inverse() + d_inv_c * a_tilde * bd;
  return out;
}

// --- appendix-level bounds ----------------------------------------------------

double block_row_sum_bound(const BlockWindow& w) {
  double best = 0.0;
  for (long t = w.t_lo(); t <= w.t_hi(); ++t) {
    double row = 0.0;
    for (long tau = w.t_lo(); tau <= w.t_hi(); ++tau) row += spectral_norm(w.block(t, tau));
    best = std::max(best, row);
  }
  return best;
}

double stacked_row_bound(std::span<const Matrix> blocks) {
  double sum = 0.0;
  for (const auto& b : blocks) {
    const double n = spectral_norm(b);
    sum += n * n;
  }
  return std::sqrt(sum);
}

Matrix block_norms(const BlockWindow& w) {
  const long n = w.length();
  Matrix out(n, n);
  const int p = w.p();
  for (long i = 0; i < n; ++i)
    for (long j = 0; j < n; ++j) {
      const auto blk = w.flat().block(i * p, j * p, p, p);
      out(i, j) = p == 1 ? std::abs(blk(0, 0)) : spectral_norm(blk);
    }
  return out;
}

std::vector<double> max_norm_by_lag(const BlockWindow& w) {
  const Matrix norms = block_norms(w);
  const long n = w.length();
  std::vector<double> out(static_cast<std::size_t>(n), 0.0);
  for (long i = 0; i < n; ++i)
    for (long j = 0; j < n; ++j) {
      auto& slot = out[static_cast<std::size_t>(std::abs(i - j))];
      slot = std::max(slot, norms(i, j));
    }
  return out;
}

LineFit least_squares_line(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw FitError("line fit needs at least two points");
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (!(sxx > 0.0)) throw FitError("line fit needs at least two distinct abscissae");
  const double slope = sxy / sxx;
  return {slope, my - slope * mx};
}

InequalityCheck matrix_cauchy_schwarz(const Matrix& x, const Matrix& y) {
  if (x.cols() != y.cols() || x.cols() < 2)
    throw InputError("Cauchy-Schwarz check needs the same number (>= 2) of paired draws");
  const Matrix xc = x.colwise() - x.rowwise().mean();
  const Matrix yc = y.colwise() - y.rowwise().mean();
  const double scale = 1.0 / static_cast<double>(x.cols() - 1);
  const double cross = spectral_norm(scale * yc * xc.transpose());
  return {cross * cross,
          spectral_norm(scale * xc * xc.transpose()) * spectral_norm(scale * yc * yc.transpose())};
}

InequalityCheck convolution_bound(int power, long y, long j_max) {
  if (power < 1) throw DomainError("convolution bound needs power >= 1");
  if (j_max < 2 * std::abs(y) + 2) throw DomainError("convolution bound needs j_max >= 2|y| + 2");
  const long reach = j_max + std::abs(y);
  std::vector<double> weight(static_cast<std::size_t>(reach + 1));
  for (long k = 0; k <= reach; ++k) {
    const double r = 1.0 / gu(k);
    double w = 1.0;
    for (int i = 0; i < power; ++i) w *= r;
    weight[static_cast<std::size_t>(k)] = w;
  }
  const auto at = [&](long k) { return weight[static_cast<std::size_t>(std::abs(k))]; };
  double sum = 0.0;
  for (long j = -j_max; j <= j_max; ++j) sum += at(j) * at(j + y);
  // For |j| > j_max, |j + y| >= |j| / 2, so each term is at most 2^p |j|^{-2p}.
  const double p = power;
  sum += std::pow(2.0, p + 1.0) * std::pow(static_cast<double>(j_max), 1.0 - 2.0 * p) / (2.0 * p - 1.0);
  return {sum, (std::numbers::pi * std::numbers::pi + 3.0) * std::pow(gu(std::abs(y) - 1), -p)};
}

}  // namespace nonstatcov
