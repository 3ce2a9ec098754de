#include "nonstatcov/models.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>

#include "nonstatcov/errors.hpp"
#include "nonstatcov/parallel.hpp"
#include "nonstatcov/random.hpp"

namespace nonstatcov {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr int kUGridPoints = 101;
constexpr int kOmegaGridPoints = 64;

std::vector<double> unit_grid(int n) {
  std::vector<double> g(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) g[static_cast<std::size_t>(i)] = static_cast<double>(i) / (n - 1);
  return g;
}

double rescaled(long t, long n) { return static_cast<double>(t) / static_cast<double>(n); }

std::vector<Matrix> eval_all(const std::vector<CoefficientFn>& fns, double u) {
  std::vector<Matrix> out;
  out.reserve(fns.size());
  for (const auto& f : fns) out.push_back(f(u));
  return out;
}

Matrix companion(const std::vector<Matrix>& phis, int p) {
  const int d = static_cast<int>(phis.size());
  Matrix f = Matrix::Zero(d * p, d * p);
  for (int j = 0; j < d; ++j) f.block(0, j * p, p, p) = phis[static_cast<std::size_t>(j)];
  if (d > 1) f.block(p, 0, (d - 1) * p, (d - 1) * p).setIdentity();
  return f;
}

double spectral_radius(const Matrix& f) {
  if (f.size() == 0) return 0.0;
  Eigen::EigenSolver<Matrix> es(f, false);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

// Solves G = F G F^T + Q by squaring: G <- G + A G A^T, A <- A^2.
Matrix discrete_lyapunov(const Matrix& f, const Matrix& q) {
  Matrix g = q;
  Matrix a = f;
  for (int k = 0; k < 80; ++k) {
    const Matrix next = g + a * g * a.transpose();
    a = (a * a).eval();
    const double change = (next - g).cwiseAbs().maxCoeff();
    g = next;
    if (a.cwiseAbs().maxCoeff() < 1e-18 || change <= 1e-17 * g.cwiseAbs().maxCoeff()) break;
  }
  const Matrix sym = 0.5 * (g + g.transpose());
  return sym;
}

Matrix sym_sqrt(const Matrix& s) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (s + s.transpose()));
  const Vector ev = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
}

std::vector<Matrix> arch_lags(const ModelSpec& m, double u) {
  std::vector<Matrix> a;
  for (int j = 1; j <= m.order; ++j) a.push_back(m.coefficients[static_cast<std::size_t>(j)](u));
  return a;
}

std::vector<Matrix> var_phis(const ModelSpec& m, double u) { return eval_all(m.coefficients, u); }

void require(bool ok, const std::string& what) {
  if (!ok) throw ModelError(what);
}

void check_structure(const ModelSpec& m) {
  require(m.p >= 1, "dimension p must be positive");
  require(m.order >= 0, "order must be nonnegative");
  auto check_dims = [&](const CoefficientFn& f, Eigen::Index r, Eigen::Index c, const char* what) {
    require(f.rows() == r && f.cols() == c, std::string(what) + " has the wrong shape");
  };
  const auto p = static_cast<Eigen::Index>(m.p);
  switch (m.family) {
    case Family::TvVMA:
      require(m.coefficients.size() == static_cast<std::size_t>(m.order) + 1,
              "tv-VMA needs order + 1 coefficients Psi_0..Psi_J");
      for (const auto& c : m.coefficients) check_dims(c, p, p, "Psi_j");
      break;
    case Family::TvVAR:
      require(m.order >= 1, "tv-VAR order must be at least 1");
      require(m.coefficients.size() == static_cast<std::size_t>(m.order),
              "tv-VAR needs order coefficients Phi_1..Phi_d");
      for (const auto& c : m.coefficients) check_dims(c, p, p, "Phi_j");
      require(m.innovation_variance.has_value(), "tv-VAR needs an innovation variance");
      check_dims(*m.innovation_variance, p, p, "Sigma");
      break;
    case Family::TvARCH:
      require(m.p == 1, "tvARCH is univariate");
      require(m.order >= 1, "tvARCH order must be at least 1");
      require(m.coefficients.size() == static_cast<std::size_t>(m.order) + 1,
              "tvARCH needs coefficients a_0..a_d");
      for (const auto& c : m.coefficients) check_dims(c, 1, 1, "a_j");
      break;
    case Family::SRE:
      require(m.coefficients.size() == 3, "SRE needs coefficients {A0, A1, B}");
      for (const auto& c : m.coefficients) check_dims(c, p, p, "SRE coefficient");
      break;
  }
  if (m.kappa) require(*m.kappa > 1.0, "kappa must exceed 1");
}

double sre_second_moment_norm(const ModelSpec& m, double u) {
  const Matrix a0 = m.coefficients[0](u);
  const Matrix a1 = m.coefficients[1](u);
  return spectral_norm(a0 * a0.transpose() + a1 * a1.transpose());
}

struct ArchStationary {
  double mean = 0.0;
  double innovation_variance = 0.0;
  Matrix unit_cov;  // d x d autocovariance of the unit-innovation AR(d)
  Matrix companion;
};

ArchStationary arch_stationary(const ModelSpec& m, double u) {
  ArchStationary s;
  const auto a = arch_lags(m, u);
  double sum_a = 0.0;
  for (const auto& x : a) sum_a += x(0, 0);
  s.mean = m.coefficients[0](u)(0, 0) / (1.0 - sum_a);
  s.companion = companion(a, 1);
  Matrix q = Matrix::Zero(m.order, m.order);
  q(0, 0) = 1.0;
  s.unit_cov = discrete_lyapunov(s.companion, q);
  Vector av(m.order);
  for (int j = 0; j < m.order; ++j) av(j) = a[static_cast<std::size_t>(j)](0, 0);
  const double g = av.dot(s.unit_cov * av);
  require(1.0 - 2.0 * g > 0.0, "tvARCH fourth moment is infinite at u = " + std::to_string(u));
  s.innovation_variance = 2.0 * s.mean * s.mean / (1.0 - 2.0 * g);
  return s;
}

// Innovation dimension per time step.
int innovation_dim(const ModelSpec& m) {
  switch (m.family) {
    case Family::TvARCH: return 1;
    case Family::SRE: return 1 + m.p;
    default: return m.p;
  }
}

// Number of leading innovation columns consumed before the first output.
long burn_in(const ModelSpec& m) {
  if (m.family == Family::TvVMA) return m.order;
  return std::max<long>(100, 10 * effective_memory(m));
}

// Runs the model recursion on innovations whose column k belongs to time
// t_start + k. Returns X for times t_start + burn ... t_start + cols - 1.
Matrix run_recursion(const ModelSpec& m, long n, long t_start, const Matrix& eps, long burn) {
  const int p = m.p;
  const long total = eps.cols();
  const long out_len = total - burn;
  Matrix out = Matrix::Zero(p, std::max<long>(out_len, 0));
  switch (m.family) {
    case Family::TvVMA: {
      const int big_j = m.order;
      for (long k = burn; k < total; ++k) {
        const double u = rescaled(t_start + k, n);
        Vector x = Vector::Zero(p);
        for (int j = 0; j <= big_j && k - j >= 0; ++j)
          x += m.coefficients[static_cast<std::size_t>(j)](u) * eps.col(k - j);
        out.col(k - burn) = x;
      }
      break;
    }
    case Family::TvVAR: {
      const int d = m.order;
      Matrix x = Matrix::Zero(p, total);
      for (long k = 0; k < total; ++k) {
        const double u = rescaled(t_start + k, n);
        Vector v = sym_sqrt((*m.innovation_variance)(u)) * eps.col(k);
        for (int j = 1; j <= d && k - j >= 0; ++j)
          v += m.coefficients[static_cast<std::size_t>(j - 1)](u) * x.col(k - j);
        x.col(k) = v;
      }
      if (out_len > 0) out = x.rightCols(out_len);
      break;
    }
    case Family::TvARCH: {
      const int d = m.order;
      Vector x = Vector::Zero(total);
      for (long k = 0; k < total; ++k) {
        const double u = rescaled(t_start + k, n);
        double s2 = m.coefficients[0](u)(0, 0);
        for (int j = 1; j <= d && k - j >= 0; ++j)
          s2 += m.coefficients[static_cast<std::size_t>(j)](u)(0, 0) * x(k - j) * x(k - j);
        x(k) = std::sqrt(s2) * eps(0, k);
      }
      if (out_len > 0) out = x.tail(out_len).transpose();
      break;
    }
    case Family::SRE: {
      Vector x = Vector::Zero(p);
      for (long k = 0; k < total; ++k) {
        const double u = rescaled(t_start + k, n);
        const Matrix a = m.coefficients[0](u) + eps(0, k) * m.coefficients[1](u);
        x = a * x + m.coefficients[2](u) * eps.col(k).tail(p);
        if (k >= burn) out.col(k - burn) = x;
      }
      break;
    }
  }
  return out;
}

double max_spectral_radius(const ModelSpec& m);

void check_simulable(const ModelSpec& m) {
  check_structure(m);
  switch (m.family) {
    case Family::TvVAR:
      require(max_spectral_radius(m) < 1.0, "tv-VAR is not stable on [0, 1]");
      break;
    case Family::TvARCH:
    case Family::SRE:
      validate_model(m);
      break;
    case Family::TvVMA:
      break;
  }
}

// --- tv-VMA covariance ----------------------------------------------------------

// Row of stacked coefficients [Psi_0(u) ... Psi_J(u)].
Matrix vma_stack(const ModelSpec& m, double u) {
  const int p = m.p;
  Matrix s(p, static_cast<Eigen::Index>(m.order + 1) * p);
  for (int j = 0; j <= m.order; ++j)
    s.middleCols(static_cast<Eigen::Index>(j) * p, p) = m.coefficients[static_cast<std::size_t>(j)](u);
  return s;
}

// cov(X_t, X_{t+h}) = sum_j Psi_j(t/N) Psi_{j+h}(tau/N)^T for h >= 0.
Matrix vma_cross(const Matrix& st, const Matrix& stau, int p, int big_j, long h) {
  if (h > big_j) return Matrix::Zero(p, p);
  const Eigen::Index w = static_cast<Eigen::Index>(big_j + 1 - h) * p;
  return st.leftCols(w) * stau.middleCols(static_cast<Eigen::Index>(h) * p, w).transpose();
}

BlockWindow vma_window(const ModelSpec& m, long n, long t_lo, long t_hi) {
  std::vector<Matrix> stacks;
  stacks.reserve(static_cast<std::size_t>(t_hi - t_lo + 1));
  for (long t = t_lo; t <= t_hi; ++t) stacks.push_back(vma_stack(m, rescaled(t, n)));
  return BlockWindow::symmetric_banded_from(t_lo, t_hi, m.p, m.order, [&](long t, long tau) {
    return vma_cross(stacks[static_cast<std::size_t>(t - t_lo)],
                     stacks[static_cast<std::size_t>(tau - t_lo)], m.p, m.order, tau - t);
  });
}

// --- tv-VAR covariance via the banded precision operator --------------------------

// Finite section over [a, b] of D = L^T diag(Sigma_s^{-1}) L, where
// (L X)_s = X_s - sum_j Phi_j(s/N) X_{s-j}. Rows s up to b + d contribute.
Matrix var_precision_section(const ModelSpec& m, long n, long a, long b) {
  const int p = m.p;
  const int d = m.order;
  const Eigen::Index dim = static_cast<Eigen::Index>(b - a + 1) * p;
  Matrix dmat = Matrix::Zero(dim, dim);
  for (long s = a; s <= b + d; ++s) {
    const double u = rescaled(s, n);
    const Matrix w = spd_inverse((*m.innovation_variance)(u));
    // Nonzero blocks of row s of L: column s - j with coefficient -Phi_j (Phi_0 = -I).
    std::vector<std::pair<long, Matrix>> row;
    for (int j = 0; j <= d; ++j) {
      const long col = s - j;
      if (col < a || col > b) continue;
      row.emplace_back(col, j == 0 ? Matrix(Matrix::Identity(p, p))
                                   : Matrix(-m.coefficients[static_cast<std::size_t>(j - 1)](u)));
    }
    for (const auto& [c1, l1] : row) {
      const Matrix lw = l1.transpose() * w;
      for (const auto& [c2, l2] : row)
        dmat.block((c1 - a) * p, (c2 - a) * p, p, p) += lw * l2;
    }
  }
  const Matrix sym = 0.5 * (dmat + dmat.transpose());
  return sym;
}

BlockWindow var_window(const ModelSpec& m, long n, long t_lo, long t_hi) {
  const long pad = default_pad(m);
  const Matrix c = spd_inverse(var_precision_section(m, n, t_lo - pad, t_hi + pad));
  const Eigen::Index off = static_cast<Eigen::Index>(pad) * m.p;
  const Eigen::Index len = static_cast<Eigen::Index>(t_hi - t_lo + 1) * m.p;
  return BlockWindow(t_lo, m.p, c.block(off, off, len, len), true);
}

// --- tvARCH covariance of the squared process ---------------------------------

BlockWindow arch_window(const ModelSpec& m, long n, long t_lo, long t_hi) {
  const int d = m.order;
  const long t0 = t_lo - default_pad(m);
  const long len = t_hi - t0 + 1;
  Matrix c = Matrix::Zero(len, len);
  Vector mu = Vector::Zero(len);
  const double u0 = rescaled(t0, n);
  const auto start = stationary_cov_sequence(m, u0, d);
  const double mu0 = arch_stationary(m, u0).mean;
  for (long i = 0; i < std::min<long>(d, len); ++i) {
    mu(i) = mu0;
    for (long k = 0; k < std::min<long>(d, len); ++k)
      c(i, k) = start[static_cast<std::size_t>(std::abs(i - k))](0, 0);
  }
  for (long i = d; i < len; ++i) {
    const double u = rescaled(t0 + i, n);
    std::vector<double> a(static_cast<std::size_t>(d) + 1);
    for (int j = 0; j <= d; ++j) a[static_cast<std::size_t>(j)] = m.coefficients[static_cast<std::size_t>(j)](u)(0, 0);
    double mean = a[0];
    for (int j = 1; j <= d; ++j) mean += a[static_cast<std::size_t>(j)] * mu(i - j);
    mu(i) = mean;
    for (long k = 0; k < i; ++k) {
      double v = 0.0;
      for (int j = 1; j <= d; ++j) v += a[static_cast<std::size_t>(j)] * c(i - j, k);
      c(i, k) = v;
      c(k, i) = v;
    }
    double var_sigma2 = 0.0;
    for (int j = 1; j <= d; ++j)
      for (int k = 1; k <= d; ++k)
        var_sigma2 += a[static_cast<std::size_t>(j)] * a[static_cast<std::size_t>(k)] * c(i - j, i - k);
    c(i, i) = 3.0 * var_sigma2 + 2.0 * mean * mean;
  }
  const long off = t_lo - t0;
  const long w = t_hi - t_lo + 1;
  return BlockWindow(t_lo, 1, c.block(off, off, w, w), true);
}

}  // namespace

// --- CoefficientFn -----------------------------------------------------------

CoefficientFn CoefficientFn::constant(Matrix c) {
  CoefficientFn f;
  f.form_ = Form::Constant;
  f.a_ = std::move(c);
  f.b_ = Matrix::Zero(f.a_.rows(), f.a_.cols());
  return f;
}

CoefficientFn CoefficientFn::affine(Matrix intercept, Matrix slope, double lo, double hi) {
  if (intercept.rows() != slope.rows() || intercept.cols() != slope.cols())
    throw InputError("affine coefficient: intercept and slope shapes differ");
  if (!(lo <= hi)) throw InputError("affine coefficient: clamp interval is empty");
  CoefficientFn f;
  f.form_ = Form::Affine;
  f.a_ = std::move(intercept);
  f.b_ = std::move(slope);
  f.lo_ = lo;
  f.hi_ = hi;
  return f;
}

CoefficientFn CoefficientFn::sinusoidal(Matrix base, Matrix amplitude, double frequency,
                                        double phase) {
  if (base.rows() != amplitude.rows() || base.cols() != amplitude.cols())
    throw InputError("sinusoidal coefficient: base and amplitude shapes differ");
  CoefficientFn f;
  f.form_ = Form::Sinusoidal;
  f.a_ = std::move(base);
  f.b_ = std::move(amplitude);
  f.frequency_ = frequency;
  f.phase_ = phase;
  return f;
}

CoefficientFn CoefficientFn::piecewise_linear(std::vector<double> knots, std::vector<Matrix> values) {
  if (knots.empty() || knots.size() != values.size())
    throw InputError("piecewise-linear coefficient: need matching, nonempty knots and values");
  for (std::size_t i = 1; i < knots.size(); ++i) {
    if (!(knots[i] > knots[i - 1]))
      throw InputError("piecewise-linear coefficient: knots must be strictly increasing");
    if (values[i].rows() != values[0].rows() || values[i].cols() != values[0].cols())
      throw InputError("piecewise-linear coefficient: value shapes differ");
  }
  CoefficientFn f;
  f.form_ = Form::PiecewiseLinear;
  f.a_ = values.front();
  f.b_ = Matrix::Zero(f.a_.rows(), f.a_.cols());
  f.knots_ = std::move(knots);
  f.values_ = std::move(values);
  return f;
}

Matrix CoefficientFn::operator()(double u) const {
  switch (form_) {
    case Form::Constant: return a_;
    case Form::Affine: return a_ + std::clamp(u, lo_, hi_) * b_;
    case Form::Sinusoidal: return a_ + std::sin(kTwoPi * frequency_ * u + phase_) * b_;
    case Form::PiecewiseLinear: {
      if (u <= knots_.front()) return values_.front();
      if (u >= knots_.back()) return values_.back();
      const auto it = std::upper_bound(knots_.begin(), knots_.end(), u);
      const std::size_t i = static_cast<std::size_t>(it - knots_.begin());
      const double w = (u - knots_[i - 1]) / (knots_[i] - knots_[i - 1]);
      return (1.0 - w) * values_[i - 1] + w * values_[i];
    }
  }
  return a_;
}

Matrix CoefficientFn::derivative(double u) const {
  switch (form_) {
    case Form::Constant: return Matrix::Zero(a_.rows(), a_.cols());
    case Form::Affine:
      return (u >= lo_ && u < hi_) ? b_ : Matrix(Matrix::Zero(a_.rows(), a_.cols()));
    case Form::Sinusoidal:
      return kTwoPi * frequency_ * std::cos(kTwoPi * frequency_ * u + phase_) * b_;
    case Form::PiecewiseLinear: {
      if (u < knots_.front() || u >= knots_.back()) return Matrix::Zero(a_.rows(), a_.cols());
      const auto it = std::upper_bound(knots_.begin(), knots_.end(), u);
      const std::size_t i = static_cast<std::size_t>(it - knots_.begin());
      return (values_[i] - values_[i - 1]) / (knots_[i] - knots_[i - 1]);
    }
  }
  return Matrix::Zero(a_.rows(), a_.cols());
}

double CoefficientFn::lipschitz() const {
  switch (form_) {
    case Form::Constant: return 0.0;
    case Form::Affine: return lo_ < hi_ ? spectral_norm(b_) : 0.0;
    case Form::Sinusoidal: return kTwoPi * std::abs(frequency_) * spectral_norm(b_);
    case Form::PiecewiseLinear: {
      double l = 0.0;
      for (std::size_t i = 1; i < knots_.size(); ++i)
        l = std::max(l, spectral_norm(values_[i] - values_[i - 1]) / (knots_[i] - knots_[i - 1]));
      return l;
    }
  }
  return 0.0;
}

double CoefficientFn::sup_norm() const {
  switch (form_) {
    case Form::Constant: return spectral_norm(a_);
    case Form::Affine: return std::max(spectral_norm((*this)(lo_)), spectral_norm((*this)(hi_)));
    case Form::Sinusoidal: {
      // Convex in the sine value, so the extremes sit at sin = +-1 or the period's range.
      if (frequency_ == 0.0) return spectral_norm((*this)(0.0));
      return std::max(spectral_norm(a_ + b_), spectral_norm(a_ - b_));
    }
    case Form::PiecewiseLinear: {
      double s = 0.0;
      for (const auto& v : values_) s = std::max(s, spectral_norm(v));
      return s;
    }
  }
  return 0.0;
}

bool CoefficientFn::is_constant() const {
  switch (form_) {
    case Form::Constant: return true;
    case Form::Affine: return lo_ == hi_ || b_.isZero(0.0);
    case Form::Sinusoidal: return frequency_ == 0.0 || b_.isZero(0.0);
    case Form::PiecewiseLinear:
      for (const auto& v : values_)
        if (v != values_.front()) return false;
      return true;
  }
  return true;
}

CoefficientFn CoefficientFn::scaled(double c) const {
  CoefficientFn f = *this;
  f.a_ *= c;
  f.b_ *= c;
  for (auto& v : f.values_) v *= c;
  return f;
}

// --- ModelSpec ---------------------------------------------------------------

std::string to_string(Family f) {
  switch (f) {
    case Family::TvVMA: return "tv-vma";
    case Family::TvVAR: return "tv-var";
    case Family::TvARCH: return "tv-arch";
    case Family::SRE: return "sre";
  }
  return "unknown";
}

Family family_from_string(const std::string& s) {
  if (s == "tv-vma") return Family::TvVMA;
  if (s == "tv-var") return Family::TvVAR;
  if (s == "tv-arch") return Family::TvARCH;
  if (s == "sre") return Family::SRE;
  throw InputError("unknown model family '" + s + "'");
}

ModelSpec ModelSpec::frozen(double u0) const {
  ModelSpec out = *this;
  for (auto& c : out.coefficients) c = c.frozen(u0);
  if (out.innovation_variance) out.innovation_variance = out.innovation_variance->frozen(u0);
  return out;
}

bool ModelSpec::is_time_invariant() const {
  for (const auto& c : coefficients)
    if (!c.is_constant()) return false;
  return !innovation_variance || innovation_variance->is_constant();
}

double model_kappa(const ModelSpec& m) { return m.kappa.value_or(4.0); }

namespace {

// Spectral radius part of var_stability without the margin scan.
double max_spectral_radius(const ModelSpec& m) {
  double rho = 0.0;
  for (double u : unit_grid(kUGridPoints)) {
    if (m.family == Family::TvARCH) rho = std::max(rho, spectral_radius(companion(arch_lags(m, u), 1)));
    else if (m.family == Family::TvVAR) rho = std::max(rho, spectral_radius(companion(var_phis(m, u), m.p)));
    else if (m.family == Family::SRE) rho = std::max(rho, sre_second_moment_norm(m, u));
  }
  return rho;
}

}  // namespace

StabilityReport var_stability(const ModelSpec& m, double delta) {
  StabilityReport rep;
  rep.margin = std::numeric_limits<double>::infinity();
  const auto grid = unit_grid(kUGridPoints);
  const int p = m.p;
  for (double u : grid) {
    std::vector<Matrix> phis;
    if (m.family == Family::TvARCH) phis = arch_lags(m, u);
    else if (m.family == Family::TvVAR) phis = var_phis(m, u);
    else if (m.family == Family::SRE) {
      rep.spectral_radius = std::max(rep.spectral_radius, sre_second_moment_norm(m, u));
      continue;
    } else {
      continue;
    }
    const int dim = m.family == Family::TvARCH ? 1 : p;
    rep.spectral_radius = std::max(rep.spectral_radius, spectral_radius(companion(phis, dim)));
    for (double radius : {1.0, 1.0 + delta}) {
      for (int k = 0; k < kOmegaGridPoints; ++k) {
        const std::complex<double> z = std::polar(radius, kTwoPi * k / kOmegaGridPoints);
        CMatrix a = CMatrix::Identity(dim, dim);
        std::complex<double> zj = 1.0;
        for (const auto& phi : phis) {
          zj *= z;
          a -= zj * phi.cast<std::complex<double>>();
        }
        Eigen::JacobiSVD<CMatrix> svd(a);
        rep.margin = std::min(rep.margin, svd.singularValues()(dim - 1));
      }
    }
  }
  if (!std::isfinite(rep.margin)) rep.margin = 0.0;
  return rep;
}

void validate_model(const ModelSpec& m) {
  check_structure(m);
  const auto grid = unit_grid(kUGridPoints);
  switch (m.family) {
    case Family::TvVMA: {
      for (double u : grid) {
        const auto psis = eval_all(m.coefficients, u);
        for (int k = 0; k < kOmegaGridPoints; ++k) {
          const double w = kTwoPi * k / kOmegaGridPoints;
          CMatrix a = CMatrix::Zero(m.p, m.p);
          for (std::size_t j = 0; j < psis.size(); ++j)
            a += std::polar(1.0, -w * static_cast<double>(j)) * psis[j].cast<std::complex<double>>();
          Eigen::JacobiSVD<CMatrix> svd(a);
          require(svd.singularValues()(m.p - 1) > 1e-8,
                  "tv-VMA filter vanishes at u = " + std::to_string(u));
        }
      }
      break;
    }
    case Family::TvVAR: {
      const auto st = var_stability(m);
      require(st.spectral_radius < 1.0, "tv-VAR companion spectral radius is not below 1");
      require(st.margin > 1e-8, "tv-VAR stability margin is not positive");
      for (double u : grid)
        require(sym_eig_range(Matrix(0.5 * ((*m.innovation_variance)(u) +
                                            (*m.innovation_variance)(u).transpose())))
                        .lambda_min > 0.0,
                "innovation variance is not positive definite at u = " + std::to_string(u));
      break;
    }
    case Family::TvARCH: {
      for (double u : grid) {
        require(m.coefficients[0](u)(0, 0) > 0.0, "tvARCH needs a_0(u) > 0");
        double sum = 0.0;
        for (int j = 1; j <= m.order; ++j) {
          const double a = m.coefficients[static_cast<std::size_t>(j)](u)(0, 0);
          require(a >= 0.0, "tvARCH needs a_j(u) >= 0");
          sum += a;
        }
        require(std::sqrt(3.0) * sum < 1.0, "tvARCH needs sqrt(E Z^4) sum_j a_j(u) < 1");
      }
      break;
    }
    case Family::SRE: {
      for (double u : grid)
        require(sre_second_moment_norm(m, u) < 1.0, "SRE needs ||E[A A^T]|| < 1");
      break;
    }
  }
}

long effective_memory(const ModelSpec& m) {
  switch (m.family) {
    case Family::TvVMA: return std::max(1, m.order);
    case Family::SRE: {
      const double rho = max_spectral_radius(m);
      if (rho <= 0.0) return 1;
      return std::max<long>(1, static_cast<long>(std::ceil(-2.0 / std::log(rho))));
    }
    default: {
      const double rho = max_spectral_radius(m);
      if (rho <= 0.0) return 1;
      if (rho >= 1.0) throw ModelError("model is not stable");
      return std::max<long>(1, static_cast<long>(std::ceil(-1.0 / std::log(rho))));
    }
  }
}

long default_pad(const ModelSpec& m) {
  if (m.family == Family::TvVMA) {
    // Lag at which a K gu^{-kappa} envelope has fallen by three orders of magnitude.
    const long mem = static_cast<long>(std::ceil(std::pow(1e3, 1.0 / model_kappa(m))));
    return std::max<long>(50, 10 * mem);
  }
  return std::max<long>({50, 25L * m.order, 25 * effective_memory(m)});
}

// --- covariances ----------------------------------------------------------------

Matrix cov_block(const ModelSpec& m, long n, long t, long tau) {
  if (n < 1) throw InputError("N must be positive");
  check_structure(m);
  switch (m.family) {
    case Family::TvVMA: {
      if (tau < t) return cov_block(m, n, tau, t).transpose();
      return vma_cross(vma_stack(m, rescaled(t, n)), vma_stack(m, rescaled(tau, n)), m.p, m.order,
                       tau - t);
    }
    case Family::TvVAR:
    case Family::TvARCH: {
      const long lo = std::min(t, tau);
      const long hi = std::max(t, tau);
      return cov_window(m, n, lo, hi).block(t, tau);
    }
    case Family::SRE:
      throw UnsupportedError("SRE covariances are available by Monte Carlo only");
  }
  return {};
}

BlockWindow cov_window(const ModelSpec& m, long n, long t_lo, long t_hi) {
  if (n < 1) throw InputError("N must be positive");
  if (t_hi < t_lo) throw InputError("empty window");
  validate_model(m);
  switch (m.family) {
    case Family::TvVMA: return vma_window(m, n, t_lo, t_hi);
    case Family::TvVAR: return var_window(m, n, t_lo, t_hi);
    case Family::TvARCH: return arch_window(m, n, t_lo, t_hi);
    case Family::SRE: throw UnsupportedError("SRE covariances are available by Monte Carlo only");
  }
  throw UnsupportedError("unknown family");
}

std::vector<Matrix> stationary_cov_sequence(const ModelSpec& m, double u, long max_lag) {
  if (max_lag < 0) throw InputError("max_lag must be nonnegative");
  check_structure(m);
  const int p = m.p;
  std::vector<Matrix> out;
  out.reserve(static_cast<std::size_t>(max_lag) + 1);
  switch (m.family) {
    case Family::TvVMA: {
      const Matrix s = vma_stack(m, u);
      for (long r = 0; r <= max_lag; ++r) out.push_back(vma_cross(s, s, p, m.order, r));
      break;
    }
    case Family::TvVAR: {
      const auto phis = var_phis(m, u);
      const Matrix f = companion(phis, p);
      require(spectral_radius(f) < 1.0, "tv-VAR is unstable at u = " + std::to_string(u));
      Matrix q = Matrix::Zero(f.rows(), f.cols());
      q.topLeftCorner(p, p) = (*m.innovation_variance)(u);
      Matrix g = discrete_lyapunov(f, q);
      // cov(Y_{t+r}, Y_t) = F^r G for the companion state Y_t = (X_t, ..., X_{t-d+1}).
      for (long r = 0; r <= max_lag; ++r) {
        out.push_back(g.topLeftCorner(p, p).transpose());
        g = (f * g).eval();
      }
      out[0] = 0.5 * (out[0] + out[0].transpose());
      break;
    }
    case Family::TvARCH: {
      const ArchStationary s = arch_stationary(m, u);
      Matrix g = s.unit_cov;
      for (long r = 0; r <= max_lag; ++r) {
        out.push_back(Matrix::Constant(1, 1, s.innovation_variance * g(0, 0)));
        g = (s.companion * g).eval();
      }
      break;
    }
    case Family::SRE:
      throw UnsupportedError("SRE covariances are available by Monte Carlo only");
  }
  return out;
}

std::vector<Matrix> stationary_cov_derivative(const ModelSpec& m, double u, long max_lag) {
  if (max_lag < 0) throw InputError("max_lag must be nonnegative");
  check_structure(m);
  const int p = m.p;
  std::vector<Matrix> out;
  out.reserve(static_cast<std::size_t>(max_lag) + 1);
  switch (m.family) {
    case Family::TvVMA: {
      const Matrix s = vma_stack(m, u);
      Matrix ds(p, s.cols());
      for (int j = 0; j <= m.order; ++j)
        ds.middleCols(static_cast<Eigen::Index>(j) * p, p) =
            m.coefficients[static_cast<std::size_t>(j)].derivative(u);
      for (long r = 0; r <= max_lag; ++r)
        out.push_back(vma_cross(ds, s, p, m.order, r) + vma_cross(s, ds, p, m.order, r));
      break;
    }
    case Family::TvVAR: {
      const auto phis = var_phis(m, u);
      std::vector<Matrix> dphis;
      for (const auto& c : m.coefficients) dphis.push_back(c.derivative(u));
      const Matrix f = companion(phis, p);
      Matrix df = companion(dphis, p);
      if (m.order > 1) df.block(p, 0, (m.order - 1) * p, (m.order - 1) * p).setZero();
      require(spectral_radius(f) < 1.0, "tv-VAR is unstable at u = " + std::to_string(u));
      Matrix q = Matrix::Zero(f.rows(), f.cols());
      q.topLeftCorner(p, p) = (*m.innovation_variance)(u);
      Matrix dq = Matrix::Zero(f.rows(), f.cols());
      dq.topLeftCorner(p, p) = m.innovation_variance->derivative(u);
      Matrix g = discrete_lyapunov(f, q);
      // Differentiating G = F G F^T + Q gives a Lyapunov equation for G'.
      Matrix dg = discrete_lyapunov(f, df * g * f.transpose() + f * g * df.transpose() + dq);
      for (long r = 0; r <= max_lag; ++r) {
        out.push_back(dg.topLeftCorner(p, p).transpose());
        const Matrix next_dg = df * g + f * dg;
        g = (f * g).eval();
        dg = next_dg;
      }
      break;
    }
    default:
      throw UnsupportedError("covariance derivatives are implemented for tv-VMA and tv-VAR only");
  }
  return out;
}

Matrix stationary_cov(const ModelSpec& m, double u, long r) {
  const auto seq = stationary_cov_sequence(m, u, std::abs(r));
  return r >= 0 ? seq.back() : Matrix(seq.back().transpose());
}

BlockWindow stationary_window(const ModelSpec& m, double u, long length) {
  const auto seq = stationary_cov_sequence(m, u, length - 1);
  return BlockWindow::symmetric_from(0, length - 1, m.p, [&](long t, long tau) {
    return seq[static_cast<std::size_t>(tau - t)];
  });
}

CMatrix local_spectral_density(const ModelSpec& m, double u, double omega) {
  check_structure(m);
  using C = std::complex<double>;
  const int p = m.p;
  CMatrix f;
  switch (m.family) {
    case Family::TvVMA: {
      CMatrix a = CMatrix::Zero(p, p);
      for (int j = 0; j <= m.order; ++j)
        a += std::polar(1.0, -omega * j) * m.coefficients[static_cast<std::size_t>(j)](u).cast<C>();
      f = a * a.adjoint();
      break;
    }
    case Family::TvVAR: {
      CMatrix a = CMatrix::Identity(p, p);
      for (int j = 1; j <= m.order; ++j)
        a -= std::polar(1.0, -omega * j) * m.coefficients[static_cast<std::size_t>(j - 1)](u).cast<C>();
      Eigen::JacobiSVD<CMatrix> svd(a);
      const auto& sv = svd.singularValues();
      if (!(sv(p - 1) > 1e-12 * sv(0)))
        throw ModelError("VAR transfer function is singular at u = " + std::to_string(u));
      const CMatrix h = a.partialPivLu().inverse();
      f = h * (*m.innovation_variance)(u).cast<C>() * h.adjoint();
      break;
    }
    case Family::TvARCH: {
      const ArchStationary s = arch_stationary(m, u);
      C a = 1.0;
      for (int j = 1; j <= m.order; ++j)
        a -= std::polar(1.0, -omega * j) * m.coefficients[static_cast<std::size_t>(j)](u)(0, 0);
      if (!(std::abs(a) > 1e-12)) throw ModelError("AR polynomial of the squared process vanishes");
      f = CMatrix::Constant(1, 1, s.innovation_variance / std::norm(a));
      break;
    }
    case Family::SRE:
      throw UnsupportedError("SRE spectra are not available in closed form");
  }
  const CMatrix herm = 0.5 * (f + f.adjoint());
  return herm;
}

EigRange spectral_eig_range(const ModelSpec& m, const std::vector<double>& u_grid,
                            const std::vector<double>& omega_grid) {
  if (u_grid.empty() || omega_grid.empty()) throw InputError("spectral_eig_range: empty grid");
  EigRange r{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
  for (double u : u_grid)
    for (double w : omega_grid) {
      Eigen::SelfAdjointEigenSolver<CMatrix> es(local_spectral_density(m, u, w), Eigen::EigenvaluesOnly);
      const auto& ev = es.eigenvalues();
      r.lambda_min = std::min(r.lambda_min, ev(0));
      r.lambda_max = std::max(r.lambda_max, ev(ev.size() - 1));
    }
  return r;
}

// --- simulation ----------------------------------------------------------------

SamplePath simulate_path(const ModelSpec& m, long n, long t_lo, long t_hi, std::uint64_t seed) {
  if (n < 1) throw InputError("N must be positive");
  if (t_hi < t_lo) throw InputError("empty time range");
  check_simulable(m);
  const long burn = burn_in(m);
  const long total = burn + (t_hi - t_lo + 1);
  Rng rng = make_rng(seed, 0);
  const Matrix eps = random_normal(rng, innovation_dim(m), total);
  SamplePath path;
  path.t_lo = t_lo;
  path.n = n;
  path.seed = seed;
  path.data = run_recursion(m, n, t_lo - burn, eps, burn);
  return path;
}

PhysicalDependence physical_dep_estimate(const ModelSpec& m, long n, long t, long j, long reps,
                                         std::uint64_t seed) {
  if (j < 0) throw InputError("j must be nonnegative");
  if (reps < 100) throw InputError("physical dependence needs at least 100 replications");
  check_simulable(m);
  const int p = m.p;
  const int q = innovation_dim(m);
  const long burn = burn_in(m);
  // Innovations cover [t - j - burn, t]; column `burn` is time t - j.
  const long total = burn + j + 1;
  const long t_start = t - j - burn;
  std::vector<Vector> diffs(static_cast<std::size_t>(reps));
  parallel_for(static_cast<std::size_t>(reps), [&](std::size_t r) {
    Rng rng = make_rng(seed, r);
    Matrix eps = random_normal(rng, q, total);
    const Vector replacement = random_normal(rng, q);
    const Vector x = run_recursion(m, n, t_start, eps, total - 1).col(0);
    eps.col(burn) = replacement;
    const Vector x_coupled = run_recursion(m, n, t_start, eps, total - 1).col(0);
    diffs[r] = x - x_coupled;
  });
  Matrix s = Matrix::Zero(p, p);
  for (const auto& d : diffs) s += d * d.transpose();
  s /= static_cast<double>(reps);
  const Matrix sym = 0.5 * (s + s.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> es(sym);
  const Vector v = es.eigenvectors().col(p - 1);
  PhysicalDependence out;
  out.value = std::max(0.0, es.eigenvalues()(p - 1));
  double mean = 0.0, m2 = 0.0;
  for (const auto& d : diffs) {
    const double proj = v.dot(d);
    mean += proj * proj;
  }
  mean /= static_cast<double>(reps);
  for (const auto& d : diffs) {
    const double proj = v.dot(d);
    m2 += (proj * proj - mean) * (proj * proj - mean);
  }
  out.std_error = std::sqrt(m2 / static_cast<double>(reps - 1) / static_cast<double>(reps));
  return out;
}

// --- assumption verification ---------------------------------------------------------

AssumptionFit assumption_fit(const ModelSpec& m, long n, long t_lo, long t_hi) {
  const BlockWindow w = cov_window(m, n, t_lo, t_hi);
  const auto by_lag = max_norm_by_lag(w);
  AssumptionFit fit;
  const double floor = 1e-13 * std::max(by_lag.front(), 1e-300);
  std::vector<double> xs, ys;
  for (std::size_t lag = 2; lag < by_lag.size(); ++lag) {
    if (!(by_lag[lag] > floor)) continue;
    fit.decay.lags.push_back(static_cast<long>(lag));
    fit.decay.norms.push_back(by_lag[lag]);
    xs.push_back(std::log(gu(static_cast<long>(lag))));
    ys.push_back(std::log(by_lag[lag]));
  }
  if (xs.size() < 4) throw FitError("decay fit needs at least 4 lags with nonzero covariance");
  const LineFit line = least_squares_line(xs, ys);
  fit.decay.exponent = -line.slope;
  fit.decay.constant = std::exp(line.intercept);
  for (std::size_t i = 0; i < xs.size(); ++i)
    fit.decay.residuals.push_back(ys[i] - (line.intercept + line.slope * xs[i]));

  const double kappa = model_kappa(m);
  const long len = w.length();
  std::vector<double> gap_gu(static_cast<std::size_t>(len), 0.0);
  std::vector<double> gap_zeta(static_cast<std::size_t>(len), 0.0);
  std::vector<double> gap_raw(static_cast<std::size_t>(len), 0.0);
  parallel_for(static_cast<std::size_t>(len), [&](std::size_t i) {
    const long t = t_lo + static_cast<long>(i);
    const auto seq = stationary_cov_sequence(m, rescaled(t, n), std::max(t - t_lo, t_hi - t));
    for (long tau = t_lo; tau <= t_hi; ++tau) {
      const long r = tau - t;
      const Matrix cr = r >= 0 ? seq[static_cast<std::size_t>(r)]
                               : Matrix(seq[static_cast<std::size_t>(-r)].transpose());
      const double gap = spectral_norm(w.block(t, tau) - cr);
      const double g = gu(r);
      const double base = std::pow(g, 1.0 - kappa);
      const double inv_n = 1.0 / static_cast<double>(n);
      gap_raw[i] = std::max(gap_raw[i], gap);
      gap_gu[i] = std::max(gap_gu[i], gap / (base * std::min(inv_n, 2.0 / g)));
      gap_zeta[i] = std::max(gap_zeta[i], gap / (base * std::min(inv_n, 2.0 * zeta(r))));
    }
  });
  for (long i = 0; i < len; ++i) {
    fit.max_gap = std::max(fit.max_gap, gap_raw[static_cast<std::size_t>(i)]);
    fit.smoothness_gu = std::max(fit.smoothness_gu, gap_gu[static_cast<std::size_t>(i)]);
    fit.smoothness_zeta = std::max(fit.smoothness_zeta, gap_zeta[static_cast<std::size_t>(i)]);
  }
  return fit;
}

}  // namespace nonstatcov
