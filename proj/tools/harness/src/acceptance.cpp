#include "nonstatcov/harness/acceptance.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>

#include <Eigen/QR>

#include "nonstatcov/errors.hpp"
#include "nonstatcov/inverse_analysis.hpp"
#include "nonstatcov/parallel.hpp"
#include "nonstatcov/partial_cov.hpp"
#include "nonstatcov/random.hpp"
#include "nonstatcov/var_extraction.hpp"

namespace nonstatcov::harness {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string tag_for(int id) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "verify-all/c%02d", id);
  return buf;
}

std::string fmt(double v) { return format_double(v); }

/// Collapses the sub-verdicts of one criterion into a single verdict.
Verdict combine(int id, const std::vector<Verdict>& parts, double elapsed, double budget) {
  const auto& c = acceptance_criteria()[static_cast<std::size_t>(id - 1)];
  char name[64];
  std::snprintf(name, sizeof name, "c%02d_%s", id, c.name.c_str());
  Verdict v{name, !parts.empty(), "", {}};
  for (const auto& p : parts) {
    v.pass = v.pass && p.pass;
    if (!v.detail.empty()) v.detail += "; ";
    v.detail += p.name + (p.pass ? " ok" : " FAILED") + ": " + p.detail;
    for (const auto& [key, value] : p.values) v.values.emplace_back(p.name + "." + key, value);
  }
  v.values.emplace_back("seconds", elapsed);
  if (budget > 0.0) {
    v.values.emplace_back("budget_seconds", budget);
    if (elapsed > budget) {
      v.pass = false;
      v.detail += "; runtime " + fmt(elapsed) + " s exceeds " + fmt(budget) + " s";
    }
  }
  return v;
}

Verdict count_verdict(const std::string& name, long violations, long instances,
                      const std::string& what) {
  return {name, violations == 0,
          std::to_string(violations) + " violations over " + std::to_string(instances) + " " + what,
          {{"violations", static_cast<double>(violations)},
           {"instances", static_cast<double>(instances)}}};
}

double uniform(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

long uniform_int(Rng& rng, long lo, long hi) {
  return std::uniform_int_distribution<long>(lo, hi)(rng);
}

// --- criterion bodies ------------------------------------------------------------------

Outcome inverse_decay(const ModelSpec& vma) {
  Grid g;
  g.n = {200};
  g.window = {240, 480};
  g.pad = 60;
  Outcome out = run_decay(vma, g, tag_for(1));
  out.verdicts = decay_verdicts(out.rows, 2.5, 0.10);
  return out;
}

Outcome demko_soundness(std::uint64_t seed) {
  const ModelSpec dummy = white_noise(1);
  Table tab(tag_for(2), dummy);
  const long instances = 200;
  long violations = 0;
  const long bands[] = {1, 2, 4};
  for (long i = 0; i < instances; ++i) {
    Rng rng = make_rng(seed, 2000 + static_cast<std::uint64_t>(i));
    const int p = 1 + static_cast<int>(i % 3);
    const long bw = bands[(i / 3) % 3];
    const long len = uniform_int(rng, 2 * bw + 2, 120 / p);
    const BlockWindow raw = BlockWindow::symmetric_banded_from(
        0, len - 1, p, bw, [&](long t, long tau) -> Matrix {
          return random_normal(rng, p, p) / static_cast<double>(1 + tau - t);
        });
    const EigRange er = sym_eig_range(raw);
    const double spread = er.lambda_max - er.lambda_min;
    const double shift = -er.lambda_min + spread * std::pow(10.0, uniform(rng, -2.0, 0.0));
    Matrix flat = raw.flat();
    flat.diagonal().array() += shift;
    const BlockWindow b(0, p, flat, true);
    const EigRange ab = sym_eig_range(b);
    const Matrix inv = spd_inverse(b.flat());
    // Entries below the rounding level of the dense inverse cannot be resolved.
    const double floor = 1e-12 / ab.lambda_min;
    double worst = 0.0;
    long local = 0;
    for (long t = 0; t < len; ++t)
      for (long tau = 0; tau < len; ++tau) {
        if (t == tau) continue;
        const double norm = spectral_norm(inv.block(t * p, tau * p, p, p));
        const double bound = demko_bound(ab.lambda_min, ab.lambda_max, bw, tau - t);
        worst = std::max(worst, norm / (bound + floor));
        if (norm > bound + floor) ++local;
      }
    violations += local;
    Row& r = tab.add("demko_max_ratio", len, worst);
    r.k = i;
    r.t = p;
    r.tau = bw;
    r.envelope = 1.0;
    r.x = ab.lambda_max / ab.lambda_min;
  }
  Outcome out;
  out.rows = std::move(tab.rows());
  out.verdicts.push_back(count_verdict("demko_bound", violations, instances, "instances (block count)"));
  return out;
}

Outcome neumann_certificates(std::uint64_t seed) {
  const ModelSpec dummy = white_noise(1);
  Table tab(tag_for(3), dummy);
  const long instances = 50;
  const long bands[] = {2, 3, 4, 6};
  const double k = 0.3;
  long violations = 0;
  for (long i = 0; i < instances; ++i) {
    Rng rng = make_rng(seed, 3000 + static_cast<std::uint64_t>(i));
    const int p = 1 + static_cast<int>(i % 2);
    const long len = uniform_int(rng, 24, 60);
    const long bw = bands[i % 4];
    const BlockWindow c = BlockWindow::symmetric_from(0, len - 1, p, [&](long t, long tau) -> Matrix {
      if (t == tau) {
        const Matrix r = random_normal(rng, p, p);
        return Matrix::Identity(p, p) + 0.05 * (r + r.transpose()) / (2.0 * spectral_norm(r));
      }
      const Matrix r = random_normal(rng, p, p);
      return k * std::pow(gu(tau - t), -4.0) * uniform(rng, 0.5, 1.0) * r / spectral_norm(r);
    });
    const Matrix dense = spd_inverse(c.flat());
    double error = std::numeric_limits<double>::infinity();
    double certificate = 0.0;
    try {
      const NeumannResult res = neumann_inverse(c, bw, 30);
      error = spectral_norm(res.approx.flat() - dense);
      certificate = res.certificate;
    } catch (const DivergenceError&) {
      // No certificate was issued; counted as a violation below.
    }
    if (!(error <= certificate)) ++violations;
    Row& r = tab.add("neumann_error", len, error);
    r.k = i;
    r.t = p;
    r.tau = bw;
    r.envelope = certificate;
  }
  Outcome out;
  out.rows = std::move(tab.rows());
  out.verdicts.push_back(count_verdict("neumann_certificate", violations, instances, "windows"));
  return out;
}

Outcome ar1_oracle() {
  Outcome out;
  const std::pair<double, double> cases[] = {{0.5, 1.0}, {-0.3, 2.0}, {0.8, 0.5}};
  double worst_precision = 0.0, worst_var = 0.0;
  long index = 0;
  for (const auto& [phi, s2] : cases) {
    const ModelSpec m = reference_ar1(phi, s2);
    Table tab(tag_for(4), m);
    const long pad = default_pad(m);
    const long len = 40;
    const InverseWindow inv = model_inverse(m, 100, 0, len - 1, pad);
    double diag = 0.0, off = 0.0, far = 0.0;
    for (long t = 0; t < len; ++t)
      for (long tau = 0; tau < len; ++tau) {
        const double v = inv.base.block(t, tau)(0, 0);
        if (t == tau)
          diag = std::max(diag, std::abs(v - (1.0 + phi * phi) / s2));
        else if (std::abs(t - tau) == 1)
          off = std::max(off, std::abs(v + phi / s2));
        else
          far = std::max(far, std::abs(v));
      }
    const VarCoefficients vc = var_coeffs_infinite(m, 100, 50, 3);
    const double phi_err = std::max({std::abs(vc.phis[0](0, 0) - phi), std::abs(vc.phis[1](0, 0)),
                                     std::abs(vc.phis[2](0, 0))});
    const double sigma_err = std::abs(vc.sigma(0, 0) - s2);
    for (const auto& [q, v] : {std::pair{"precision_diag_error", diag},
                               std::pair{"precision_offdiag_error", off},
                               std::pair{"precision_far_error", far}, std::pair{"phi_error", phi_err},
                               std::pair{"sigma_error", sigma_err}}) {
      Row& r = tab.add(q, 100, v);
      r.k = index;
      r.x = phi;
      r.envelope = 1e-8;
    }
    worst_precision = std::max({worst_precision, diag, off, far});
    worst_var = std::max({worst_var, phi_err, sigma_err});
    out.rows.insert(out.rows.end(), tab.rows().begin(), tab.rows().end());
    ++index;
  }
  out.verdicts.push_back({"precision_structure", worst_precision <= 1e-8,
                          "largest deviation from the tridiagonal AR(1) precision " +
                              fmt(worst_precision),
                          {{"max_error", worst_precision}}});
  out.verdicts.push_back({"var_coefficients", worst_var <= 1e-8,
                          "largest deviation of (Phi, Sigma) from (phi, sigma^2) " + fmt(worst_var),
                          {{"max_error", worst_var}}});
  return out;
}

Outcome baxter(const ModelSpec& vma) {
  Grid g;
  g.n = {200};
  g.d = {5, 10, 20, 40};
  g.j = {160};
  g.u0 = 0.5;
  return run_baxter(vma, g, tag_for(5));
}

Outcome smoothness_transfer(const ModelSpec& vma) {
  const ModelSpec arch = reference_arch();
  const ModelSpec var3 = reference_var3();
  const std::vector<long> ns = {100, 200, 400};
  const double u0 = 0.625;
  Table arch_tab(tag_for(6), arch), vma_tab(tag_for(6), vma), var_tab(tag_for(6), var3);
  const long var_pad = default_pad(var3);
  for (long n : ns) {
    const long t = target_time(u0, n);
    const VarSmoothness vs = var_smoothness_gap(arch, n, t, 5);
    Row& s = arch_tab.add("sigma_gap", n, vs.sigma.measured.front());
    s.t = t;
    s.tau = t;
    s.envelope = vs.sigma.envelope.front();
    s.constant = vs.sigma.constant;
    vma_tab.add_gap(inverse_smoothness_gap(vma, n, t, t, 0, default_pad(vma)), n, "inverse_gap");
    var_tab.add_gap(partial_smoothness_gap(var3, n, 0, 1, t, t, 0, var_pad), n, "partial_gap");
  }
  Outcome out;
  for (auto* tab : {&arch_tab, &vma_tab, &var_tab})
    out.rows.insert(out.rows.end(), tab->rows().begin(), tab->rows().end());
  for (const char* q : {"sigma_gap", "inverse_gap", "partial_gap"}) {
    out.verdicts.push_back(halving_verdict(out.rows, q));
    out.verdicts.push_back(constant_stability_verdict(out.rows, q));
  }
  return out;
}

Outcome partial_oracle(std::uint64_t seed) {
  const ModelSpec dummy = white_noise(3);
  Table tab(tag_for(7), dummy);
  const int p = 3;
  const long len = 20;
  const std::pair<int, int> pairs[] = {{0, 1}, {0, 2}, {1, 2}};
  const long instances = 100;
  long mismatches = 0, dominance_failures = 0;
  double worst_err = 0.0, worst_slack = std::numeric_limits<double>::infinity();
  for (long i = 0; i < instances; ++i) {
    Rng rng = make_rng(seed, 7000 + static_cast<std::uint64_t>(i));
    const Eigen::Index dim = p * len;
    const Matrix a = random_normal(rng, dim, dim);
    Matrix s = a * a.transpose() / static_cast<double>(dim) + 0.2 * Matrix::Identity(dim, dim);
    s = (0.5 * (s + s.transpose())).eval();
    const BlockWindow c(0, p, s, true);
    const auto [ca, cb] = pairs[i % 3];
    const PartialPair pp = partial_cov_pair(c, ca, cb, 0);

    // Regression-residual oracle: regress (X^a_t, X^b_t)_t on every other component.
    std::vector<Eigen::Index> keep, rest;
    for (long t = 0; t < len; ++t)
      for (int comp : {ca, cb}) keep.push_back(t * p + comp);
    for (long t = 0; t < len; ++t)
      for (int comp = 0; comp < p; ++comp)
        if (comp != ca && comp != cb) rest.push_back(t * p + comp);
    const Matrix s_kk = s(keep, keep);
    const Matrix s_kr = s(keep, rest);
    const Matrix s_rr = s(rest, rest);
    const Matrix beta = s_rr.colPivHouseholderQr().solve(s_kr.transpose());
    const Matrix oracle = s_kk - s_kr * beta;
    const double err = (pp.deltas.flat() - oracle).cwiseAbs().maxCoeff();
    worst_err = std::max(worst_err, err);
    if (err > 1e-8) ++mismatches;

    double slack = std::numeric_limits<double>::infinity();
    for (long t = 0; t < len; ++t) {
      Matrix raw(2, 2);
      raw << s(t * p + ca, t * p + ca), s(t * p + ca, t * p + cb), s(t * p + cb, t * p + ca),
          s(t * p + cb, t * p + cb);
      const Matrix diff = raw - pp.deltas.block(t, t);
      slack = std::min(slack, sym_eig_range(Matrix(0.5 * (diff + diff.transpose()))).lambda_min);
    }
    worst_slack = std::min(worst_slack, slack);
    if (slack < -1e-10) ++dominance_failures;
    Row& r = tab.add("partial_oracle_error", len, err);
    r.k = i;
    r.t = ca;
    r.tau = cb;
    r.envelope = 1e-8;
    Row& d = tab.add("dominance_slack", len, slack);
    d.k = i;
    d.t = ca;
    d.tau = cb;
  }
  Outcome out;
  out.rows = std::move(tab.rows());
  Verdict v1 = count_verdict("regression_oracle", mismatches, instances, "windows");
  v1.values.emplace_back("max_error", worst_err);
  Verdict v2 = count_verdict("schur_dominance", dominance_failures, instances, "windows");
  v2.values.emplace_back("min_slack", worst_slack);
  out.verdicts = {v1, v2};
  return out;
}

Outcome coherence() {
  const ModelSpec var3 = reference_var3();
  Grid g;
  g.n = {200, 400};
  g.max_lag = 40;
  Outcome out = run_coherence(var3, g, tag_for(8));
  std::vector<Verdict> kept;
  for (auto& v : out.verdicts)
    if (v.name != "coherence_magnitude") kept.push_back(std::move(v));
  out.verdicts = std::move(kept);
  out.extra_tables.clear();
  return out;
}

Outcome eigen_sandwich(const ModelSpec& vma) {
  const std::vector<ModelSpec> models = {vma, reference_var3(), reference_arch()};
  std::vector<double> u_grid, omega_grid;
  for (int k = 0; k <= 20; ++k) u_grid.push_back(k / 20.0);
  for (int k = 0; k < 512; ++k) omega_grid.push_back(2.0 * std::numbers::pi * k / 512.0);
  const long len = 200, n = 200;
  const double eps = 0.1;
  Outcome out;
  long violations = 0, checks = 0;
  for (const auto& m : models) {
    Table tab(tag_for(9), m);
    const EigRange gamma = spectral_eig_range(m, u_grid, omega_grid);
    tab.add("gamma_inf", n, gamma.lambda_min);
    tab.add("gamma_sup", n, gamma.lambda_max);
    const auto record = [&](const char* q, const EigRange& er, std::optional<double> u) {
      Row& lo = tab.add(std::string(q) + "_lambda_min", n, er.lambda_min);
      lo.x = u;
      lo.envelope = gamma.lambda_min - eps;
      Row& hi = tab.add(std::string(q) + "_lambda_max", n, er.lambda_max);
      hi.x = u;
      hi.envelope = gamma.lambda_max + eps;
      ++checks;
      if (er.lambda_min < gamma.lambda_min - eps || er.lambda_max > gamma.lambda_max + eps)
        ++violations;
    };
    for (double u : {0.25, 0.5, 0.75}) record("stationary", sym_eig_range(stationary_window(m, u, len)), u);
    record("nonstationary", sym_eig_range(cov_window(m, n, 0, len - 1)), std::nullopt);
    out.rows.insert(out.rows.end(), tab.rows().begin(), tab.rows().end());
  }
  out.verdicts.push_back(count_verdict("eigenvalue_sandwich", violations, checks, "sections"));
  return out;
}

Outcome physical_dependence(std::uint64_t seed) {
  const ModelSpec sre = reference_sre();
  Grid g;
  g.n = {200};
  g.j = {1, 2, 3, 4, 5, 6};
  g.reps = 5000;
  Outcome out = run_physical(sre, g, seed, tag_for(10));
  out.verdicts = physical_verdicts(out.rows, -1, 0.25);
  return out;
}

Outcome utility_lemmas(std::uint64_t seed) {
  const ModelSpec dummy = white_noise(1);
  Table tab(tag_for(11), dummy);
  long cs_violations = 0;
  const long cs_instances = 200;
  for (long i = 0; i < cs_instances; ++i) {
    Rng rng = make_rng(seed, 11000 + static_cast<std::uint64_t>(i));
    const Eigen::Index dx = 1 + i % 4, dy = 1 + (i / 4) % 4, draws = 5 + i % 50;
    const Matrix x = random_normal(rng, dx, draws);
    const Matrix y = random_normal(rng, dy, dx) * x + 0.5 * random_normal(rng, dy, draws);
    const InequalityCheck c = matrix_cauchy_schwarz(x, y);
    if (!c.holds(1e-12 * std::max(1.0, c.rhs))) ++cs_violations;
    Row& r = tab.add("cauchy_schwarz_ratio", draws, c.rhs > 0.0 ? c.lhs / c.rhs : 0.0);
    r.k = i;
    r.envelope = 1.0;
  }
  long conv_violations = 0, conv_checks = 0;
  for (int power : {2, 3, 4})
    for (long y = -50; y <= 50; ++y) {
      const InequalityCheck c = convolution_bound(power, y);
      ++conv_checks;
      if (!c.holds()) ++conv_violations;
      Row& r = tab.add("convolution_ratio", 0, c.lhs / c.rhs);
      r.k = power;
      r.t = y;
      r.envelope = 1.0;
    }
  Outcome out;
  out.rows = std::move(tab.rows());
  out.verdicts.push_back(count_verdict("matrix_cauchy_schwarz", cs_violations, cs_instances, "draws"));
  out.verdicts.push_back(count_verdict("convolution_bound", conv_violations, conv_checks, "(p, y) pairs"));
  return out;
}

double budget_for(int id) {
  switch (id) {
    case 1: return 60.0;
    case 2: return 30.0;
    case 3: return 60.0;
    case 5: return 120.0;
    case 10: return 120.0;
    default: return 0.0;
  }
}

}  // namespace

const std::vector<Criterion>& acceptance_criteria() {
  static const std::vector<Criterion> criteria = {
      {1, "inverse_decay", "inverse decay exponent >= 2.5 and stable K under window doubling"},
      {2, "banded_inverse_soundness", "Demko bound holds on 200 SPD block-banded instances"},
      {3, "neumann_certificate", "Neumann error below its certificate on 50 kappa = 4 windows"},
      {4, "ar1_oracle", "AR(1) precision structure and coefficients to 1e-8"},
      {5, "baxter_gaps", "summed Baxter gap decreasing with slope in [kappa - 5/2, kappa - 1/2]"},
      {6, "smoothness_transfer", "lag-0 gaps halve with N and constants stay within factor 2"},
      {7, "partial_oracle", "Schur partial covariances match regression residuals"},
      {8, "coherence_consistency", "coherence gap two-N ratio in [1.4, 2.8]"},
      {9, "eigenvalue_sandwich", "section eigenvalues within the spectral range +- 0.1"},
      {10, "physical_dependence", "SRE coupled differences decay at rate sqrt(rho)"},
      {11, "utility_lemmas", "matrix Cauchy-Schwarz and convolution bounds"},
      {12, "determinism", "identical tables when rerun"},
  };
  return criteria;
}

Outcome run_criterion(int id, const ModelSpec& vma, std::uint64_t seed) {
  const auto start = Clock::now();
  const std::string name = acceptance_criteria()[static_cast<std::size_t>(id - 1)].name;
  Outcome out = guarded(name, [&]() -> Outcome {
    switch (id) {
      case 1: return inverse_decay(vma);
      case 2: return demko_soundness(seed);
      case 3: return neumann_certificates(seed);
      case 4: return ar1_oracle();
      case 5: return baxter(vma);
      case 6: return smoothness_transfer(vma);
      case 7: return partial_oracle(seed);
      case 8: return coherence();
      case 9: return eigen_sandwich(vma);
      case 10: return physical_dependence(seed);
      case 11: return utility_lemmas(seed);
      default: throw InputError("acceptance criterion id must lie in [1, 11]");
    }
  });
  const double elapsed = seconds_since(start);
  out.verdicts = {combine(id, out.verdicts, elapsed, budget_for(id))};
  return out;
}

Outcome verify_all(const ModelSpec& vma, std::uint64_t seed) {
  const auto run_all = [&] {
    Outcome all;
    for (int id = 1; id <= 11; ++id) all.append(run_criterion(id, vma, seed));
    return all;
  };
  const auto start = Clock::now();
  Outcome first = run_all();

  const std::size_t threads = thread_count();
  set_thread_count(threads == 1 ? 2 : 1);
  Outcome second;
  try {
    second = run_all();
  } catch (...) {
    set_thread_count(threads);
    throw;
  }
  set_thread_count(threads);

  const std::string a = render_table(first.rows);
  const std::string b = render_table(second.rows);
  const bool same = a == b;
  Verdict v;
  v.name = "determinism";
  v.pass = same;
  v.detail = same ? "rerun produced byte-identical tables (" + std::to_string(a.size()) + " bytes)"
                  : "rerun tables differ";
  v.values = {{"bytes_first", static_cast<double>(a.size())},
              {"bytes_second", static_cast<double>(b.size())}};
  first.verdicts.push_back(combine(12, {v}, seconds_since(start), 0.0));
  return first;
}

}  // namespace nonstatcov::harness
