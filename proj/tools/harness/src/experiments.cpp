#include "nonstatcov/harness/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <limits>
#include <map>
#include <numbers>
#include <sstream>

#include "nonstatcov/errors.hpp"
#include "nonstatcov/harness/acceptance.hpp"
#include "nonstatcov/inverse_analysis.hpp"
#include "nonstatcov/parallel.hpp"
#include "nonstatcov/partial_cov.hpp"
#include "nonstatcov/var_extraction.hpp"

namespace nonstatcov::harness {

namespace {

constexpr const char* kVersion = "0.1.0";

Verdict make_verdict(std::string name, bool pass, std::string detail,
                     std::vector<std::pair<std::string, double>> values = {}) {
  return {std::move(name), pass, std::move(detail), std::move(values)};
}

std::vector<long> or_default(const std::vector<long>& v, std::vector<long> fallback) {
  return v.empty() ? fallback : v;
}

long first_n(const Grid& g, long fallback) { return g.n.empty() ? fallback : g.n.front(); }

std::vector<double> default_omegas(const Grid& g) {
  if (!g.omega.empty()) return g.omega;
  std::vector<double> out;
  for (int k = 0; k < 64; ++k) out.push_back(2.0 * std::numbers::pi * k / 64.0);
  return out;
}

bool lag_zero(const Row& r) { return r.t && r.tau && *r.t == *r.tau; }

/// Largest lag-0 value of `quantity` per N (measured and constant).
std::map<long, std::pair<double, double>> lag_zero_by_n(const std::vector<Row>& rows,
                                                        const std::string& quantity) {
  std::map<long, std::pair<double, double>> out;
  for (const auto& r : rows) {
    if (r.quantity != quantity || !lag_zero(r)) continue;
    auto [it, fresh] = out.try_emplace(r.n, r.measured, r.constant.value_or(0.0));
    if (!fresh) {
      it->second.first = std::max(it->second.first, r.measured);
      it->second.second = std::max(it->second.second, r.constant.value_or(0.0));
    }
  }
  return out;
}

std::string fmt(double v) { return format_double(v); }

}  // namespace

// --- Table / Outcome ------------------------------------------------------------------

Table::Table(std::string experiment, const ModelSpec& model)
    : experiment_(std::move(experiment)), hash_(model_hash(model)) {}

Row& Table::add(const std::string& quantity, long n, double measured) {
  Row r;
  r.experiment = experiment_;
  r.model_hash = hash_;
  r.quantity = quantity;
  r.n = n;
  r.measured = measured;
  rows_.push_back(std::move(r));
  return rows_.back();
}

void Table::add_gap(const GapReport& gap, long n, const std::string& quantity,
                    std::optional<long> k) {
  for (std::size_t i = 0; i < gap.size(); ++i) {
    Row& r = add(quantity, n, gap.measured[i]);
    r.t = gap.t[i];
    r.tau = gap.tau[i];
    r.k = k;
    r.envelope = gap.envelope[i];
    r.constant = gap.constant;
  }
}

void Outcome::append(Outcome other) {
  rows.insert(rows.end(), std::make_move_iterator(other.rows.begin()),
              std::make_move_iterator(other.rows.end()));
  verdicts.insert(verdicts.end(), std::make_move_iterator(other.verdicts.begin()),
                  std::make_move_iterator(other.verdicts.end()));
  extra_tables.insert(extra_tables.end(), std::make_move_iterator(other.extra_tables.begin()),
                      std::make_move_iterator(other.extra_tables.end()));
  numeric_error = numeric_error || other.numeric_error;
}

long target_time(double u0, long n) {
  return static_cast<long>(std::floor(u0 * static_cast<double>(n)));
}

Outcome guarded(const std::string& name, const std::function<Outcome()>& body) {
  try {
    return body();
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    Outcome out;
    out.numeric_error = true;
    out.verdicts.push_back(make_verdict(name, false, std::string("numeric failure: ") + e.what()));
    return out;
  }
}

// --- verdict rules -------------------------------------------------------------------

Verdict halving_verdict(const std::vector<Row>& rows, const std::string& quantity, double lo,
                        double hi, double exact) {
  const auto by_n = lag_zero_by_n(rows, quantity);
  const std::string name = quantity + "_halving";
  if (by_n.size() < 2) return make_verdict(name, false, "needs lag-0 rows at two values of N");
  auto it = by_n.begin();
  const auto [n0, v0] = *it++;
  const auto [n1, v1] = *it;
  std::vector<std::pair<std::string, double>> values = {
      {"N0", static_cast<double>(n0)}, {"N1", static_cast<double>(n1)},
      {"gap_N0", v0.first}, {"gap_N1", v1.first}};
  if (v0.first <= exact && v1.first <= exact)
    return make_verdict(name, true, "gap is zero to working precision at both N", values);
  const double ratio = v0.first / v1.first;
  values.emplace_back("ratio", ratio);
  const bool pass = ratio >= lo && ratio <= hi;
  return make_verdict(name, pass,
                      "gap(N0) / gap(N1) = " + fmt(ratio) + ", required in [" + fmt(lo) + ", " +
                          fmt(hi) + "]",
                      values);
}

Verdict constant_stability_verdict(const std::vector<Row>& rows, const std::string& quantity,
                                   double factor, double exact) {
  const auto by_n = lag_zero_by_n(rows, quantity);
  const std::string name = quantity + "_constant_stability";
  if (by_n.empty()) return make_verdict(name, false, "no lag-0 rows");
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0, largest_gap = 0.0;
  std::vector<std::pair<std::string, double>> values;
  for (const auto& [n, v] : by_n) {
    values.emplace_back("K_N" + std::to_string(n), v.second);
    lo = std::min(lo, v.second);
    hi = std::max(hi, v.second);
    largest_gap = std::max(largest_gap, v.first);
  }
  if (largest_gap <= exact)
    return make_verdict(name, true, "gap is zero to working precision at every N", values);
  const double ratio = hi / lo;
  values.emplace_back("max_over_min", ratio);
  return make_verdict(name, ratio <= factor,
                      "max K / min K = " + fmt(ratio) + ", allowed " + fmt(factor), values);
}

// --- experiments ----------------------------------------------------------------------

Outcome run_simulate(const ModelSpec& m, const Grid& g, std::uint64_t seed, const std::string& tag) {
  Table tab(tag, m);
  const long n = first_n(g, 200);
  const long len = g.window.empty() ? n : g.window.front();
  const SamplePath path = simulate_path(m, n, g.t_lo, g.t_lo + len - 1, seed);
  bool finite = true;
  for (long t = path.t_lo; t <= path.t_hi(); ++t) {
    const Vector x = path.at(t);
    for (Eigen::Index c = 0; c < x.size(); ++c) {
      Row& r = tab.add("x", n, x(c));
      r.t = t;
      r.k = c;
      finite = finite && std::isfinite(x(c));
    }
  }
  Outcome out;
  out.rows = std::move(tab.rows());
  out.verdicts.push_back(make_verdict("path_finite", finite, "every sample is finite"));
  return out;
}

Outcome run_decay(const ModelSpec& m, const Grid& g, const std::string& tag) {
  Table tab(tag, m);
  const long n = first_n(g, 200);
  const auto windows = or_default(g.window, {240});
  const long pad = g.pad.value_or(default_pad(m));
  const double kappa = model_kappa(m);
  const double centre = static_cast<double>(g.t_lo) + (static_cast<double>(windows.front()) - 1.0) / 2.0;

  std::vector<std::optional<InverseWindow>> inverses(windows.size());
  std::vector<DecayProfile> fits(windows.size());
  parallel_for(windows.size(), [&](std::size_t i) {
    const long lo = std::lround(centre - (static_cast<double>(windows[i]) - 1.0) / 2.0);
    inverses[i] = model_inverse(m, n, lo, lo + windows[i] - 1, pad);
    fits[i] = inverse_decay_fit(*inverses[i], kappa);
  });

  for (std::size_t i = 0; i < windows.size(); ++i) {
    const BlockWindow& w = inverses[i]->base;
    const auto by_lag = max_norm_by_lag(w);
    const auto tag_window = [&](Row& r) -> Row& {
      r.t = w.t_lo();
      r.tau = w.t_hi();
      return r;
    };
    for (std::size_t lag = 0; lag < by_lag.size(); ++lag) {
      Row& r = tag_window(tab.add("inverse_lag_norm", n, by_lag[lag]));
      r.k = static_cast<long>(lag);
      r.envelope = std::pow(zeta(static_cast<long>(lag)), kappa - 1.0);
      r.constant = fits[i].constant;
    }
    tag_window(tab.add("decay_exponent", n, fits[i].exponent));
    tag_window(tab.add("decay_constant", n, fits[i].constant));
    tag_window(tab.add("band_limited", n, fits[i].band_limited ? 1.0 : 0.0)).k = fits[i].band_lag;
    tag_window(tab.add("inverse_residual", n, inverses[i]->residual));
    tag_window(tab.add("pad", n, static_cast<double>(pad)));
  }

  Outcome out;
  out.rows = std::move(tab.rows());
  out.verdicts = decay_verdicts(out.rows, kappa - 1.5, 0.10);
  return out;
}

std::vector<Verdict> decay_verdicts(const std::vector<Row>& rows, double min_exponent,
                                    double constant_tolerance) {
  std::vector<double> exponents, constants, band;
  for (const auto& r : rows) {
    if (r.quantity == "decay_exponent") exponents.push_back(r.measured);
    if (r.quantity == "decay_constant") constants.push_back(r.measured);
    if (r.quantity == "band_limited") band.push_back(r.measured);
  }
  std::vector<Verdict> out;
  if (exponents.empty()) return {make_verdict("decay_exponent", false, "no decay fit rows")};
  const bool banded = !band.empty() && band.front() > 0.5;
  out.push_back(make_verdict("decay_exponent", exponents.front() >= min_exponent || banded,
                             "fitted exponent " + fmt(exponents.front()) + " (band-limited: " +
                                 (banded ? "yes" : "no") + "), required >= " + fmt(min_exponent),
                             {{"exponent", exponents.front()}, {"required", min_exponent}}));
  if (constants.size() >= 2) {
    double worst = 0.0;
    for (std::size_t i = 1; i < constants.size(); ++i)
      worst = std::max(worst, std::abs(constants[i] / constants.front() - 1.0));
    out.push_back(make_verdict("decay_constant_stability", worst <= constant_tolerance,
                               "largest relative change of K " + fmt(worst) + ", allowed " +
                                   fmt(constant_tolerance),
                               {{"K_base", constants.front()},
                                {"K_last", constants.back()},
                                {"relative_change", worst}}));
  }
  return out;
}

Outcome run_invert(const ModelSpec& m, const Grid& g, const std::string& tag) {
  Table tab(tag, m);
  const long n = first_n(g, 100);
  const long len = g.window.empty() ? 40 : g.window.front();
  const long pad = g.pad.value_or(default_pad(m));
  const long max_lag = g.max_lag.value_or(len - 1);
  const InverseWindow inv = model_inverse(m, n, g.t_lo, g.t_lo + len - 1, pad);
  const BlockWindow& w = inv.base;
  for (long t = w.t_lo(); t <= w.t_hi(); ++t)
    for (long tau = std::max(w.t_lo(), t - max_lag); tau <= std::min(w.t_hi(), t + max_lag); ++tau) {
      Row& r = tab.add("inverse_block_norm", n, spectral_norm(w.block(t, tau)));
      r.t = t;
      r.tau = tau;
    }
  tab.add("inverse_residual", n, inv.residual);
  tab.add("lambda_min", n, inv.conditioning.lambda_min);
  tab.add("lambda_max", n, inv.conditioning.lambda_max);
  tab.add("pad", n, static_cast<double>(pad));

  Outcome out;
  out.rows = std::move(tab.rows());
  double residual = 0.0;
  for (const auto& r : out.rows)
    if (r.quantity == "inverse_residual") residual = r.measured;
  out.verdicts.push_back(make_verdict("inverse_residual", residual <= 1e-8,
                                      "||C D - I||_inf = " + fmt(residual) + ", allowed 1e-8",
                                      {{"residual", residual}}));
  return out;
}

Outcome run_neumann(const ModelSpec& m, const Grid& g, const std::string& tag) {
  Table tab(tag, m);
  const long n = first_n(g, 200);
  const long len = g.window.empty() ? 80 : g.window.front();
  const auto bands = or_default(g.m, {2, 4, 8});
  const BlockWindow c = cov_window(m, n, g.t_lo, g.t_lo + len - 1);
  const Matrix dense = spd_inverse(c.flat());

  struct Point {
    std::optional<NeumannResult> result;
    double error = 0.0;
    double divergent_q = 0.0;
  };
  std::vector<Point> points(bands.size());
  parallel_for(bands.size(), [&](std::size_t i) {
    try {
      points[i].result = neumann_inverse(c, bands[i], g.terms);
      points[i].error = spectral_norm(points[i].result->approx.flat() - dense);
    } catch (const DivergenceError& e) {
      points[i].divergent_q = e.contraction();
    }
  });
  for (std::size_t i = 0; i < bands.size(); ++i) {
    const auto& pt = points[i];
    if (!pt.result) {
      tab.add("neumann_divergent", n, pt.divergent_q).k = bands[i];
      continue;
    }
    Row& r = tab.add("neumann_error", n, pt.error);
    r.k = bands[i];
    r.envelope = pt.result->certificate;
    tab.add("contraction", n, pt.result->contraction).k = bands[i];
    tab.add("measured_contraction", n, pt.result->measured_contraction).k = bands[i];
    tab.add("certified_contraction", n, pt.result->certified_contraction).k = bands[i];
  }

  Outcome out;
  out.rows = std::move(tab.rows());
  out.verdicts = neumann_verdicts(out.rows);
  return out;
}

std::vector<Verdict> neumann_verdicts(const std::vector<Row>& rows) {
  long converged = 0, violations = 0;
  double worst = 0.0;
  for (const auto& r : rows) {
    if (r.quantity != "neumann_error") continue;
    ++converged;
    const double cert = r.envelope.value_or(0.0);
    if (r.measured > cert) ++violations;
    if (cert > 0.0) worst = std::max(worst, r.measured / cert);
  }
  return {make_verdict("neumann_certificate", converged > 0 && violations == 0,
                       std::to_string(violations) + " violations over " + std::to_string(converged) +
                           " convergent expansions",
                       {{"converged", static_cast<double>(converged)},
                        {"violations", static_cast<double>(violations)},
                        {"max_error_over_certificate", worst}})};
}

Outcome run_var(const ModelSpec& m, const Grid& g, const std::string& tag) {
  Table tab(tag, m);
  const long n = first_n(g, 200);
  const long big_t = target_time(g.u0, n);
  const int big_j = static_cast<int>(g.j.empty() ? 5 : g.j.front());
  const auto orders = or_default(g.d, {1, 2, 4});
  const double kappa = model_kappa(m);
  const double u = static_cast<double>(big_t) / static_cast<double>(n);

  const VarCoefficients inf = var_coeffs_infinite(m, n, big_t, big_j);
  const VarSmoothness smooth = var_smoothness_gap(m, n, big_t, big_j);
  for (int j = 1; j <= big_j; ++j) {
    Row& r = tab.add("phi_norm", n, spectral_norm(inf.phis[static_cast<std::size_t>(j - 1)]));
    r.t = big_t;
    r.k = j;
    r.envelope = std::pow(zeta(j), kappa - 1.0);
  }
  tab.add_gap(smooth.phi, n, "phi_gap");
  tab.add("sigma_norm", n, spectral_norm(inf.sigma)).t = big_t;
  const double drift = var_truncation_drift(m, n, big_t, big_j, big_j + 100L);
  tab.add("truncation_drift", n, drift).t = big_t;

  Matrix previous_sigma;
  for (long d : orders) {
    const VarCoefficients fin = var_coeffs_finite(m, n, big_t, static_cast<int>(d));
    Row& pd = tab.add("path_discrepancy", n, fin.path_discrepancy);
    pd.t = big_t;
    pd.k = d;
    Row& sn = tab.add("finite_sigma_norm", n, spectral_norm(fin.sigma));
    sn.t = big_t;
    sn.k = d;
    if (previous_sigma.size() > 0) {
      const Matrix diff = previous_sigma - fin.sigma;
      const double slack = sym_eig_range(Matrix(0.5 * (diff + diff.transpose()))).lambda_min;
      Row& ns = tab.add("sigma_nesting_slack", n, slack);
      ns.t = big_t;
      ns.k = d;
    }
    previous_sigma = fin.sigma;
    if (d >= 1) {
      const CombinedGap cg = finite_order_combined_gap(m, n, big_t, static_cast<int>(d));
      Row& r = tab.add("combined_gap", n, cg.measured);
      r.t = big_t;
      r.k = d;
      r.envelope = cg.envelope;
      r.constant = cg.measured / cg.envelope;
    }
  }
  const KolmogorovGap kg = kolmogorov_gap(m, n, big_t);
  tab.add("kolmogorov_lhs", n, kg.lhs).t = big_t;
  tab.add("kolmogorov_rhs", n, kg.rhs).t = big_t;
  Row& kr = tab.add("kolmogorov_gap", n, kg.gap);
  kr.t = big_t;
  kr.tau = big_t;
  kr.x = u;

  Outcome out;
  out.rows = std::move(tab.rows());
  double worst_path = 0.0, worst_drift = 0.0, slack = std::numeric_limits<double>::infinity();
  for (const auto& r : out.rows) {
    if (r.quantity == "path_discrepancy") worst_path = std::max(worst_path, r.measured);
    if (r.quantity == "truncation_drift") worst_drift = std::max(worst_drift, r.measured);
    if (r.quantity == "sigma_nesting_slack") slack = std::min(slack, r.measured);
  }
  out.verdicts.push_back(make_verdict("projection_paths_agree", worst_path <= 1e-8,
                                      "largest path discrepancy " + fmt(worst_path),
                                      {{"path_discrepancy", worst_path}}));
  out.verdicts.push_back(make_verdict("truncation_converged", worst_drift <= 1e-6,
                                      "bottom-row drift under depth + 50 is " + fmt(worst_drift),
                                      {{"drift", worst_drift}}));
  if (std::isfinite(slack))
    out.verdicts.push_back(make_verdict("innovation_nesting", slack >= -1e-9,
                                        "smallest eigenvalue of Sigma_d - Sigma_d' (d < d') is " +
                                            fmt(slack),
                                        {{"slack", slack}}));
  return out;
}

Outcome run_baxter(const ModelSpec& m, const Grid& g, const std::string& tag) {
  Table tab(tag, m);
  const long n = first_n(g, 200);
  const long big_t = target_time(g.u0, n);
  const auto orders = or_default(g.d, {5, 10, 20, 40});
  const int big_j = static_cast<int>(g.j.empty() ? 160 : g.j.front());
  std::vector<BaxterReport> reports(orders.size());
  parallel_for(orders.size(), [&](std::size_t i) {
    reports[i] = baxter_gaps(m, n, big_t, static_cast<int>(orders[i]), big_j);
  });
  for (std::size_t i = 0; i < orders.size(); ++i) {
    tab.add_gap(reports[i].per_lag, n, "baxter_lag_gap", orders[i]);
    Row& r = tab.add("baxter_summed", n, reports[i].summed);
    r.t = big_t;
    r.k = orders[i];
    r.envelope = reports[i].summed_envelope;
    r.constant = reports[i].summed_constant;
  }
  Outcome out;
  out.rows = std::move(tab.rows());
  out.verdicts = baxter_verdicts(out.rows, model_kappa(m));
  return out;
}

std::vector<Verdict> baxter_verdicts(const std::vector<Row>& rows, double kappa) {
  std::vector<std::pair<long, double>> summed;
  for (const auto& r : rows)
    if (r.quantity == "baxter_summed" && r.k) summed.emplace_back(*r.k, r.measured);
  std::sort(summed.begin(), summed.end());
  if (summed.size() < 2) return {make_verdict("baxter_slope", false, "needs at least two orders")};
  bool decreasing = true;
  for (std::size_t i = 1; i < summed.size(); ++i)
    decreasing = decreasing && summed[i].second < summed[i - 1].second;
  const auto& [d0, s0] = summed.front();
  const auto& [d1, s1] = summed.back();
  const double slope = std::log(s0 / s1) / std::log(zeta(d0) / zeta(d1));
  const double lo = kappa - 2.5, hi = kappa - 0.5;
  return {make_verdict("baxter_decreasing", decreasing, "summed gap strictly decreasing in d"),
          make_verdict("baxter_slope", slope >= lo && slope <= hi,
                       "two-point slope vs zeta(d) between d = " + std::to_string(d0) + " and " +
                           std::to_string(d1) + " is " + fmt(slope) + ", required in [" + fmt(lo) +
                           ", " + fmt(hi) + "]",
                       {{"slope", slope}, {"lo", lo}, {"hi", hi}})};
}

Outcome run_smoothness(const ModelSpec& m, const Grid& g, const std::string& tag) {
  Table tab(tag, m);
  const auto ns = or_default(g.n, {100, 200, 400});
  const int big_j = static_cast<int>(g.j.empty() ? 10 : g.j.front());
  const long max_lag = g.max_lag.value_or(4);
  const long pad = g.pad.value_or(default_pad(m));
  struct Point {
    VarSmoothness var;
    GapReport inverse;
    KolmogorovGap kolmogorov;
  };
  std::vector<Point> points(ns.size());
  parallel_for(ns.size(), [&](std::size_t i) {
    const long t = target_time(g.u0, ns[i]);
    points[i].var = var_smoothness_gap(m, ns[i], t, big_j);
    points[i].inverse = inverse_smoothness_gap(m, ns[i], t, t, max_lag, pad);
    points[i].kolmogorov = kolmogorov_gap(m, ns[i], t);
  });
  for (std::size_t i = 0; i < ns.size(); ++i) {
    const long n = ns[i];
    const long t = target_time(g.u0, n);
    const auto& pt = points[i];
    Row& s = tab.add("sigma_gap", n, pt.var.sigma.measured.front());
    s.t = t;
    s.tau = t;
    s.envelope = pt.var.sigma.envelope.front();
    s.constant = pt.var.sigma.constant;
    tab.add_gap(pt.var.phi, n, "phi_gap");
    tab.add_gap(pt.inverse, n, "inverse_gap");
    Row& alt = tab.add("inverse_constant_alt", n, pt.inverse.constant_alt);
    alt.t = t;
    Row& k = tab.add("kolmogorov_gap", n, pt.kolmogorov.gap);
    k.t = t;
    k.tau = t;
    k.envelope = 1.0 / static_cast<double>(n);
    k.constant = pt.kolmogorov.gap * static_cast<double>(n);
  }
  Outcome out;
  out.rows = std::move(tab.rows());
  for (const char* q : {"sigma_gap", "inverse_gap", "kolmogorov_gap"}) {
    out.verdicts.push_back(halving_verdict(out.rows, q));
    out.verdicts.push_back(constant_stability_verdict(out.rows, q));
  }
  return out;
}

Outcome run_partial(const ModelSpec& m, const Grid& g, const std::string& tag) {
  Table tab(tag, m);
  const auto ns = or_default(g.n, {100, 200, 400});
  const long max_lag = g.max_lag.value_or(3);
  const long pad = g.pad.value_or(default_pad(m));
  std::vector<GapReport> gaps(ns.size());
  parallel_for(ns.size(), [&](std::size_t i) {
    const long t = target_time(g.u0, ns[i]);
    gaps[i] = partial_smoothness_gap(m, ns[i], g.a, g.b, t, t, max_lag, pad);
  });
  for (std::size_t i = 0; i < ns.size(); ++i) tab.add_gap(gaps[i], ns[i], "partial_gap");
  Outcome out;
  out.rows = std::move(tab.rows());
  out.verdicts.push_back(halving_verdict(out.rows, "partial_gap"));
  out.verdicts.push_back(constant_stability_verdict(out.rows, "partial_gap"));
  return out;
}

Outcome run_coherence(const ModelSpec& m, const Grid& g, const std::string& tag) {
  Table tab(tag, m);
  const auto ns = or_default(g.n, {200, 400});
  const long max_lag = g.max_lag.value_or(40);
  const long pad = g.pad.value_or(default_pad(m));
  const auto omegas = default_omegas(g);
  std::vector<CoherenceReport> reports(ns.size());
  parallel_for(ns.size(), [&](std::size_t i) {
    reports[i] = coherence_consistency_gap(m, ns[i], target_time(g.u0, ns[i]), g.a, g.b, omegas,
                                           max_lag, pad);
  });
  std::string curves = "curve,N,a,b,u,omega,re,im,abs\r\n";
  for (std::size_t i = 0; i < ns.size(); ++i) {
    const long n = ns[i];
    const long t = target_time(g.u0, n);
    const double u = static_cast<double>(t) / static_cast<double>(n);
    const auto& rep = reports[i];
    for (std::size_t w = 0; w < omegas.size(); ++w) {
      Row& r = tab.add("coherence_gap", n, rep.gaps.measured[w]);
      r.t = t;
      r.k = static_cast<long>(w);
      r.x = omegas[w];
      r.envelope = rep.gaps.envelope[w];
      r.constant = rep.gaps.constant;
      Row& mag = tab.add("target_coherence_abs", n, std::abs(rep.target[w]));
      mag.t = t;
      mag.k = static_cast<long>(w);
      mag.x = omegas[w];
      for (const auto& [name, value] : {std::pair{"assembled", rep.assembled[w]},
                                        std::pair{"target", rep.target[w]}}) {
        curves += std::string(name) + ',' + std::to_string(n) + ',' + std::to_string(g.a) + ',' +
                  std::to_string(g.b) + ',' + format_double(u) + ',' + format_double(omegas[w]) +
                  ',' + format_double(value.real()) + ',' + format_double(value.imag()) + ',' +
                  format_double(std::abs(value)) + "\r\n";
      }
    }
    Row& s = tab.add("coherence_sup_gap", n, rep.gaps.max_measured());
    s.t = t;
    s.k = max_lag;
    Row& im = tab.add("imag_residue", n, rep.imag_residue);
    im.t = t;
  }
  Outcome out;
  out.rows = std::move(tab.rows());
  out.extra_tables.emplace_back("coherence.csv", std::move(curves));
  out.verdicts = coherence_verdicts(out.rows);
  return out;
}

std::vector<Verdict> coherence_verdicts(const std::vector<Row>& rows) {
  std::map<long, double> sup;
  double largest_abs = 0.0;
  for (const auto& r : rows) {
    if (r.quantity == "coherence_sup_gap") sup[r.n] = r.measured;
    if (r.quantity == "target_coherence_abs") largest_abs = std::max(largest_abs, r.measured);
  }
  std::vector<Verdict> out;
  out.push_back(make_verdict("coherence_magnitude", largest_abs <= 1.0 + 1e-8,
                             "max |g| = " + fmt(largest_abs), {{"max_abs", largest_abs}}));
  if (sup.size() < 2) {
    out.push_back(make_verdict("coherence_ratio", false, "needs two values of N"));
    return out;
  }
  auto it = sup.begin();
  const auto [n0, g0] = *it++;
  const auto [n1, g1] = *it;
  const double ratio = g0 / g1;
  out.push_back(make_verdict("coherence_baseline", g0 <= 2.0 * g1,
                             "sup gap at N = " + std::to_string(n0) + " is " + fmt(g0) +
                                 ", baseline 2 x " + fmt(g1),
                             {{"gap_N0", g0}, {"gap_N1", g1}}));
  out.push_back(make_verdict("coherence_ratio", ratio >= 1.4 && ratio <= 2.8,
                             "two-N ratio " + fmt(ratio) + ", required in [1.4, 2.8]",
                             {{"ratio", ratio}}));
  return out;
}

Outcome run_physical(const ModelSpec& m, const Grid& g, std::uint64_t seed, const std::string& tag) {
  Table tab(tag, m);
  const long n = first_n(g, 200);
  const long t = target_time(g.u0, n);
  const auto lags = or_default(g.j, {1, 2, 3, 4, 5, 6});
  std::vector<PhysicalDependence> est(lags.size());
  // Each lag gets its own seed stream; replications parallelise inside the estimator.
  for (std::size_t i = 0; i < lags.size(); ++i)
    est[i] = physical_dep_estimate(m, n, t, lags[i], g.reps, seed + 1000003ULL * i);
  const double rho = m.family == Family::TvVMA ? 0.0 : var_stability(m).spectral_radius;
  // Variance of the coupled difference scales like rho^j for SRE and rho^{2j} for VAR recursions.
  const double rate = m.family == Family::SRE ? rho : rho * rho;
  for (std::size_t i = 0; i < lags.size(); ++i) {
    Row& r = tab.add("physical_dependence", n, est[i].value);
    r.t = t;
    r.k = lags[i];
    if (m.family != Family::TvVMA && m.family != Family::TvARCH)
      r.envelope = std::pow(rate, static_cast<double>(lags[i]));
    Row& se = tab.add("physical_dependence_se", n, est[i].std_error);
    se.t = t;
    se.k = lags[i];
  }
  tab.add("contraction_rho", n, rate);
  Outcome out;
  out.rows = std::move(tab.rows());
  out.verdicts = physical_verdicts(out.rows, m.family == Family::TvVMA ? m.order : -1);
  return out;
}

std::vector<Verdict> physical_verdicts(const std::vector<Row>& rows, long ma_order,
                                       std::optional<double> rho_bound) {
  std::map<long, double> value, se;
  double rho = 0.0;
  for (const auto& r : rows) {
    if (r.quantity == "physical_dependence" && r.k) value[*r.k] = r.measured;
    if (r.quantity == "physical_dependence_se" && r.k) se[*r.k] = r.measured;
    if (r.quantity == "contraction_rho") rho = r.measured;
  }
  std::vector<Verdict> out;
  if (ma_order >= 0) {
    bool ok = true;
    for (const auto& [j, v] : value)
      if (j > ma_order) ok = ok && v <= 3.0 * se[j] + 1e-12;
    out.push_back(make_verdict("coupling_beyond_memory", ok,
                               "estimates beyond the MA order are within 3 standard errors of 0"));
    return out;
  }
  std::vector<double> xs, ys;
  for (const auto& [j, v] : value)
    if (v > 3.0 * se[j] && v > 0.0) {
      xs.push_back(static_cast<double>(j));
      ys.push_back(std::log(v));
    }
  if (xs.size() < 2) {
    out.push_back(make_verdict("physical_decay", false, "fewer than two resolvable lags"));
    return out;
  }
  const double slope = least_squares_line(xs, ys).slope;
  if (rho_bound) {
    out.push_back(make_verdict("contraction_within_bound", rho <= *rho_bound,
                               "model rho " + fmt(rho) + ", bound " + fmt(*rho_bound),
                               {{"rho", rho}, {"rho_bound", *rho_bound}}));
    rho = *rho_bound;
  }
  if (!(rho > 0.0)) {
    out.push_back(make_verdict("physical_decay", slope < 0.0, "fitted log-slope " + fmt(slope),
                               {{"slope", slope}}));
    return out;
  }
  const double bound = std::log(std::sqrt(rho)) + 0.2;
  out.push_back(make_verdict("physical_decay", slope <= bound,
                             "fitted log-slope " + fmt(slope) + ", required <= log sqrt(rho) + 0.2 = " +
                                 fmt(bound),
                             {{"slope", slope}, {"rho", rho}, {"bound", bound}}));
  return out;
}

// --- dispatch --------------------------------------------------------------------------

Report run_experiment(const ExperimentConfig& config) {
  const auto started = std::chrono::steady_clock::now();
  const std::string tag = to_string(config.kind);
  const ModelSpec& m = config.model;
  const Grid& g = config.grid;
  Outcome out;
  switch (config.kind) {
    case ExperimentKind::Simulate:
      out = guarded(tag, [&] { return run_simulate(m, g, config.seed, tag); });
      break;
    case ExperimentKind::Decay:
      out = guarded(tag, [&] { return run_decay(m, g, tag); });
      break;
    case ExperimentKind::Invert:
      out = guarded(tag, [&] { return run_invert(m, g, tag); });
      break;
    case ExperimentKind::Neumann:
      out = guarded(tag, [&] { return run_neumann(m, g, tag); });
      break;
    case ExperimentKind::Var:
      out = guarded(tag, [&] { return run_var(m, g, tag); });
      break;
    case ExperimentKind::Baxter:
      out = guarded(tag, [&] { return run_baxter(m, g, tag); });
      break;
    case ExperimentKind::Smoothness:
      out = guarded(tag, [&] { return run_smoothness(m, g, tag); });
      break;
    case ExperimentKind::Partial:
      out = guarded(tag, [&] { return run_partial(m, g, tag); });
      break;
    case ExperimentKind::Coherence:
      out = guarded(tag, [&] { return run_coherence(m, g, tag); });
      break;
    case ExperimentKind::Physical:
      out = guarded(tag, [&] { return run_physical(m, g, config.seed, tag); });
      break;
    case ExperimentKind::VerifyAll:
      out = verify_all(m, config.seed);
      break;
  }

  Report report;
  report.experiment = tag;
  report.rows = std::move(out.rows);
  report.verdicts = std::move(out.verdicts);
  report.extra_tables = std::move(out.extra_tables);
  report.numeric_error = out.numeric_error;

  const double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  const std::time_t now = std::time(nullptr);
  char stamp[32];
  std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
  Json source = {{"experiment", tag}, {"seed", config.seed}, {"model", model_to_json(m)}};
  char config_hash[17];
  std::snprintf(config_hash, sizeof config_hash, "%016llx",
                static_cast<unsigned long long>(fnv1a(source.dump())));
  report.metadata = {
      {"experiment", tag},
      {"version", kVersion},
      {"eigen_version", std::to_string(EIGEN_WORLD_VERSION) + "." +
                            std::to_string(EIGEN_MAJOR_VERSION) + "." +
                            std::to_string(EIGEN_MINOR_VERSION)},
      {"config_hash", config_hash},
      {"model_hash", model_hash(m)},
      {"model_name", m.name},
      {"family", to_string(m.family)},
      {"kappa", model_kappa(m)},
      {"seed", config.seed},
      {"threads", thread_count()},
      {"timestamp_utc", stamp},
      {"elapsed_seconds", elapsed},
      {"rows", report.rows.size()},
      {"spectral_convention",
       "f(omega; u) = sum_r C_r(u) e^{i r omega}, no 2 pi factor"},
      {"kolmogorov_convention",
       "classical log-det form: log det Sigma_T vs mean over omega of log det f(omega; T/N) with "
       "the unnormalised f, so no 2 pi offset"},
  };
  if (m.family != Family::SRE) report.metadata["default_pad"] = default_pad(m);
  return report;
}

}  // namespace nonstatcov::harness
