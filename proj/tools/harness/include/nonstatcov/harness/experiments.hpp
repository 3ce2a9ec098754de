#pragma once

// Experiment runners. Each one appends rows to a table and derives its
// verdicts from those rows only, so a verdict can be recomputed offline.

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "nonstatcov/harness/config.hpp"
#include "nonstatcov/harness/report.hpp"
#include "nonstatcov/reports.hpp"

namespace nonstatcov::harness {

/// Rows under construction, tagged with the experiment name and model hash.
class Table {
 public:
  Table(std::string experiment, const ModelSpec& model);

  Row& add(const std::string& quantity, long n, double measured);
  /// One row per GapReport entry, carrying its envelope and fitted constant.
  void add_gap(const GapReport& gap, long n, const std::string& quantity,
               std::optional<long> k = std::nullopt);

  const std::string& experiment() const { return experiment_; }
  const std::string& hash() const { return hash_; }
  std::vector<Row>& rows() { return rows_; }

 private:
  std::string experiment_;
  std::string hash_;
  std::vector<Row> rows_;
};

struct Outcome {
  std::vector<Row> rows;
  std::vector<Verdict> verdicts;
  std::vector<std::pair<std::string, std::string>> extra_tables;
  bool numeric_error = false;

  void append(Outcome other);
};

/// Target time t = floor(u0 * N).
long target_time(double u0, long n);

Outcome run_simulate(const ModelSpec& m, const Grid& g, std::uint64_t seed, const std::string& tag);
Outcome run_decay(const ModelSpec& m, const Grid& g, const std::string& tag);
Outcome run_invert(const ModelSpec& m, const Grid& g, const std::string& tag);
Outcome run_neumann(const ModelSpec& m, const Grid& g, const std::string& tag);
Outcome run_var(const ModelSpec& m, const Grid& g, const std::string& tag);
Outcome run_baxter(const ModelSpec& m, const Grid& g, const std::string& tag);
Outcome run_smoothness(const ModelSpec& m, const Grid& g, const std::string& tag);
Outcome run_partial(const ModelSpec& m, const Grid& g, const std::string& tag);
Outcome run_coherence(const ModelSpec& m, const Grid& g, const std::string& tag);
Outcome run_physical(const ModelSpec& m, const Grid& g, std::uint64_t seed, const std::string& tag);

// Verdict rules shared by the experiments and the acceptance checks.

/// Lag-0 rows (t == tau) of `quantity`, ordered by N: gap(N_0) / gap(N_1) within
/// [lo, hi], unless both gaps are below `exact` (then the gap is exactly zero).
Verdict halving_verdict(const std::vector<Row>& rows, const std::string& quantity, double lo = 1.5,
                        double hi = 2.7, double exact = 1e-10);
/// Lag-0 constants of `quantity` across every N: max / min within `factor`.
Verdict constant_stability_verdict(const std::vector<Row>& rows, const std::string& quantity,
                                   double factor = 2.0, double exact = 1e-10);

std::vector<Verdict> decay_verdicts(const std::vector<Row>& rows, double min_exponent,
                                    double constant_tolerance);
std::vector<Verdict> neumann_verdicts(const std::vector<Row>& rows);
std::vector<Verdict> baxter_verdicts(const std::vector<Row>& rows, double kappa);
std::vector<Verdict> coherence_verdicts(const std::vector<Row>& rows);
/// For an MA(order) model pass `ma_order`; otherwise -1 and the decay rate comes
/// from the contraction_rho row, or from `rho_bound` when given (the row must
/// then not exceed it).
std::vector<Verdict> physical_verdicts(const std::vector<Row>& rows, long ma_order,
                                       std::optional<double> rho_bound = std::nullopt);

/// Runs `body`, turning library errors (other than ConfigError) into a failed verdict.
Outcome guarded(const std::string& name, const std::function<Outcome()>& body);

/// Dispatches on the config kind and assembles the report (metadata included).
Report run_experiment(const ExperimentConfig& config);

}  // namespace nonstatcov::harness
