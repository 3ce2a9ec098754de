#pragma once

// Result tables, verdicts and their on-disk form.

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

namespace nonstatcov::harness {

/// One table row. Index fields that do not apply stay empty.
struct Row {
  std::string experiment;
  std::string model_hash;
  std::string quantity;
  long n = 0;
  std::optional<long> t;
  std::optional<long> tau;
  /// Integer grid parameter: order d, lag j, bandwidth M, component or replicate index.
  std::optional<long> k;
  /// Real grid parameter: u or omega.
  std::optional<double> x;
  double measured = 0.0;
  std::optional<double> envelope;
  std::optional<double> constant;
};

struct Verdict {
  std::string name;
  bool pass = false;
  std::string detail;
  /// Named quantities the verdict was decided on.
  std::vector<std::pair<std::string, double>> values;
};

struct Report {
  std::string experiment;
  std::vector<Row> rows;
  std::vector<Verdict> verdicts;
  /// Extra named CSV tables (header line + rows), written next to the main table.
  std::vector<std::pair<std::string, std::string>> extra_tables;
  nlohmann::json metadata;
  /// A numerical failure (conditioning, divergence, fit) was recorded as a failed verdict.
  bool numeric_error = false;

  bool all_pass() const;
};

inline constexpr const char* kTableHeader =
    "experiment,model_hash,quantity,N,t,tau,k,x,measured,envelope,constant";

/// %.17g, with inf/nan spelled out.
std::string format_double(double v);
/// RFC 4180 quoting when needed.
std::string csv_field(const std::string& s);
std::string csv_row(const Row& r);
std::string render_table(const std::vector<Row>& rows);
nlohmann::json verdicts_json(const std::vector<Verdict>& verdicts);

/// Writes through a temporary file in the same directory and renames it into place.
void write_atomic(const std::string& path, const std::string& contents);

/// tables.csv, verdicts.json, metadata.json and any extra tables under `dir`.
void write_report(const Report& report, const std::string& dir);

}  // namespace nonstatcov::harness
