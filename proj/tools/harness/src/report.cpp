#include "nonstatcov/harness/report.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <system_error>

#include "nonstatcov/errors.hpp"

namespace nonstatcov::harness {

bool Report::all_pass() const {
  for (const auto& v : verdicts)
    if (!v.pass) return false;
  return !verdicts.empty();
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::string csv_row(const Row& r) {
  const auto opt_long = [](const std::optional<long>& v) { return v ? std::to_string(*v) : ""; };
  const auto opt_double = [](const std::optional<double>& v) {
    return v ? format_double(*v) : std::string();
  };
  std::string line;
  line += csv_field(r.experiment) + ',';
  line += csv_field(r.model_hash) + ',';
  line += csv_field(r.quantity) + ',';
  line += std::to_string(r.n) + ',';
  line += opt_long(r.t) + ',';
  line += opt_long(r.tau) + ',';
  line += opt_long(r.k) + ',';
  line += opt_double(r.x) + ',';
  line += format_double(r.measured) + ',';
  line += opt_double(r.envelope) + ',';
  line += opt_double(r.constant);
  return line;
}

std::string render_table(const std::vector<Row>& rows) {
  std::string out = kTableHeader;
  out += "\r\n";
  for (const auto& r : rows) {
    out += csv_row(r);
    out += "\r\n";
  }
  return out;
}

nlohmann::json verdicts_json(const std::vector<Verdict>& verdicts) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& v : verdicts) {
    nlohmann::json values = nlohmann::json::object();
    for (const auto& [name, value] : v.values)
      values[name] = std::isfinite(value) ? nlohmann::json(value) : nlohmann::json(format_double(value));
    arr.push_back({{"name", v.name}, {"pass", v.pass}, {"detail", v.detail}, {"values", values}});
  }
  return arr;
}

void write_atomic(const std::string& path, const std::string& contents) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  const fs::path tmp = target.parent_path() / (target.filename().string() + ".tmp");
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write '" + tmp.string() + "'");
    out << contents;
    out.flush();
    if (!out) throw Error("short write to '" + tmp.string() + "'");
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) throw Error("cannot move '" + tmp.string() + "' into place: " + ec.message());
}

void write_report(const Report& report, const std::string& dir) {
  std::filesystem::create_directories(dir);
  const std::filesystem::path base(dir);
  write_atomic((base / "tables.csv").string(), render_table(report.rows));
  for (const auto& [name, body] : report.extra_tables) write_atomic((base / name).string(), body);
  nlohmann::json verdicts = {{"experiment", report.experiment},
                             {"pass", report.all_pass()},
                             {"numeric_error", report.numeric_error},
                             {"verdicts", verdicts_json(report.verdicts)}};
  write_atomic((base / "verdicts.json").string(), verdicts.dump(2) + "\n");
  write_atomic((base / "metadata.json").string(), report.metadata.dump(2) + "\n");
}

}  // namespace nonstatcov::harness
