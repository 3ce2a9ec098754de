#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "nonstatcov/errors.hpp"
#include "nonstatcov/harness/acceptance.hpp"
#include "nonstatcov/harness/config.hpp"
#include "nonstatcov/harness/experiments.hpp"
#include "nonstatcov/harness/report.hpp"
#include "nonstatcov/parallel.hpp"

namespace nonstatcov::harness {
namespace {

std::string pointer_of(const Json& j) {
  try {
    parse_config(j);
  } catch (const ConfigError& e) {
    return e.pointer();
  }
  return "<accepted>";
}

Json minimal_config() {
  return Json::parse(R"({
    "experiment": "decay", "seed": 3,
    "model": {"family": "tv-vma", "p": 1,
              "coefficients": [{"form": "constant", "value": [[1.0]]}]}
  })");
}

TEST(ParseConfig, MinimalConfigIsAccepted) {
  const ExperimentConfig c = parse_config(minimal_config());
  EXPECT_EQ(c.kind, ExperimentKind::Decay);
  EXPECT_EQ(c.seed, 3u);
  EXPECT_EQ(c.model.p, 1);
}

TEST(ParseConfig, ErrorsCarryJsonPointers) {
  Json j = minimal_config();
  j.erase("seed");
  EXPECT_EQ(pointer_of(j), "/seed");

  j = minimal_config();
  j["extra"] = 1;
  EXPECT_EQ(pointer_of(j), "/extra");

  j = minimal_config();
  j["experiment"] = "nope";
  EXPECT_EQ(pointer_of(j), "/experiment");

  j = minimal_config();
  j["model"]["coefficients"][0]["form"] = "cubic";
  EXPECT_EQ(pointer_of(j), "/model/coefficients/0/form");

  j = minimal_config();
  j["model"]["coefficients"][0]["value"] = Json::parse("[[1.0, 2.0], [3.0]]");
  EXPECT_EQ(pointer_of(j), "/model/coefficients/0/value/1");

  j = minimal_config();
  j["grid"] = Json::parse(R"({"N": [100, "x"]})");
  EXPECT_EQ(pointer_of(j), "/grid/N/1");
}

TEST(ParseConfig, RejectsInvalidModel) {
  Json j = minimal_config();
  j["model"] = Json::parse(R"({"family": "tv-var", "p": 1,
      "coefficients": [{"form": "constant", "value": [[1.5]]}],
      "innovation_variance": {"form": "constant", "value": [[1.0]]}})");
  EXPECT_THROW(parse_config(j), ConfigError);
}

TEST(ModelJson, RoundTripPreservesHash) {
  for (const ModelSpec& m : {reference_vma(), reference_var3(), reference_arch(), reference_sre()}) {
    const ModelSpec back = parse_model(model_to_json(m));
    EXPECT_EQ(model_hash(back), model_hash(m));
    EXPECT_EQ(model_hash(m).size(), 16u);
  }
  EXPECT_NE(model_hash(reference_var3()), model_hash(reference_vma()));
}

TEST(ModelJson, CoefficientFormsRoundTrip) {
  const Matrix a = Matrix::Identity(2, 2);
  for (const CoefficientFn& f :
       {CoefficientFn::constant(a), CoefficientFn::affine(a, 2 * a, 0.1, 0.9),
        CoefficientFn::sinusoidal(a, 0.5 * a, 2.0, 0.3),
        CoefficientFn::piecewise_linear({0.0, 0.5, 1.0}, {a, 2 * a, a})}) {
    const CoefficientFn back = parse_coefficient(coefficient_to_json(f), "/c");
    for (double u : {0.0, 0.3, 0.77}) EXPECT_EQ(back(u), f(u));
  }
}

TEST(ReferenceConfigs, AllParse) {
  ASSERT_FALSE(reference_configs().empty());
  for (const auto& rc : reference_configs()) EXPECT_NO_THROW(parse_config(rc.config)) << rc.name;
  EXPECT_THROW(reference_config("missing"), ConfigError);
}

TEST(ReferenceConfigs, VerifyConfigCarriesReferenceVma) {
  const ExperimentConfig c = parse_config(reference_config("tv-vma-verify").config);
  EXPECT_EQ(c.kind, ExperimentKind::VerifyAll);
  EXPECT_EQ(model_hash(c.model), model_hash(reference_vma()));
}

TEST(Csv, FormatsAndQuotes) {
  EXPECT_EQ(format_double(0.1), "0.10000000000000001");
  EXPECT_EQ(std::stod(format_double(1.0 / 3.0)), 1.0 / 3.0);
  EXPECT_EQ(format_double(std::numeric_limits<double>::infinity()), "inf");
  EXPECT_EQ(csv_field("a,b"), "\"a,b\"");
  EXPECT_EQ(csv_field("say \"x\""), "\"say \"\"x\"\"\"");
  Row r;
  r.experiment = "decay";
  r.model_hash = "00ff";
  r.quantity = "q";
  r.n = 200;
  r.t = 3;
  r.measured = 0.5;
  r.envelope = 1.0;
  EXPECT_EQ(csv_row(r), "decay,00ff,q,200,3,,,,0.5,1,");
  const std::string table = render_table({r});
  EXPECT_EQ(table, std::string(kTableHeader) + "\r\n" + csv_row(r) + "\r\n");
}

TEST(Verdicts, HalvingRule) {
  std::vector<Row> rows;
  for (auto [n, v] : {std::pair{100L, 0.02}, std::pair{200L, 0.01}}) {
    Row r;
    r.quantity = "g";
    r.n = n;
    r.t = 5;
    r.tau = 5;
    r.measured = v;
    r.constant = v * n;
    rows.push_back(r);
  }
  EXPECT_TRUE(halving_verdict(rows, "g").pass);
  EXPECT_TRUE(constant_stability_verdict(rows, "g").pass);
  rows[1].measured = 0.018;
  EXPECT_FALSE(halving_verdict(rows, "g").pass);
  rows[0].measured = rows[1].measured = 1e-17;
  EXPECT_TRUE(halving_verdict(rows, "g").pass);
}

TEST(RunExperiment, WhiteNoiseDecayPasses) {
  const Report rep = run_experiment(parse_config(reference_config("white-noise-decay").config));
  EXPECT_TRUE(rep.all_pass());
  for (const auto& r : rep.rows)
    if (r.quantity == "inverse_lag_norm" && r.k && *r.k > 0) EXPECT_LE(r.measured, 1e-12);
}

TEST(RunExperiment, TablesAreDeterministicAcrossThreadCounts) {
  const ExperimentConfig c = parse_config(reference_config("tv-var-partial").config);
  const std::size_t before = thread_count();
  set_thread_count(1);
  const std::string a = render_table(run_experiment(c).rows);
  set_thread_count(3);
  const std::string b = render_table(run_experiment(c).rows);
  set_thread_count(before);
  EXPECT_EQ(a, b);
}

TEST(RunExperiment, NumericFailureBecomesVerdict) {
  Json j = Json::parse(R"({"experiment": "invert", "seed": 1,
    "model": {"family": "tv-vma", "p": 2,
      "coefficients": [{"form": "constant", "value": [[1, 1], [1, 1.000001]]}]},
    "grid": {"N": [100], "window": [30]}})");
  const Report rep = run_experiment(parse_config(j));
  EXPECT_TRUE(rep.numeric_error);
  EXPECT_FALSE(rep.all_pass());
}

TEST(WriteReport, WritesAllFiles) {
  const auto dir = std::filesystem::temp_directory_path() / "nonstatcov_report_test";
  std::filesystem::remove_all(dir);
  const Report rep = run_experiment(parse_config(reference_config("white-noise-decay").config));
  write_report(rep, dir.string());
  for (const char* f : {"tables.csv", "verdicts.json", "metadata.json"})
    EXPECT_TRUE(std::filesystem::exists(dir / f)) << f;
  std::ifstream in(dir / "verdicts.json");
  const Json v = Json::parse(in);
  EXPECT_TRUE(v["pass"].get<bool>());
  std::ifstream meta_in(dir / "metadata.json");
  const Json meta = Json::parse(meta_in);
  EXPECT_TRUE(meta.contains("config_hash"));
  EXPECT_EQ(meta["model_hash"], model_hash(white_noise(2)));
  std::filesystem::remove_all(dir);
}

TEST(Acceptance, TwelveCriteria) {
  const auto& c = acceptance_criteria();
  ASSERT_EQ(c.size(), 12u);
  for (std::size_t i = 0; i < c.size(); ++i) EXPECT_EQ(c[i].id, static_cast<int>(i + 1));
}

TEST(Acceptance, Ar1OracleCriterionPasses) {
  const Outcome out = run_criterion(4, reference_vma(), 1);
  ASSERT_EQ(out.verdicts.size(), 1u);
  EXPECT_TRUE(out.verdicts.front().pass) << out.verdicts.front().detail;
  EXPECT_EQ(out.verdicts.front().name, "c04_ar1_oracle");
}

}  // namespace
}  // namespace nonstatcov::harness
