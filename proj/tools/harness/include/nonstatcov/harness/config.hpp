#pragma once

// Experiment configuration: JSON <-> ModelSpec, grids and bundled reference configs.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "nonstatcov/models.hpp"

namespace nonstatcov::harness {

using Json = nlohmann::json;

enum class ExperimentKind {
  Simulate,
  Decay,
  Invert,
  Neumann,
  Var,
  Baxter,
  Smoothness,
  Partial,
  Coherence,
  Physical,
  VerifyAll,
};

std::string to_string(ExperimentKind k);
/// Throws ConfigError with an empty pointer for unknown names.
ExperimentKind experiment_from_string(const std::string& s);
const std::vector<ExperimentKind>& all_experiments();

/// Parameter grid. Fields that an experiment does not use are ignored; empty
/// lists fall back to per-experiment defaults.
struct Grid {
  std::vector<long> n;
  std::vector<long> d;
  std::vector<long> j;
  std::vector<long> m;
  std::vector<long> window;
  std::vector<double> u;
  std::vector<double> omega;
  std::optional<long> pad;
  /// First time index of the base window.
  long t_lo = 0;
  /// Target time t = floor(u0 * N) for single-time experiments.
  double u0 = 0.625;
  std::optional<long> max_lag;
  long terms = 40;
  long reps = 2000;
  /// Component pair (a, b) for partial and coherence experiments.
  int a = 0;
  int b = 1;
};

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::Decay;
  ModelSpec model;
  Grid grid;
  std::uint64_t seed = 0;
  std::string output_dir;
};

/// Parses and validates a config. Errors carry a JSON pointer to the offending field.
ExperimentConfig parse_config(const Json& j);
ExperimentConfig load_config(const std::string& path);

ModelSpec parse_model(const Json& j, const std::string& pointer = "/model");
CoefficientFn parse_coefficient(const Json& j, const std::string& pointer);
Matrix parse_matrix(const Json& j, const std::string& pointer);

Json model_to_json(const ModelSpec& m);
Json coefficient_to_json(const CoefficientFn& f);
Json matrix_to_json(const Matrix& a);

/// FNV-1a 64 of the canonical JSON dump, as 16 hex digits.
std::string model_hash(const ModelSpec& m);
std::uint64_t fnv1a(const std::string& bytes);

// Reference models.
ModelSpec reference_vma();
ModelSpec reference_var3();
ModelSpec reference_ar1(double phi = 0.5, double sigma2 = 1.0);
ModelSpec reference_arch();
ModelSpec reference_sre();
ModelSpec white_noise(int p = 2);

struct ReferenceConfig {
  std::string name;
  std::string description;
  Json config;
};

const std::vector<ReferenceConfig>& reference_configs();
/// Looks up a bundled config by name; throws ConfigError if unknown.
const ReferenceConfig& reference_config(const std::string& name);

}  // namespace nonstatcov::harness
