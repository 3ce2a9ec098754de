#include <cstdlib>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "nonstatcov/errors.hpp"
#include "nonstatcov/harness/config.hpp"
#include "nonstatcov/harness/experiments.hpp"
#include "nonstatcov/harness/report.hpp"
#include "nonstatcov/parallel.hpp"

namespace {

namespace h = nonstatcov::harness;

enum Exit { kPass = 0, kVerdictFailure = 1, kConfigError = 2, kNumericError = 3 };

struct Options {
  std::string config;
  std::string out;
  long threads = 0;
};

void apply_threads(long requested) {
  long n = requested;
  if (n <= 0) {
    if (const char* env = std::getenv("NONSTATCOV_THREADS")) {
      try {
        n = std::stol(env);
      } catch (const std::exception&) {
        throw nonstatcov::ConfigError("", "NONSTATCOV_THREADS must be a positive integer");
      }
      if (n <= 0) throw nonstatcov::ConfigError("", "NONSTATCOV_THREADS must be a positive integer");
    }
  }
  if (n > 0) nonstatcov::set_thread_count(static_cast<std::size_t>(n));
}

int run(h::ExperimentKind kind, const Options& opt) {
  apply_threads(opt.threads);
  h::ExperimentConfig config = h::load_config(opt.config);
  if (config.kind != kind)
    throw nonstatcov::ConfigError("/experiment", "config is for '" + h::to_string(config.kind) +
                                                     "' but the subcommand is '" + h::to_string(kind) + "'");
  const std::string out = opt.out.empty() ? config.output_dir : opt.out;
  if (out.empty()) throw nonstatcov::ConfigError("/output_dir", "no output directory (use --out)");
  const h::Report report = h::run_experiment(config);
  h::write_report(report, out);
  for (const auto& v : report.verdicts)
    std::cout << (v.pass ? "PASS " : "FAIL ") << v.name << ": " << v.detail << "\n";
  if (report.numeric_error) return kNumericError;
  return report.all_pass() ? kPass : kVerdictFailure;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Finite-section analysis of locally stationary block covariance operators"};
  app.require_subcommand(0, 1);
  bool list = false;
  app.add_flag("--list-reference-configs", list, "List the bundled reference configs and exit");

  Options opt;
  h::ExperimentKind chosen = h::ExperimentKind::Decay;
  for (h::ExperimentKind kind : h::all_experiments()) {
    const std::string name = h::to_string(kind);
    CLI::App* sub = app.add_subcommand(name, "Run the " + name + " experiment");
    sub->add_option("--config", opt.config, "Config file, or builtin:NAME for a bundled config")
        ->required();
    sub->add_option("--out", opt.out, "Output directory (overrides output_dir)");
    sub->add_option("--threads", opt.threads, "Worker threads (default: NONSTATCOV_THREADS)")
        ->check(CLI::PositiveNumber);
    sub->callback([&chosen, kind] { chosen = kind; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kPass : kConfigError;
  }

  if (list) {
    for (const auto& rc : h::reference_configs())
      std::cout << "builtin:" << rc.name << "\t" << h::to_string(h::parse_config(rc.config).kind)
                << "\t" << rc.description << "\n";
    return kPass;
  }
  if (app.get_subcommands().empty()) {
    std::cerr << app.help();
    return kConfigError;
  }

  try {
    return run(chosen, opt);
  } catch (const nonstatcov::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const nonstatcov::InputError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return kNumericError;
  }
}
