// Benchmark harness: runs one solver configuration on a dataset and emits a
// plot-ready trace CSV plus a summary on standard output.

#include <exception>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "vracc/experiment.hpp"

int main(int argc, char** argv) {
  CLI::App app{"variance-reduced solvers with safeguarded acceleration"};
  app.set_config("--config", "", "optional key=value configuration file (flags take precedence)");

  vracc::ExperimentConfig cfg;
  std::string method = "lsvrg";
  std::string lambda = "auto";

  app.add_option("--data", cfg.data_path, "dataset path")->required();
  app.add_option("--format", cfg.format, "dataset format: libsvm or csv (default: by extension)")
      ->check(CLI::IsMember({"libsvm", "csv"}));
  app.add_option("--method", method, "gd | lsvrg | saga | lsvrg+aa | lsvrg+lbfgs")
      ->check(CLI::IsMember({"gd", "lsvrg", "saga", "lsvrg+aa", "lsvrg+lbfgs"}));
  app.add_option("--lambda", lambda, "step size, or 'auto' = 0.9 * admissible bound");
  app.add_option("--rho", cfg.refresh_probability, "L-SVRG refresh probability (default 1/N)");
  app.add_option("--memory", cfg.memory, "accelerator memory size");
  app.add_option("--C", cfg.merit_factor, "safeguard merit factor");
  app.add_option("--D", cfg.distance_factor, "safeguard distance factor");
  app.add_option("--delta", cfg.decay, "safeguard decay exponent margin");
  app.add_option("--k0", cfg.burst_length, "basic steps per rejected candidate (default N)");
  app.add_option("--kmax", cfg.max_iterations, "iteration budget (default 100N)");
  app.add_option("--xi", cfg.regularization, "ridge regularization weight");
  app.add_option("--xi-bt", cfg.backtrack_overhead, "line-search overhead coefficient in the cost model");
  app.add_option("--seed", cfg.seed, "random seed");
  app.add_flag("--standardize", cfg.standardize_features, "standardize feature columns");
  app.add_option("--tol", cfg.merit_tolerance, "merit tolerance for early termination");
  app.add_option("--out", cfg.output_path, "trace CSV path");

  CLI11_PARSE(app, argc, argv);

  try {
    auto parsed = vracc::parse_method(method);
    if (!parsed) throw std::runtime_error("unknown method: " + method);
    cfg.method = *parsed;
    if (lambda != "auto") {
      std::size_t used = 0;
      cfg.step = std::stod(lambda, &used);
      if (used != lambda.size() || !(cfg.step > 0.0))
        throw std::runtime_error("--lambda must be 'auto' or a positive number");
    }
    return vracc::run_experiment(cfg);
  } catch (const std::exception& error) {
    std::cerr << "error: " << error.what() << "\n";
    return 1;
  }
}
