#pragma once

#include <charconv>
#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <system_error>

#include "vracc/data_io.hpp"
#include "vracc/driver.hpp"
#include "vracc/lbfgs.hpp"
#include "vracc/logistic.hpp"
#include "vracc/problem.hpp"
#include "vracc/types.hpp"

namespace vracc {

/// Shortest decimal form that round-trips; locale-independent with '.' as
/// the decimal separator, so traces are byte-stable.
inline std::string format_double(double value) {
  char buffer[64];
  auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof(buffer), value);
  if (ec != std::errc()) return "nan";
  return std::string(buffer, ptr);
}

/// High-accuracy reference solve for the optimal objective value, by a
/// quasi-Newton run to (near) vanishing gradient norm.
struct ReferenceResult {
  double optimum = 0.0;
  double gradient_norm = 0.0;
  long iterations = 0;
  bool converged = false;
};

inline ReferenceResult compute_reference(const FiniteSumProblem& problem,
                                         double gradient_tolerance = 1e-12,
                                         long max_iterations = 50000) {
  auto solve = lbfgs_minimize(problem, Vector::Zero(problem.dimension()), 20, gradient_tolerance,
                              max_iterations);
  ReferenceResult out;
  out.optimum = solve.objective;
  out.gradient_norm = solve.gradient_norm;
  out.iterations = solve.iterations;
  out.converged = solve.converged;
  if (!out.converged && out.gradient_norm > 1e-9)
    std::cerr << "warning: reference solve stopped at gradient norm " << out.gradient_norm << "\n";
  return out;
}

/// File-backed cache for the reference optimum, keyed on the preprocessing
/// that shapes the objective. Values round-trip exactly via shortest-form
/// decimals.
inline double cached_reference(const FiniteSumProblem& problem, const std::string& cache_path,
                               const std::string& key) {
  if (!cache_path.empty()) {
    std::ifstream in(cache_path);
    std::string stored_key, stored_value;
    if (in && std::getline(in, stored_key) && std::getline(in, stored_value) && stored_key == key) {
      double value = 0.0;
      auto [p, ec] = std::from_chars(stored_value.data(), stored_value.data() + stored_value.size(), value);
      if (ec == std::errc() && p == stored_value.data() + stored_value.size()) return value;
    }
  }
  const double value = compute_reference(problem).optimum;
  if (!cache_path.empty()) {
    std::ofstream out(cache_path);
    if (out) out << key << '\n' << format_double(value) << '\n';
  }
  return value;
}

/// Writes the trace in the stable schema
///   k,k_aa,event,objective,subopt,merit,passes,flops
/// with LF line endings. Suboptimality is (f - f*) / (f0 - f*) against the
/// reference optimum and the run's initial objective.
inline void write_trace_csv(std::ostream& out, const RunTrace& trace, double reference_optimum) {
  out << "k,k_aa,event,objective,subopt,merit,passes,flops\n";
  if (trace.events.empty()) return;
  const double initial_gap = trace.events.front().objective - reference_optimum;
  for (const TraceEvent& event : trace.events) {
    const double subopt = initial_gap > 0.0 ? (event.objective - reference_optimum) / initial_gap
                                            : 0.0;
    out << event.k << ',' << event.accepts << ',' << to_string(event.kind) << ','
        << format_double(event.objective) << ',' << format_double(subopt) << ','
        << format_double(event.merit) << ',' << format_double(event.passes) << ','
        << format_double(event.flops) << '\n';
  }
}

inline void write_trace_csv(const std::string& path, const RunTrace& trace,
                            double reference_optimum) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  write_trace_csv(out, trace, reference_optimum);
}

enum class Method { Gd, Lsvrg, Saga, LsvrgAnderson, LsvrgLbfgs };

inline std::optional<Method> parse_method(const std::string& name) {
  if (name == "gd") return Method::Gd;
  if (name == "lsvrg") return Method::Lsvrg;
  if (name == "saga") return Method::Saga;
  if (name == "lsvrg+aa") return Method::LsvrgAnderson;
  if (name == "lsvrg+lbfgs") return Method::LsvrgLbfgs;
  return std::nullopt;
}

inline const char* to_string(Method method) {
  switch (method) {
    case Method::Gd: return "gd";
    case Method::Lsvrg: return "lsvrg";
    case Method::Saga: return "saga";
    case Method::LsvrgAnderson: return "lsvrg+aa";
    case Method::LsvrgLbfgs: return "lsvrg+lbfgs";
  }
  return "?";
}

/// Benchmark configuration; zero/negative sentinel values resolve to the
/// dataset-dependent defaults at run time (rho = 1/N, k0 = N, kmax = 100N).
struct ExperimentConfig {
  std::string data_path;
  std::string format;  // "libsvm", "csv", or empty = infer from extension
  bool standardize_features = false;
  Method method = Method::Lsvrg;
  double step = 0.0;  // <= 0 means auto: 0.9 * admissible bound
  double refresh_probability = 0.0;
  int memory = 5;
  double merit_factor = 1e6;
  double distance_factor = 1e6;
  double decay = 1e-6;
  long burst_length = 0;
  long max_iterations = 0;
  double regularization = 0.01;
  double backtrack_overhead = 0.3;
  std::uint64_t seed = 0;
  double merit_tolerance = 1e-12;
  std::string output_path = "trace.csv";
};

struct ExperimentResult {
  RunTrace trace;
  double reference_optimum = 0.0;
  double step = 0.0;
  double final_suboptimality = 0.0;
  long samples = 0;
  long dimension = 0;
};

inline Dataset load_dataset(const ExperimentConfig& cfg) {
  std::string format = cfg.format;
  if (format.empty())
    format = cfg.data_path.size() > 4 && cfg.data_path.substr(cfg.data_path.size() - 4) == ".csv"
                 ? "csv"
                 : "libsvm";
  Dataset data = format == "csv" ? load_csv(cfg.data_path) : load_libsvm(cfg.data_path);
  if (cfg.standardize_features) data = standardize(data);
  return data;
}

inline ExperimentResult run_experiment_on(const Dataset& data, const ExperimentConfig& cfg,
                                          const std::string& reference_cache_path = "") {
  FiniteSumProblem problem =
      make_logistic(data.features, data.labels, cfg.regularization, LogisticFormulation::SmoothOnly);
  const long n = problem.components();
  const long d = problem.dimension();

  SamplerConfig sampler = SamplerConfig::uniform(static_cast<int>(n));
  const double bound = max_step_size(problem.lipschitz(), sampler);
  const double step = cfg.step > 0.0 ? cfg.step : 0.9 * bound;
  const double rho = cfg.refresh_probability > 0.0 ? cfg.refresh_probability
                                                   : 1.0 / static_cast<double>(n);
  const long kmax = cfg.max_iterations > 0 ? cfg.max_iterations : 100 * n;

  SafeguardConfig safeguard;
  safeguard.merit_factor = cfg.merit_factor;
  safeguard.distance_factor = cfg.distance_factor;
  safeguard.decay = cfg.decay;
  safeguard.burst_length = cfg.burst_length > 0 ? cfg.burst_length : n;
  safeguard.max_iterations = kmax;
  safeguard.merit_tolerance = cfg.merit_tolerance;
  safeguard.memory = cfg.memory;
  safeguard.cost.backtrack_overhead = cfg.backtrack_overhead;

  ExperimentResult result;
  result.samples = n;
  result.dimension = d;
  result.step = step;

  std::ostringstream key;
  key << "xi=" << format_double(cfg.regularization) << " standardize=" << cfg.standardize_features
      << " n=" << n << " d=" << d;
  result.reference_optimum = cached_reference(problem, reference_cache_path, key.str());

  switch (cfg.method) {
    case Method::Gd:
      result.trace = run_proximal_gradient(problem, step, kmax, cfg.merit_tolerance);
      break;
    case Method::Lsvrg:
      result.trace = run_hybrid(problem, step, sampler, DualUpdatePolicy::loopless_svrg(rho),
                                safeguard, cfg.seed);
      break;
    case Method::Saga:
      result.trace = run_hybrid(problem, step, sampler, DualUpdatePolicy::saga(), safeguard,
                                cfg.seed);
      break;
    case Method::LsvrgAnderson:
      safeguard.accelerator = AcceleratorKind::Anderson;
      result.trace = run_hybrid(problem, step, sampler, DualUpdatePolicy::loopless_svrg(rho),
                                safeguard, cfg.seed);
      break;
    case Method::LsvrgLbfgs:
      safeguard.accelerator = AcceleratorKind::Lbfgs;
      result.trace = run_hybrid(problem, step, sampler, DualUpdatePolicy::loopless_svrg(rho),
                                safeguard, cfg.seed);
      break;
  }

  const double initial_gap = result.trace.events.front().objective - result.reference_optimum;
  result.final_suboptimality =
      initial_gap > 0.0
          ? (result.trace.final_objective() - result.reference_optimum) / initial_gap
          : 0.0;
  return result;
}

/// Loads the dataset, runs the configured method, writes the trace CSV, and
/// prints a summary. Returns 0 when the run completed to the iteration
/// budget or the merit tolerance.
inline int run_experiment(const ExperimentConfig& cfg, std::ostream& summary = std::cout) {
  Dataset data = load_dataset(cfg);
  ExperimentResult result = run_experiment_on(data, cfg, cfg.data_path + ".fstar");
  write_trace_csv(cfg.output_path, result.trace, result.reference_optimum);

  const RunTrace& trace = result.trace;
  summary << "method: " << to_string(cfg.method) << "\n"
          << "dataset: " << data.provenance.path << " (" << result.samples << " samples, dimension "
          << result.dimension << ", labels " << data.provenance.label_mapping
          << (data.provenance.standardized ? ", standardized" : "") << ")\n"
          << "step: " << format_double(result.step)
          << (cfg.step > 0.0 ? "" : " (auto: 0.9 * admissible bound)") << "\n"
          << "reference objective: " << format_double(result.reference_optimum) << "\n"
          << "final suboptimality: " << format_double(result.final_suboptimality) << "\n"
          << "final merit: " << format_double(trace.final_merit()) << "\n"
          << "events: " << trace.basic_steps << " basic, " << trace.accepts << " accept, "
          << trace.rejects << " reject\n"
          << "passes over data: " << format_double(trace.total_passes()) << "\n"
          << "weighted flops: " << format_double(trace.total_flops()) << " ("
          << format_double(trace.total_flops() / CostModel::gd_step(result.samples, result.dimension))
          << " gradient-descent steps)\n"
          << "stopped: " << (trace.reached_tolerance ? "merit tolerance" : "iteration budget")
          << "\n"
          << "trace: " << cfg.output_path << "\n";
  return 0;
}

}  // namespace vracc
