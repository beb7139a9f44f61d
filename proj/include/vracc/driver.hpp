#pragma once

#include <cmath>
#include <iostream>
#include <limits>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "vracc/accel.hpp"
#include "vracc/cost.hpp"
#include "vracc/engine.hpp"
#include "vracc/metric.hpp"
#include "vracc/problem.hpp"
#include "vracc/sampler.hpp"
#include "vracc/types.hpp"

namespace vracc {

enum class AcceleratorKind { None, Anderson, Lbfgs };

enum class MeritKind { ResidualMetricNorm };  // extension point; one choice implemented

/// Knobs of the outer safeguarded loop. An accelerator candidate is accepted
/// only when its merit stays under merit_factor * V(z0) * (1+accepts)^-(1+decay)
/// and its metric distance from the current iterate stays under
/// distance_factor * V(z_k); otherwise `burst_length` basic steps run.
struct SafeguardConfig {
  double merit_factor = 1e6;     // C
  double distance_factor = 1e6;  // D
  double decay = 1e-6;           // delta
  long burst_length = 1;         // K0, basic steps per rejected candidate
  long max_iterations = 1000;    // k_max
  double merit_tolerance = 1e-12;
  MeritKind merit_kind = MeritKind::ResidualMetricNorm;
  AcceleratorKind accelerator = AcceleratorKind::None;
  int memory = 5;
  CostModel cost;

  void validate() const {
    if (!(merit_factor > 0.0) || !(distance_factor > 0.0) || !(decay > 0.0))
      throw std::invalid_argument("safeguard: constants must be positive");
    if (burst_length < 1 || max_iterations < 1)
      throw std::invalid_argument("safeguard: counters must be >= 1");
    if (accelerator != AcceleratorKind::None && memory < 1)
      throw std::invalid_argument("safeguard: accelerator memory must be >= 1");
    if (!(merit_tolerance >= 0.0)) throw std::invalid_argument("safeguard: negative tolerance");
  }
};

struct SafeguardDecision {
  bool accept = false;
  double candidate_merit = 0.0;
  double merit_threshold = 0.0;
  double step_norm = 0.0;
  double step_threshold = 0.0;
};

/// Evaluates both safeguard inequalities (non-strict) for a candidate and
/// records the four compared quantities. `current_merit` is V(z_k) and
/// `initial_merit` is V(z0), computed once at run start.
inline SafeguardDecision safeguard_check(const FiniteSumProblem& problem, const StateMetric& metric,
                                         const SafeguardConfig& cfg, const PrimalDualState& candidate,
                                         const PrimalDualState& current, double initial_merit,
                                         long accepted_count, double current_merit) {
  SafeguardDecision out;
  out.candidate_merit = merit(problem, metric, candidate);
  out.merit_threshold = cfg.merit_factor * initial_merit *
                        std::pow(1.0 + static_cast<double>(accepted_count), -(1.0 + cfg.decay));
  out.step_norm = metric.distance(candidate, current);
  out.step_threshold = cfg.distance_factor * current_merit;
  out.accept = out.candidate_merit <= out.merit_threshold && out.step_norm <= out.step_threshold;
  return out;
}

enum class TraceEventKind { Init, Basic, Accept, Reject };

inline const char* to_string(TraceEventKind kind) {
  switch (kind) {
    case TraceEventKind::Init: return "init";
    case TraceEventKind::Basic: return "basic";
    case TraceEventKind::Accept: return "accept";
    case TraceEventKind::Reject: return "reject";
  }
  return "?";
}

/// One trace row. Costs are cumulative; the safeguard fields are populated
/// only on accept/reject rows. Reject rows carry the iteration index of the
/// iterate the candidate was evaluated at (the counter does not advance on
/// rejection), so the index is nondecreasing over the whole trace and
/// strictly increasing across iterate-producing rows.
struct TraceEvent {
  long k = 0;
  long accepts = 0;  // k_aa
  TraceEventKind kind = TraceEventKind::Init;
  double objective = 0.0;
  double merit = 0.0;
  double passes = 0.0;
  double flops = 0.0;
  double candidate_merit = std::numeric_limits<double>::quiet_NaN();
  double merit_threshold = std::numeric_limits<double>::quiet_NaN();
  double step_norm = std::numeric_limits<double>::quiet_NaN();
  double step_threshold = std::numeric_limits<double>::quiet_NaN();
};

/// Audit record of one candidate evaluation; kept only when requested, for
/// offline recomputation of the accept/reject decisions.
struct CandidateRecord {
  long k = 0;
  long accepted_before = 0;
  PrimalDualState current;
  PrimalDualState candidate;
  double current_merit = 0.0;
  SafeguardDecision decision;
};

struct RunTrace {
  std::vector<TraceEvent> events;
  double initial_merit = 0.0;
  long basic_steps = 0;
  long accepts = 0;
  long rejects = 0;
  bool reached_tolerance = false;
  std::vector<CandidateRecord> candidate_log;  // filled only when recording is on

  double total_passes() const { return events.empty() ? 0.0 : events.back().passes; }
  double total_flops() const { return events.empty() ? 0.0 : events.back().flops; }
  double final_objective() const { return events.empty() ? 0.0 : events.back().objective; }
  double final_merit() const { return events.empty() ? 0.0 : events.back().merit; }
};

struct RunOptions {
  Vector start;  // empty = origin
  bool record_candidates = false;
};

/// Safeguarded hybrid loop: at the top of every outer pass the configured
/// accelerator proposes a lifted candidate; an accepted candidate becomes the
/// next iterate, a rejected one triggers `burst_length` basic steps and an
/// accelerator restart. With no accelerator this is exactly the basic method.
inline RunTrace run_hybrid(const FiniteSumProblem& problem, double step,
                           const SamplerConfig& sampler, const DualUpdatePolicy& policy,
                           const SafeguardConfig& cfg, std::uint64_t seed,
                           const RunOptions& options = {}) {
  cfg.validate();
  const long n = problem.components();
  const long d = problem.dimension();
  const double bound = max_step_size(problem.lipschitz(), sampler);
  if (!(step > 0.0) || !(step < bound))
    throw std::invalid_argument("run_hybrid: step must lie in (0, " + std::to_string(bound) + ")");
  if (cfg.accelerator != AcceleratorKind::None && problem.prox().kind() != ProxTerm::Kind::Zero)
    throw std::invalid_argument("run_hybrid: accelerators require a smooth objective");
  if (cfg.accelerator == AcceleratorKind::Anderson) {
    const double mean_modulus = problem.lipschitz().mean();
    if (step >= 2.0 / mean_modulus)
      std::cerr << "warning: step " << step << " is outside (0, 2/L) for the fixed-point map\n";
  }

  std::unique_ptr<Accelerator> accelerator;
  if (cfg.accelerator == AcceleratorKind::Anderson)
    accelerator = std::make_unique<AndersonAccelerator>(
        AndersonExtrapolator::Options{cfg.memory, 1e-10, 0.0});
  else if (cfg.accelerator == AcceleratorKind::Lbfgs)
    accelerator = std::make_unique<LbfgsAccelerator>(cfg.memory);

  SplitRng rng(seed);
  Vector x0 = options.start.size() ? options.start : Vector::Zero(d);
  PrimalDualState z = PrimalDualState::lift(problem, x0);
  DualMeanTracker tracker(z);
  StateMetric metric(step, policy.effective_refresh(sampler), problem.lipschitz());

  RunTrace trace;
  trace.initial_merit = merit(problem, metric, z);
  double passes = 1.0;  // dual initialization is one pass over the data
  double flops = CostModel::gd_step(n, d);
  double current_merit = trace.initial_merit;
  long k = 0;
  long accepts = 0;
  trace.events.push_back({k, accepts, TraceEventKind::Init, problem.objective(z.x), current_merit,
                          passes, flops});

  const auto candidate_flops = [&]() {
    return cfg.accelerator == AcceleratorKind::Anderson
               ? CostModel::anderson_candidate(n, d, cfg.memory)
               : cfg.cost.lbfgs_candidate(n, d, cfg.memory);
  };

  while (k < cfg.max_iterations && current_merit > cfg.merit_tolerance) {
    if (accelerator) {
      auto candidate = propose_candidate(*accelerator, problem, step, z);
      if (candidate) {
        flops += candidate_flops();
        const SafeguardDecision decision = safeguard_check(problem, metric, cfg, *candidate, z,
                                                           trace.initial_merit, accepts,
                                                           current_merit);
        if (options.record_candidates)
          trace.candidate_log.push_back({k, accepts, z, *candidate, current_merit, decision});
        if (decision.accept) {
          z = std::move(*candidate);
          tracker.rebuild(z);
          ++k;
          ++accepts;
          ++trace.accepts;
          passes += 1.0;  // full dual refresh
          current_merit = decision.candidate_merit;
          trace.events.push_back({k, accepts, TraceEventKind::Accept, problem.objective(z.x),
                                  current_merit, passes, flops, decision.candidate_merit,
                                  decision.merit_threshold, decision.step_norm,
                                  decision.step_threshold});
          continue;
        }
        ++trace.rejects;
        trace.events.push_back({k, accepts, TraceEventKind::Reject, problem.objective(z.x),
                                current_merit, passes, flops, decision.candidate_merit,
                                decision.merit_threshold, decision.step_norm,
                                decision.step_threshold});
        accelerator->reset();
      } else {
        accelerator->reset();
      }
    }

    for (long s = 0; s < cfg.burst_length && k < cfg.max_iterations; ++s) {
      StepStats stats;
      basic_step_random(problem, z, step, sampler, policy, rng, &tracker, &stats);
      ++k;
      ++trace.basic_steps;
      passes += static_cast<double>(stats.gradient_evals) / static_cast<double>(n);
      flops += CostModel::basic_step(n, d);
      current_merit = merit(problem, metric, z);
      trace.events.push_back({k, accepts, TraceEventKind::Basic, problem.objective(z.x),
                              current_merit, passes, flops});
      if (current_merit <= cfg.merit_tolerance) break;
    }
  }

  trace.reached_tolerance = current_merit <= cfg.merit_tolerance;
  return trace;
}

/// Deterministic proximal-gradient baseline (plain gradient descent when the
/// nonsmooth term is absent). The merit column holds the Euclidean norm of
/// the fixed-point residual x - prox(x - step grad F(x)).
inline RunTrace run_proximal_gradient(const FiniteSumProblem& problem, double step,
                                      long max_iterations, double merit_tolerance = 1e-12,
                                      const Vector& start = Vector()) {
  if (!(step > 0.0)) throw std::invalid_argument("run_proximal_gradient: step must be positive");
  if (max_iterations < 1) throw std::invalid_argument("run_proximal_gradient: need iterations >= 1");
  const long n = problem.components();
  const long d = problem.dimension();

  Vector x = start.size() ? start : Vector::Zero(d);
  Vector grad = problem.full_gradient(x);
  auto residual_norm = [&](const Vector& point, const Vector& g) {
    return (point - problem.prox().apply(step, point - step * g)).norm();
  };

  RunTrace trace;
  double passes = 0.0;
  double flops = 0.0;
  double current_merit = residual_norm(x, grad);
  trace.initial_merit = current_merit;
  long k = 0;
  trace.events.push_back({k, 0, TraceEventKind::Init, problem.objective(x), current_merit, passes,
                          flops});

  while (k < max_iterations && current_merit > merit_tolerance) {
    x = problem.prox().apply(step, x - step * grad);
    grad = problem.full_gradient(x);
    ++k;
    ++trace.basic_steps;
    passes += 1.0;
    flops += CostModel::gd_step(n, d);
    current_merit = residual_norm(x, grad);
    trace.events.push_back({k, 0, TraceEventKind::Basic, problem.objective(x), current_merit,
                            passes, flops});
  }
  trace.reached_tolerance = current_merit <= merit_tolerance;
  return trace;
}

}  // namespace vracc
