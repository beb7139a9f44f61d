#pragma once

#include <cmath>
#include <stdexcept>

#include "vracc/metric.hpp"
#include "vracc/problem.hpp"
#include "vracc/sampler.hpp"
#include "vracc/types.hpp"

namespace vracc {

/// Variance-reduced gradient estimate at z for sampled index i:
///   (1/(N p_i)) (grad f_i(x) - y_i) + mean_j y_j.
/// Unbiased: its expectation over i equals the full gradient.
inline Vector estimate_gradient(const FiniteSumProblem& problem, const PrimalDualState& z, int index,
                                const SamplerConfig& sampler, const Vector& dual_mean) {
  if (index < 0 || index >= problem.components())
    throw std::out_of_range("estimate_gradient: index out of range");
  const double p = sampler.probabilities()[index];
  if (!(p > 0.0)) throw std::invalid_argument("estimate_gradient: sampled index has zero probability");
  Vector g = problem.component_gradient(index, z.x);
  return (g - z.y.col(index)) / (problem.components() * p) + dual_mean;
}

inline Vector estimate_gradient(const FiniteSumProblem& problem, const PrimalDualState& z, int index,
                                const SamplerConfig& sampler) {
  return estimate_gradient(problem, z, index, sampler, Vector(z.y.rowwise().mean()));
}

/// Realized randomness of one step. For Saga, `refresh` is always true and
/// applies to the sampled slot only; for loopless SVRG it is the shared coin
/// deciding whether every slot refreshes.
struct StepOutcome {
  int index = 0;
  bool refresh = true;
};

inline StepOutcome draw_outcome(const SamplerConfig& sampler, const DualUpdatePolicy& policy,
                                SplitRng& rng) {
  StepOutcome out;
  out.index = sampler.draw(rng);
  out.refresh = policy.kind() == DualUpdatePolicy::Kind::Saga
                    ? true
                    : rng.next_double() < policy.refresh_probability();
  return out;
}

/// Running mean of the dual columns, updated incrementally with a full
/// recomputation every N steps to bound drift.
class DualMeanTracker {
 public:
  explicit DualMeanTracker(const PrimalDualState& z) { rebuild(z); }

  const Vector& mean() const { return mean_; }

  void rebuild(const PrimalDualState& z) {
    mean_ = z.y.rowwise().mean();
    steps_ = 0;
  }

  void column_changed(const PrimalDualState& z, const Vector& old_column, int index) {
    mean_ += (z.y.col(index) - old_column) / static_cast<double>(z.y.cols());
    if (++steps_ >= z.y.cols()) rebuild(z);
  }

  void all_changed(const PrimalDualState& z) { rebuild(z); }

 private:
  Vector mean_;
  Eigen::Index steps_ = 0;
};

struct StepStats {
  int gradient_evals = 0;
};

/// One iteration of the variance-reduced proximal method, applied in place:
///   x <- prox_{step g}(x - step * estimate), then the selected dual slots
/// refresh to gradients taken at the pre-update primal point.
inline void basic_step(const FiniteSumProblem& problem, PrimalDualState& z, double step,
                       const SamplerConfig& sampler, const DualUpdatePolicy& policy,
                       const StepOutcome& outcome, DualMeanTracker* tracker = nullptr,
                       StepStats* stats = nullptr) {
  if (!(step > 0.0)) throw std::invalid_argument("basic_step: step must be positive");
  if (!z.matches(problem)) throw std::invalid_argument("basic_step: state/problem shape mismatch");
  const int n = problem.components();
  const double p = sampler.probabilities()[outcome.index];

  Vector sampled_grad = problem.component_gradient(outcome.index, z.x);
  int evals = 1;
  Vector mean = tracker ? tracker->mean() : Vector(z.y.rowwise().mean());
  Vector estimate = (sampled_grad - z.y.col(outcome.index)) / (n * p) + mean;
  Vector x_next = problem.prox().apply(step, z.x - step * estimate);

  // Dual refresh uses the pre-update primal point.
  if (policy.kind() == DualUpdatePolicy::Kind::Saga) {
    Vector old_column = z.y.col(outcome.index);
    z.y.col(outcome.index) = sampled_grad;
    if (tracker) tracker->column_changed(z, old_column, outcome.index);
  } else if (outcome.refresh) {
    Vector g(problem.dimension());
    for (int i = 0; i < n; ++i) {
      if (i == outcome.index) {
        z.y.col(i) = sampled_grad;
      } else {
        problem.component_gradient(i, z.x, g);
        z.y.col(i) = g;
        ++evals;
      }
    }
    if (tracker) tracker->all_changed(z);
  }
  z.x = std::move(x_next);
  if (stats) stats->gradient_evals = evals;
}

/// Draws the step randomness and applies it.
inline StepOutcome basic_step_random(const FiniteSumProblem& problem, PrimalDualState& z, double step,
                                     const SamplerConfig& sampler, const DualUpdatePolicy& policy,
                                     SplitRng& rng, DualMeanTracker* tracker = nullptr,
                                     StepStats* stats = nullptr) {
  StepOutcome outcome = draw_outcome(sampler, policy, rng);
  basic_step(problem, z, step, sampler, policy, outcome, tracker, stats);
  return outcome;
}

/// Admissible step-size bound min_i N p_i / (2 L_i); callers must stay
/// strictly below it.
inline double max_step_size(const Vector& lipschitz, const SamplerConfig& sampler) {
  if (lipschitz.size() == 0) throw std::invalid_argument("max_step_size: empty input");
  if (lipschitz.size() != sampler.probabilities().size())
    throw std::invalid_argument("max_step_size: size mismatch");
  const double n = static_cast<double>(lipschitz.size());
  return (n * sampler.probabilities().array() / (2.0 * lipschitz.array())).minCoeff();
}

namespace detail {

/// Enumerates every realization of one step with its probability:
/// fn(outcome, probability). Saga has N realizations; loopless SVRG has N x 2.
template <typename Fn>
void for_each_outcome(const SamplerConfig& sampler, const DualUpdatePolicy& policy, Fn&& fn) {
  const int n = sampler.components();
  if (policy.kind() == DualUpdatePolicy::Kind::Saga) {
    for (int i = 0; i < n; ++i) fn(StepOutcome{i, true}, sampler.probabilities()[i]);
  } else {
    const double rho = policy.refresh_probability();
    for (int i = 0; i < n; ++i) {
      const double p = sampler.probabilities()[i];
      fn(StepOutcome{i, true}, p * rho);
      if (rho < 1.0) fn(StepOutcome{i, false}, p * (1.0 - rho));
    }
  }
}

/// Shared per-state quantities consumed by the certificate and the lemma
/// checks; everything is evaluated once from definitions.
struct EnumerationScratch {
  Matrix grads;           // d x N at x
  Vector full_grad;       // at x
  Vector full_grad_star;  // at x*
  Vector dual_mean;
  Vector dual_diff_sum;   // sum_i (y_i - y_i*)

  EnumerationScratch(const FiniteSumProblem& problem, const PrimalDualState& z,
                     const PrimalDualState& z_star) {
    const int n = problem.components();
    const int d = problem.dimension();
    grads.resize(d, n);
    Vector g(d);
    for (int i = 0; i < n; ++i) {
      problem.component_gradient(i, z.x, g);
      grads.col(i) = g;
    }
    full_grad = grads.rowwise().mean();
    Vector fs = Vector::Zero(d);
    for (int i = 0; i < n; ++i) {
      problem.component_gradient(i, z_star.x, g);
      fs += g;
    }
    full_grad_star = fs / static_cast<double>(n);
    dual_mean = z.y.rowwise().mean();
    dual_diff_sum = (z.y - z_star.y).rowwise().sum();
  }

  Vector estimate(const PrimalDualState& z, const SamplerConfig& sampler, int i) const {
    const double denom = static_cast<double>(z.components()) * sampler.probabilities()[i];
    return (grads.col(i) - z.y.col(i)) / denom + dual_mean;
  }
};

inline void require_solution(const FiniteSumProblem& problem, const StateMetric& metric,
                             const PrimalDualState& z_star) {
  if (merit(problem, metric, z_star) > 1e-8)
    throw std::invalid_argument("reference point is not a residual zero");
}

}  // namespace detail

/// One-step decrease certificate: `decrease_bound` is the guaranteed lower
/// bound on the drop of the squared metric distance to the solution, built
/// term by term from its closed form; both distance sides are exact
/// conditional expectations obtained by enumerating every realization.
struct DescentCertificate {
  double decrease_bound = 0.0;        // zeta_k
  double expected_next_dist_sq = 0.0;
  double current_dist_sq = 0.0;

  double slack() const { return current_dist_sq - decrease_bound - expected_next_dist_sq; }
};

inline DescentCertificate expected_descent(const FiniteSumProblem& problem, const PrimalDualState& z,
                                           const PrimalDualState& z_star, double step,
                                           const SamplerConfig& sampler,
                                           const DualUpdatePolicy& policy) {
  const int n = problem.components();
  const double nd = static_cast<double>(n);
  StateMetric metric(step, policy.effective_refresh(sampler), problem.lipschitz());
  detail::require_solution(problem, metric, z_star);
  detail::EnumerationScratch scratch(problem, z, z_star);

  DescentCertificate cert;
  cert.current_dist_sq = metric.squared_distance(z, z_star);

  detail::for_each_outcome(sampler, policy, [&](const StepOutcome& outcome, double prob) {
    PrimalDualState next = z;
    basic_step(problem, next, step, sampler, policy, outcome);
    cert.expected_next_dist_sq += prob * metric.squared_distance(next, z_star);
  });

  const Vector& lipschitz = problem.lipschitz();
  const Vector& p = sampler.probabilities();
  double bound = 0.0;
  for (int i = 0; i < n; ++i) {
    const double coeff = step / (nd * lipschitz[i]) - 2.0 * step * step / (nd * nd * p[i]);
    bound += coeff * ((scratch.grads.col(i) - z_star.y.col(i)).squaredNorm() +
                      (z.y.col(i) - z_star.y.col(i)).squaredNorm());
  }
  bound += 2.0 * step * step / (nd * nd) * scratch.dual_diff_sum.squaredNorm();
  bound += step * step * (scratch.full_grad - scratch.full_grad_star).squaredNorm();
  for (int i = 0; i < n; ++i) {
    Vector est = scratch.estimate(z, sampler, i);
    Vector x_next = problem.prox().apply(step, z.x - step * est);
    bound += p[i] * (x_next - z.x + step * (est - scratch.full_grad_star)).squaredNorm();
  }
  cert.decrease_bound = bound;
  return cert;
}

/// Left/right sides of the three one-step bounds behind the certificate,
/// each evaluated by exact enumeration: the primal variance bound (A1,
/// inequality), the dual refresh identity (A2, equality), and the estimator
/// variance bound (A3, inequality).
struct LemmaReport {
  double primal_lhs = 0.0, primal_rhs = 0.0;
  double dual_lhs = 0.0, dual_rhs = 0.0;
  double estimator_lhs = 0.0, estimator_rhs = 0.0;

  bool primal_holds(double tol = 1e-10) const { return primal_lhs <= primal_rhs + tol; }
  bool dual_holds(double tol = 1e-10) const { return std::abs(dual_lhs - dual_rhs) <= tol; }
  bool estimator_holds(double tol = 1e-10) const { return estimator_lhs <= estimator_rhs + tol; }
  bool all_hold(double tol = 1e-10) const {
    return primal_holds(tol) && dual_holds(tol) && estimator_holds(tol);
  }
};

inline LemmaReport lemma_oracles(const FiniteSumProblem& problem, const PrimalDualState& z,
                                 const PrimalDualState& z_star, double step,
                                 const SamplerConfig& sampler, const DualUpdatePolicy& policy) {
  const int n = problem.components();
  const double nd = static_cast<double>(n);
  StateMetric metric(step, policy.effective_refresh(sampler), problem.lipschitz());
  detail::require_solution(problem, metric, z_star);
  detail::EnumerationScratch scratch(problem, z, z_star);

  const Vector& lipschitz = problem.lipschitz();
  const Vector& p = sampler.probabilities();
  const Vector& w = metric.dual_weights();
  const Vector refresh = policy.effective_refresh(sampler);

  LemmaReport report;

  // Primal variance bound: E||x+ - x*||^2 against its closed-form budget.
  double exp_next = 0.0, exp_shift = 0.0, exp_est = 0.0;
  for (int i = 0; i < n; ++i) {
    Vector est = scratch.estimate(z, sampler, i);
    Vector x_next = problem.prox().apply(step, z.x - step * est);
    exp_next += p[i] * (x_next - z_star.x).squaredNorm();
    exp_shift += p[i] * (x_next - z.x + step * (est - scratch.full_grad_star)).squaredNorm();
    exp_est += p[i] * (est - scratch.full_grad_star).squaredNorm();
  }
  report.primal_lhs = exp_next;
  double coco = 0.0;
  for (int i = 0; i < n; ++i)
    coco += 2.0 * step / (nd * lipschitz[i]) *
            (scratch.grads.col(i) - z_star.y.col(i)).squaredNorm();
  report.primal_rhs =
      (z.x - z_star.x).squaredNorm() - coco - exp_shift + step * step * exp_est;

  // Dual refresh identity: E sum_i w_i ||y_i+ - y_i*||^2.
  double dual_lhs = 0.0;
  if (policy.kind() == DualUpdatePolicy::Kind::Saga) {
    for (int j = 0; j < n; ++j) {
      double contrib = w[j] * (scratch.grads.col(j) - z_star.y.col(j)).squaredNorm();
      for (int i = 0; i < n; ++i)
        if (i != j) contrib += w[i] * (z.y.col(i) - z_star.y.col(i)).squaredNorm();
      dual_lhs += p[j] * contrib;
    }
  } else {
    const double rho = policy.refresh_probability();
    double refreshed = 0.0, kept = 0.0;
    for (int i = 0; i < n; ++i) {
      refreshed += w[i] * (scratch.grads.col(i) - z_star.y.col(i)).squaredNorm();
      kept += w[i] * (z.y.col(i) - z_star.y.col(i)).squaredNorm();
    }
    dual_lhs = rho * refreshed + (1.0 - rho) * kept;
  }
  report.dual_lhs = dual_lhs;
  double dual_rhs = 0.0;
  for (int i = 0; i < n; ++i) {
    dual_rhs += step / (nd * lipschitz[i]) *
                (scratch.grads.col(i) - z_star.y.col(i)).squaredNorm();
    dual_rhs += (1.0 - refresh[i]) * w[i] * (z.y.col(i) - z_star.y.col(i)).squaredNorm();
  }
  report.dual_rhs = dual_rhs;

  // Estimator variance bound: E||estimate - grad F(x*)||^2.
  report.estimator_lhs = exp_est;
  double est_rhs = 0.0;
  for (int i = 0; i < n; ++i)
    est_rhs += 2.0 / (nd * nd * p[i]) *
               ((scratch.grads.col(i) - z_star.y.col(i)).squaredNorm() +
                (z.y.col(i) - z_star.y.col(i)).squaredNorm());
  est_rhs -= 2.0 * (scratch.dual_diff_sum / nd).squaredNorm();
  est_rhs -= (scratch.full_grad - scratch.full_grad_star).squaredNorm();
  report.estimator_rhs = est_rhs;

  return report;
}

}  // namespace vracc
