#pragma once

#include <cmath>
#include <deque>
#include <optional>
#include <stdexcept>

#include "vracc/problem.hpp"
#include "vracc/types.hpp"

namespace vracc {

/// Limited-memory curvature pairs with the two-loop recursion. The direction
/// is returned so that a descent step is x - step * direction(grad); the
/// initial matrix is scaled by (s.u)/(u.u) from the newest pair, identity
/// when empty. Pairs failing the curvature test are discarded to keep the
/// implicit inverse-Hessian estimate positive definite.
class LbfgsHistory {
 public:
  explicit LbfgsHistory(int memory) : memory_(memory) {
    if (memory_ < 1) throw std::invalid_argument("lbfgs: memory must be >= 1");
  }

  /// Returns false when the pair is rejected by the curvature test.
  bool push(const Vector& displacement, const Vector& gradient_change) {
    const double curvature = gradient_change.dot(displacement);
    if (curvature <= 1e-12 * gradient_change.norm() * displacement.norm()) return false;
    pairs_.push_back({displacement, gradient_change, 1.0 / curvature});
    if (static_cast<int>(pairs_.size()) > memory_) pairs_.pop_front();
    return true;
  }

  Vector direction(const Vector& grad) const {
    if (!all_finite(grad)) throw std::invalid_argument("lbfgs: non-finite gradient");
    const auto count = static_cast<int>(pairs_.size());
    Vector q = grad;
    std::vector<double> alpha(static_cast<std::size_t>(count));
    for (int j = count - 1; j >= 0; --j) {
      const auto& pair = pairs_[static_cast<std::size_t>(j)];
      alpha[static_cast<std::size_t>(j)] = pair.inv_curvature * pair.s.dot(q);
      q -= alpha[static_cast<std::size_t>(j)] * pair.u;
    }
    Vector r = initial_scale() * q;
    for (int j = 0; j < count; ++j) {
      const auto& pair = pairs_[static_cast<std::size_t>(j)];
      const double beta = pair.inv_curvature * pair.u.dot(r);
      r += pair.s * (alpha[static_cast<std::size_t>(j)] - beta);
    }
    return r;
  }

  double initial_scale() const {
    if (pairs_.empty()) return 1.0;
    const auto& last = pairs_.back();
    return last.s.dot(last.u) / last.u.squaredNorm();
  }

  void reset() { pairs_.clear(); }
  int stored_pairs() const { return static_cast<int>(pairs_.size()); }
  int memory() const { return memory_; }

 private:
  struct Pair {
    Vector s;  // x_{k+1} - x_k
    Vector u;  // grad change
    double inv_curvature;
  };

  int memory_;
  std::deque<Pair> pairs_;  // oldest first
};

struct LineSearchOptions {
  double sufficient_decrease = 1e-4;
  double shrink = 0.5;
  int max_backtracks = 40;
};

/// Backtracking line search for the step x - step * direction on the smooth
/// objective: accepts the first step in {1, shrink, shrink^2, ...} satisfying
///   F(x - step p) <= F(x) - c * step * grad.p.
/// Requires grad.p > 0; returns nothing when the backtrack budget runs out.
inline std::optional<double> line_search(const FiniteSumProblem& problem, const Vector& x,
                                         const Vector& direction, const Vector& grad,
                                         LineSearchOptions options = {}) {
  const double slope = grad.dot(direction);
  if (!(slope > 0.0)) throw std::invalid_argument("line_search: not a descent direction");
  const double f0 = problem.objective(x);
  double step = 1.0;
  for (int trial = 0; trial <= options.max_backtracks; ++trial) {
    const Vector candidate = x - step * direction;
    if (candidate.allFinite()) {
      const double f = problem.objective(candidate);
      if (std::isfinite(f) && f <= f0 - options.sufficient_decrease * step * slope) return step;
    }
    step *= options.shrink;
  }
  return std::nullopt;
}

struct SmoothSolveResult {
  Vector minimizer;
  double objective = 0.0;
  double gradient_norm = 0.0;
  long iterations = 0;
  bool converged = false;
};

/// Quasi-Newton minimizer for instances whose full objective is smooth
/// (nonsmooth term absent or a ridge penalty); used for reference solves.
inline SmoothSolveResult lbfgs_minimize(const FiniteSumProblem& problem, const Vector& start,
                                        int memory = 20, double gradient_tolerance = 1e-12,
                                        long max_iterations = 20000) {
  if (!problem.prox().is_smooth())
    throw std::invalid_argument("lbfgs_minimize: objective must be smooth");
  auto total_gradient = [&problem](const Vector& x) {
    Vector g = problem.full_gradient(x);
    problem.prox().add_gradient(x, g);
    return g;
  };

  Vector x = start;
  LbfgsHistory history(memory);
  Vector grad = total_gradient(x);
  SmoothSolveResult result;
  long k = 0;
  for (; k < max_iterations; ++k) {
    if (grad.norm() <= gradient_tolerance) {
      result.converged = true;
      break;
    }
    Vector p = history.direction(grad);
    bool plain = history.stored_pairs() == 0;
    if (!(grad.dot(p) > 0.0)) {
      history.reset();
      p = grad;
      plain = true;
    }
    auto step = line_search(problem, x, p, grad);
    if (!step && !plain) {
      history.reset();
      p = grad;
      step = line_search(problem, x, p, grad);
    }
    if (!step) break;  // stagnated at the numerical floor
    const Vector x_next = x - *step * p;
    const Vector grad_next = total_gradient(x_next);
    history.push(x_next - x, grad_next - grad);
    x = x_next;
    grad = grad_next;
  }
  result.minimizer = x;
  result.objective = problem.objective(x);
  result.gradient_norm = grad.norm();
  result.iterations = k;
  return result;
}

}  // namespace vracc
