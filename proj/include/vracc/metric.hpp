#pragma once

#include <cmath>
#include <stdexcept>

#include "vracc/problem.hpp"
#include "vracc/types.hpp"

namespace vracc {

/// Primal point plus one stored gradient estimate per component; column i of
/// `y` approximates the i-th component gradient at `x`. The residual of the
/// optimality system is carried in the same layout so every block-weighted
/// operation shares one code path.
struct PrimalDualState {
  Vector x;  // d
  Matrix y;  // d x N

  static PrimalDualState zero(int dimension, int components) {
    return {Vector::Zero(dimension), Matrix::Zero(dimension, components)};
  }

  /// x0 lifted with fresh duals y_i = grad f_i(x0).
  static PrimalDualState lift(const FiniteSumProblem& problem, const Vector& x0) {
    PrimalDualState z{x0, Matrix(problem.dimension(), problem.components())};
    Vector g(problem.dimension());
    for (int i = 0; i < problem.components(); ++i) {
      problem.component_gradient(i, x0, g);
      z.y.col(i) = g;
    }
    return z;
  }

  int dimension() const { return static_cast<int>(x.size()); }
  int components() const { return static_cast<int>(y.cols()); }

  bool is_finite() const { return x.allFinite() && y.allFinite(); }

  bool matches(const FiniteSumProblem& problem) const {
    return dimension() == problem.dimension() && y.rows() == problem.dimension() &&
           components() == problem.components();
  }
};

/// Block-diagonal positive-definite weighting: identity on the primal block,
/// step / (N * refresh_i * L_i) on dual block i. Defines the norm used by the
/// safeguards and the merit function.
class StateMetric {
 public:
  StateMetric(double step, const Vector& refresh_probabilities, const Vector& lipschitz)
      : step_(step) {
    if (!(step > 0.0)) throw std::invalid_argument("metric: step must be positive");
    if (refresh_probabilities.size() != lipschitz.size() || refresh_probabilities.size() == 0)
      throw std::invalid_argument("metric: refresh/lipschitz size mismatch");
    const auto n = static_cast<double>(lipschitz.size());
    dual_weights_ = step / (n * refresh_probabilities.array() * lipschitz.array());
    if (!dual_weights_.allFinite() || (dual_weights_.array() <= 0.0).any())
      throw std::invalid_argument("metric: weights must be positive");
  }

  double step() const { return step_; }
  const Vector& dual_weights() const { return dual_weights_; }

  double squared_norm(const PrimalDualState& z) const {
    check(z);
    double s = z.x.squaredNorm();
    for (Eigen::Index i = 0; i < dual_weights_.size(); ++i)
      s += dual_weights_[i] * z.y.col(i).squaredNorm();
    return s;
  }

  double norm(const PrimalDualState& z) const { return std::sqrt(squared_norm(z)); }

  double squared_distance(const PrimalDualState& a, const PrimalDualState& b) const {
    check(a);
    check(b);
    double s = (a.x - b.x).squaredNorm();
    for (Eigen::Index i = 0; i < dual_weights_.size(); ++i)
      s += dual_weights_[i] * (a.y.col(i) - b.y.col(i)).squaredNorm();
    return s;
  }

  double distance(const PrimalDualState& a, const PrimalDualState& b) const {
    return std::sqrt(squared_distance(a, b));
  }

 private:
  void check(const PrimalDualState& z) const {
    if (z.y.cols() != dual_weights_.size())
      throw std::invalid_argument("metric: state shape mismatch");
  }

  double step_;
  Vector dual_weights_;
};

/// Optimality residual at z: the primal block is the proximal-gradient
/// residual evaluated with the stored dual average, dual block i is
/// y_i - grad f_i(x). Zeros of this map are exactly the lifted solutions.
inline PrimalDualState residual(const FiniteSumProblem& problem, double step,
                                const PrimalDualState& z) {
  if (!(step > 0.0)) throw std::invalid_argument("residual: step must be positive");
  if (!z.matches(problem)) throw std::invalid_argument("residual: state/problem shape mismatch");
  const int n = problem.components();
  PrimalDualState r{Vector(problem.dimension()), Matrix(problem.dimension(), n)};
  Vector mean = z.y.rowwise().mean();
  r.x = z.x - problem.prox().apply(step, z.x - step * mean);
  Vector g(problem.dimension());
  for (int i = 0; i < n; ++i) {
    problem.component_gradient(i, z.x, g);
    r.y.col(i) = z.y.col(i) - g;
  }
  return r;
}

/// Merit value V(z): the metric norm of the residual. Zero exactly at lifted
/// solutions since the metric is positive definite.
inline double merit(const FiniteSumProblem& problem, const StateMetric& metric,
                    const PrimalDualState& z) {
  return metric.norm(residual(problem, metric.step(), z));
}

}  // namespace vracc
