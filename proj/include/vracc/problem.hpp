#pragma once

#include <functional>
#include <stdexcept>
#include <string>
#include <utility>

#include "vracc/prox.hpp"
#include "vracc/types.hpp"

namespace vracc {

/// Finite-sum objective (1/N) sum_i f_i(x) + g(x). Component evaluators are
/// closures over immutable data, so a problem instance is safe to share
/// between threads. Indices are 0-based. Non-finite inputs are rejected
/// eagerly rather than propagated.
class FiniteSumProblem {
 public:
  using GradientFn = std::function<void(int, const Vector&, Vector&)>;
  using ValueFn = std::function<double(int, const Vector&)>;
  using ValueGradientFn = std::function<double(int, const Vector&, Vector&)>;

  FiniteSumProblem(int components, int dimension, ValueFn value, GradientFn gradient,
                   Vector lipschitz, ProxTerm prox = ProxTerm::zero(),
                   ValueGradientFn value_gradient = nullptr)
      : components_(components),
        dimension_(dimension),
        value_(std::move(value)),
        gradient_(std::move(gradient)),
        value_gradient_(std::move(value_gradient)),
        lipschitz_(std::move(lipschitz)),
        prox_(std::move(prox)) {
    if (components_ < 1) throw std::invalid_argument("problem: need at least one component");
    if (dimension_ < 1) throw std::invalid_argument("problem: need dimension >= 1");
    if (lipschitz_.size() != components_ || (lipschitz_.array() <= 0.0).any())
      throw std::invalid_argument("problem: need one positive smoothness modulus per component");
  }

  int components() const { return components_; }
  int dimension() const { return dimension_; }
  const Vector& lipschitz() const { return lipschitz_; }
  const ProxTerm& prox() const { return prox_; }

  void component_gradient(int i, const Vector& x, Vector& out) const {
    check(i, x);
    gradient_(i, x, out);
  }

  Vector component_gradient(int i, const Vector& x) const {
    Vector out(dimension_);
    component_gradient(i, x, out);
    return out;
  }

  double component_value(int i, const Vector& x) const {
    check(i, x);
    return value_(i, x);
  }

  /// f_i(x) and its gradient in one evaluation (shared subexpressions when
  /// the builder provided a fused form).
  double component_value_gradient(int i, const Vector& x, Vector& grad) const {
    check(i, x);
    if (value_gradient_) return value_gradient_(i, x, grad);
    gradient_(i, x, grad);
    return value_(i, x);
  }

  void full_gradient(const Vector& x, Vector& out) const {
    check(0, x);
    out.setZero();
    Vector g(dimension_);
    for (int i = 0; i < components_; ++i) {
      gradient_(i, x, g);
      out += g;
    }
    out /= static_cast<double>(components_);
  }

  Vector full_gradient(const Vector& x) const {
    Vector out(dimension_);
    full_gradient(x, out);
    return out;
  }

  /// (1/N) sum_i f_i(x), without the prox term.
  double smooth_value(const Vector& x) const {
    check(0, x);
    double sum = 0.0;
    for (int i = 0; i < components_; ++i) sum += value_(i, x);
    return sum / static_cast<double>(components_);
  }

  /// Full objective F(x) + g(x).
  double objective(const Vector& x) const { return smooth_value(x) + prox_.value(x); }

 private:
  void check(int i, const Vector& x) const {
    if (i < 0 || i >= components_) throw std::out_of_range("problem: component index out of range");
    if (x.size() != dimension_) throw std::invalid_argument("problem: dimension mismatch");
    if (!all_finite(x)) throw std::invalid_argument("problem: non-finite input");
  }

  int components_;
  int dimension_;
  ValueFn value_;
  GradientFn gradient_;
  ValueGradientFn value_gradient_;
  Vector lipschitz_;
  ProxTerm prox_;
};

}  // namespace vracc
