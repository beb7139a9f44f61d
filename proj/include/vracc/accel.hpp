#pragma once

#include <memory>
#include <optional>
#include <utility>

#include "vracc/anderson.hpp"
#include "vracc/lbfgs.hpp"
#include "vracc/metric.hpp"
#include "vracc/problem.hpp"
#include "vracc/types.hpp"

namespace vracc {

/// Fixed-point map of gradient descent on the smooth objective,
/// T(x) = x - step * grad F(x); contractions require step in (0, 2/L).
inline Vector gd_map(const FiniteSumProblem& problem, double step, const Vector& x) {
  return x - step * problem.full_gradient(x);
}

/// Candidate generator interface of the hybrid scheme: proposes the next
/// primal point from the current one, and is told the lifted gradients of
/// whatever the driver evaluated so the next proposal can reuse them.
class Accelerator {
 public:
  virtual ~Accelerator() = default;
  virtual std::optional<Vector> propose(const FiniteSumProblem& problem, double step,
                                        const Vector& x) = 0;
  virtual void observe(const Vector& x, const Vector& full_gradient) = 0;
  virtual void reset() = 0;
};

namespace detail {

/// Remembers the last (point, gradient) pair seen so a proposal at that same
/// point skips one full-gradient evaluation.
class GradientMemo {
 public:
  Vector get(const FiniteSumProblem& problem, const Vector& x) {
    if (have_ && x.size() == point_.size() && (x.array() == point_.array()).all()) return grad_;
    return problem.full_gradient(x);
  }

  void store(const Vector& x, const Vector& grad) {
    point_ = x;
    grad_ = grad;
    have_ = true;
  }

  void clear() { have_ = false; }

 private:
  Vector point_, grad_;
  bool have_ = false;
};

}  // namespace detail

class AndersonAccelerator final : public Accelerator {
 public:
  explicit AndersonAccelerator(AndersonExtrapolator::Options options) : core_(options) {}

  std::optional<Vector> propose(const FiniteSumProblem& problem, double step,
                                const Vector& x) override {
    const Vector grad = memo_.get(problem, x);
    return core_.propose(x, x - step * grad);
  }

  void observe(const Vector& x, const Vector& full_gradient) override {
    memo_.store(x, full_gradient);
  }

  void reset() override {
    core_.reset();
    memo_.clear();
  }

 private:
  AndersonExtrapolator core_;
  detail::GradientMemo memo_;
};

class LbfgsAccelerator final : public Accelerator {
 public:
  explicit LbfgsAccelerator(int memory) : history_(memory) {}

  std::optional<Vector> propose(const FiniteSumProblem& problem, double step,
                                const Vector& x) override {
    (void)step;  // quasi-Newton steps come from the line search
    const Vector grad = memo_.get(problem, x);
    if (grad.norm() == 0.0) return x;  // already stationary
    Vector direction = history_.direction(grad);
    if (!(grad.dot(direction) > 0.0)) {
      history_.reset();
      direction = grad;
    }
    const auto scale = line_search(problem, x, direction, grad);
    if (!scale) return std::nullopt;
    pending_ = std::make_unique<std::pair<Vector, Vector>>(x, grad);
    return Vector(x - *scale * direction);
  }

  void observe(const Vector& x, const Vector& full_gradient) override {
    if (pending_) {
      history_.push(x - pending_->first, full_gradient - pending_->second);
      pending_.reset();
    }
    memo_.store(x, full_gradient);
  }

  void reset() override {
    history_.reset();
    pending_.reset();
    memo_.clear();
  }

 private:
  LbfgsHistory history_;
  detail::GradientMemo memo_;
  std::unique_ptr<std::pair<Vector, Vector>> pending_;
};

/// Runs one accelerator step on the primal part and lifts the result to a
/// full candidate state with fresh duals y_i = grad f_i(x+); the lift is what
/// the safeguard merit evaluation needs anyway. Accelerator failures map to
/// an empty result.
inline std::optional<PrimalDualState> propose_candidate(Accelerator& accelerator,
                                                        const FiniteSumProblem& problem, double step,
                                                        const PrimalDualState& current) {
  auto x_plus = accelerator.propose(problem, step, current.x);
  if (!x_plus || !all_finite(*x_plus)) return std::nullopt;
  PrimalDualState lifted = PrimalDualState::lift(problem, *x_plus);
  accelerator.observe(lifted.x, Vector(lifted.y.rowwise().mean()));
  return lifted;
}

}  // namespace vracc
