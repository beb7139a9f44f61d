#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "vracc/types.hpp"

namespace vracc {

/// Nonsmooth term g of the objective together with its proximal mapping
/// prox_{lambda g}(v) = argmin_x g(x) + (1/2 lambda) ||x - v||^2.
class ProxTerm {
 public:
  enum class Kind { Zero, SquaredL2, L1 };

  static ProxTerm zero() { return ProxTerm(Kind::Zero, 0.0, 0, 0); }

  /// (weight/2) * ||x[first:last]||^2 on a contiguous coordinate range.
  static ProxTerm squared_l2(double weight, Eigen::Index first, Eigen::Index last) {
    if (weight < 0.0) throw std::invalid_argument("squared_l2: negative weight");
    if (first < 0 || last < first) throw std::invalid_argument("squared_l2: bad range");
    return ProxTerm(Kind::SquaredL2, weight, first, last);
  }

  static ProxTerm l1(double weight) {
    if (weight < 0.0) throw std::invalid_argument("l1: negative weight");
    return ProxTerm(Kind::L1, weight, 0, 0);
  }

  Kind kind() const { return kind_; }
  double weight() const { return weight_; }

  double value(const Vector& x) const {
    switch (kind_) {
      case Kind::Zero:
        return 0.0;
      case Kind::SquaredL2:
        return 0.5 * weight_ * x.segment(first_, span(x)).squaredNorm();
      case Kind::L1:
        return weight_ * x.lpNorm<1>();
    }
    return 0.0;
  }

  bool is_smooth() const { return kind_ != Kind::L1; }

  /// Adds the gradient of g to `out`; only the smooth kinds support this.
  void add_gradient(const Vector& x, Vector& out) const {
    switch (kind_) {
      case Kind::Zero:
        return;
      case Kind::SquaredL2:
        out.segment(first_, span(x)) += weight_ * x.segment(first_, span(x));
        return;
      case Kind::L1:
        throw std::logic_error("prox: L1 term has no gradient");
    }
  }

  Vector apply(double lambda, const Vector& v) const {
    if (!(lambda > 0.0)) throw std::invalid_argument("prox: lambda must be positive");
    switch (kind_) {
      case Kind::Zero:
        return v;
      case Kind::SquaredL2: {
        Vector out = v;
        out.segment(first_, span(v)) /= 1.0 + lambda * weight_;
        return out;
      }
      case Kind::L1: {
        const double t = lambda * weight_;
        Vector out(v.size());
        for (Eigen::Index i = 0; i < v.size(); ++i)
          out[i] = std::copysign(std::max(std::abs(v[i]) - t, 0.0), v[i]);
        return out;
      }
    }
    return v;
  }

 private:
  ProxTerm(Kind kind, double weight, Eigen::Index first, Eigen::Index last)
      : kind_(kind), weight_(weight), first_(first), last_(last) {}

  Eigen::Index span(const Vector& v) const { return std::min(last_, v.size()) - first_; }

  Kind kind_;
  double weight_;
  Eigen::Index first_;  // [first_, last_) regularized for SquaredL2
  Eigen::Index last_;
};

}  // namespace vracc
