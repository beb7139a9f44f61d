#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "vracc/rng.hpp"
#include "vracc/types.hpp"

namespace vracc {

/// Sampling distribution for the component index drawn at each step.
class SamplerConfig {
 public:
  enum class Kind { Uniform, Lipschitz, Custom };

  static SamplerConfig uniform(int components) {
    return SamplerConfig(Kind::Uniform,
                         Vector::Constant(components, 1.0 / static_cast<double>(components)));
  }

  /// p_i proportional to L_i; gives the largest admissible step-size bound.
  static SamplerConfig lipschitz(const Vector& moduli) {
    return SamplerConfig(Kind::Lipschitz, moduli / moduli.sum());
  }

  static SamplerConfig custom(const Vector& probabilities) {
    return SamplerConfig(Kind::Custom, probabilities);
  }

  Kind kind() const { return kind_; }
  const Vector& probabilities() const { return prob_; }
  int components() const { return static_cast<int>(prob_.size()); }

  int draw(SplitRng& rng) const {
    const double u = rng.next_double();
    const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
    const auto idx = static_cast<int>(it - cumulative_.begin());
    return std::min(idx, components() - 1);
  }

 private:
  SamplerConfig(Kind kind, Vector prob) : kind_(kind), prob_(std::move(prob)) {
    if (prob_.size() == 0) throw std::invalid_argument("sampler: empty distribution");
    if ((prob_.array() <= 0.0).any())
      throw std::invalid_argument("sampler: probabilities must be strictly positive");
    if (std::abs(prob_.sum() - 1.0) > 1e-12)
      throw std::invalid_argument("sampler: probabilities must sum to one");
    cumulative_.resize(prob_.size());
    double acc = 0.0;
    for (Eigen::Index i = 0; i < prob_.size(); ++i) {
      acc += prob_[i];
      cumulative_[static_cast<std::size_t>(i)] = acc;
    }
    cumulative_.back() = 1.0;
  }

  Kind kind_;
  Vector prob_;
  std::vector<double> cumulative_;
};

/// Which stored gradients refresh at a step: one sampled slot (Saga) or all
/// of them with a fixed coin probability (loopless SVRG).
class DualUpdatePolicy {
 public:
  enum class Kind { Saga, LooplessSvrg };

  static DualUpdatePolicy saga() { return DualUpdatePolicy(Kind::Saga, 1.0); }

  static DualUpdatePolicy loopless_svrg(double refresh_probability) {
    if (!(refresh_probability > 0.0) || refresh_probability > 1.0)
      throw std::invalid_argument("loopless_svrg: refresh probability must lie in (0, 1]");
    return DualUpdatePolicy(Kind::LooplessSvrg, refresh_probability);
  }

  Kind kind() const { return kind_; }
  double refresh_probability() const { return refresh_; }

  /// Per-slot probability that slot i refreshes in one step; this is what the
  /// block metric weights consume.
  Vector effective_refresh(const SamplerConfig& sampler) const {
    if (kind_ == Kind::Saga) return sampler.probabilities();
    return Vector::Constant(sampler.components(), refresh_);
  }

 private:
  DualUpdatePolicy(Kind kind, double refresh) : kind_(kind), refresh_(refresh) {}

  Kind kind_;
  double refresh_;
};

}  // namespace vracc
