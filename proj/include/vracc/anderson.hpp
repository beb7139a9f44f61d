#pragma once

#include <cmath>
#include <deque>
#include <optional>
#include <stdexcept>
#include <utility>

#include "vracc/types.hpp"

namespace vracc {

/// Sum-to-one weights minimizing ||R a||^2 + tikhonov ||a||^2 over the stored
/// residual columns, via the Lagrange system on the normal equations. The
/// stationarity system ((R^T R + xi I) a = -mu 1, 1^T a = 1) is solved as one
/// bordered KKT matrix with a rank-revealing decomposition, which reduces to
/// w = (R^T R + xi I)^{-1} 1, a = w / (1^T w) whenever that inverse exists
/// and stays exact when the Gram matrix is singular (more stored columns
/// than dimensions, or tikhonov = 0 at a fixed point). Returns nothing when
/// the solve degenerates; the caller may retry with tikhonov > 0.
inline std::optional<Vector> extrapolation_weights(const Matrix& residuals, double tikhonov) {
  const Eigen::Index cols = residuals.cols();
  if (cols == 0) throw std::invalid_argument("extrapolation_weights: no residual columns");
  if (cols == 1) return Vector::Ones(1);
  Matrix kkt = Matrix::Zero(cols + 1, cols + 1);
  kkt.topLeftCorner(cols, cols) = residuals.transpose() * residuals;
  kkt.topLeftCorner(cols, cols).diagonal().array() += tikhonov;
  kkt.topRightCorner(cols, 1).setOnes();
  kkt.bottomLeftCorner(1, cols).setOnes();
  Vector rhs = Vector::Zero(cols + 1);
  rhs[cols] = 1.0;
  Vector solution = kkt.completeOrthogonalDecomposition().solve(rhs);
  Vector weights = solution.head(cols);
  const double total = weights.sum();
  if (!weights.allFinite() || std::abs(total - 1.0) > 1e-8) return std::nullopt;
  return Vector(weights / total);
}

/// Extrapolation over a fixed-point map T: stores recent (input, output)
/// pairs, combines the outputs with residual-fitted sum-to-one weights. The
/// Tikhonov term defaults to a scale-free multiple of trace(R^T R); set both
/// knobs to zero for the exact least-squares solve.
class AndersonExtrapolator {
 public:
  struct Options {
    int memory = 5;
    double tikhonov_relative = 1e-10;
    double tikhonov_absolute = 0.0;
  };

  explicit AndersonExtrapolator(Options options) : options_(options) {
    if (options_.memory < 1) throw std::invalid_argument("anderson: memory must be >= 1");
    if (options_.tikhonov_relative < 0.0 || options_.tikhonov_absolute < 0.0)
      throw std::invalid_argument("anderson: negative regularization");
  }

  /// Feeds the fresh pair (input, T(input)) and returns the combined iterate.
  /// A single stored pair short-circuits to plain fixed-point iteration.
  std::optional<Vector> propose(const Vector& input, const Vector& output) {
    pairs_.emplace_back(input, output);
    while (static_cast<int>(pairs_.size()) > options_.memory + 1) pairs_.pop_front();

    const auto cols = static_cast<Eigen::Index>(pairs_.size());
    if (cols == 1) return output;

    Matrix residuals(input.size(), cols);
    for (Eigen::Index j = 0; j < cols; ++j) {
      const auto& [in, out] = pairs_[static_cast<std::size_t>(j)];
      residuals.col(j) = in - out;
    }
    const double trace = residuals.colwise().squaredNorm().sum();
    const double tikhonov = options_.tikhonov_absolute + options_.tikhonov_relative * trace;
    auto weights = extrapolation_weights(residuals, tikhonov);
    if (!weights) return std::nullopt;

    Vector combined = Vector::Zero(input.size());
    for (Eigen::Index j = 0; j < cols; ++j)
      combined += (*weights)[j] * pairs_[static_cast<std::size_t>(j)].second;
    return combined;
  }

  void reset() { pairs_.clear(); }
  int stored_pairs() const { return static_cast<int>(pairs_.size()); }
  const Options& options() const { return options_; }

 private:
  Options options_;
  std::deque<std::pair<Vector, Vector>> pairs_;  // (input, T(input)), oldest first
};

}  // namespace vracc
