#pragma once

#include <cmath>
#include <memory>
#include <stdexcept>
#include <vector>

#include "vracc/problem.hpp"
#include "vracc/rng.hpp"
#include "vracc/types.hpp"

namespace vracc {

inline double log1p_exp(double t) {
  return t > 0.0 ? t + std::log1p(std::exp(-t)) : std::log1p(std::exp(t));
}

inline double sigmoid(double t) {
  if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
  const double e = std::exp(t);
  return e / (1.0 + e);
}

/// How the ridge penalty of the classification objective is carried.
enum class LogisticFormulation {
  SmoothOnly,  // penalty folded into every component, g = 0
  ProxSplit,   // components purely logistic, penalty handled by the prox term
};

/// Binary classification objective over samples (theta_i, u_i), u_i in {0,1},
/// with variable x = (w, b) and penalty (reg/2)||w||^2; the intercept b is
/// never penalized. The per-sample loss is scaled by N so that the mean of
/// the components reproduces the plain sum-form objective.
inline FiniteSumProblem make_logistic(const Matrix& features, const std::vector<int>& labels,
                                      double regularization, LogisticFormulation form) {
  const int n = static_cast<int>(features.rows());
  const int d = static_cast<int>(features.cols()) + 1;  // w block + intercept
  if (n < 1) throw std::invalid_argument("logistic: empty sample set");
  if (static_cast<int>(labels.size()) != n)
    throw std::invalid_argument("logistic: one label per sample required");
  if (!(regularization > 0.0)) throw std::invalid_argument("logistic: regularization must be positive");
  for (int u : labels)
    if (u != 0 && u != 1) throw std::invalid_argument("logistic: labels must be 0/1");

  struct Data {
    Matrix theta;  // N x (d-1)
    std::vector<int> u;
    double reg;
    bool fold_reg;
  };
  auto data = std::make_shared<Data>(Data{features, labels, regularization,
                                          form == LogisticFormulation::SmoothOnly});
  const double scale = static_cast<double>(n);

  auto margin = [data, d](int i, const Vector& x) {
    return data->theta.row(i).dot(x.head(d - 1)) + x[d - 1];
  };

  auto value = [data, margin, scale, d](int i, const Vector& x) {
    const double t = margin(i, x);
    double v = scale * (log1p_exp(t) - data->u[i] * t);
    if (data->fold_reg) v += 0.5 * data->reg * x.head(d - 1).squaredNorm();
    return v;
  };

  auto gradient = [data, margin, scale, d](int i, const Vector& x, Vector& out) {
    const double r = scale * (sigmoid(margin(i, x)) - data->u[i]);
    out.head(d - 1) = r * data->theta.row(i).transpose();
    out[d - 1] = r;
    if (data->fold_reg) out.head(d - 1) += data->reg * x.head(d - 1);
  };

  auto value_gradient = [data, margin, scale, d](int i, const Vector& x, Vector& out) {
    const double t = margin(i, x);
    const double r = scale * (sigmoid(t) - data->u[i]);
    out.head(d - 1) = r * data->theta.row(i).transpose();
    out[d - 1] = r;
    double v = scale * (log1p_exp(t) - data->u[i] * t);
    if (data->fold_reg) {
      out.head(d - 1) += data->reg * x.head(d - 1);
      v += 0.5 * data->reg * x.head(d - 1).squaredNorm();
    }
    return v;
  };

  // Hessian of the logistic loss is bounded by (1/4)|(theta_i,1)|^2 per sample.
  Vector lipschitz(n);
  for (int i = 0; i < n; ++i) {
    const double row_sq = features.row(i).squaredNorm() + 1.0;
    lipschitz[i] = 0.25 * scale * row_sq + (form == LogisticFormulation::SmoothOnly ? regularization : 0.0);
  }

  ProxTerm prox = form == LogisticFormulation::SmoothOnly
                      ? ProxTerm::zero()
                      : ProxTerm::squared_l2(regularization, 0, d - 1);
  return FiniteSumProblem(n, d, value, gradient, std::move(lipschitz), std::move(prox),
                          value_gradient);
}

struct SyntheticClassification {
  Matrix features;
  std::vector<int> labels;
};

/// Well-conditioned random binary classification instance: rows are standard
/// normal scaled to unit expected norm, labels are drawn from a ground-truth
/// logistic model so the problem is not separable.
inline SyntheticClassification make_synthetic_classification(int samples, int dimension,
                                                             std::uint64_t seed) {
  if (samples < 2 || dimension < 2)
    throw std::invalid_argument("synthetic: need samples >= 2 and dimension >= 2");
  const int n_features = dimension - 1;
  SplitRng rng(seed);
  SyntheticClassification out;
  out.features.resize(samples, n_features);
  const double col_scale = 1.0 / std::sqrt(static_cast<double>(n_features));
  for (int i = 0; i < samples; ++i)
    for (int j = 0; j < n_features; ++j) out.features(i, j) = col_scale * rng.next_gaussian();

  Vector truth(n_features);
  for (int j = 0; j < n_features; ++j) truth[j] = 2.0 * rng.next_gaussian();
  const double intercept = 0.25 * rng.next_gaussian();

  out.labels.resize(samples);
  for (int i = 0; i < samples; ++i) {
    const double p = sigmoid(out.features.row(i).dot(truth) + intercept);
    out.labels[i] = rng.next_double() < p ? 1 : 0;
  }
  return out;
}

}  // namespace vracc
