#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "oracles.hpp"
#include "vracc/metric.hpp"
#include "vracc/rng.hpp"
#include "vracc/sampler.hpp"

using namespace vracc;

namespace {

// Explicit (N+1)d x (N+1)d block-diagonal weight matrix; quadratic-form
// reference for the metric norm.
double block_matrix_norm(const StateMetric& metric, const PrimalDualState& z) {
  const Eigen::Index d = z.x.size();
  const Eigen::Index n = z.y.cols();
  Matrix big = Matrix::Zero((n + 1) * d, (n + 1) * d);
  big.topLeftCorner(d, d).setIdentity();
  Vector flat((n + 1) * d);
  flat.head(d) = z.x;
  for (Eigen::Index i = 0; i < n; ++i) {
    big.block((i + 1) * d, (i + 1) * d, d, d) =
        metric.dual_weights()[i] * Matrix::Identity(d, d);
    flat.segment((i + 1) * d, d) = z.y.col(i);
  }
  return std::sqrt(flat.dot(big * flat));
}

}  // namespace

TEST_CASE("metric norm") {
  SECTION("zero state") {
    StateMetric metric(0.1, Vector::Constant(2, 0.5), Vector::Constant(2, 1.0));
    CHECK(metric.norm(PrimalDualState::zero(3, 2)) == 0.0);
  }
  SECTION("unit weights reduce to the Euclidean norm of the concatenation") {
    // step / (N rho_i L_i) = 1 with step = 2, N = 2, rho = 1, L = 1
    StateMetric metric(2.0, Vector::Ones(2), Vector::Ones(2));
    CHECK(metric.dual_weights().isApproxToConstant(1.0, 1e-15));
    SplitRng rng(3);
    auto z = oracles::random_state(2, 4, rng);
    const double expected = std::sqrt(z.x.squaredNorm() + z.y.squaredNorm());
    CHECK(metric.norm(z) == Catch::Approx(expected).margin(1e-14));
  }
  SECTION("hand-computed weights, cross-checked against the block matrix") {
    Vector rho = Vector::Ones(2);
    Vector lipschitz(2);
    lipschitz << 1.0, 2.0;
    StateMetric metric(0.1, rho, lipschitz);
    CHECK(metric.dual_weights()[0] == Catch::Approx(0.05).margin(1e-16));
    CHECK(metric.dual_weights()[1] == Catch::Approx(0.025).margin(1e-16));
    PrimalDualState z = PrimalDualState::zero(1, 2);
    z.x[0] = 1.0;
    z.y(0, 0) = 1.0;
    z.y(0, 1) = 1.0;
    CHECK(metric.norm(z) == Catch::Approx(std::sqrt(1.0 + 0.05 + 0.025)).margin(1e-14));
    CHECK(metric.norm(z) == Catch::Approx(block_matrix_norm(metric, z)).margin(1e-14));
  }
  SECTION("shape mismatch is rejected") {
    StateMetric metric(0.1, Vector::Ones(3), Vector::Ones(3));
    CHECK_THROWS_AS(metric.norm(PrimalDualState::zero(2, 2)), std::invalid_argument);
  }
  SECTION("triangle inequality and absolute homogeneity on random triples") {
    SplitRng rng(17);
    StateMetric metric(0.3, Vector::Constant(3, 0.4), Vector::Constant(3, 2.0));
    for (int rep = 0; rep < 50; ++rep) {
      auto a = oracles::random_state(3, 2, rng);
      auto b = oracles::random_state(3, 2, rng);
      PrimalDualState sum{a.x + b.x, a.y + b.y};
      REQUIRE(metric.norm(sum) <= metric.norm(a) + metric.norm(b) + 1e-12);
      const double c = 2.0 * rng.next_gaussian();
      PrimalDualState scaled{c * a.x, c * a.y};
      REQUIRE(metric.norm(scaled) == Catch::Approx(std::abs(c) * metric.norm(a)).margin(1e-12));
    }
  }
}

TEST_CASE("residual") {
  SplitRng rng(23);
  auto instance = oracles::random_quadratic(3, 2, rng);
  SECTION("vanishes exactly at lifted solutions for any step") {
    auto z_star = PrimalDualState::lift(instance.problem, instance.solution);
    for (double step : {1e-3, 0.1, 1.0, 10.0}) {
      auto r = residual(instance.problem, step, z_star);
      REQUIRE(r.x.norm() <= 1e-12);
      REQUIRE(r.y.norm() <= 1e-12);
    }
  }
  SECTION("primal block reduces to the scaled dual mean when the prox is absent") {
    auto z = oracles::random_state(3, 2, rng);
    const double step = 0.4;
    auto r = residual(instance.problem, step, z);
    Vector expected = (step / 3.0) * z.y.rowwise().sum();
    CHECK((r.x - expected).norm() <= 1e-14);
  }
  SECTION("matches the straight-line re-evaluation on random states") {
    auto ridge = oracles::random_quadratic(4, 3, rng, 0.2);
    for (int rep = 0; rep < 30; ++rep) {
      auto z = oracles::random_state(4, 3, rng);
      const double step = 0.05 + rng.next_double();
      auto got = residual(ridge.problem, step, z);
      auto want = oracles::residual_reference(ridge.problem, step, z);
      REQUIRE((got.x - want.x).norm() <= 1e-12);
      REQUIRE((got.y - want.y).norm() <= 1e-12);
    }
  }
  SECTION("rejects a nonpositive step") {
    auto z = oracles::random_state(3, 2, rng);
    CHECK_THROWS_AS(residual(instance.problem, 0.0, z), std::invalid_argument);
  }
}

TEST_CASE("merit") {
  SplitRng rng(29);
  auto instance = oracles::random_quadratic(3, 2, rng);
  StateMetric metric(0.15, Vector::Constant(3, 1.0 / 3.0), instance.problem.lipschitz());
  SECTION("zero exactly at lifted solutions") {
    auto z_star = PrimalDualState::lift(instance.problem, instance.solution);
    CHECK(merit(instance.problem, metric, z_star) <= 1e-12);
  }
  SECTION("consistent with norm-of-residual composition") {
    for (int rep = 0; rep < 20; ++rep) {
      auto z = oracles::random_state(3, 2, rng);
      const double direct = merit(instance.problem, metric, z);
      const double composed = metric.norm(residual(instance.problem, metric.step(), z));
      REQUIRE(direct == composed);
    }
  }
  SECTION("with unit weights equals the Euclidean residual norm") {
    StateMetric unit(2.0, Vector::Ones(2), Vector::Ones(2));
    Vector scales(2);
    scales << 1.0, 1.0;
    auto value = [scales](int i, const Vector& x) { return 0.5 * scales[i] * x.squaredNorm(); };
    auto gradient = [scales](int i, const Vector& x, Vector& out) { out = scales[i] * x; };
    FiniteSumProblem problem(2, 3, value, gradient, scales);
    auto z = oracles::random_state(2, 3, rng);
    auto r = residual(problem, 2.0, z);
    const double euclid = std::sqrt(r.x.squaredNorm() + r.y.squaredNorm());
    CHECK(merit(problem, unit, z) == Catch::Approx(euclid).margin(1e-13));
  }
  SECTION("merit below tolerance implies a vanishing residual") {
    // positive definiteness: the Euclidean residual norm is bounded by
    // merit / sqrt(min weight)
    const double min_weight = std::min(1.0, metric.dual_weights().minCoeff());
    for (int rep = 0; rep < 20; ++rep) {
      auto z = oracles::random_state(3, 2, rng);
      auto r = residual(instance.problem, metric.step(), z);
      const double euclid = std::sqrt(r.x.squaredNorm() + r.y.squaredNorm());
      REQUIRE(euclid <= merit(instance.problem, metric, z) / std::sqrt(min_weight) + 1e-12);
    }
  }
}

TEST_CASE("residual change is bounded by the closed-form modulus") {
  SplitRng rng(37);
  for (int rep = 0; rep < 200; ++rep) {
    const int n = 2 + static_cast<int>(rng.next_double() * 3);
    const int d = 1 + static_cast<int>(rng.next_double() * 3);
    auto instance = oracles::random_quadratic(n, d, rng, rep % 3 == 0 ? 0.4 : 0.0);
    const double step = 0.05 + 2.0 * rng.next_double();
    const double bound = std::max(6.0 + 2.0 * instance.problem.lipschitz().squaredNorm(),
                                  2.0 + 4.0 * step * step / n);
    auto za = oracles::random_state(n, d, rng, 2.0);
    auto zb = oracles::random_state(n, d, rng, 2.0);
    auto ra = residual(instance.problem, step, za);
    auto rb = residual(instance.problem, step, zb);
    const double lhs = (ra.x - rb.x).squaredNorm() + (ra.y - rb.y).squaredNorm();
    const double rhs = (za.x - zb.x).squaredNorm() + (za.y - zb.y).squaredNorm();
    REQUIRE(lhs <= bound * rhs);
  }
}
