#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "oracles.hpp"
#include "vracc/driver.hpp"
#include "vracc/logistic.hpp"

using namespace vracc;

namespace {

struct SmallLogistic {
  FiniteSumProblem problem;
  SamplerConfig sampler;
  double step;
};

SmallLogistic small_logistic(int samples, int dimension, std::uint64_t data_seed) {
  auto synth = make_synthetic_classification(samples, dimension, data_seed);
  FiniteSumProblem problem =
      make_logistic(synth.features, synth.labels, 0.01, LogisticFormulation::SmoothOnly);
  SamplerConfig sampler = SamplerConfig::uniform(samples);
  const double step = 0.9 * max_step_size(problem.lipschitz(), sampler);
  return {std::move(problem), std::move(sampler), step};
}

}  // namespace

TEST_CASE("safeguard check") {
  SplitRng rng(3);
  auto instance = oracles::random_quadratic(3, 2, rng);
  auto policy = DualUpdatePolicy::loopless_svrg(0.5);
  auto sampler = SamplerConfig::uniform(3);
  const double step = 0.8 * max_step_size(instance.problem.lipschitz(), sampler);
  StateMetric metric(step, policy.effective_refresh(sampler), instance.problem.lipschitz());
  SafeguardConfig cfg;

  SECTION("a candidate at the solution equal to the iterate is always accepted") {
    auto z_star = PrimalDualState::lift(instance.problem, instance.solution);
    auto decision = safeguard_check(instance.problem, metric, cfg, z_star, z_star, 1.0, 0,
                                    merit(instance.problem, metric, z_star));
    CHECK(decision.accept);
    CHECK(decision.candidate_merit <= 1e-12);
    CHECK(decision.step_norm == 0.0);
  }
  SECTION("merit above the loosest threshold is rejected") {
    auto z = oracles::random_state(3, 2, rng);
    const double v_plus = merit(instance.problem, metric, z);
    SafeguardConfig tight = cfg;
    tight.merit_factor = 0.5 * v_plus;  // C V0 below V(z+) at k_aa = 0 with V0 = 1
    auto decision = safeguard_check(instance.problem, metric, tight, z, z, 1.0, 0, v_plus);
    CHECK_FALSE(decision.accept);
    CHECK(decision.merit_threshold == Catch::Approx(0.5 * v_plus).margin(1e-18));
  }
  SECTION("threshold decay matches a higher-precision evaluation") {
    auto z_star = PrimalDualState::lift(instance.problem, instance.solution);
    auto decision = safeguard_check(instance.problem, metric, cfg, z_star, z_star, 1.0, 9,
                                    merit(instance.problem, metric, z_star));
    const long double reference =
        1e6L * std::pow(10.0L, -(1.0L + 1e-6L));  // C (1 + k_aa)^-(1+delta) with V0 = 1
    CHECK(decision.merit_threshold ==
          Catch::Approx(static_cast<double>(reference)).epsilon(1e-12));
  }
  SECTION("distance condition binds independently") {
    auto z = oracles::random_state(3, 2, rng, 0.1);
    auto far = oracles::random_state(3, 2, rng, 50.0);
    SafeguardConfig loose_merit = cfg;
    loose_merit.merit_factor = 1e18;
    loose_merit.distance_factor = 1e-12;
    auto decision = safeguard_check(instance.problem, metric, loose_merit, far, z, 1.0, 0,
                                    merit(instance.problem, metric, z));
    CHECK_FALSE(decision.accept);
    CHECK(decision.step_norm > decision.step_threshold);
  }
}

TEST_CASE("hybrid runs") {
  auto setup = small_logistic(20, 6, 77);
  auto policy = DualUpdatePolicy::loopless_svrg(0.05);

  SECTION("no accelerator reproduces the standalone basic method bitwise") {
    SafeguardConfig cfg;
    cfg.max_iterations = 200;
    cfg.burst_length = 20;
    RunTrace trace = run_hybrid(setup.problem, setup.step, setup.sampler, policy, cfg, 42);

    // standalone run with the same seed and bookkeeping
    SplitRng rng(42);
    auto z = PrimalDualState::lift(setup.problem, Vector::Zero(setup.problem.dimension()));
    DualMeanTracker tracker(z);
    std::vector<double> objectives;
    for (int k = 0; k < 200; ++k) {
      basic_step_random(setup.problem, z, setup.step, setup.sampler, policy, rng, &tracker);
      objectives.push_back(setup.problem.objective(z.x));
    }
    REQUIRE(trace.events.size() == 201);
    for (int k = 0; k < 200; ++k) {
      const auto& event = trace.events[static_cast<std::size_t>(k) + 1];
      REQUIRE(event.kind == TraceEventKind::Basic);
      REQUIRE(event.objective == objectives[static_cast<std::size_t>(k)]);
    }
  }

  SECTION("an accelerator that lands on the solution is accepted immediately") {
    // quadratics have a reachable exact solution for the quasi-Newton path
    SplitRng rng(5);
    auto quad = oracles::random_quadratic(6, 3, rng);
    auto sampler = SamplerConfig::uniform(6);
    const double step = 0.5 * max_step_size(quad.problem.lipschitz(), sampler);
    SafeguardConfig cfg;
    cfg.accelerator = AcceleratorKind::Lbfgs;
    cfg.max_iterations = 5000;
    cfg.burst_length = 6;
    cfg.merit_tolerance = 1e-10;
    RunTrace trace = run_hybrid(quad.problem, step, sampler, DualUpdatePolicy::saga(), cfg, 0);
    CHECK(trace.reached_tolerance);
    CHECK(trace.accepts > 0);
  }

  SECTION("counter discipline and monotone costs") {
    SafeguardConfig cfg;
    cfg.accelerator = AcceleratorKind::Anderson;
    cfg.memory = 3;
    cfg.burst_length = 7;
    cfg.max_iterations = 150;
    cfg.merit_tolerance = 0.0;
    RunTrace trace =
        run_hybrid(setup.problem, setup.step, setup.sampler, policy, cfg, 11);

    long basic_since_candidate = 0;
    bool saw_candidate = false;
    double last_passes = -1.0, last_flops = -1.0;
    long last_iterate_k = -1;
    for (std::size_t e = 0; e < trace.events.size(); ++e) {
      const auto& event = trace.events[e];
      REQUIRE(event.passes >= last_passes);
      REQUIRE(event.flops >= last_flops);
      last_passes = event.passes;
      last_flops = event.flops;
      REQUIRE(event.k >= last_iterate_k);
      if (event.kind != TraceEventKind::Reject) {
        REQUIRE(event.k == last_iterate_k + 1);  // strictly increasing across iterate rows
        last_iterate_k = event.k;
      }
      switch (event.kind) {
        case TraceEventKind::Init:
          break;
        case TraceEventKind::Basic:
          ++basic_since_candidate;
          break;
        case TraceEventKind::Accept:
        case TraceEventKind::Reject:
          if (saw_candidate && basic_since_candidate != 0)
            REQUIRE(basic_since_candidate == cfg.burst_length);
          saw_candidate = true;
          basic_since_candidate = 0;
          break;
      }
    }
    REQUIRE(saw_candidate);

    // cumulative flops equal the closed-form sum over event classes
    const long n = setup.problem.components();
    const long d = setup.problem.dimension();
    double expected = CostModel::gd_step(n, d);
    for (const auto& event : trace.events) {
      switch (event.kind) {
        case TraceEventKind::Init:
          break;
        case TraceEventKind::Basic:
          expected += CostModel::basic_step(n, d);
          break;
        case TraceEventKind::Accept:
        case TraceEventKind::Reject:
          expected += CostModel::anderson_candidate(n, d, cfg.memory);
          break;
      }
      REQUIRE(event.flops == Catch::Approx(expected).epsilon(1e-15));
    }
  }

  SECTION("safeguard values recorded on accept events satisfy both inequalities") {
    SafeguardConfig cfg;
    cfg.accelerator = AcceleratorKind::Lbfgs;
    cfg.burst_length = 20;
    cfg.max_iterations = 400;
    cfg.merit_tolerance = 1e-11;
    RunTrace trace =
        run_hybrid(setup.problem, setup.step, setup.sampler, policy, cfg, 3);
    long accepts = 0;
    for (const auto& event : trace.events) {
      if (event.kind != TraceEventKind::Accept) continue;
      ++accepts;
      REQUIRE(event.candidate_merit <= event.merit_threshold);
      REQUIRE(event.step_norm <= event.step_threshold);
      // the accepted-merit bound decays with the acceptance counter
      REQUIRE(event.candidate_merit <=
              cfg.merit_factor * trace.initial_merit *
                  std::pow(static_cast<double>(event.accepts), -(1.0 + cfg.decay)) + 1e-18);
    }
    REQUIRE(accepts > 0);
  }

  SECTION("candidate log reproduces every decision offline") {
    SafeguardConfig cfg;
    cfg.accelerator = AcceleratorKind::Anderson;
    cfg.burst_length = 10;
    cfg.max_iterations = 250;
    cfg.merit_tolerance = 1e-11;
    RunOptions options;
    options.record_candidates = true;
    RunTrace trace =
        run_hybrid(setup.problem, setup.step, setup.sampler, policy, cfg, 8, options);
    REQUIRE_FALSE(trace.candidate_log.empty());
    StateMetric metric(setup.step, policy.effective_refresh(setup.sampler),
                       setup.problem.lipschitz());
    for (const auto& record : trace.candidate_log) {
      auto again = safeguard_check(setup.problem, metric, cfg, record.candidate, record.current,
                                   trace.initial_merit, record.accepted_before,
                                   record.current_merit);
      REQUIRE(again.accept == record.decision.accept);
      REQUIRE(again.candidate_merit == record.decision.candidate_merit);
      REQUIRE(again.step_norm == record.decision.step_norm);
    }
  }

  SECTION("step outside the admissible range is rejected") {
    SafeguardConfig cfg;
    const double bound = max_step_size(setup.problem.lipschitz(), setup.sampler);
    CHECK_THROWS_AS(
        run_hybrid(setup.problem, 1.1 * bound, setup.sampler, policy, cfg, 0),
        std::invalid_argument);
    CHECK_THROWS_AS(run_hybrid(setup.problem, 0.0, setup.sampler, policy, cfg, 0),
                    std::invalid_argument);
  }

  SECTION("accelerators demand a smooth objective") {
    auto synth = make_synthetic_classification(10, 4, 5);
    auto split = make_logistic(synth.features, synth.labels, 0.01, LogisticFormulation::ProxSplit);
    auto sampler = SamplerConfig::uniform(10);
    SafeguardConfig cfg;
    cfg.accelerator = AcceleratorKind::Lbfgs;
    CHECK_THROWS_AS(run_hybrid(split, 0.5 * max_step_size(split.lipschitz(), sampler), sampler,
                               DualUpdatePolicy::saga(), cfg, 0),
                    std::invalid_argument);
  }
}

TEST_CASE("proximal-gradient baseline") {
  auto setup = small_logistic(12, 5, 9);
  RunTrace trace = run_proximal_gradient(setup.problem, setup.step, 10);
  REQUIRE(trace.events.size() == 11);
  for (std::size_t e = 1; e < trace.events.size(); ++e) {
    REQUIRE(trace.events[e].kind == TraceEventKind::Basic);
    REQUIRE(trace.events[e].objective < trace.events[e - 1].objective);
    REQUIRE(trace.events[e].passes == Catch::Approx(static_cast<double>(e)).margin(1e-12));
    REQUIRE(trace.events[e].flops ==
            Catch::Approx(static_cast<double>(e) *
                          CostModel::gd_step(setup.problem.components(), setup.problem.dimension()))
                .margin(1e-6));
  }
}
