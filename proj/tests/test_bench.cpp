#include <doctest.h>

#include <stdexcept>

#include "lpwan/bench.hpp"

using namespace lpwan;

TEST_CASE("single arm has no regret") {
  BenchSpec spec;
  spec.arm_means = {0.4};
  spec.rounds = 500;
  spec.seeds = 3;
  for (const auto& s : bandit_bench(spec)) {
    for (double r : s.mean_regret()) CHECK(r == 0.0);
    for (double o : s.optimal_rate()) CHECK(o == 1.0);
  }
}

TEST_CASE("bench bookkeeping") {
  BenchSpec spec;
  spec.rounds = 300;
  spec.seeds = 4;
  const auto series = bandit_bench(spec);
  REQUIRE(series.size() == 3);
  for (const auto& s : series) {
    REQUIRE(s.runs.size() == 4);
    for (const auto& run : s.runs) {
      CHECK(run.regret.size() == 300);
      double expected = 0.0;
      for (std::size_t t = 0; t < 300; ++t) {
        expected += run.optimal[t] ? 0.0 : 0.4;
        CHECK(run.regret[t] == doctest::Approx(expected));
        CHECK(run.reward[t] <= static_cast<double>(t + 1));
      }
    }
  }
  // identical seeds reproduce
  CHECK(bench_run(spec, {Algorithm::Uucb1}, 5).regret == bench_run(spec, {Algorithm::Uucb1}, 5).regret);
}

TEST_CASE("UEXP3 regret falls below RandSel by round 1000") {
  BenchSpec spec;
  spec.rounds = 1000;
  spec.seeds = 50;
  spec.algorithms = {{Algorithm::Uexp3}, {Algorithm::RandSel}};
  const auto series = bandit_bench(spec);
  CHECK(series[0].mean_regret().back() < series[1].mean_regret().back());
}

TEST_CASE("bench validation") {
  BenchSpec spec;
  spec.arm_means = {};
  CHECK_THROWS_AS(validate(spec), std::invalid_argument);
  spec.arm_means = {1.2};
  CHECK_THROWS_AS(validate(spec), std::invalid_argument);
  spec.arm_means = {0.5};
  spec.algorithms = {{Algorithm::EqLoad}};
  CHECK_THROWS_AS(validate(spec), std::invalid_argument);
  CHECK(range_mean({1.0, 2.0, 3.0}, 1, 2) == doctest::Approx(2.5));
}
