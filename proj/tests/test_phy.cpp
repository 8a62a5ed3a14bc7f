#include <doctest.h>

#include <cmath>
#include <limits>
#include <stdexcept>

#include "lpwan/phy.hpp"

using namespace lpwan;

TEST_CASE("spreading factor range") {
  CHECK_NOTHROW(SpreadingFactor{7});
  CHECK_NOTHROW(SpreadingFactor{12});
  CHECK_THROWS_AS(SpreadingFactor{6}, std::invalid_argument);
  CHECK_THROWS_AS(SpreadingFactor{13}, std::invalid_argument);
  CHECK(SpreadingFactor{9}.offset() == 2);
}

TEST_CASE("data rate") {
  PhyParams phy;
  CHECK(data_rate(SpreadingFactor{7}, phy) == doctest::Approx(5468.75).epsilon(1e-15));
  CHECK(data_rate(SpreadingFactor{12}, phy) == doctest::Approx(292.96875).epsilon(1e-15));
  phy.code_rate = 1.0;
  CHECK(data_rate(SpreadingFactor{8}, phy) == doctest::Approx(3906.25).epsilon(1e-15));
}

TEST_CASE("time on air") {
  const PhyParams phy;
  CHECK(time_on_air(100, SpreadingFactor{7}, phy) == doctest::Approx(800.0 / 5468.75).epsilon(1e-14));
  CHECK(time_on_air(100, SpreadingFactor{10}, phy) == doctest::Approx(0.8192).epsilon(1e-14));
  CHECK(time_on_air(20, SpreadingFactor{7}, phy) == doctest::Approx(0.029257142857).epsilon(1e-10));
  for (int c = 7; c < 12; ++c) {
    CHECK(time_on_air(50, SpreadingFactor{c}, phy) < time_on_air(50, SpreadingFactor{c + 1}, phy));
  }
  CHECK_THROWS_WITH_AS(time_on_air(0, SpreadingFactor{7}, phy), "empty payload", std::invalid_argument);
}

TEST_CASE("transmit energy") {
  const PhyParams phy;
  Action a{14.0, SpreadingFactor{7}, 0, 1};
  // (2 * 25.119 mW + 10 mW) * airtime
  CHECK(tx_energy(a, 100, phy) == doctest::Approx(0.008811919159616599).epsilon(1e-12));
  a.sf = SpreadingFactor{10};
  CHECK(tx_energy(a, 100, phy) == doctest::Approx(0.04934674729385295).epsilon(1e-12));
  Action twice = a;
  twice.replicas = 2;
  CHECK(tx_energy(twice, 100, phy) == 2.0 * tx_energy(a, 100, phy));

  Action low{8.0, SpreadingFactor{7}, 0, 1};
  Action high{14.0, SpreadingFactor{7}, 0, 1};
  CHECK(tx_energy(low, 20, phy) < tx_energy(high, 20, phy));
}

TEST_CASE("noise power") {
  PhyParams phy;
  phy.noise_figure_db = 0.0;
  // 10^-17.4 mW/Hz * 125 kHz
  CHECK(noise_power(phy) == doctest::Approx(4.976339631918732e-16).epsilon(1e-12));
  CHECK(watts_to_dbm(noise_power(phy)) == doctest::Approx(-123.0309).epsilon(1e-6));
  const double narrow = noise_power(phy);
  phy.bandwidth_hz = 250e3;
  CHECK(noise_power(phy) == doctest::Approx(2.0 * narrow).epsilon(1e-15));
  phy.noise_psd_dbm_hz = -std::numeric_limits<double>::infinity();
  CHECK(noise_power(phy) == 0.0);

  PhyParams with_nf;
  with_nf.noise_figure_db = 6.0;
  CHECK(noise_power(with_nf) == doctest::Approx(1.9811164905763887e-15).epsilon(1e-12));
}

TEST_CASE("action space") {
  const std::vector<double> five{2, 5, 8, 11, 14};
  const std::vector<SpreadingFactor> all{SpreadingFactor{7},  SpreadingFactor{8},  SpreadingFactor{9},
                                         SpreadingFactor{10}, SpreadingFactor{11}, SpreadingFactor{12}};
  CHECK(action_space(five, all, 3).size() == 90);

  const std::vector<double> one{14};
  const std::vector<SpreadingFactor> two{SpreadingFactor{7}, SpreadingFactor{10}};
  const auto pair = action_space(one, two, 1);
  REQUIRE(pair.size() == 2);
  CHECK(pair[0].sf == SpreadingFactor{7});
  CHECK(pair[1].sf == SpreadingFactor{10});

  const std::vector<SpreadingFactor> single{SpreadingFactor{9}};
  CHECK(action_space(one, single, 1).size() == 1);

  const std::vector<double> powers{8, 14};
  const auto ordered = action_space(powers, two, 2);
  REQUIRE(ordered.size() == 8);
  CHECK(ordered[0] == Action{8, SpreadingFactor{7}, 0, 1});
  CHECK(ordered[1] == Action{8, SpreadingFactor{7}, 1, 1});
  CHECK(ordered[2] == Action{8, SpreadingFactor{10}, 0, 1});
  CHECK(ordered[4] == Action{14, SpreadingFactor{7}, 0, 1});

  const std::vector<double> none;
  CHECK_THROWS_AS(action_space(none, two, 1), std::invalid_argument);
  CHECK_THROWS_AS(action_space(one, two, 0), std::invalid_argument);
}

TEST_CASE("phy parameter validation") {
  PhyParams phy;
  CHECK_NOTHROW(validate(phy));
  phy.snr_thresholds_db[3] = -5.0;
  CHECK_THROWS_AS(validate(phy), std::invalid_argument);
  phy = PhyParams{};
  phy.pa_inverse_efficiency = 0.5;
  CHECK_THROWS_AS(validate(phy), std::invalid_argument);
  phy = PhyParams{};
  phy.bandwidth_hz = 0.0;
  CHECK_THROWS_AS(validate(phy), std::invalid_argument);
}
