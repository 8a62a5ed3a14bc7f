#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "lpwan/netsim.hpp"

using namespace lpwan;

namespace {

SimConfig small_config() {
  SimConfig cfg;
  cfg.n_devices = 200;
  cfg.t_rep_s = 100.0;
  cfg.payload_bytes = 20;
  cfg.sf_set = {7, 8};
  cfg.packets_per_device = 40;
  cfg.seed = 9;
  return cfg;
}

}  // namespace

TEST_CASE("algorithm names") {
  CHECK(parse_algorithm("uucb1").kind == Algorithm::Uucb1);
  CHECK(parse_algorithm("uexp3").kind == Algorithm::Uexp3);
  CHECK(parse_algorithm("randsel").kind == Algorithm::RandSel);
  CHECK(parse_algorithm("eqload").kind == Algorithm::EqLoad);
  const auto fixed = parse_algorithm("fixed:3");
  CHECK(fixed.kind == Algorithm::Fixed);
  CHECK(fixed.fixed_arm == 3);
  CHECK(to_string(fixed) == "fixed:3");
  CHECK_THROWS_AS(parse_algorithm("greedy"), std::invalid_argument);
  CHECK_THROWS_AS(parse_algorithm("fixed:"), std::invalid_argument);
}

TEST_CASE("deployment") {
  SimConfig cfg;
  Rng rng(1);
  const auto devices = deploy(cfg, rng);
  CHECK(devices.size() == 1000);
  for (const auto& d : devices) {
    CHECK(d.radius >= 1.0);
    CHECK(d.radius <= cfg.cell_radius_m);
  }

  // Kolmogorov-Smirnov against P(radius <= r) = (r / R)^2
  std::vector<double> u;
  for (const auto& d : devices) u.push_back(std::pow(d.radius / cfg.cell_radius_m, 2.0));
  std::sort(u.begin(), u.end());
  double ks = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double n = static_cast<double>(u.size());
    ks = std::max({ks, std::abs((i + 1) / n - u[i]), std::abs(u[i] - i / n)});
  }
  CHECK(ks < 1.63 / std::sqrt(1000.0));  // 1% critical value

  cfg.density_per_m2 = 1000.0 / (std::numbers::pi * cfg.cell_radius_m * cfg.cell_radius_m);
  double total = 0.0;
  for (int s = 0; s < 200; ++s) {
    Rng r(1000 + s);
    total += static_cast<double>(deploy(cfg, r).size());
  }
  CHECK(std::abs(total / 200.0 - 1000.0) < 3.0 * std::sqrt(1000.0 / 200.0));
}

TEST_CASE("capture decisions") {
  PhyParams phy;
  Rng rng(21);

  SUBCASE("noiseless and alone") {
    PhyParams quiet = phy;
    quiet.noise_psd_dbm_hz = -std::numeric_limits<double>::infinity();
    const auto rx = Receiver::from(quiet);
    for (int i = 0; i < 1000; ++i) {
      const auto tx = make_attempt(0, SpreadingFactor{7}, 0, 0.0, 0.1, 1e-15, rng);
      CHECK(evaluate_attempt(tx, {}, rx, rng));
    }
  }

  SUBCASE("noise-only law") {
    const auto rx = Receiver::from(phy);
    const double z = 1500.0;
    const double p_rx = std::pow(10.0, 1.4) * 1e-3 * std::pow(z, -4.0);
    const double noise = std::pow(10.0, -17.4) * 125e3 * 1e-3;
    const double expected = std::exp(-noise * std::pow(10.0, -0.6) / p_rx);
    const int n = 100000;
    int ok = 0;
    for (int i = 0; i < n; ++i) {
      const auto tx = make_attempt(0, SpreadingFactor{7}, 0, 0.0, 0.1, p_rx, rng);
      ok += evaluate_attempt(tx, {}, rx, rng) ? 1 : 0;
    }
    const double sigma = std::sqrt(expected * (1.0 - expected) / n);
    CHECK(std::abs(ok / double(n) - expected) < 3.0 * sigma);
  }

  SUBCASE("two exponentials") {
    PhyParams quiet = phy;
    quiet.noise_psd_dbm_hz = -std::numeric_limits<double>::infinity();
    const auto rx = Receiver::from(quiet);
    const double gamma = std::pow(10.0, 0.6);
    const double expected = 1.0 / (1.0 + gamma);
    CHECK(expected == doctest::Approx(0.2008).epsilon(1e-3));
    const int n = 100000;
    int ok = 0;
    for (int i = 0; i < n; ++i) {
      const auto tx = make_attempt(0, SpreadingFactor{9}, 0, 0.0, 0.1, 1e-12, rng);
      const std::vector<Attempt> other{make_attempt(1, SpreadingFactor{9}, 0, 0.05, 0.1, 1e-12, rng)};
      ok += evaluate_attempt(tx, other, rx, rng) ? 1 : 0;
    }
    const double sigma = std::sqrt(expected * (1.0 - expected) / n);
    CHECK(std::abs(ok / double(n) - expected) < 3.0 * sigma);
  }

  SUBCASE("external erasure") {
    PhyParams quiet = phy;
    quiet.noise_psd_dbm_hz = -std::numeric_limits<double>::infinity();
    ExternalInterference ext;
    ext.erasure_prob[{7, 0}] = 0.25;
    const auto rx = Receiver::from(quiet, ext);
    const int n = 40000;
    int ok = 0;
    for (int i = 0; i < n; ++i) {
      const auto tx = make_attempt(0, SpreadingFactor{7}, 0, 0.0, 0.1, 1e-12, rng);
      ok += evaluate_attempt(tx, {}, rx, rng) ? 1 : 0;
    }
    CHECK(std::abs(ok / double(n) - 0.75) < 3.0 * std::sqrt(0.75 * 0.25 / n));
    CHECK(ext.at(SpreadingFactor{8}, 0) == 0.0);
  }
}

TEST_CASE("overlap is symmetric and restricted to the same SF and channel") {
  Rng rng(2);
  const auto a = make_attempt(0, SpreadingFactor{7}, 0, 0.0, 1.0, 1.0, rng);
  const auto b = make_attempt(1, SpreadingFactor{7}, 0, 0.5, 1.0, 1.0, rng);
  const auto c = make_attempt(2, SpreadingFactor{7}, 0, 1.0, 1.0, 1.0, rng);
  const auto d = make_attempt(3, SpreadingFactor{8}, 0, 0.2, 1.0, 1.0, rng);
  const auto e = make_attempt(4, SpreadingFactor{7}, 1, 0.2, 1.0, 1.0, rng);
  CHECK(overlaps(a, b));
  CHECK(overlaps(b, a));
  CHECK_FALSE(overlaps(a, c));  // touching end points
  CHECK_FALSE(overlaps(c, a));
  CHECK_FALSE(overlaps(a, d));
  CHECK_FALSE(overlaps(a, e));
}

TEST_CASE("adversarial feedback") {
  Rng rng(4);
  for (int i = 0; i < 100; ++i) {
    CHECK(feedback(true, {0.0}, rng));
    CHECK_FALSE(feedback(false, {0.0}, rng));
    CHECK_FALSE(feedback(true, {1.0}, rng));
    CHECK(feedback(false, {1.0}, rng));
  }
  const int n = 100000;
  int acks_t = 0, acks_f = 0;
  for (int i = 0; i < n; ++i) {
    acks_t += feedback(true, {0.5}, rng) ? 1 : 0;
    acks_f += feedback(false, {0.5}, rng) ? 1 : 0;
  }
  const double sigma = std::sqrt(0.25 / n);
  CHECK(std::abs(acks_t / double(n) - 0.5) < 3.0 * sigma);
  CHECK(std::abs(acks_f / double(n) - 0.5) < 3.0 * sigma);
}

TEST_CASE("simulation basics") {
  SUBCASE("a lone noiseless device always succeeds") {
    SimConfig cfg = small_config();
    cfg.n_devices = 1;
    cfg.phy.noise_psd_dbm_hz = -std::numeric_limits<double>::infinity();
    const auto log = run(cfg);
    REQUIRE(log.size() == cfg.packets_per_device);
    for (double s : log.success_rate) CHECK(s == 1.0);
  }
  SUBCASE("zero horizon") {
    SimConfig cfg = small_config();
    cfg.packets_per_device = 0;
    CHECK(run(cfg).size() == 0);
  }
  SUBCASE("deterministic in the seed") {
    SimConfig cfg = small_config();
    CHECK(run(cfg) == run(cfg));
    SimConfig other = cfg;
    other.seed = 10;
    CHECK_FALSE(run(cfg) == run(other));
  }
  SUBCASE("every device records the full horizon") {
    SimConfig cfg = small_config();
    cfg.algorithm = {Algorithm::Uexp3};
    const auto res = simulate(cfg);
    for (const auto& d : res.devices) {
      CHECK(d.packets_sent == cfg.packets_per_device);
      CHECK(d.arm_history.size() >= cfg.packets_per_device);
    }
    for (std::size_t k = 0; k < res.log.size(); ++k) {
      CHECK(res.log.success_rate[k] >= 0.0);
      CHECK(res.log.success_rate[k] <= 1.0);
      CHECK(res.log.energy_j[k] > 0.0);
    }
  }
  SUBCASE("eqload pins each device to its allocated SF at top power") {
    SimConfig cfg = small_config();
    cfg.algorithm = {Algorithm::EqLoad};
    cfg.power_control = true;
    cfg.phy.num_channels = 2;
    const auto res = simulate(cfg);
    std::vector<double> radii;
    for (const auto& d : res.devices) radii.push_back(d.radius);
    const auto sfs = eqload_allocate(radii, cfg.phy, spreading_factors(cfg));
    for (const auto& d : res.devices) {
      for (auto arm : d.arm_history) {
        CHECK(res.arms[arm].sf == sfs[d.id]);
        CHECK(res.arms[arm].power_dbm == 14.0);
        CHECK(res.arms[arm].channel == static_cast<int>(d.id % 2));
      }
    }
  }
  SUBCASE("power control exposes the power set") {
    SimConfig cfg = small_config();
    CHECK(arms(cfg).size() == 2);
    cfg.power_control = true;
    CHECK(arms(cfg).size() == 4);
  }
}

TEST_CASE("aggregate") {
  MetricsLog a{{0.2, 0.4}, {1.0, 2.0}, "x", 1, {1}};
  MetricsLog b{{0.6, 0.0}, {3.0, 2.0}, "x", 1, {2}};
  const std::vector<MetricsLog> one{a};
  CHECK(aggregate(one) == a);
  const std::vector<MetricsLog> two{a, b};
  const auto m = aggregate(two);
  CHECK(m.success_rate[0] == doctest::Approx(0.4));
  CHECK(m.success_rate[1] == doctest::Approx(0.2));
  CHECK(m.energy_j[0] == doctest::Approx(2.0));
  CHECK(m.seed_count == 2);
  CHECK(m.seeds == std::vector<std::uint64_t>{1, 2});
  MetricsLog shorter{{0.1}, {1.0}, "x", 1, {3}};
  const std::vector<MetricsLog> bad{a, shorter};
  CHECK_THROWS_AS(aggregate(bad), std::invalid_argument);

  // 100 logs of Bernoulli(p) columns over 1000 devices
  Rng rng(17);
  const double p = 0.3;
  std::vector<MetricsLog> logs;
  for (int s = 0; s < 100; ++s) {
    MetricsLog l{{}, {}, "b", 1, {}};
    std::binomial_distribution<int> bin(1000, p);
    for (int k = 0; k < 1; ++k) {
      l.success_rate.push_back(bin(rng) / 1000.0);
      l.energy_j.push_back(0.0);
    }
    logs.push_back(l);
  }
  const auto mean = aggregate(logs);
  CHECK(std::abs(mean.success_rate[0] - p) < 3.0 * std::sqrt(p * (1 - p) / (100.0 * 1000.0)));
}

TEST_CASE("run_seeds matches sequential runs") {
  SimConfig cfg = small_config();
  const std::vector<std::uint64_t> seeds{3, 4, 5};
  const auto logs = run_seeds(cfg, seeds);
  for (std::size_t i = 0; i < seeds.size(); ++i) {
    SimConfig c = cfg;
    c.seed = seeds[i];
    CHECK(logs[i] == run(c));
  }
}

TEST_CASE("window mean") {
  const std::vector<double> v{1, 2, 3, 4, 5};
  CHECK(window_mean(v, 1, 3) == doctest::Approx(3.0));
  CHECK(window_mean(v, 3, 100) == doctest::Approx(4.5));
  CHECK_THROWS_AS(window_mean(v, 4, 2), std::invalid_argument);
}

TEST_CASE("matched Monte Carlo spot check") {
  AnalyticScenario sc;
  sc.lambda_total = 1000.0 / (std::numbers::pi * 2000.0 * 2000.0);
  sc.sfs = {SpreadingFactor{7}, SpreadingFactor{10}};
  const auto part = RingPartition::uniform(2000.0, 20);
  const DensityMatrix dm(20, 2, sc.lambda_total / 2.0);
  const auto est = estimate_success(SpreadingFactor{7}, 1000.0, dm, sc, part, 20000, 5);
  const double exact = success_probability(SpreadingFactor{7}, 1000.0, dm, sc, part);
  CHECK(std::abs(est.mean - exact) < 3.0 * est.std_error);
}
