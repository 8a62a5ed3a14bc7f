#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "lpwan/analytic.hpp"
#include "lpwan/bandit.hpp"
#include "lpwan/phy.hpp"

namespace lpwan {

/// Per-(SF, channel) probability that external traffic destroys an attempt.
struct ExternalInterference {
  std::map<std::pair<int, int>, double> erasure_prob;

  double at(SpreadingFactor sf, int channel) const;
  bool operator==(const ExternalInterference&) const = default;
};

/// Inverts each feedback bit with probability flip_prob.
struct AdversaryModel {
  double flip_prob = 0.0;
  bool operator==(const AdversaryModel&) const = default;
};

enum class Algorithm { Uucb1, Uexp3, RandSel, EqLoad, Fixed };

struct AlgorithmChoice {
  Algorithm kind = Algorithm::Uucb1;
  std::size_t fixed_arm = 0;

  bool operator==(const AlgorithmChoice&) const = default;
};

std::string to_string(const AlgorithmChoice& a);
/// Parses uucb1 | uexp3 | randsel | eqload | fixed:<arm>.
AlgorithmChoice parse_algorithm(const std::string& text);

struct LearningParams {
  double beta = 0.5;
  double alpha = 0.1;
  double rho = 0.4;
  UcbIndex ucb_index = UcbIndex::Mean;
  RewardMode reward_mode = RewardMode::Frugal;

  bool operator==(const LearningParams&) const = default;
};

struct SimConfig {
  std::size_t n_devices = 1000;
  /// Devices per m^2; when positive the device count is Poisson and n_devices is ignored.
  double density_per_m2 = 0.0;
  double cell_radius_m = 2000.0;
  double t_rep_s = 80.0;
  std::size_t payload_bytes = 100;
  PhyParams phy;
  PathLoss pathloss;
  std::vector<int> sf_set{7, 8, 9, 10, 11, 12};
  bool power_control = false;
  /// Transmit power used by every policy when power control is off.
  double fixed_power_dbm = 14.0;
  AlgorithmChoice algorithm;
  LearningParams learning;
  ExternalInterference external;
  AdversaryModel adversary;
  std::size_t packets_per_device = 100;
  std::uint64_t seed = 1;
  /// Draw separate fading for the SNR and SIR tests (the factorized analytic model).
  bool independent_fading = false;

  bool operator==(const SimConfig&) const = default;
};

void validate(const SimConfig& cfg);

std::vector<SpreadingFactor> spreading_factors(const SimConfig& cfg);
std::vector<double> power_levels(const SimConfig& cfg);
/// The bandit arms every device chooses from.
std::vector<Action> arms(const SimConfig& cfg);

struct Device {
  std::size_t id = 0;
  double radius = 0.0;
  double angle = 0.0;
  std::optional<Policy> policy;
  double energy_spent = 0.0;
  std::size_t packets_sent = 0;
  std::size_t packets_succeeded = 0;
  /// Arm of every attempt, including those past the recorded horizon.
  std::vector<std::size_t> arm_history;
};

/// Uniform positions on the cell disk; radii clamped to at least 1 m.
std::vector<Device> deploy(const SimConfig& cfg, Rng& rng);

/// Gateway-side receiver constants.
struct Receiver {
  double noise_w = 0.0;
  std::array<double, 6> snr_threshold{};  // linear, indexed by SF offset
  double sir_threshold = 1.0;              // linear
  ExternalInterference external;

  static Receiver from(const PhyParams& phy, ExternalInterference external = {});
};

/// One uplink packet on the air.
struct Attempt {
  std::size_t device = 0;
  SpreadingFactor sf{7};
  int channel = 0;
  double start = 0.0;
  double end = 0.0;
  double rx_power_w = 0.0;  // mean received power, before fading
  double fading = 1.0;      // Exp(1) power fading, SIR test
  double noise_fading = 1.0;  // fading used for the SNR test
};

/// Builds an attempt and draws its Rayleigh fading.
Attempt make_attempt(std::size_t device, SpreadingFactor sf, int channel, double start, double airtime,
                     double rx_power_w, Rng& rng, bool independent_fading = false);

bool overlaps(const Attempt& a, const Attempt& b) noexcept;

/// Capture decision for `tx` against the co-SF co-channel attempts overlapping it.
/// The erasure coin is drawn on every call.
bool evaluate_attempt(const Attempt& tx, std::span<const Attempt> concurrent, const Receiver& rx,
                      Rng& rng);

/// success XOR Bernoulli(flip_prob). The coin is drawn on every call.
bool feedback(bool success, const AdversaryModel& adv, Rng& rng);

/// Per-packet-index means across devices.
struct MetricsLog {
  std::vector<double> success_rate;
  std::vector<double> energy_j;
  std::string algorithm;
  std::size_t seed_count = 0;
  std::vector<std::uint64_t> seeds;

  std::size_t size() const noexcept { return success_rate.size(); }
  bool operator==(const MetricsLog&) const = default;
};

struct SimResult {
  MetricsLog log;
  std::vector<Device> devices;
  std::vector<Action> arms;
};

SimResult simulate(const SimConfig& cfg);
MetricsLog run(const SimConfig& cfg);

/// One run per seed, executed concurrently; results are in seed order.
std::vector<MetricsLog> run_seeds(const SimConfig& cfg, std::span<const std::uint64_t> seeds);

/// Pointwise mean of several logs of equal horizon.
MetricsLog aggregate(std::span<const MetricsLog> logs);

/// Mean over packet indices [first, last] (inclusive, clamped to the log).
double window_mean(const std::vector<double>& column, std::size_t first, std::size_t last);

// ---------------------------------------------------------------------------
// Matched-assumption Monte Carlo for the analytic success probability
// ---------------------------------------------------------------------------

/// One trial: a transmitter at distance z on `sf` plus interferers drawn ring
/// by ring from a PPP of intensity lambda_{j,c} * T_c / T_rep, independent
/// Rayleigh fading per test, no external erasures.
bool matched_trial(SpreadingFactor sf, double z, const DensityMatrix& dm, const AnalyticScenario& sc,
                   const RingPartition& part, Rng& rng);

struct Estimate {
  double mean = 0.0;
  double std_error = 0.0;
  std::size_t trials = 0;
};

Estimate estimate_success(SpreadingFactor sf, double z, const DensityMatrix& dm,
                          const AnalyticScenario& sc, const RingPartition& part, std::size_t trials,
                          std::uint64_t seed);

/// Binomial estimate from a success count.
Estimate binomial_estimate(std::size_t successes, std::size_t trials);

/// Analytic scenario matching a single-power simulation configuration.
AnalyticScenario analytic_scenario(const SimConfig& cfg);

}  // namespace lpwan
