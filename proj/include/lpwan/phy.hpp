#pragma once

#include <array>
#include <compare>
#include <cstddef>
#include <span>
#include <vector>

namespace lpwan {

/// LoRa spreading factor, the chirp-count exponent in [7, 12].
class SpreadingFactor {
 public:
  static constexpr int kMin = 7;
  static constexpr int kMax = 12;

  explicit SpreadingFactor(int value);

  int value() const noexcept { return value_; }
  /// Zero-based position within [kMin, kMax].
  std::size_t offset() const noexcept { return static_cast<std::size_t>(value_ - kMin); }

  auto operator<=>(const SpreadingFactor&) const = default;

 private:
  int value_;
};

/// One bandit arm: what a device chooses for a single uplink packet.
struct Action {
  double power_dbm = 14.0;
  SpreadingFactor sf{7};
  int channel = 0;
  int replicas = 1;

  bool operator==(const Action&) const = default;
};

struct PhyParams {
  double bandwidth_hz = 125e3;
  double code_rate = 0.8;
  // Required SNR for SF 7..12.
  std::array<double, 6> snr_thresholds_db{-6.0, -9.0, -12.0, -15.0, -17.5, -20.0};
  double sir_threshold_db = 6.0;
  std::vector<double> power_set_dbm{8.0, 14.0};
  int num_channels = 1;
  double noise_psd_dbm_hz = -174.0;
  double noise_figure_db = 0.0;
  double pa_inverse_efficiency = 2.0;
  double circuit_power_dbm = 10.0;

  bool operator==(const PhyParams&) const = default;
};

/// Log-distance pathloss G * r^-delta.
struct PathLoss {
  double gain = 1.0;
  double exponent = 4.0;

  bool operator==(const PathLoss&) const = default;
};

/// Throws std::invalid_argument if any PhyParams invariant is violated.
void validate(const PhyParams& phy);

double dbm_to_watts(double dbm) noexcept;
double watts_to_dbm(double watts) noexcept;
double db_to_linear(double db) noexcept;

double snr_threshold_db(SpreadingFactor sf, const PhyParams& phy) noexcept;

/// Bit rate R(c) = c * BW * code_rate / 2^c.
double data_rate(SpreadingFactor sf, const PhyParams& phy) noexcept;

/// Airtime of `payload_bytes` (counted as 8 bits each) at data_rate(sf).
double time_on_air(std::size_t payload_bytes, SpreadingFactor sf, const PhyParams& phy);

/// Energy of one packet: replicas * airtime * (eta * P_t + P_c), in joules.
double tx_energy(const Action& action, std::size_t payload_bytes, const PhyParams& phy);

/// Thermal noise over one sub-channel, in watts, including the receiver noise figure.
double noise_power(const PhyParams& phy) noexcept;

/// Cartesian product ordered power-major, then SF, then channel.
std::vector<Action> action_space(std::span<const double> power_set_dbm,
                                 std::span<const SpreadingFactor> sf_set, int channel_count);

}  // namespace lpwan
