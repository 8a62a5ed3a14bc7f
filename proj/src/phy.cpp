#include "lpwan/phy.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace lpwan {

SpreadingFactor::SpreadingFactor(int value) : value_(value) {
  if (value < kMin || value > kMax) {
    throw std::invalid_argument("spreading factor out of range [7, 12]: " + std::to_string(value));
  }
}

void validate(const PhyParams& phy) {
  if (!(phy.bandwidth_hz > 0.0)) throw std::invalid_argument("bandwidth_hz must be positive");
  if (!(phy.code_rate > 0.0 && phy.code_rate <= 1.0)) {
    throw std::invalid_argument("code_rate must lie in (0, 1]");
  }
  for (std::size_t i = 1; i < phy.snr_thresholds_db.size(); ++i) {
    if (!(phy.snr_thresholds_db[i] < phy.snr_thresholds_db[i - 1])) {
      throw std::invalid_argument("snr_thresholds_db must be strictly decreasing in SF");
    }
  }
  if (phy.power_set_dbm.empty()) throw std::invalid_argument("power_set_dbm is empty");
  if (phy.num_channels < 1) throw std::invalid_argument("num_channels must be at least 1");
  if (!(phy.pa_inverse_efficiency >= 1.0)) {
    throw std::invalid_argument("pa_inverse_efficiency must be >= 1");
  }
}

double dbm_to_watts(double dbm) noexcept { return std::pow(10.0, (dbm - 30.0) / 10.0); }

double watts_to_dbm(double watts) noexcept { return 10.0 * std::log10(watts) + 30.0; }

double db_to_linear(double db) noexcept { return std::pow(10.0, db / 10.0); }

double snr_threshold_db(SpreadingFactor sf, const PhyParams& phy) noexcept {
  return phy.snr_thresholds_db[sf.offset()];
}

double data_rate(SpreadingFactor sf, const PhyParams& phy) noexcept {
  const int c = sf.value();
  return c * phy.bandwidth_hz * phy.code_rate / std::ldexp(1.0, c);
}

double time_on_air(std::size_t payload_bytes, SpreadingFactor sf, const PhyParams& phy) {
  if (payload_bytes == 0) throw std::invalid_argument("empty payload");
  return 8.0 * static_cast<double>(payload_bytes) / data_rate(sf, phy);
}

double tx_energy(const Action& action, std::size_t payload_bytes, const PhyParams& phy) {
  const double draw_w =
      phy.pa_inverse_efficiency * dbm_to_watts(action.power_dbm) + dbm_to_watts(phy.circuit_power_dbm);
  return action.replicas * time_on_air(payload_bytes, action.sf, phy) * draw_w;
}

double noise_power(const PhyParams& phy) noexcept {
  return dbm_to_watts(phy.noise_psd_dbm_hz + phy.noise_figure_db) * phy.bandwidth_hz;
}

std::vector<Action> action_space(std::span<const double> power_set_dbm,
                                 std::span<const SpreadingFactor> sf_set, int channel_count) {
  if (power_set_dbm.empty()) throw std::invalid_argument("action_space: empty power set");
  if (sf_set.empty()) throw std::invalid_argument("action_space: empty SF set");
  if (channel_count < 1) throw std::invalid_argument("action_space: no channels");

  std::vector<Action> arms;
  arms.reserve(power_set_dbm.size() * sf_set.size() * static_cast<std::size_t>(channel_count));
  for (double p : power_set_dbm) {
    for (SpreadingFactor sf : sf_set) {
      for (int ch = 0; ch < channel_count; ++ch) arms.push_back(Action{p, sf, ch, 1});
    }
  }
  return arms;
}

}  // namespace lpwan
