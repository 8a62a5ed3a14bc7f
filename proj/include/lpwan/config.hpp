#pragma once

// Scenario presets and the key/value configuration file.
//
// File layout:
//
//   # comment
//   [phy]
//   bandwidth_hz = 125000
//   snr_thresholds_db = -6, -9, -12, -15, -17.5, -20
//   [sim]
//   n_devices = 1000
//   t_rep_s = 80
//   payload_bytes = 100
//
// Sections are [phy], [sim], [learning], [external] and [adversary]. Keys
// not listed in config_keys() are rejected. [sim] n_devices, t_rep_s and
// payload_bytes are required; everything else defaults to base_config().
// [external] erasure_prob is a list of <sf>:<channel>=<prob> entries.

#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "lpwan/netsim.hpp"

namespace lpwan {

/// Error while reading a configuration file; carries the 1-based line when known.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& what, int line = 0);
  int line() const noexcept { return line_; }

 private:
  int line_;
};

/// Base parameters shared by every preset.
SimConfig base_config();

std::vector<std::string> preset_names();
/// sc1 | sc2 | sc3 | fig3
SimConfig load_preset(const std::string& name);

/// Erasure probabilities spaced evenly from `worst` down to `best` over the
/// (SF, channel) pairs of cfg, in SF-major order.
ExternalInterference spread_erasures(const SimConfig& cfg, double worst = 0.6, double best = 0.05);

SimConfig parse_config(std::string_view text);
SimConfig load_config(const std::string& path);

/// Serializes every key; parse_config(dump_config(c)) == c.
std::string dump_config(const SimConfig& cfg);
nlohmann::json config_to_json(const SimConfig& cfg);

struct ConfigKey {
  std::string section;
  std::string key;
};
std::vector<ConfigKey> config_keys();

}  // namespace lpwan
