#pragma once

// CSV / JSON emission. Every file carries the resolved configuration: CSV
// as '# ' comment lines ahead of the header, JSON as a metadata object.

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "lpwan/netsim.hpp"

namespace lpwan {

inline constexpr const char* kToolName = "lpwan-learn";
inline constexpr const char* kToolVersion = "0.1.0";

enum class OutputFormat { Csv, Json };
OutputFormat parse_format(const std::string& text);

enum class Subcommand { Simulate, AnalyticPs, AnalyticOptimize, BanditBench };

struct RunSpec {
  Subcommand subcommand = Subcommand::Simulate;
  std::optional<std::string> preset;
  std::optional<std::string> config_path;
  std::vector<std::uint64_t> seeds{1};
  /// Empty means standard output.
  std::string out;
  OutputFormat format = OutputFormat::Csv;
};

/// Throws std::invalid_argument unless exactly one of preset/config_path is
/// set (bandit-bench takes neither) and, for simulate, the seed list is non-empty.
void validate(const RunSpec& spec);

/// "N" means seeds 1..N; "a,b,c" is an explicit list.
std::vector<std::uint64_t> parse_seeds(const std::string& text);

/// Trailing moving average; the first entries average what is available.
std::vector<double> moving_average(const std::vector<double>& column, std::size_t window);

using Cell = std::variant<double, std::int64_t, std::string>;

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
};

std::string to_csv(const Table& table, const nlohmann::json& config);
/// {"columns": {name: [values]}, "metadata": {"tool", "version", "config"}}
nlohmann::json to_json(const Table& table, const nlohmann::json& config);

/// packet_index, success_rate, success_rate_ma10, energy_per_trial_mj, algorithm, seed_count
Table metrics_table(const MetricsLog& log);

std::string render(const Table& table, const nlohmann::json& config, OutputFormat format);

/// Writes to `path`, or to standard output when path is empty. Throws
/// std::runtime_error when the file cannot be written.
void write_output(const std::string& text, const std::string& path);

void write_metrics(const MetricsLog& log, const SimConfig& cfg, const RunSpec& spec);

}  // namespace lpwan
