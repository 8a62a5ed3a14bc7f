#include "lpwan/report.hpp"

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>

#include "lpwan/config.hpp"

namespace lpwan {

OutputFormat parse_format(const std::string& text) {
  if (text == "csv") return OutputFormat::Csv;
  if (text == "json") return OutputFormat::Json;
  throw std::invalid_argument("unknown format '" + text + "' (valid: csv, json)");
}

void validate(const RunSpec& spec) {
  if (spec.subcommand != Subcommand::BanditBench && spec.preset.has_value() == spec.config_path.has_value()) {
    throw std::invalid_argument("give exactly one of --preset or --config");
  }
  if (spec.subcommand == Subcommand::Simulate && spec.seeds.empty()) {
    throw std::invalid_argument("simulate needs at least one seed");
  }
}

std::vector<std::uint64_t> parse_seeds(const std::string& text) {
  const auto bad = [&] { return std::invalid_argument("bad seed list '" + text + "'"); };
  std::vector<std::uint64_t> values;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty() || item.find_first_not_of("0123456789") != std::string::npos) throw bad();
    values.push_back(std::stoull(item));
  }
  if (values.empty()) throw bad();
  if (text.find(',') != std::string::npos) return values;
  if (values.front() == 0) throw bad();
  std::vector<std::uint64_t> seeds(values.front());
  for (std::size_t i = 0; i < seeds.size(); ++i) seeds[i] = i + 1;
  return seeds;
}

std::vector<double> moving_average(const std::vector<double>& column, std::size_t window) {
  if (window == 0) throw std::invalid_argument("window must be positive");
  std::vector<double> out(column.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < column.size(); ++i) {
    sum += column[i];
    if (i >= window) sum -= column[i - window];
    out[i] = sum / static_cast<double>(std::min(i + 1, window));
  }
  return out;
}

namespace {

std::string format_cell(const Cell& cell) {
  if (const auto* d = std::get_if<double>(&cell)) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", *d);
    return buf;
  }
  if (const auto* i = std::get_if<std::int64_t>(&cell)) return std::to_string(*i);
  return std::get<std::string>(cell);
}

nlohmann::json metadata(const nlohmann::json& config) {
  return {{"tool", kToolName}, {"version", kToolVersion}, {"config", config}};
}

}  // namespace

std::string to_csv(const Table& table, const nlohmann::json& config) {
  std::string out = "# " + std::string(kToolName) + " " + kToolVersion + "\n";
  std::istringstream lines(config.dump(2));
  for (std::string line; std::getline(lines, line);) out += "# " + line + "\n";
  for (std::size_t i = 0; i < table.columns.size(); ++i) out += (i ? "," : "") + table.columns[i];
  out += "\n";
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out += (i ? "," : "") + format_cell(row[i]);
    out += "\n";
  }
  return out;
}

nlohmann::json to_json(const Table& table, const nlohmann::json& config) {
  nlohmann::json cols = nlohmann::json::object();
  for (std::size_t c = 0; c < table.columns.size(); ++c) {
    nlohmann::json values = nlohmann::json::array();
    for (const auto& row : table.rows) {
      std::visit([&](const auto& v) { values.push_back(v); }, row[c]);
    }
    cols[table.columns[c]] = std::move(values);
  }
  return {{"columns", std::move(cols)}, {"metadata", metadata(config)}};
}

Table metrics_table(const MetricsLog& log) {
  Table t;
  t.columns = {"packet_index", "success_rate", "success_rate_ma10", "energy_per_trial_mj", "algorithm",
               "seed_count"};
  const auto ma = moving_average(log.success_rate, 10);
  for (std::size_t i = 0; i < log.size(); ++i) {
    t.rows.push_back({static_cast<std::int64_t>(i + 1), log.success_rate[i], ma[i], log.energy_j[i] * 1e3,
                      log.algorithm, static_cast<std::int64_t>(log.seed_count)});
  }
  return t;
}

std::string render(const Table& table, const nlohmann::json& config, OutputFormat format) {
  if (format == OutputFormat::Csv) return to_csv(table, config);
  return to_json(table, config).dump(2) + "\n";
}

void write_output(const std::string& text, const std::string& path) {
  if (path.empty()) {
    std::cout << text;
    std::cout.flush();
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << text;
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
}

void write_metrics(const MetricsLog& log, const SimConfig& cfg, const RunSpec& spec) {
  if (log.size() == 0) throw std::invalid_argument("empty metrics log");
  nlohmann::json config = config_to_json(cfg);
  config["sim"]["seeds"] = log.seeds;
  write_output(render(metrics_table(log), config, spec.format), spec.out);
}

}  // namespace lpwan
