#include <cstdio>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "lpwan/analytic.hpp"
#include "lpwan/bench.hpp"
#include "lpwan/config.hpp"
#include "lpwan/netsim.hpp"
#include "lpwan/report.hpp"

using namespace lpwan;

namespace {

struct SourceFlags {
  std::string preset;
  std::string config;
  std::string out;
  std::string format = "csv";
};

struct SimFlags {
  std::string seeds = "1";
  std::optional<std::size_t> packets;
  std::optional<std::string> algorithm;
  bool power_control = false;
  std::optional<double> beta;
  std::optional<double> alpha;
  std::optional<double> rho;
  std::optional<double> flip_prob;
};

struct AnalyticFlags {
  std::size_t rings = 20;
  std::size_t points = 100;
  std::string density = "optimized";
  bool literal_energy = false;
  bool literal_integral = false;
  int grid = 50;
};

struct BenchFlags {
  std::string arms = "0.9,0.5";
  std::size_t rounds = 10000;
  std::size_t seeds = 100;
  double flip_prob = 0.0;
  std::string algorithms = "uucb1,uexp3,randsel";
  double alpha = 0.1;
  double rho = 0.4;
  std::string ucb_index = "mean";
  std::size_t stride = 100;
  std::uint64_t base_seed = 1;
  std::string out;
  std::string format = "csv";
};

void add_source(CLI::App* app, SourceFlags& f) {
  auto* preset = app->add_option("--preset", f.preset, "Scenario preset")
                     ->check(CLI::IsMember(preset_names()));
  auto* config = app->add_option("--config", f.config, "Configuration file");
  preset->excludes(config);
  app->add_option("--out", f.out, "Output file (default: standard output)");
  app->add_option("--format", f.format, "Output format")->check(CLI::IsMember({"csv", "json"}));
}

RunSpec make_spec(Subcommand sub, const SourceFlags& f) {
  RunSpec spec;
  spec.subcommand = sub;
  if (!f.preset.empty()) spec.preset = f.preset;
  if (!f.config.empty()) spec.config_path = f.config;
  spec.out = f.out;
  spec.format = parse_format(f.format);
  validate(spec);
  return spec;
}

SimConfig resolve(const RunSpec& spec) {
  return spec.preset ? load_preset(*spec.preset) : load_config(*spec.config_path);
}

std::vector<std::string> split(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  for (std::string item; std::getline(ss, item, ',');) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

void apply(SimConfig& cfg, const SimFlags& f) {
  if (f.packets) cfg.packets_per_device = *f.packets;
  if (f.algorithm) cfg.algorithm = parse_algorithm(*f.algorithm);
  if (f.power_control) cfg.power_control = true;
  if (f.beta) cfg.learning.beta = *f.beta;
  if (f.alpha) cfg.learning.alpha = *f.alpha;
  if (f.rho) cfg.learning.rho = *f.rho;
  if (f.flip_prob) cfg.adversary.flip_prob = *f.flip_prob;
  validate(cfg);
}

void run_simulate(const SourceFlags& src, const SimFlags& flags) {
  RunSpec spec = make_spec(Subcommand::Simulate, src);
  spec.seeds = parse_seeds(flags.seeds);
  validate(spec);
  SimConfig cfg = resolve(spec);
  apply(cfg, flags);
  const auto logs = run_seeds(cfg, spec.seeds);
  write_metrics(aggregate(logs), cfg, spec);
}

AnalyticScenario scenario_for(const SimConfig& cfg, const AnalyticFlags& f) {
  AnalyticScenario sc = analytic_scenario(cfg);
  if (f.literal_energy) sc.energy_term = EnergyTerm::Literal;
  sc.literal_integral = f.literal_integral;
  validate(sc);
  return sc;
}

nlohmann::json analytic_config(const SimConfig& cfg, const AnalyticScenario& sc, const AnalyticFlags& f) {
  nlohmann::json j = config_to_json(cfg);
  j["analytic"] = {{"lambda_total_per_m2", sc.lambda_total},
                   {"rings", f.rings},
                   {"grid_resolution", f.grid},
                   {"energy_term", f.literal_energy ? "literal" : "airtime_ratio"},
                   {"literal_integral", f.literal_integral}};
  return j;
}

DensityMatrix density_for(const AnalyticScenario& sc, const RingPartition& part, const AnalyticFlags& f,
                          nlohmann::json& config) {
  const std::size_t n_sf = sc.sfs.size();
  if (f.density == "none") return DensityMatrix(part.size(), n_sf, 0.0);
  if (f.density == "uniform") {
    return DensityMatrix(part.size(), n_sf, sc.lambda_total / static_cast<double>(n_sf));
  }
  const auto res = optimize_densities(sc, part, OptimizerOptions{f.grid, 1e-6, 100});
  config["analytic"]["optimizer"] = {{"objective", res.value.total},
                                     {"reliability", res.value.reliability},
                                     {"energy", res.value.energy},
                                     {"sweeps", res.sweeps},
                                     {"converged", res.converged}};
  if (!res.converged) std::cerr << "warning: optimizer stopped before convergence\n";
  return res.densities;
}

void run_analytic_ps(const SourceFlags& src, const SimFlags& sim, const AnalyticFlags& f) {
  const RunSpec spec = make_spec(Subcommand::AnalyticPs, src);
  SimConfig cfg = resolve(spec);
  apply(cfg, sim);
  const AnalyticScenario sc = scenario_for(cfg, f);
  const RingPartition part = RingPartition::uniform(cfg.cell_radius_m, f.rings);
  nlohmann::json config = analytic_config(cfg, sc, f);
  config["analytic"]["density"] = f.density;
  const DensityMatrix dm = density_for(sc, part, f, config);

  Table t;
  t.columns = {"z_m", "sf", "success_probability"};
  for (std::size_t i = 1; i <= f.points; ++i) {
    const double z = cfg.cell_radius_m * static_cast<double>(i) / static_cast<double>(f.points);
    for (const auto sf : sc.sfs) {
      t.rows.push_back({z, static_cast<std::int64_t>(sf.value()), success_probability(sf, z, dm, sc, part)});
    }
  }
  write_output(render(t, config, spec.format), spec.out);
}

void run_analytic_optimize(const SourceFlags& src, const SimFlags& sim, const AnalyticFlags& f) {
  const RunSpec spec = make_spec(Subcommand::AnalyticOptimize, src);
  SimConfig cfg = resolve(spec);
  apply(cfg, sim);
  const AnalyticScenario sc = scenario_for(cfg, f);
  const RingPartition part = RingPartition::uniform(cfg.cell_radius_m, f.rings);
  nlohmann::json config = analytic_config(cfg, sc, f);
  const auto res = optimize_densities(sc, part, OptimizerOptions{f.grid, 1e-6, 100});
  config["analytic"]["optimizer"] = {{"objective", res.value.total},
                                     {"reliability", res.value.reliability},
                                     {"energy", res.value.energy},
                                     {"sweeps", res.sweeps},
                                     {"converged", res.converged}};
  if (!res.converged) std::cerr << "warning: optimizer stopped before convergence\n";

  Table t;
  t.columns = {"ring", "inner_m", "outer_m"};
  for (const auto sf : sc.sfs) t.columns.push_back("lambda_sf" + std::to_string(sf.value()));
  t.columns.push_back("winning_sf");
  for (std::size_t j = 0; j < part.size(); ++j) {
    std::vector<Cell> row{static_cast<std::int64_t>(j), part.inner(j), part.outer(j)};
    for (std::size_t c = 0; c < sc.sfs.size(); ++c) row.emplace_back(res.densities(j, c));
    row.emplace_back(static_cast<std::int64_t>(res.winners[j].value()));
    t.rows.push_back(std::move(row));
  }
  write_output(render(t, config, spec.format), spec.out);
}

void run_bench(const BenchFlags& f) {
  BenchSpec spec;
  spec.arm_means.clear();
  for (const auto& a : split(f.arms)) spec.arm_means.push_back(std::stod(a));
  spec.rounds = f.rounds;
  spec.seeds = f.seeds;
  spec.flip_prob = f.flip_prob;
  spec.algorithms.clear();
  for (const auto& a : split(f.algorithms)) spec.algorithms.push_back(parse_algorithm(a));
  spec.alpha = f.alpha;
  spec.rho = f.rho;
  spec.ucb_index = f.ucb_index == "accumulated" ? UcbIndex::Accumulated : UcbIndex::Mean;
  spec.base_seed = f.base_seed;
  if (f.stride == 0) throw std::invalid_argument("stride must be positive");
  const auto series = bandit_bench(spec);

  Table t;
  t.columns = {"round", "algorithm", "seed", "cumulative_regret", "optimal_arm_rate", "cumulative_reward"};
  const auto block_rate = [&](const std::vector<double>& optimal, std::size_t end) {
    const std::size_t first = end + 1 >= f.stride ? end + 1 - f.stride : 0;
    return range_mean(optimal, first, end);
  };
  for (const auto& s : series) {
    const std::string name = to_string(s.algorithm);
    const auto regret = s.mean_regret();
    const auto reward = s.mean_reward();
    const auto rate = s.optimal_rate();
    for (std::size_t end = f.stride - 1; end < spec.rounds; end += f.stride) {
      t.rows.push_back({static_cast<std::int64_t>(end + 1), name, std::string("mean"), regret[end],
                        block_rate(rate, end), reward[end]});
    }
    for (const auto& run : s.runs) {
      const std::vector<double> optimal(run.optimal.begin(), run.optimal.end());
      for (std::size_t end = f.stride - 1; end < spec.rounds; end += f.stride) {
        t.rows.push_back({static_cast<std::int64_t>(end + 1), name, std::to_string(run.seed), run.regret[end],
                          block_rate(optimal, end), run.reward[end]});
      }
    }
  }
  nlohmann::json config = {{"bench",
                            {{"arm_means", spec.arm_means},
                             {"rounds", spec.rounds},
                             {"seeds", spec.seeds},
                             {"base_seed", spec.base_seed},
                             {"flip_prob", spec.flip_prob},
                             {"algorithms", split(f.algorithms)},
                             {"alpha", spec.alpha},
                             {"rho", spec.rho},
                             {"ucb_index", f.ucb_index},
                             {"stride", f.stride}}}};
  write_output(render(t, config, parse_format(f.format)), f.out);
}

void add_sim_overrides(CLI::App* app, SimFlags& f) {
  app->add_option("--packets", f.packets, "Packets per device (horizon)");
  app->add_option("--algorithm", f.algorithm, "uucb1 | uexp3 | randsel | eqload | fixed:<arm>");
  app->add_flag("--power-control", f.power_control, "Let the learner pick the transmit power");
  app->add_option("--beta", f.beta, "Energy weight of the shaped reward");
  app->add_option("--alpha", f.alpha, "UUCB1 exploration coefficient");
  app->add_option("--rho", f.rho, "UEXP3 mixing parameter");
  app->add_option("--adversary-flip-prob", f.flip_prob, "Probability of an inverted ACK");
}

void add_analytic(CLI::App* app, AnalyticFlags& f) {
  app->add_option("--rings", f.rings, "Number of equal-width rings")->check(CLI::PositiveNumber);
  app->add_option("--grid", f.grid, "Simplex grid resolution")->check(CLI::PositiveNumber);
  app->add_flag("--literal-energy", f.literal_energy, "Score energy as T_c / T_1");
  app->add_flag("--literal-integral", f.literal_integral, "Use the raw radial integral of p_s");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Decentralized LoRa SF / channel / power learning simulator"};
  app.set_version_flag("--version", std::string(kToolName) + " " + kToolVersion);
  app.require_subcommand(1);

  SourceFlags src;
  SimFlags sim;
  AnalyticFlags ana;
  BenchFlags bench;

  auto* simulate = app.add_subcommand("simulate", "Run the event-driven network simulation");
  add_source(simulate, src);
  simulate->add_option("--seeds", sim.seeds, "Seed count N (seeds 1..N) or comma list");
  add_sim_overrides(simulate, sim);

  auto* analytic = app.add_subcommand("analytic", "Stochastic-geometry oracle");
  analytic->require_subcommand(1);
  auto* ps = analytic->add_subcommand("ps", "Tabulate success probability over distance for each SF");
  add_source(ps, src);
  add_sim_overrides(ps, sim);
  add_analytic(ps, ana);
  ps->add_option("--points", ana.points, "Distance samples")->check(CLI::PositiveNumber);
  ps->add_option("--density", ana.density, "Interferer densities")
      ->check(CLI::IsMember({"optimized", "uniform", "none"}));
  auto* opt = analytic->add_subcommand("optimize", "Per-ring SF densities maximizing the objective");
  add_source(opt, src);
  add_sim_overrides(opt, sim);
  add_analytic(opt, ana);

  auto* bb = app.add_subcommand("bandit-bench", "Learners on a synthetic Bernoulli bandit");
  bb->add_option("--arms", bench.arms, "Comma list of arm success probabilities");
  bb->add_option("--rounds", bench.rounds, "Rounds per run");
  bb->add_option("--seeds", bench.seeds, "Number of seeds")->check(CLI::PositiveNumber);
  bb->add_option("--base-seed", bench.base_seed, "First seed");
  bb->add_option("--adversary-flip-prob", bench.flip_prob, "Probability of an inverted observation");
  bb->add_option("--algorithms", bench.algorithms, "Comma list of algorithms");
  bb->add_option("--alpha", bench.alpha, "UUCB1 exploration coefficient");
  bb->add_option("--rho", bench.rho, "UEXP3 mixing parameter");
  bb->add_option("--ucb-index", bench.ucb_index, "UUCB1 index")->check(CLI::IsMember({"mean", "accumulated"}));
  bb->add_option("--stride", bench.stride, "Rounds between output rows")->check(CLI::PositiveNumber);
  bb->add_option("--out", bench.out, "Output file (default: standard output)");
  bb->add_option("--format", bench.format, "Output format")->check(CLI::IsMember({"csv", "json"}));

  CLI11_PARSE(app, argc, argv);

  try {
    if (simulate->parsed()) run_simulate(src, sim);
    else if (ps->parsed()) run_analytic_ps(src, sim, ana);
    else if (opt->parsed()) run_analytic_optimize(src, sim, ana);
    else if (bb->parsed()) run_bench(bench);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
