#include "lpwan/bench.hpp"

#include <algorithm>
#include <functional>
#include <stdexcept>

namespace lpwan {

void validate(const BenchSpec& spec) {
  if (spec.arm_means.empty()) throw std::invalid_argument("bench needs at least one arm");
  for (double m : spec.arm_means) {
    if (!(m >= 0.0 && m <= 1.0)) throw std::invalid_argument("arm means must lie in [0, 1]");
  }
  if (!(spec.flip_prob >= 0.0 && spec.flip_prob <= 1.0)) {
    throw std::invalid_argument("flip_prob must lie in [0, 1]");
  }
  if (spec.seeds == 0) throw std::invalid_argument("bench needs at least one seed");
  if (!(spec.alpha > 0.0)) throw std::invalid_argument("alpha must be positive");
  if (!(spec.rho > 0.0 && spec.rho <= 1.0)) throw std::invalid_argument("rho must lie in (0, 1]");
  for (const auto& a : spec.algorithms) {
    if (a.kind == Algorithm::EqLoad) throw std::invalid_argument("eqload has no meaning in the bandit bench");
    if (a.kind == Algorithm::Fixed && a.fixed_arm >= spec.arm_means.size()) {
      throw std::invalid_argument("fixed arm out of range");
    }
  }
}

namespace {

Policy make_policy(const BenchSpec& spec, const AlgorithmChoice& a) {
  const std::size_t k = spec.arm_means.size();
  switch (a.kind) {
    case Algorithm::Uucb1: return Policy::uucb1(k, spec.alpha, spec.ucb_index);
    case Algorithm::Uexp3: return Policy::uexp3(k, spec.rho);
    case Algorithm::RandSel: return Policy::randsel(k);
    case Algorithm::Fixed: return Policy::fixed(k, a.fixed_arm);
    case Algorithm::EqLoad: break;
  }
  throw std::invalid_argument("eqload has no meaning in the bandit bench");
}

std::vector<double> column_mean(const std::vector<BenchRun>& runs, auto member) {
  if (runs.empty()) return {};
  std::vector<double> out(std::invoke(member, runs.front()).size(), 0.0);
  for (const auto& r : runs) {
    const auto& col = std::invoke(member, r);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += static_cast<double>(col[i]);
  }
  for (double& v : out) v /= static_cast<double>(runs.size());
  return out;
}

}  // namespace

std::vector<double> BenchSeries::mean_regret() const { return column_mean(runs, &BenchRun::regret); }
std::vector<double> BenchSeries::mean_reward() const { return column_mean(runs, &BenchRun::reward); }
std::vector<double> BenchSeries::optimal_rate() const { return column_mean(runs, &BenchRun::optimal); }

BenchRun bench_run(const BenchSpec& spec, const AlgorithmChoice& algorithm, std::uint64_t seed) {
  validate(spec);
  std::seed_seq seq{seed, std::uint64_t{4}};
  Rng rng(seq);
  Policy policy = make_policy(spec, algorithm);
  const double best = *std::max_element(spec.arm_means.begin(), spec.arm_means.end());
  std::bernoulli_distribution flip(spec.flip_prob);

  BenchRun run;
  run.seed = seed;
  run.regret.reserve(spec.rounds);
  run.reward.reserve(spec.rounds);
  run.optimal.reserve(spec.rounds);
  double regret = 0.0;
  double reward = 0.0;
  for (std::size_t t = 0; t < spec.rounds; ++t) {
    const std::size_t arm = policy.select(rng);
    const double mu = spec.arm_means[arm];
    const bool success = std::bernoulli_distribution(mu)(rng);
    const bool observed = success != flip(rng);
    policy.observe(arm, observed ? 1.0 : 0.0);
    regret += best - mu;
    reward += success ? 1.0 : 0.0;
    run.regret.push_back(regret);
    run.reward.push_back(reward);
    run.optimal.push_back(mu == best ? 1 : 0);
  }
  return run;
}

std::vector<BenchSeries> bandit_bench(const BenchSpec& spec) {
  validate(spec);
  std::vector<BenchSeries> out;
  for (const auto& a : spec.algorithms) {
    BenchSeries series{a, {}};
    for (std::size_t s = 0; s < spec.seeds; ++s) series.runs.push_back(bench_run(spec, a, spec.base_seed + s));
    out.push_back(std::move(series));
  }
  return out;
}

double range_mean(const std::vector<double>& column, std::size_t first, std::size_t last) {
  if (column.empty() || first >= column.size() || first > last) {
    throw std::invalid_argument("empty range");
  }
  last = std::min(last, column.size() - 1);
  double sum = 0.0;
  for (std::size_t i = first; i <= last; ++i) sum += column[i];
  return sum / static_cast<double>(last - first + 1);
}

}  // namespace lpwan
