#pragma once

// Synthetic Bernoulli bandit harness for checking the learners away from
// the network simulator.

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "lpwan/bandit.hpp"
#include "lpwan/netsim.hpp"

namespace lpwan {

struct BenchSpec {
  std::vector<double> arm_means{0.9, 0.5};
  std::size_t rounds = 10000;
  std::size_t seeds = 100;
  /// Probability that the learner sees the inverted outcome.
  double flip_prob = 0.0;
  std::vector<AlgorithmChoice> algorithms{{Algorithm::Uucb1}, {Algorithm::Uexp3}, {Algorithm::RandSel}};
  double alpha = 0.1;
  double rho = 0.4;
  UcbIndex ucb_index = UcbIndex::Mean;
  std::uint64_t base_seed = 1;
};

void validate(const BenchSpec& spec);

/// One algorithm on one seed; every vector has one entry per round.
struct BenchRun {
  std::uint64_t seed = 0;
  /// Cumulative pseudo-regret sum_t (mu* - mu_{a_t}).
  std::vector<double> regret;
  /// Cumulative true (unflipped) reward.
  std::vector<double> reward;
  std::vector<std::uint8_t> optimal;
};

struct BenchSeries {
  AlgorithmChoice algorithm;
  std::vector<BenchRun> runs;

  /// Cross-seed means, one entry per round.
  std::vector<double> mean_regret() const;
  std::vector<double> mean_reward() const;
  std::vector<double> optimal_rate() const;
};

BenchRun bench_run(const BenchSpec& spec, const AlgorithmChoice& algorithm, std::uint64_t seed);

std::vector<BenchSeries> bandit_bench(const BenchSpec& spec);

/// Mean of column[first..last] (inclusive, 0-based rounds).
double range_mean(const std::vector<double>& column, std::size_t first, std::size_t last);

}  // namespace lpwan
