#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <variant>
#include <vector>

namespace lpwan {

using Rng = std::mt19937_64;

// ---------------------------------------------------------------------------
// Energy-shaped reward
// ---------------------------------------------------------------------------

enum class RewardMode {
  /// (1-beta) + beta * e_min / E_arm, bounded in (0, 1].
  Frugal,
  /// (1-beta) + beta * E_arm / e_min, the printed form; favours costly arms.
  Literal,
};

/// Turns a binary ACK into a reward that also scores the arm's energy cost.
///
/// e_min starts at the cheapest arm's energy and tracks the cheapest arm
/// that has been acknowledged so far.
class RewardShaper {
 public:
  RewardShaper(double beta, std::vector<double> energy_table, RewardMode mode = RewardMode::Frugal);

  /// Reward for the observed ACK on `arm`; updates e_min after scoring.
  double shape(bool ack, std::size_t arm);

  double beta() const noexcept { return beta_; }
  double e_min() const noexcept { return e_min_; }
  RewardMode mode() const noexcept { return mode_; }
  const std::vector<double>& energy_table() const noexcept { return energy_; }

 private:
  double beta_;
  std::vector<double> energy_;
  double e_min_;
  RewardMode mode_;
};

// ---------------------------------------------------------------------------
// UUCB1
// ---------------------------------------------------------------------------

enum class UcbIndex {
  /// b_k = Z_k / T_k + sqrt(alpha log t / T_k)
  Mean,
  /// b_k = Z_k + sqrt(alpha log t / T_k), the accumulated-reward index.
  Accumulated,
};

struct Ucb1State {
  std::vector<double> z;
  std::vector<std::uint64_t> t_count;
  std::uint64_t round = 1;
  double alpha = 0.1;
  UcbIndex index = UcbIndex::Mean;
};

Ucb1State ucb1_init(std::size_t num_arms, double alpha, UcbIndex index = UcbIndex::Mean);

/// Index b_k(t) of every arm at the current round.
std::vector<double> ucb1_indices(const Ucb1State& state);

/// argmax of the index; ties are broken uniformly at random.
std::size_t ucb1_select(const Ucb1State& state, Rng& rng);

void ucb1_update(Ucb1State& state, std::size_t arm, double shaped_reward);

// ---------------------------------------------------------------------------
// UEXP3
// ---------------------------------------------------------------------------

struct Exp3State {
  std::vector<double> w;
  double rho = 0.4;
  std::uint64_t round = 1;
};

Exp3State exp3_init(std::size_t num_arms, double rho);

/// p_k = (1-rho) W_k / sum W + rho / |A|. Throws "weight overflow" on non-finite weights.
std::vector<double> exp3_distribution(const Exp3State& state);

struct Draw {
  std::size_t arm;
  double prob;
};

Draw exp3_sample(const Exp3State& state, Rng& rng);

/// W_arm *= exp(rho * reward / (|A| * prob_used)); weights are rescaled by
/// their maximum once any exceeds kExp3RescaleThreshold.
void exp3_update(Exp3State& state, std::size_t arm, double shaped_reward, double prob_used);

inline constexpr double kExp3RescaleThreshold = 1e100;

// ---------------------------------------------------------------------------
// Baselines
// ---------------------------------------------------------------------------

struct RandSel {};
struct FixedArm {
  std::size_t arm;
};
using Baseline = std::variant<RandSel, FixedArm>;

std::size_t baseline_select(const Baseline& kind, std::size_t num_arms, Rng& rng);

// ---------------------------------------------------------------------------
// Policy: one device's decision maker
// ---------------------------------------------------------------------------

/// Owns one learner (or baseline) and remembers what it drew last so that
/// observe() can hand the right probability to UEXP3.
class Policy {
 public:
  static Policy uucb1(std::size_t num_arms, double alpha, UcbIndex index);
  static Policy uexp3(std::size_t num_arms, double rho);
  static Policy randsel(std::size_t num_arms);
  static Policy fixed(std::size_t num_arms, std::size_t arm);

  std::size_t select(Rng& rng);
  void observe(std::size_t arm, double shaped_reward);

  std::size_t num_arms() const noexcept { return num_arms_; }
  bool learns() const noexcept;

  const Ucb1State* ucb1() const noexcept { return std::get_if<Ucb1State>(&state_); }
  const Exp3State* exp3() const noexcept { return std::get_if<Exp3State>(&state_); }

 private:
  using State = std::variant<Ucb1State, Exp3State, Baseline>;
  Policy(std::size_t num_arms, State state) : num_arms_(num_arms), state_(std::move(state)) {}

  std::size_t num_arms_;
  State state_;
  double last_prob_ = 1.0;
};

}  // namespace lpwan
