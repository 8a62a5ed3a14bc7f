#include "lpwan/bandit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace lpwan {

RewardShaper::RewardShaper(double beta, std::vector<double> energy_table, RewardMode mode)
    : beta_(beta), energy_(std::move(energy_table)), mode_(mode) {
  if (!(beta_ >= 0.0 && beta_ <= 1.0)) throw std::invalid_argument("beta must lie in [0, 1]");
  if (energy_.empty()) throw std::invalid_argument("energy table is empty");
  for (double e : energy_) {
    if (!(e > 0.0) || !std::isfinite(e)) throw std::invalid_argument("arm energies must be positive");
  }
  e_min_ = *std::min_element(energy_.begin(), energy_.end());
}

double RewardShaper::shape(bool ack, std::size_t arm) {
  if (arm >= energy_.size()) throw std::out_of_range("arm index out of range");
  if (!ack) return 0.0;
  const double e_arm = energy_[arm];
  const double ratio = mode_ == RewardMode::Frugal ? e_min_ / e_arm : e_arm / e_min_;
  const double reward = (1.0 - beta_) + beta_ * ratio;
  e_min_ = std::min(e_min_, e_arm);
  return reward;
}

Ucb1State ucb1_init(std::size_t num_arms, double alpha, UcbIndex index) {
  if (num_arms == 0) throw std::invalid_argument("ucb1_init: no arms");
  if (!(alpha >= 0.0)) throw std::invalid_argument("ucb1_init: alpha must be non-negative");
  Ucb1State s;
  s.z.assign(num_arms, 0.0);
  s.t_count.assign(num_arms, 1);
  s.round = 1;
  s.alpha = alpha;
  s.index = index;
  return s;
}

std::vector<double> ucb1_indices(const Ucb1State& state) {
  const double log_t = std::log(static_cast<double>(state.round));
  std::vector<double> b(state.z.size());
  for (std::size_t k = 0; k < b.size(); ++k) {
    const auto pulls = static_cast<double>(state.t_count[k]);
    const double value = state.index == UcbIndex::Mean ? state.z[k] / pulls : state.z[k];
    b[k] = value + std::sqrt(state.alpha * log_t / pulls);
  }
  return b;
}

std::size_t ucb1_select(const Ucb1State& state, Rng& rng) {
  const auto b = ucb1_indices(state);
  const double best = *std::max_element(b.begin(), b.end());
  std::vector<std::size_t> ties;
  for (std::size_t k = 0; k < b.size(); ++k) {
    if (b[k] == best) ties.push_back(k);
  }
  if (ties.size() == 1) return ties.front();
  std::uniform_int_distribution<std::size_t> pick(0, ties.size() - 1);
  return ties[pick(rng)];
}

void ucb1_update(Ucb1State& state, std::size_t arm, double shaped_reward) {
  if (arm >= state.z.size()) throw std::out_of_range("ucb1_update: arm index out of range");
  state.z[arm] += shaped_reward;
  state.t_count[arm] += 1;
  state.round += 1;
}

Exp3State exp3_init(std::size_t num_arms, double rho) {
  if (num_arms == 0) throw std::invalid_argument("exp3_init: no arms");
  if (!(rho > 0.0 && rho <= 1.0)) throw std::invalid_argument("exp3_init: rho must lie in (0, 1]");
  return Exp3State{std::vector<double>(num_arms, 1.0), rho, 1};
}

std::vector<double> exp3_distribution(const Exp3State& state) {
  double total = 0.0;
  for (double w : state.w) {
    if (!std::isfinite(w) || !(w > 0.0)) throw std::overflow_error("weight overflow");
    total += w;
  }
  if (!std::isfinite(total)) throw std::overflow_error("weight overflow");
  const double floor = state.rho / static_cast<double>(state.w.size());
  std::vector<double> p(state.w.size());
  for (std::size_t k = 0; k < p.size(); ++k) p[k] = (1.0 - state.rho) * state.w[k] / total + floor;
  return p;
}

Draw exp3_sample(const Exp3State& state, Rng& rng) {
  const auto p = exp3_distribution(state);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double u = unit(rng);
  double acc = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) {
    acc += p[k];
    if (u < acc) return {k, p[k]};
  }
  // u landed in the rounding slack above the last cumulative sum
  return {p.size() - 1, p.back()};
}

void exp3_update(Exp3State& state, std::size_t arm, double shaped_reward, double prob_used) {
  if (arm >= state.w.size()) throw std::out_of_range("exp3_update: arm index out of range");
  if (!(prob_used > 0.0)) throw std::invalid_argument("exp3_update: prob_used must be positive");
  const double k = static_cast<double>(state.w.size());
  state.w[arm] *= std::exp(state.rho * shaped_reward / (k * prob_used));
  state.round += 1;

  const double top = *std::max_element(state.w.begin(), state.w.end());
  if (top > kExp3RescaleThreshold) {
    for (double& w : state.w) {
      // tiny weights may underflow; keep them strictly positive
      w = std::max(w / top, std::numeric_limits<double>::min());
    }
  }
}

std::size_t baseline_select(const Baseline& kind, std::size_t num_arms, Rng& rng) {
  if (const auto* fixed = std::get_if<FixedArm>(&kind)) return fixed->arm;
  if (num_arms <= 1) return 0;
  std::uniform_int_distribution<std::size_t> pick(0, num_arms - 1);
  return pick(rng);
}

Policy Policy::uucb1(std::size_t num_arms, double alpha, UcbIndex index) {
  return Policy(num_arms, ucb1_init(num_arms, alpha, index));
}

Policy Policy::uexp3(std::size_t num_arms, double rho) {
  return Policy(num_arms, exp3_init(num_arms, rho));
}

Policy Policy::randsel(std::size_t num_arms) {
  if (num_arms == 0) throw std::invalid_argument("randsel: no arms");
  return Policy(num_arms, Baseline{RandSel{}});
}

Policy Policy::fixed(std::size_t num_arms, std::size_t arm) {
  if (arm >= num_arms) throw std::out_of_range("fixed policy: arm index out of range");
  return Policy(num_arms, Baseline{FixedArm{arm}});
}

bool Policy::learns() const noexcept { return !std::holds_alternative<Baseline>(state_); }

std::size_t Policy::select(Rng& rng) {
  if (auto* ucb = std::get_if<Ucb1State>(&state_)) return ucb1_select(*ucb, rng);
  if (auto* exp3 = std::get_if<Exp3State>(&state_)) {
    const Draw d = exp3_sample(*exp3, rng);
    last_prob_ = d.prob;
    return d.arm;
  }
  return baseline_select(std::get<Baseline>(state_), num_arms_, rng);
}

void Policy::observe(std::size_t arm, double shaped_reward) {
  if (auto* ucb = std::get_if<Ucb1State>(&state_)) {
    ucb1_update(*ucb, arm, shaped_reward);
  } else if (auto* exp3 = std::get_if<Exp3State>(&state_)) {
    exp3_update(*exp3, arm, shaped_reward, last_prob_);
  }
}

}  // namespace lpwan
