#include "lpwan/netsim.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numbers>
#include <queue>
#include <stdexcept>
#include <thread>

namespace lpwan {

namespace {

constexpr double kMinRadius = 1.0;

Rng seeded(std::uint64_t seed, std::uint64_t stream, std::uint64_t index = 0) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(index),
                    static_cast<std::uint32_t>(index >> 32)};
  return Rng(seq);
}

enum Stream : std::uint64_t { kDeployStream = 1, kChannelStream = 2, kDeviceStream = 3 };

void check_probability(double p, const char* what) {
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument(std::string(what) + " must lie in [0, 1]");
}

}  // namespace

double ExternalInterference::at(SpreadingFactor sf, int channel) const {
  const auto it = erasure_prob.find({sf.value(), channel});
  return it == erasure_prob.end() ? 0.0 : it->second;
}

std::string to_string(const AlgorithmChoice& a) {
  switch (a.kind) {
    case Algorithm::Uucb1: return "uucb1";
    case Algorithm::Uexp3: return "uexp3";
    case Algorithm::RandSel: return "randsel";
    case Algorithm::EqLoad: return "eqload";
    case Algorithm::Fixed: return "fixed:" + std::to_string(a.fixed_arm);
  }
  return "unknown";
}

AlgorithmChoice parse_algorithm(const std::string& text) {
  if (text == "uucb1") return {Algorithm::Uucb1, 0};
  if (text == "uexp3") return {Algorithm::Uexp3, 0};
  if (text == "randsel") return {Algorithm::RandSel, 0};
  if (text == "eqload") return {Algorithm::EqLoad, 0};
  if (text.rfind("fixed:", 0) == 0) {
    const std::string digits = text.substr(6);
    if (digits.empty() || !std::all_of(digits.begin(), digits.end(), ::isdigit)) {
      throw std::invalid_argument("fixed policy needs an arm index: " + text);
    }
    return {Algorithm::Fixed, static_cast<std::size_t>(std::stoull(digits))};
  }
  throw std::invalid_argument("unknown algorithm '" + text +
                              "' (expected uucb1, uexp3, randsel, eqload or fixed:<arm>)");
}

void validate(const SimConfig& cfg) {
  validate(cfg.phy);
  if (cfg.density_per_m2 < 0.0) throw std::invalid_argument("density must be non-negative");
  if (cfg.density_per_m2 == 0.0 && cfg.n_devices == 0) throw std::invalid_argument("no devices");
  if (!(cfg.cell_radius_m > kMinRadius)) throw std::invalid_argument("cell radius must exceed 1 m");
  if (!(cfg.t_rep_s > 0.0)) throw std::invalid_argument("t_rep must be positive");
  if (cfg.payload_bytes == 0) throw std::invalid_argument("empty payload");
  if (cfg.sf_set.empty()) throw std::invalid_argument("sf_set is empty");
  for (int sf : cfg.sf_set) SpreadingFactor{sf};
  if (!(cfg.pathloss.gain > 0.0)) throw std::invalid_argument("pathloss gain must be positive");
  if (!(cfg.pathloss.exponent >= 2.0)) throw std::invalid_argument("pathloss exponent must be >= 2");
  check_probability(cfg.learning.beta, "beta");
  if (!(cfg.learning.alpha >= 0.0)) throw std::invalid_argument("alpha must be non-negative");
  if (!(cfg.learning.rho > 0.0 && cfg.learning.rho <= 1.0)) {
    throw std::invalid_argument("rho must lie in (0, 1]");
  }
  for (const auto& [key, p] : cfg.external.erasure_prob) check_probability(p, "erasure probability");
  check_probability(cfg.adversary.flip_prob, "flip probability");
  if (cfg.algorithm.kind == Algorithm::Fixed && cfg.algorithm.fixed_arm >= arms(cfg).size()) {
    throw std::invalid_argument("fixed arm index out of range");
  }
}

std::vector<SpreadingFactor> spreading_factors(const SimConfig& cfg) {
  std::vector<SpreadingFactor> sfs;
  for (int sf : cfg.sf_set) sfs.emplace_back(sf);
  return sfs;
}

std::vector<double> power_levels(const SimConfig& cfg) {
  if (cfg.power_control) return cfg.phy.power_set_dbm;
  return {cfg.fixed_power_dbm};
}

std::vector<Action> arms(const SimConfig& cfg) {
  const auto powers = power_levels(cfg);
  const auto sfs = spreading_factors(cfg);
  return action_space(powers, sfs, cfg.phy.num_channels);
}

std::vector<Device> deploy(const SimConfig& cfg, Rng& rng) {
  std::size_t count = cfg.n_devices;
  const double r_max = cfg.cell_radius_m;
  if (cfg.density_per_m2 > 0.0) {
    std::poisson_distribution<std::size_t> n(cfg.density_per_m2 * std::numbers::pi * r_max * r_max);
    count = n(rng);
  }
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<Device> devices(count);
  for (std::size_t i = 0; i < count; ++i) {
    devices[i].id = i;
    devices[i].radius = std::max(kMinRadius, r_max * std::sqrt(unit(rng)));
    devices[i].angle = 2.0 * std::numbers::pi * unit(rng);
  }
  return devices;
}

Receiver Receiver::from(const PhyParams& phy, ExternalInterference external) {
  Receiver rx;
  rx.noise_w = noise_power(phy);
  for (std::size_t i = 0; i < rx.snr_threshold.size(); ++i) {
    rx.snr_threshold[i] = db_to_linear(phy.snr_thresholds_db[i]);
  }
  rx.sir_threshold = db_to_linear(phy.sir_threshold_db);
  rx.external = std::move(external);
  return rx;
}

Attempt make_attempt(std::size_t device, SpreadingFactor sf, int channel, double start, double airtime,
                     double rx_power_w, Rng& rng, bool independent_fading) {
  std::exponential_distribution<double> rayleigh(1.0);
  Attempt a;
  a.device = device;
  a.sf = sf;
  a.channel = channel;
  a.start = start;
  a.end = start + airtime;
  a.rx_power_w = rx_power_w;
  a.fading = rayleigh(rng);
  a.noise_fading = independent_fading ? rayleigh(rng) : a.fading;
  return a;
}

bool overlaps(const Attempt& a, const Attempt& b) noexcept {
  return a.channel == b.channel && a.sf == b.sf && a.start < b.end && b.start < a.end;
}

bool evaluate_attempt(const Attempt& tx, std::span<const Attempt> concurrent, const Receiver& rx,
                      Rng& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const bool erased = unit(rng) < rx.external.at(tx.sf, tx.channel);

  const bool snr_ok = tx.rx_power_w * tx.noise_fading >= rx.snr_threshold[tx.sf.offset()] * rx.noise_w;
  double interference = 0.0;
  for (const Attempt& other : concurrent) interference += other.rx_power_w * other.fading;
  const bool sir_ok = tx.rx_power_w * tx.fading >= rx.sir_threshold * interference;
  return snr_ok && sir_ok && !erased;
}

bool feedback(bool success, const AdversaryModel& adv, Rng& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const bool flip = unit(rng) < adv.flip_prob;
  return success != flip;
}

namespace {

Policy make_policy(const SimConfig& cfg, const std::vector<Action>& arm_list, const Device& device,
                   std::optional<SpreadingFactor> eqload_sf) {
  const std::size_t n = arm_list.size();
  switch (cfg.algorithm.kind) {
    case Algorithm::Uucb1: return Policy::uucb1(n, cfg.learning.alpha, cfg.learning.ucb_index);
    case Algorithm::Uexp3: return Policy::uexp3(n, cfg.learning.rho);
    case Algorithm::RandSel: return Policy::randsel(n);
    case Algorithm::Fixed: return Policy::fixed(n, cfg.algorithm.fixed_arm);
    case Algorithm::EqLoad: {
      // the highest available power, the assigned SF, channels dealt round-robin
      const int channel = static_cast<int>(device.id % static_cast<std::size_t>(cfg.phy.num_channels));
      double top_power = arm_list.front().power_dbm;
      for (const Action& a : arm_list) top_power = std::max(top_power, a.power_dbm);
      for (std::size_t k = 0; k < n; ++k) {
        const Action& a = arm_list[k];
        if (a.power_dbm == top_power && a.sf == *eqload_sf && a.channel == channel) {
          return Policy::fixed(n, k);
        }
      }
      throw std::logic_error("eqload: assigned arm not in action space");
    }
  }
  throw std::logic_error("unhandled algorithm");
}

struct Event {
  double time;
  int kind;  // 0 = end of attempt, 1 = start of attempt; ends first at equal times
  std::uint64_t seq;
  std::size_t index;  // attempt for ends, device for starts

  bool operator>(const Event& o) const {
    if (time != o.time) return time > o.time;
    if (kind != o.kind) return kind > o.kind;
    return seq > o.seq;
  }
};

}  // namespace

SimResult simulate(const SimConfig& cfg) {
  validate(cfg);
  SimResult result;
  result.arms = arms(cfg);
  const auto& arm_list = result.arms;
  const std::size_t horizon = cfg.packets_per_device;

  MetricsLog& log = result.log;
  log.algorithm = to_string(cfg.algorithm) + (cfg.power_control ? "+pc" : "");
  log.seed_count = 1;
  log.seeds = {cfg.seed};
  if (horizon == 0) return result;

  Rng deploy_rng = seeded(cfg.seed, kDeployStream);
  Rng channel_rng = seeded(cfg.seed, kChannelStream);
  result.devices = deploy(cfg, deploy_rng);
  auto& devices = result.devices;
  const std::size_t n = devices.size();
  if (n == 0) {
    log.success_rate.assign(horizon, 0.0);
    log.energy_j.assign(horizon, 0.0);
    return result;
  }

  std::vector<SpreadingFactor> eqload;
  if (cfg.algorithm.kind == Algorithm::EqLoad) {
    std::vector<double> radii;
    for (const Device& d : devices) radii.push_back(d.radius);
    eqload = eqload_allocate(radii, cfg.phy, spreading_factors(cfg));
  }

  // per-arm constants
  std::vector<double> airtime, energy, tx_power_w;
  for (const Action& a : arm_list) {
    airtime.push_back(time_on_air(cfg.payload_bytes, a.sf, cfg.phy));
    energy.push_back(tx_energy(a, cfg.payload_bytes, cfg.phy));
    tx_power_w.push_back(dbm_to_watts(a.power_dbm));
  }
  const Receiver receiver = Receiver::from(cfg.phy, cfg.external);

  std::vector<Rng> device_rng;
  std::vector<RewardShaper> shapers;
  device_rng.reserve(n);
  shapers.reserve(n);
  for (Device& d : devices) {
    device_rng.push_back(seeded(cfg.seed, kDeviceStream, d.id));
    d.policy = make_policy(cfg, arm_list, d,
                           eqload.empty() ? std::nullopt : std::optional(eqload[d.id]));
    shapers.emplace_back(cfg.learning.beta, energy, cfg.learning.reward_mode);
  }

  std::vector<double> success_sum(horizon, 0.0), energy_sum(horizon, 0.0);
  std::vector<Attempt> attempts;
  std::vector<std::size_t> attempt_arm;
  std::vector<std::vector<std::size_t>> overlap;
  // attempts currently on the air, keyed by channel * 6 + SF offset
  std::vector<std::vector<std::size_t>> on_air(static_cast<std::size_t>(cfg.phy.num_channels) * 6);

  std::priority_queue<Event, std::vector<Event>, std::greater<>> queue;
  std::uint64_t seq = 0;
  const double mean_gap = cfg.t_rep_s;
  auto schedule_start = [&](std::size_t dev, double after) {
    std::exponential_distribution<double> gap(1.0 / mean_gap);
    queue.push({after + gap(device_rng[dev]), 1, seq++, dev});
  };
  for (std::size_t i = 0; i < n; ++i) schedule_start(i, 0.0);

  std::size_t finished = 0;
  std::vector<Attempt> interferers;
  while (finished < n && !queue.empty()) {
    const Event ev = queue.top();
    queue.pop();

    if (ev.kind == 1) {
      Device& d = devices[ev.index];
      const std::size_t arm = d.policy->select(device_rng[ev.index]);
      const Action& a = arm_list[arm];
      const double rx_power = tx_power_w[arm] * pathloss(d.radius, cfg.pathloss.gain, cfg.pathloss.exponent);
      const std::size_t id = attempts.size();
      attempts.push_back(make_attempt(d.id, a.sf, a.channel, ev.time, airtime[arm], rx_power, channel_rng,
                                      cfg.independent_fading));
      attempt_arm.push_back(arm);
      overlap.emplace_back();
      auto& bucket = on_air[static_cast<std::size_t>(a.channel) * 6 + a.sf.offset()];
      for (std::size_t other : bucket) {
        overlap[other].push_back(id);
        overlap[id].push_back(other);
      }
      bucket.push_back(id);
      queue.push({attempts[id].end, 0, seq++, id});
      continue;
    }

    const std::size_t id = ev.index;
    const Attempt& tx = attempts[id];
    auto& bucket = on_air[static_cast<std::size_t>(tx.channel) * 6 + tx.sf.offset()];
    bucket.erase(std::find(bucket.begin(), bucket.end(), id));

    interferers.clear();
    for (std::size_t other : overlap[id]) interferers.push_back(attempts[other]);
    const bool success = evaluate_attempt(tx, interferers, receiver, channel_rng);
    const bool ack = feedback(success, cfg.adversary, channel_rng);

    const std::size_t arm = attempt_arm[id];
    Device& d = devices[tx.device];
    const double reward = shapers[d.id].shape(ack, arm);
    d.policy->observe(arm, reward);
    d.energy_spent += energy[arm];
    d.arm_history.push_back(arm);
    if (d.packets_sent < horizon) {
      success_sum[d.packets_sent] += success ? 1.0 : 0.0;
      energy_sum[d.packets_sent] += energy[arm];
      d.packets_succeeded += success ? 1 : 0;
      if (++d.packets_sent == horizon) ++finished;
    }
    overlap[id].clear();
    overlap[id].shrink_to_fit();
    schedule_start(d.id, tx.end);
  }

  log.success_rate.resize(horizon);
  log.energy_j.resize(horizon);
  for (std::size_t k = 0; k < horizon; ++k) {
    log.success_rate[k] = success_sum[k] / static_cast<double>(n);
    log.energy_j[k] = energy_sum[k] / static_cast<double>(n);
  }
  return result;
}

MetricsLog run(const SimConfig& cfg) { return simulate(cfg).log; }

std::vector<MetricsLog> run_seeds(const SimConfig& cfg, std::span<const std::uint64_t> seeds) {
  std::vector<MetricsLog> logs(seeds.size());
  std::vector<std::exception_ptr> errors(seeds.size());
  std::atomic<std::size_t> next{0};
  const std::size_t workers =
      std::max<std::size_t>(1, std::min<std::size_t>(seeds.size(), std::thread::hardware_concurrency()));
  {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < seeds.size(); i = next++) {
          try {
            SimConfig c = cfg;
            c.seed = seeds[i];
            logs[i] = run(c);
          } catch (...) {
            errors[i] = std::current_exception();
          }
        }
      });
    }
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return logs;
}

MetricsLog aggregate(std::span<const MetricsLog> logs) {
  if (logs.empty()) throw std::invalid_argument("aggregate: no logs");
  MetricsLog out;
  out.algorithm = logs.front().algorithm;
  const std::size_t horizon = logs.front().size();
  out.success_rate.assign(horizon, 0.0);
  out.energy_j.assign(horizon, 0.0);
  for (const MetricsLog& log : logs) {
    if (log.size() != horizon || log.energy_j.size() != horizon) {
      throw std::invalid_argument("aggregate: mismatched horizons");
    }
    for (std::size_t k = 0; k < horizon; ++k) {
      out.success_rate[k] += log.success_rate[k];
      out.energy_j[k] += log.energy_j[k];
    }
    out.seed_count += log.seed_count;
    out.seeds.insert(out.seeds.end(), log.seeds.begin(), log.seeds.end());
  }
  const double count = static_cast<double>(logs.size());
  for (std::size_t k = 0; k < horizon; ++k) {
    out.success_rate[k] /= count;
    out.energy_j[k] /= count;
  }
  if (logs.size() == 1) out.seed_count = logs.front().seed_count;
  return out;
}

double window_mean(const std::vector<double>& column, std::size_t first, std::size_t last) {
  if (column.empty()) throw std::invalid_argument("window_mean: empty column");
  last = std::min(last, column.size() - 1);
  if (first > last) throw std::invalid_argument("window_mean: empty window");
  double sum = 0.0;
  for (std::size_t k = first; k <= last; ++k) sum += column[k];
  return sum / static_cast<double>(last - first + 1);
}

bool matched_trial(SpreadingFactor sf, double z, const DensityMatrix& dm, const AnalyticScenario& sc,
                   const RingPartition& part, Rng& rng) {
  const std::size_t c = sf_column(sc, sf);
  const double p_t = dbm_to_watts(sc.p_t_dbm);
  const double airtime = time_on_air(sc.payload_bytes, sf, sc.phy);
  const double activity = airtime / sc.t_rep_s;
  const Receiver rx = Receiver::from(sc.phy);

  const Attempt tx = make_attempt(0, sf, 0, 0.0, airtime,
                                  p_t * pathloss(z, sc.pathloss.gain, sc.pathloss.exponent), rng, true);
  std::vector<Attempt> interferers;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (std::size_t j = 0; j < part.size(); ++j) {
    const double mean_count = dm(j, c) * activity * part.area(j);
    if (mean_count <= 0.0) continue;
    std::poisson_distribution<std::size_t> count(mean_count);
    const std::size_t k = count(rng);
    const double a2 = part.inner(j) * part.inner(j);
    const double b2 = part.outer(j) * part.outer(j);
    for (std::size_t i = 0; i < k; ++i) {
      const double r = std::sqrt(a2 + (1.0 - unit(rng)) * (b2 - a2));
      interferers.push_back(make_attempt(i + 1, sf, 0, 0.0, airtime,
                                         p_t * pathloss(r, sc.pathloss.gain, sc.pathloss.exponent), rng));
    }
  }
  return evaluate_attempt(tx, interferers, rx, rng);
}

Estimate binomial_estimate(std::size_t successes, std::size_t trials) {
  Estimate e;
  e.trials = trials;
  if (trials == 0) return e;
  e.mean = static_cast<double>(successes) / static_cast<double>(trials);
  e.std_error = std::sqrt(e.mean * (1.0 - e.mean) / static_cast<double>(trials));
  return e;
}

Estimate estimate_success(SpreadingFactor sf, double z, const DensityMatrix& dm,
                          const AnalyticScenario& sc, const RingPartition& part, std::size_t trials,
                          std::uint64_t seed) {
  Rng rng = seeded(seed, 0x6d63);
  std::size_t wins = 0;
  for (std::size_t t = 0; t < trials; ++t) wins += matched_trial(sf, z, dm, sc, part, rng) ? 1 : 0;
  return binomial_estimate(wins, trials);
}

AnalyticScenario analytic_scenario(const SimConfig& cfg) {
  AnalyticScenario sc;
  const double area = std::numbers::pi * cfg.cell_radius_m * cfg.cell_radius_m;
  sc.lambda_total = cfg.density_per_m2 > 0.0 ? cfg.density_per_m2
                                             : static_cast<double>(cfg.n_devices) / area;
  sc.t_rep_s = cfg.t_rep_s;
  sc.payload_bytes = cfg.payload_bytes;
  sc.p_t_dbm = cfg.fixed_power_dbm;
  sc.pathloss = cfg.pathloss;
  sc.phy = cfg.phy;
  sc.sfs = spreading_factors(cfg);
  sc.beta = cfg.learning.beta;
  return sc;
}

}  // namespace lpwan
