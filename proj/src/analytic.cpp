#include "lpwan/analytic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <stdexcept>

#include "lpwan/quadrature.hpp"

namespace lpwan {

namespace {

constexpr double kPi = std::numbers::pi;
// Devices never sit closer than this to the gateway; ring integrals start here.
constexpr double kMinRadius = 1.0;
constexpr QuadratureTolerance kRadialTol{1e-10, 0.0, 40};

double duty_cycle(SpreadingFactor sf, const AnalyticScenario& sc) {
  return time_on_air(sc.payload_bytes, sf, sc.phy) / sc.t_rep_s;
}

double noise_coefficient(SpreadingFactor sf, const AnalyticScenario& sc) {
  return noise_power(sc.phy) * db_to_linear(snr_threshold_db(sf, sc.phy)) /
         (dbm_to_watts(sc.p_t_dbm) * sc.pathloss.gain);
}

// Everything success_probability needs, evaluated once per scenario.
struct Model {
  const AnalyticScenario& sc;
  const RingPartition& part;
  double gamma_i;
  std::vector<double> duty;
  std::vector<double> noise_coef;

  Model(const AnalyticScenario& s, const RingPartition& p)
      : sc(s), part(p), gamma_i(db_to_linear(s.phy.sir_threshold_db)) {
    for (SpreadingFactor sf : s.sfs) {
      duty.push_back(duty_cycle(sf, s));
      noise_coef.push_back(noise_coefficient(sf, s));
    }
  }

  double kernel(double z, std::size_t j) const {
    return ring_kernel(z, part.inner(j), part.outer(j), gamma_i, sc.pathloss.exponent);
  }

  double noise_term(std::size_t c, double z) const {
    return noise_coef[c] * std::pow(z, sc.pathloss.exponent);
  }

  /// Interference exponent of column c at z, optionally leaving one ring out.
  double interference(std::size_t c, double z, const DensityMatrix& dm,
                      std::size_t skip = std::numeric_limits<std::size_t>::max()) const {
    double acc = 0.0;
    for (std::size_t j = 0; j < part.size(); ++j) {
      if (j == skip || dm(j, c) == 0.0) continue;
      acc += dm(j, c) * duty[c] * kernel(z, j);
    }
    return acc;
  }

  double success(std::size_t c, double z, const DensityMatrix& dm) const {
    return std::exp(-interference(c, z, dm) - noise_term(c, z));
  }

  double ring_lo(std::size_t j) const { return std::max(part.inner(j), kMinRadius); }

  double ring_mean(std::size_t c, std::size_t j, const DensityMatrix& dm) const {
    const double lo = ring_lo(j);
    const double hi = part.outer(j);
    if (hi <= lo) return success(c, hi, dm);
    return adaptive_simpson([&](double u) { return success(c, lo + u * (hi - lo), dm); }, 0.0, 1.0,
                            kRadialTol);
  }

  /// Factor turning a ring mean into the ring's contribution to the reliability term.
  double reliability_scale(std::size_t j) const {
    if (sc.literal_integral) return part.outer(j) - ring_lo(j);
    return ring_weight(j, sc, part);
  }
};

void check_model_inputs(const DensityMatrix& dm, const AnalyticScenario& sc,
                        const RingPartition& part) {
  if (dm.rings() != part.size() || dm.sfs() != sc.sfs.size()) {
    throw std::invalid_argument("density matrix shape does not match scenario and partition");
  }
}

}  // namespace

RingPartition RingPartition::uniform(double cell_radius, std::size_t rings) {
  if (!(cell_radius > 0.0) || rings == 0) throw std::invalid_argument("invalid ring partition");
  RingPartition p;
  p.boundaries.resize(rings + 1);
  for (std::size_t j = 0; j <= rings; ++j) {
    p.boundaries[j] = cell_radius * static_cast<double>(j) / static_cast<double>(rings);
  }
  p.boundaries.back() = cell_radius;
  return p;
}

double RingPartition::area(std::size_t j) const {
  const double a = inner(j);
  const double b = outer(j);
  return kPi * (b * b - a * a);
}

void validate(const RingPartition& part) {
  if (part.boundaries.size() < 2) throw std::invalid_argument("ring partition needs at least one ring");
  if (part.boundaries.front() != 0.0) throw std::invalid_argument("ring partition must start at 0");
  for (std::size_t i = 1; i < part.boundaries.size(); ++i) {
    if (!(part.boundaries[i] > part.boundaries[i - 1])) {
      throw std::invalid_argument("ring boundaries must be strictly increasing");
    }
  }
}

DensityMatrix::DensityMatrix(std::size_t rings, std::size_t sfs, double fill)
    : rings_(rings), sfs_(sfs), data_(rings * sfs, fill) {}

DensityMatrix DensityMatrix::single_sf(std::size_t rings, std::size_t sfs, std::size_t sf_column,
                                       double lambda_total) {
  DensityMatrix dm(rings, sfs);
  for (std::size_t j = 0; j < rings; ++j) dm(j, sf_column) = lambda_total;
  return dm;
}

bool DensityMatrix::feasible(double lambda_total, double rel_tol) const {
  for (std::size_t j = 0; j < rings_; ++j) {
    double sum = 0.0;
    for (std::size_t c = 0; c < sfs_; ++c) {
      const double v = (*this)(j, c);
      if (!(v >= 0.0) || !std::isfinite(v)) return false;
      sum += v;
    }
    if (std::abs(sum - lambda_total) > rel_tol * std::abs(lambda_total)) return false;
  }
  return true;
}

void validate(const AnalyticScenario& sc) {
  validate(sc.phy);
  if (sc.sfs.empty()) throw std::invalid_argument("scenario has no spreading factors");
  if (!(sc.lambda_total >= 0.0)) throw std::invalid_argument("lambda_total must be non-negative");
  if (!(sc.pathloss.exponent >= 2.0)) throw std::invalid_argument("pathloss exponent must be >= 2");
  if (!(sc.pathloss.gain > 0.0)) throw std::invalid_argument("pathloss gain must be positive");
  if (!(sc.beta >= 0.0 && sc.beta <= 1.0)) throw std::invalid_argument("beta must lie in [0, 1]");
  for (SpreadingFactor sf : sc.sfs) {
    if (!(sc.t_rep_s > time_on_air(sc.payload_bytes, sf, sc.phy))) {
      throw std::invalid_argument("t_rep must exceed the longest airtime");
    }
  }
}

std::size_t sf_column(const AnalyticScenario& sc, SpreadingFactor sf) {
  const auto it = std::find(sc.sfs.begin(), sc.sfs.end(), sf);
  if (it == sc.sfs.end()) throw std::invalid_argument("SF not part of the scenario");
  return static_cast<std::size_t>(it - sc.sfs.begin());
}

double pathloss(double r, double g, double delta) {
  if (!(r > 0.0)) throw std::domain_error("pathloss: singular at origin");
  return g * std::pow(r, -delta);
}

double q_closed_form(double x, double z, double gamma_i) {
  if (!(z > 0.0)) throw std::domain_error("q_closed_form: z must be positive");
  if (!(gamma_i > 0.0)) throw std::domain_error("q_closed_form: gamma_i must be positive");
  const double scale = std::sqrt(gamma_i) * z * z;
  return kPi * std::atan(x * x / scale) * scale;
}

double ring_kernel_quadrature(double z, double r1, double r2, double gamma_i, double delta) {
  if (!(z > 0.0)) throw std::domain_error("ring kernel: z must be positive");
  if (r2 <= r1) return 0.0;
  // r = z x; the integrand x / (1 + x^delta / gamma) peaks near x = gamma^(1/delta)
  const auto f = [gamma_i, delta](double x) { return x / (1.0 + std::pow(x, delta) / gamma_i); };
  const double x1 = r1 / z;
  const double x2 = r2 / z;
  const double peak = std::pow(gamma_i, 1.0 / delta);

  // Split on a geometric grid around the peak so every piece is resolved at its own scale.
  std::vector<double> cuts{x1};
  for (int k = -30; k <= 30; ++k) {
    const double c = peak * std::ldexp(1.0, k);
    if (c > x1 && c < x2) cuts.push_back(c);
  }
  cuts.push_back(x2);

  double total = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    total += adaptive_simpson(f, cuts[i], cuts[i + 1], QuadratureTolerance{1e-300, 1e-14, 48});
  }
  return 2.0 * kPi * z * z * total;
}

double ring_kernel(double z, double r1, double r2, double gamma_i, double delta) {
  if (delta == 4.0) return q_closed_form(r2, z, gamma_i) - q_closed_form(r1, z, gamma_i);
  return ring_kernel_quadrature(z, r1, r2, gamma_i, delta);
}

double ring_exponent(double z, SpreadingFactor sf, std::size_t j, const DensityMatrix& dm,
                     const AnalyticScenario& sc, const RingPartition& part) {
  check_model_inputs(dm, sc, part);
  const std::size_t c = sf_column(sc, sf);
  if (dm(j, c) == 0.0) return 0.0;
  const double gamma_i = db_to_linear(sc.phy.sir_threshold_db);
  return dm(j, c) * duty_cycle(sf, sc) *
         ring_kernel(z, part.inner(j), part.outer(j), gamma_i, sc.pathloss.exponent);
}

double ring_exponent_quadrature(double z, SpreadingFactor sf, std::size_t j, const DensityMatrix& dm,
                                const AnalyticScenario& sc, const RingPartition& part) {
  check_model_inputs(dm, sc, part);
  const std::size_t c = sf_column(sc, sf);
  const double gamma_i = db_to_linear(sc.phy.sir_threshold_db);
  return dm(j, c) * duty_cycle(sf, sc) *
         ring_kernel_quadrature(z, part.inner(j), part.outer(j), gamma_i, sc.pathloss.exponent);
}

double noise_exponent(SpreadingFactor sf, double z, const AnalyticScenario& sc) {
  return noise_coefficient(sf, sc) * std::pow(z, sc.pathloss.exponent);
}

double success_probability(SpreadingFactor sf, double z, const DensityMatrix& dm,
                           const AnalyticScenario& sc, const RingPartition& part) {
  check_model_inputs(dm, sc, part);
  return Model(sc, part).success(sf_column(sc, sf), z, dm);
}

double ring_mean_success(SpreadingFactor sf, std::size_t j, const DensityMatrix& dm,
                         const AnalyticScenario& sc, const RingPartition& part) {
  check_model_inputs(dm, sc, part);
  return Model(sc, part).ring_mean(sf_column(sc, sf), j, dm);
}

std::vector<double> energy_scores(const AnalyticScenario& sc) {
  const SpreadingFactor lowest = *std::min_element(sc.sfs.begin(), sc.sfs.end());
  const double t_low = time_on_air(sc.payload_bytes, lowest, sc.phy);
  std::vector<double> e;
  for (SpreadingFactor sf : sc.sfs) {
    const double t = time_on_air(sc.payload_bytes, sf, sc.phy);
    e.push_back(sc.energy_term == EnergyTerm::AirtimeRatio ? t_low / t : t / t_low);
  }
  return e;
}

double ring_weight(std::size_t j, const AnalyticScenario& sc, const RingPartition& part) {
  if (sc.literal_integral) return 1.0;
  const double r = part.radius();
  return part.area(j) / (kPi * r * r);
}

ObjectiveValue objective(const DensityMatrix& dm, const AnalyticScenario& sc,
                         const RingPartition& part) {
  check_model_inputs(dm, sc, part);
  const Model model(sc, part);
  const auto e = energy_scores(sc);
  ObjectiveValue v;
  if (sc.lambda_total <= 0.0) return v;
  for (std::size_t j = 0; j < part.size(); ++j) {
    for (std::size_t c = 0; c < sc.sfs.size(); ++c) {
      const double share = dm(j, c) / sc.lambda_total;
      if (share == 0.0) continue;
      v.reliability += share * model.reliability_scale(j) * model.ring_mean(c, j, dm);
      v.energy += share * ring_weight(j, sc, part) * e[c];
    }
  }
  v.total = (1.0 - sc.beta) * v.reliability + sc.beta * v.energy;
  return v;
}

namespace {

// Contribution of column c to the objective as a function of ring j's share
// k / K on that column, all other entries held fixed. The objective is a sum
// of such per-column terms, so the per-ring simplex search separates.
std::vector<double> column_profile(const Model& model, const DensityMatrix& dm, std::size_t j,
                                   std::size_t c, int grid, double energy_score) {
  const AnalyticScenario& sc = model.sc;
  const RingPartition& part = model.part;
  const std::size_t k_count = static_cast<std::size_t>(grid) + 1;
  const double lambda = sc.lambda_total;
  std::vector<double> profile(k_count, 0.0);

  for (std::size_t jj = 0; jj < part.size(); ++jj) {
    const bool own = jj == j;
    if (!own && dm(jj, c) == 0.0) continue;

    const double lo = model.ring_lo(jj);
    const double hi = part.outer(jj);
    auto integrand = [&](double u, std::span<double> out) {
      const double z = lo + u * (hi - lo);
      const double base = model.interference(c, z, dm, j) + model.noise_term(c, z);
      const double step = model.duty[c] * lambda / grid * model.kernel(z, j);
      for (std::size_t k = 0; k < out.size(); ++k) out[k] = std::exp(-base - step * k);
    };
    const auto means = hi > lo ? adaptive_simpson_vec(integrand, 0.0, 1.0, k_count, kRadialTol)
                               : std::vector<double>(k_count, 0.0);
    const double rel_scale = model.reliability_scale(jj);
    const double weight = ring_weight(jj, sc, part);
    for (std::size_t k = 0; k < k_count; ++k) {
      const double share = own ? static_cast<double>(k) / grid : dm(jj, c) / lambda;
      profile[k] += share * ((1.0 - sc.beta) * rel_scale * means[k] + sc.beta * weight * energy_score);
    }
  }
  return profile;
}

// Maximize sum_c profile[c][k_c] subject to sum_c k_c = grid.
std::vector<int> best_composition(const std::vector<std::vector<double>>& profiles, int grid) {
  const std::size_t cols = profiles.size();
  const std::size_t n = static_cast<std::size_t>(grid) + 1;
  const double neg = -std::numeric_limits<double>::infinity();
  // best[c][m]: best value using columns 0..c with m grid units spent
  std::vector<std::vector<double>> best(cols, std::vector<double>(n, neg));
  std::vector<std::vector<int>> choice(cols, std::vector<int>(n, 0));
  for (std::size_t m = 0; m < n; ++m) {
    best[0][m] = profiles[0][m];
    choice[0][m] = static_cast<int>(m);
  }
  for (std::size_t c = 1; c < cols; ++c) {
    for (std::size_t m = 0; m < n; ++m) {
      for (std::size_t k = 0; k <= m; ++k) {
        const double v = best[c - 1][m - k] + profiles[c][k];
        if (v > best[c][m]) {
          best[c][m] = v;
          choice[c][m] = static_cast<int>(k);
        }
      }
    }
  }
  std::vector<int> k(cols, 0);
  int remaining = grid;
  for (std::size_t c = cols; c-- > 0;) {
    k[c] = choice[c][static_cast<std::size_t>(remaining)];
    remaining -= k[c];
  }
  return k;
}

std::vector<SpreadingFactor> ring_winners(const DensityMatrix& dm, const AnalyticScenario& sc) {
  std::vector<SpreadingFactor> winners;
  for (std::size_t j = 0; j < dm.rings(); ++j) {
    std::size_t best = 0;
    for (std::size_t c = 1; c < dm.sfs(); ++c) {
      if (dm(j, c) > dm(j, best)) best = c;
    }
    winners.push_back(sc.sfs[best]);
  }
  return winners;
}

}  // namespace

OptimizationResult optimize_densities(const AnalyticScenario& sc, const RingPartition& part,
                                      const OptimizerOptions& opt, const IterateObserver& observer) {
  validate(sc);
  validate(part);
  if (opt.grid_resolution < 1) throw std::invalid_argument("grid resolution must be positive");
  const std::size_t rings = part.size();
  const std::size_t cols = sc.sfs.size();
  const double lambda = sc.lambda_total;
  const Model model(sc, part);
  const auto e = energy_scores(sc);

  OptimizationResult result;
  // start from the best single-SF-everywhere allocation
  for (std::size_t c = 0; c < cols; ++c) {
    DensityMatrix candidate = DensityMatrix::single_sf(rings, cols, c, lambda);
    const ObjectiveValue v = objective(candidate, sc, part);
    if (c == 0 || v.total > result.value.total) {
      result.densities = std::move(candidate);
      result.value = v;
    }
  }
  if (observer) observer(result.densities);

  const int grid = opt.grid_resolution;
  for (int sweep = 1; sweep <= opt.max_sweeps; ++sweep) {
    const double before = result.value.total;
    for (std::size_t j = 0; j < rings; ++j) {
      std::vector<std::vector<double>> profiles;
      profiles.reserve(cols);
      for (std::size_t c = 0; c < cols; ++c) {
        profiles.push_back(column_profile(model, result.densities, j, c, grid, e[c]));
      }
      const auto k = best_composition(profiles, grid);

      DensityMatrix candidate = result.densities;
      for (std::size_t c = 0; c < cols; ++c) candidate(j, c) = lambda * k[c] / grid;
      if (candidate != result.densities) {
        const ObjectiveValue v = objective(candidate, sc, part);
        if (v.total > result.value.total) {
          result.densities = std::move(candidate);
          result.value = v;
        }
      }
      if (observer) observer(result.densities);
    }
    result.sweeps = sweep;
    const double gain = result.value.total - before;
    if (gain < opt.rel_tol * std::abs(before)) {
      result.converged = true;
      break;
    }
  }
  result.winners = ring_winners(result.densities, sc);
  return result;
}

std::vector<std::size_t> eqload_quotas(std::size_t n, const PhyParams& phy,
                                       std::span<const SpreadingFactor> sfs) {
  if (sfs.empty()) throw std::invalid_argument("eqload: empty SF set");
  double total_rate = 0.0;
  for (SpreadingFactor sf : sfs) total_rate += data_rate(sf, phy);

  std::vector<double> exact;
  std::vector<std::size_t> quota;
  for (SpreadingFactor sf : sfs) {
    exact.push_back(static_cast<double>(n) * data_rate(sf, phy) / total_rate);
    quota.push_back(static_cast<std::size_t>(std::llround(exact.back())));
  }
  auto assigned = [&] { return std::accumulate(quota.begin(), quota.end(), std::size_t{0}); };
  while (assigned() < n) {
    // under-assigned: bump the SF with the largest unmet remainder
    std::size_t pick = 0;
    for (std::size_t c = 1; c < quota.size(); ++c) {
      if (exact[c] - quota[c] > exact[pick] - quota[pick]) pick = c;
    }
    ++quota[pick];
  }
  while (assigned() > n) {
    std::size_t pick = quota.size();
    for (std::size_t c = 0; c < quota.size(); ++c) {
      if (quota[c] == 0) continue;
      if (pick == quota.size() || quota[c] - exact[c] > quota[pick] - exact[pick]) pick = c;
    }
    --quota[pick];
  }
  return quota;
}

std::vector<SpreadingFactor> eqload_allocate(std::span<const double> radii, const PhyParams& phy,
                                             std::span<const SpreadingFactor> sfs) {
  if (radii.empty()) throw std::invalid_argument("eqload: no devices");
  std::vector<SpreadingFactor> ordered(sfs.begin(), sfs.end());
  std::sort(ordered.begin(), ordered.end());
  const auto quota = eqload_quotas(radii.size(), phy, ordered);

  std::vector<std::size_t> order(radii.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return radii[a] < radii[b]; });

  std::vector<SpreadingFactor> out(radii.size(), ordered.front());
  std::size_t next = 0;
  for (std::size_t c = 0; c < ordered.size(); ++c) {
    for (std::size_t q = 0; q < quota[c]; ++q) out[order[next++]] = ordered[c];
  }
  return out;
}

}  // namespace lpwan
