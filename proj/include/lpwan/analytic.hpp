#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "lpwan/phy.hpp"

namespace lpwan {

/// Concentric annuli r_0 = 0 < r_1 < ... < r_J = cell radius.
struct RingPartition {
  std::vector<double> boundaries;

  static RingPartition uniform(double cell_radius, std::size_t rings);

  std::size_t size() const noexcept { return boundaries.empty() ? 0 : boundaries.size() - 1; }
  double inner(std::size_t j) const { return boundaries.at(j); }
  double outer(std::size_t j) const { return boundaries.at(j + 1); }
  double radius() const { return boundaries.back(); }
  double area(std::size_t j) const;
};

void validate(const RingPartition& part);

/// lambda_{j,c}: devices per m^2 in ring j using the c-th SF of the scenario.
class DensityMatrix {
 public:
  DensityMatrix() = default;
  DensityMatrix(std::size_t rings, std::size_t sfs, double fill = 0.0);

  /// Every ring puts all of `lambda_total` on column `sf_column`.
  static DensityMatrix single_sf(std::size_t rings, std::size_t sfs, std::size_t sf_column,
                                 double lambda_total);

  std::size_t rings() const noexcept { return rings_; }
  std::size_t sfs() const noexcept { return sfs_; }

  double operator()(std::size_t j, std::size_t c) const { return data_[j * sfs_ + c]; }
  double& operator()(std::size_t j, std::size_t c) { return data_[j * sfs_ + c]; }

  /// Non-negative entries and sum_c lambda_{j,c} = lambda_total for every ring.
  bool feasible(double lambda_total, double rel_tol = 1e-9) const;

  bool operator==(const DensityMatrix&) const = default;

 private:
  std::size_t rings_ = 0;
  std::size_t sfs_ = 0;
  std::vector<double> data_;
};

enum class EnergyTerm {
  /// T(c_min) / T_c in (0, 1]: shorter airtime scores higher.
  AirtimeRatio,
  /// T_c / T_1 as printed, T_1 being the airtime of the lowest SF in the set.
  Literal,
};

/// Single-power, single-channel network for the centralized SF allocation.
struct AnalyticScenario {
  double lambda_total = 0.0;
  double t_rep_s = 200.0;
  std::size_t payload_bytes = 100;
  double p_t_dbm = 14.0;
  PathLoss pathloss;
  PhyParams phy;
  std::vector<SpreadingFactor> sfs;
  double beta = 0.5;
  EnergyTerm energy_term = EnergyTerm::AirtimeRatio;
  /// Use the raw, unweighted sum of ring integrals of p_s dz instead of the
  /// device-weighted mean success probability.
  bool literal_integral = false;
};

void validate(const AnalyticScenario& sc);

std::size_t sf_column(const AnalyticScenario& sc, SpreadingFactor sf);

/// g * r^-delta. Throws for r <= 0.
double pathloss(double r, double g, double delta);

/// Antiderivative of 2*pi*r / (1 + (r/z)^4 / gamma_i):
/// pi * atan(x^2 / (sqrt(gamma_i) z^2)) * sqrt(gamma_i) z^2.
double q_closed_form(double x, double z, double gamma_i);

/// 2*pi * integral_{r1}^{r2} r dr / (1 + (r/z)^delta / gamma_i), by adaptive quadrature.
double ring_kernel_quadrature(double z, double r1, double r2, double gamma_i, double delta);

/// Same integral; closed form when delta == 4, quadrature otherwise.
double ring_kernel(double z, double r1, double r2, double gamma_i, double delta);

/// -log of the Laplace functional of interference from ring j on SF `sf`,
/// seen by a receiver whose signal arrives from distance z.
double ring_exponent(double z, SpreadingFactor sf, std::size_t j, const DensityMatrix& dm,
                     const AnalyticScenario& sc, const RingPartition& part);

/// ring_exponent forced through quadrature regardless of the pathloss exponent.
double ring_exponent_quadrature(double z, SpreadingFactor sf, std::size_t j, const DensityMatrix& dm,
                                const AnalyticScenario& sc, const RingPartition& part);

/// N * gamma_c * z^delta / (P_t * G).
double noise_exponent(SpreadingFactor sf, double z, const AnalyticScenario& sc);

/// Product of per-ring interference factors and the noise factor.
double success_probability(SpreadingFactor sf, double z, const DensityMatrix& dm,
                           const AnalyticScenario& sc, const RingPartition& part);

/// Mean of p_s(sf, z) over z in [r_{j,1}, r_{j,2}].
double ring_mean_success(SpreadingFactor sf, std::size_t j, const DensityMatrix& dm,
                         const AnalyticScenario& sc, const RingPartition& part);

struct ObjectiveValue {
  double total = 0.0;
  double reliability = 0.0;
  double energy = 0.0;
};

/// Energy score per SF column, as selected by sc.energy_term.
std::vector<double> energy_scores(const AnalyticScenario& sc);

/// Weight of ring j in the objective: its share of the cell area, or 1 in literal mode.
double ring_weight(std::size_t j, const AnalyticScenario& sc, const RingPartition& part);

/// Sum over rings and SFs of share * [(1-beta) reliability + beta energy].
ObjectiveValue objective(const DensityMatrix& dm, const AnalyticScenario& sc,
                         const RingPartition& part);

struct OptimizerOptions {
  int grid_resolution = 50;
  double rel_tol = 1e-6;
  int max_sweeps = 100;
};

struct OptimizationResult {
  DensityMatrix densities;
  ObjectiveValue value;
  int sweeps = 0;
  bool converged = false;
  /// Highest-share SF per ring.
  std::vector<SpreadingFactor> winners;
};

using IterateObserver = std::function<void(const DensityMatrix&)>;

/// Round-robin per-ring best response over the SF-share simplex grid,
/// started from the best single-SF-everywhere allocation.
OptimizationResult optimize_densities(const AnalyticScenario& sc, const RingPartition& part,
                                      const OptimizerOptions& opt = {},
                                      const IterateObserver& observer = {});

/// Per-SF device counts proportional to data rate, rounded to sum to n.
std::vector<std::size_t> eqload_quotas(std::size_t n, const PhyParams& phy,
                                       std::span<const SpreadingFactor> sfs);

/// Nearest devices take the fastest SF until its quota is filled, then the
/// next SF, and so on. Equal radii keep input order.
std::vector<SpreadingFactor> eqload_allocate(std::span<const double> radii, const PhyParams& phy,
                                             std::span<const SpreadingFactor> sfs);

}  // namespace lpwan
