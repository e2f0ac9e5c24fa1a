#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "rqe/engine.hpp"
#include "rqe/error.hpp"
#include "rqe/spectra.hpp"

namespace rqe {

enum class TemperatureMethod { Energy, Fkl, Shadow };

std::string_view method_name(TemperatureMethod method);

struct TemperatureEstimate {
  double value = 0.0;
  /// One standard deviation; NaN when it could not be determined.
  double std_error = 0.0;
  TemperatureMethod method = TemperatureMethod::Energy;
};

/// Raised when a Fermi-Dirac fit sees no excited shadow qubit. Carries the
/// temperature at which 3 excitations would have been expected (a 95%
/// Poisson upper limit).
class ZeroExcitationsError : public Error {
 public:
  explicit ZeroExcitationsError(double upper_bound);
  double upper_bound() const { return upper_bound_; }

 private:
  double upper_bound_;
};

// ---- energy method -------------------------------------------------------

/// Solves E(T*) = mean_energy by bisection in log T. The standard error is
/// propagated from `mean_energy_stderr` through dE/dT (central difference,
/// step 1e-3 T).
TemperatureEstimate temperature_from_energy(const ThermalEnsemble& ens, double mean_energy,
                                            double mean_energy_stderr = 0.0);

/// Same, with the target given as E - E_GS so near-ground-state values keep
/// their precision.
TemperatureEstimate temperature_from_excess_energy(const ThermalEnsemble& ens, double excess_energy,
                                                   double excess_stderr = 0.0);

// ---- Z-basis fidelity method ---------------------------------------------

/// sum_j p_j log(p_j / q_j) with 0 log 0 = 0.
double kl_divergence(std::span<const double> p, std::span<const double> q);

/// Histogram of measured primary bitstrings.
struct EmpiricalDistribution {
  std::vector<double> counts;
  double total_shots = 0.0;

  static EmpiricalDistribution from_samples(std::span<const std::uint64_t> samples, std::size_t n_states);
  /// Treats `probabilities` as the outcome of `shots` measurements.
  static EmpiricalDistribution from_probabilities(std::span<const double> probabilities, double shots);

  std::vector<double> probabilities() const;
  /// Adds epsilon = 1 / (2 total_shots) to every bin probability and
  /// renormalizes, so no bin is empty.
  std::vector<double> smoothed() const;
};

/// 1 - D(thermal || Q) / D(uniform || Q) with Q the smoothed empirical.
double fkl(const EmpiricalDistribution& empirical, const ThermalEnsemble& ens, double temperature);

/// The ratio form against an already smoothed Q.
double fkl_from_distributions(std::span<const double> thermal, std::span<const double> smoothed_empirical);

/// Geometric grid, ascending.
std::vector<double> geometric_grid(double low, double high, std::size_t points);
std::vector<double> default_temperature_grid();

struct FklFitOptions {
  std::size_t bootstrap_resamples = 100;
  std::uint64_t seed = 0x5EED;
};

struct FklFit {
  TemperatureEstimate estimate;
  double peak_fkl = 0.0;
  std::vector<double> grid;
  std::vector<double> curve;
};

/// Maximizes F_KL over `grid` with quadratic refinement in log T around the
/// best grid point; the standard error comes from multinomial bootstrap
/// resamples of the counts. A maximum on either end of the grid is an
/// Estimation error.
FklFit temperature_from_fkl(const EmpiricalDistribution& empirical, const ThermalEnsemble& ens,
                            std::span<const double> grid, const FklFitOptions& options = {});

// ---- shadow-qubit method -------------------------------------------------

/// Mean occupation exp(-omega/T) / (1 + exp(-omega/T)).
double fermi_dirac(double omega, double temperature);

struct OccupationBin {
  double omega_low;
  double omega_high;
  std::size_t count;
  std::size_t excited;

  double omega_center() const { return 0.5 * (omega_low + omega_high); }
  double mean_occupation() const { return count ? static_cast<double>(excited) / static_cast<double>(count) : 0.0; }
};

enum class StderrSource { Bootstrap, Fisher };

struct ShadowFitOptions {
  std::size_t min_records = 100;
  std::size_t bootstrap_resamples = 100;
  std::size_t bins = 10;
  /// Binning range; the record range when low >= high.
  double omega_low = 1.0;
  double omega_high = 6.0;
  StderrSource report = StderrSource::Bootstrap;
  std::uint64_t seed = 0xFD17;
};

struct ShadowFit {
  TemperatureEstimate estimate;
  double fisher_std_error = 0.0;
  double bootstrap_std_error = 0.0;
  std::vector<OccupationBin> bins;
};

/// Maximum-likelihood temperature of Bernoulli outcomes with success
/// probability fermi_dirac(omega, T).
ShadowFit fit_shadow_temperature(std::span<const ThermometryRecord> records, const ShadowFitOptions& options = {});

std::vector<OccupationBin> bin_occupations(std::span<const ThermometryRecord> records, std::size_t bins,
                                           double omega_low, double omega_high);

// ---- diagnostics ---------------------------------------------------------

enum class RateBranch { Plus, Minus };

/// Off-resonant transition rate (Omega^2 omega / 2) / ((Omega^2 +- delta)^2 + omega^2 / 16).
double offresonant_rate(double coupling, double omega, double delta, RateBranch branch);

/// 2 T_S / (T_fkl + T_E).
double overestimation_ratio(double t_shadow, double t_fkl, double t_energy);

/// First-order propagation of independent standard errors through the ratio.
double overestimation_ratio_stderr(const TemperatureEstimate& shadow, const TemperatureEstimate& fkl,
                                   const TemperatureEstimate& energy);

}  // namespace rqe
