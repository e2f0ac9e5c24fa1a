#include "rqe/thermometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "rqe/rng.hpp"

namespace rqe {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double sample_std(std::span<const double> values) {
  if (values.size() < 2) return kNaN;
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return std::sqrt(ss / static_cast<double>(values.size() - 1));
}

// Solves f(T) = target for increasing f by bisection in log T.
template <class F>
double solve_increasing(F f, double target) {
  double lo = 1.0;
  double hi = 1.0;
  for (int i = 0; i < 200 && !(f(lo) < target); ++i) lo *= 0.5;
  for (int i = 0; i < 200 && !(f(hi) > target); ++i) hi *= 2.0;
  if (!(f(lo) < target) || !(f(hi) > target))
    throw Error(ErrorCode::Estimation, "could not bracket the temperature");
  for (int i = 0; i < 400 && hi / lo - 1.0 > 1e-13; ++i) {
    const double mid = std::sqrt(lo * hi);
    (f(mid) < target ? lo : hi) = mid;
  }
  return std::sqrt(lo * hi);
}

// Multinomial resample of `shots` draws from the normalized `weights`.
std::vector<double> resample_counts(std::span<const double> weights, std::size_t shots, Rng& rng) {
  std::vector<double> cumulative(weights.size());
  std::partial_sum(weights.begin(), weights.end(), cumulative.begin());
  const double total = cumulative.back();
  std::vector<double> counts(weights.size(), 0.0);
  for (std::size_t s = 0; s < shots; ++s) {
    const double u = rng.uniform() * total;
    auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
    if (it == cumulative.end()) --it;
    counts[static_cast<std::size_t>(it - cumulative.begin())] += 1.0;
  }
  return counts;
}

// Index of the largest F_KL plus its refined log-temperature.
struct Peak {
  std::size_t index;
  double temperature;
  double value;
};

Peak locate_peak(std::span<const double> grid, std::span<const double> curve) {
  const auto best = static_cast<std::size_t>(std::max_element(curve.begin(), curve.end()) - curve.begin());
  if (best == 0 || best + 1 == curve.size())
    throw Error(ErrorCode::Estimation, "F_KL maximum lies on the temperature grid boundary (T = " +
                                           std::to_string(grid[best]) + "); widen the grid");
  const double x0 = std::log(grid[best - 1]);
  const double x1 = std::log(grid[best]);
  const double x2 = std::log(grid[best + 1]);
  const double y0 = curve[best - 1];
  const double y1 = curve[best];
  const double y2 = curve[best + 1];
  // Vertex of the parabola through the three points.
  const double num = (x1 - x0) * (x1 - x0) * (y1 - y2) - (x1 - x2) * (x1 - x2) * (y1 - y0);
  const double den = (x1 - x0) * (y1 - y2) - (x1 - x2) * (y1 - y0);
  double x = x1;
  if (den != 0.0 && std::isfinite(num / den)) x = std::clamp(x1 - 0.5 * num / den, x0, x2);
  return {best, std::exp(x), y1};
}

class FklTable {
 public:
  FklTable(const ThermalEnsemble& ens, std::span<const double> grid) {
    thermal_.reserve(grid.size());
    for (double t : grid) thermal_.push_back(thermal_zbasis_distribution(ens, t));
  }

  std::vector<double> curve(const EmpiricalDistribution& empirical) const {
    const auto q = empirical.smoothed();
    std::vector<double> values(thermal_.size());
    for (std::size_t i = 0; i < thermal_.size(); ++i) values[i] = fkl_from_distributions(thermal_[i], q);
    return values;
  }

 private:
  std::vector<std::vector<double>> thermal_;
};

// Newton iteration on beta = 1/T for the concave Bernoulli log-likelihood.
struct BetaFit {
  double beta;
  double fisher;
};

BetaFit maximize_likelihood(std::span<const ThermometryRecord> records) {
  auto gradient_and_information = [&](double beta) {
    double grad = 0.0;
    double info = 0.0;
    for (const auto& r : records) {
      const double f = 1.0 / (1.0 + std::exp(beta * r.omega));
      grad += r.omega * (f - r.outcome);
      info += r.omega * r.omega * f * (1.0 - f);
    }
    return std::pair{grad, info};
  };
  double beta = 1.0;
  for (int iter = 0; iter < 200; ++iter) {
    const auto [grad, info] = gradient_and_information(beta);
    if (!(info > 0.0)) break;
    double step = grad / info;
    // Keep beta positive; halve toward zero if Newton overshoots.
    while (beta + step <= 0.0) step *= 0.5;
    beta += step;
    if (std::abs(step) <= 1e-12 * beta) {
      return {beta, gradient_and_information(beta).second};
    }
  }
  throw Error(ErrorCode::Estimation, "Fermi-Dirac likelihood maximization did not converge");
}

}  // namespace

std::string_view method_name(TemperatureMethod method) {
  switch (method) {
    case TemperatureMethod::Energy: return "energy";
    case TemperatureMethod::Fkl: return "fkl";
    case TemperatureMethod::Shadow: return "shadow";
  }
  return "unknown";
}

ZeroExcitationsError::ZeroExcitationsError(double upper_bound)
    : Error(ErrorCode::Estimation,
            "no excited shadow qubits; temperature is below an upper bound of " + std::to_string(upper_bound)),
      upper_bound_(upper_bound) {}

TemperatureEstimate temperature_from_excess_energy(const ThermalEnsemble& ens, double excess_energy,
                                                   double excess_stderr) {
  const double ceiling = infinite_temperature_energy(ens) - ground_state_energy(ens);
  if (!(excess_energy > 0.0))
    throw Error(ErrorCode::Estimation, "energy at or below the ground state has no temperature");
  if (!(excess_energy < ceiling))
    throw Error(ErrorCode::Estimation, "energy at or above the infinite-temperature mean; state is not thermal");
  auto excess = [&ens](double t) { return excess_energy_at_temperature(ens, t); };
  const double t = solve_increasing(excess, excess_energy);

  double std_error = 0.0;
  if (excess_stderr > 0.0) {
    const double h = 1e-3 * t;
    const double slope = (excess(t + h) - excess(t - h)) / (2.0 * h);
    std_error = slope > 0.0 ? excess_stderr / slope : std::numeric_limits<double>::infinity();
  }
  return {t, std_error, TemperatureMethod::Energy};
}

TemperatureEstimate temperature_from_energy(const ThermalEnsemble& ens, double mean_energy,
                                            double mean_energy_stderr) {
  return temperature_from_excess_energy(ens, mean_energy - ground_state_energy(ens), mean_energy_stderr);
}

double kl_divergence(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size()) throw Error(ErrorCode::InvalidArgument, "K-L divergence needs equal-length inputs");
  double d = 0.0;
  for (std::size_t j = 0; j < p.size(); ++j) {
    if (p[j] < 0.0 || q[j] < 0.0) throw Error(ErrorCode::InvalidArgument, "probabilities must be non-negative");
    if (p[j] == 0.0) continue;
    if (q[j] == 0.0) return std::numeric_limits<double>::infinity();
    d += p[j] * std::log(p[j] / q[j]);
  }
  return d;
}

EmpiricalDistribution EmpiricalDistribution::from_samples(std::span<const std::uint64_t> samples,
                                                          std::size_t n_states) {
  EmpiricalDistribution e{std::vector<double>(n_states, 0.0), static_cast<double>(samples.size())};
  for (auto s : samples) {
    if (s >= n_states) throw Error(ErrorCode::OutOfRange, "sample outside the primary register");
    e.counts[s] += 1.0;
  }
  return e;
}

EmpiricalDistribution EmpiricalDistribution::from_probabilities(std::span<const double> probabilities,
                                                                double shots) {
  if (!(shots > 0.0)) throw Error(ErrorCode::InvalidArgument, "shot count must be positive");
  EmpiricalDistribution e{std::vector<double>(probabilities.begin(), probabilities.end()), shots};
  for (auto& c : e.counts) c *= shots;
  return e;
}

std::vector<double> EmpiricalDistribution::probabilities() const {
  if (!(total_shots > 0.0)) throw Error(ErrorCode::InvalidArgument, "empirical distribution has no shots");
  std::vector<double> p(counts);
  for (auto& v : p) v /= total_shots;
  return p;
}

std::vector<double> EmpiricalDistribution::smoothed() const {
  auto p = probabilities();
  const double eps = 1.0 / (2.0 * total_shots);
  const double norm = std::accumulate(p.begin(), p.end(), 0.0) + eps * static_cast<double>(p.size());
  for (auto& v : p) v = (v + eps) / norm;
  return p;
}

double fkl_from_distributions(std::span<const double> thermal, std::span<const double> smoothed_empirical) {
  const std::vector<double> uniform(thermal.size(), 1.0 / static_cast<double>(thermal.size()));
  const double num = kl_divergence(thermal, smoothed_empirical);
  const double den = kl_divergence(uniform, smoothed_empirical);
  if (den == 0.0) return num == 0.0 ? 0.0 : -std::numeric_limits<double>::infinity();
  return 1.0 - num / den;
}

double fkl(const EmpiricalDistribution& empirical, const ThermalEnsemble& ens, double temperature) {
  if (empirical.counts.size() != ens.dimension())
    throw Error(ErrorCode::InvalidArgument, "empirical distribution does not match the spectrum dimension");
  return fkl_from_distributions(thermal_zbasis_distribution(ens, temperature), empirical.smoothed());
}

std::vector<double> geometric_grid(double low, double high, std::size_t points) {
  if (!(low > 0.0 && high > low) || points < 3)
    throw Error(ErrorCode::InvalidArgument, "grid needs 0 < low < high and at least 3 points");
  std::vector<double> grid(points);
  const double ratio = std::log(high / low) / static_cast<double>(points - 1);
  for (std::size_t i = 0; i < points; ++i) grid[i] = low * std::exp(ratio * static_cast<double>(i));
  grid.back() = high;
  return grid;
}

std::vector<double> default_temperature_grid() { return geometric_grid(0.02, 20.0, 200); }

FklFit temperature_from_fkl(const EmpiricalDistribution& empirical, const ThermalEnsemble& ens,
                            std::span<const double> grid, const FklFitOptions& options) {
  if (grid.size() < 3 || !std::is_sorted(grid.begin(), grid.end()) || !(grid.front() > 0.0))
    throw Error(ErrorCode::InvalidArgument, "temperature grid must be positive, ascending, length >= 3");
  if (empirical.counts.size() != ens.dimension())
    throw Error(ErrorCode::InvalidArgument, "empirical distribution does not match the spectrum dimension");

  const FklTable table(ens, grid);
  FklFit fit;
  fit.grid.assign(grid.begin(), grid.end());
  fit.curve = table.curve(empirical);
  const Peak peak = locate_peak(grid, fit.curve);
  fit.peak_fkl = peak.value;
  fit.estimate = {peak.temperature, 0.0, TemperatureMethod::Fkl};

  if (options.bootstrap_resamples > 0) {
    Rng rng(options.seed);
    const auto shots = static_cast<std::size_t>(std::llround(empirical.total_shots));
    std::vector<double> temps;
    for (std::size_t b = 0; b < options.bootstrap_resamples; ++b) {
      EmpiricalDistribution resampled{resample_counts(empirical.counts, shots, rng), static_cast<double>(shots)};
      try {
        temps.push_back(locate_peak(grid, table.curve(resampled)).temperature);
      } catch (const Error&) {
        // A boundary maximum in one resample carries no width information.
      }
    }
    fit.estimate.std_error = sample_std(temps);
  }
  return fit;
}

double fermi_dirac(double omega, double temperature) {
  if (!(temperature > 0.0)) throw Error(ErrorCode::InvalidArgument, "temperature must be positive");
  return 1.0 / (1.0 + std::exp(omega / temperature));
}

std::vector<OccupationBin> bin_occupations(std::span<const ThermometryRecord> records, std::size_t bins,
                                           double omega_low, double omega_high) {
  if (bins == 0) throw Error(ErrorCode::InvalidArgument, "need at least one bin");
  if (!(omega_high > omega_low)) {
    if (records.empty()) return {};
    auto [mn, mx] = std::minmax_element(records.begin(), records.end(),
                                        [](const auto& a, const auto& b) { return a.omega < b.omega; });
    omega_low = mn->omega;
    omega_high = mx->omega > mn->omega ? mx->omega : mn->omega + 1.0;
  }
  const double width = (omega_high - omega_low) / static_cast<double>(bins);
  std::vector<OccupationBin> out(bins);
  for (std::size_t b = 0; b < bins; ++b)
    out[b] = {omega_low + width * static_cast<double>(b), omega_low + width * static_cast<double>(b + 1), 0, 0};
  for (const auto& r : records) {
    auto b = static_cast<std::ptrdiff_t>(std::floor((r.omega - omega_low) / width));
    b = std::clamp<std::ptrdiff_t>(b, 0, static_cast<std::ptrdiff_t>(bins) - 1);
    ++out[static_cast<std::size_t>(b)].count;
    if (r.outcome) ++out[static_cast<std::size_t>(b)].excited;
  }
  return out;
}

ShadowFit fit_shadow_temperature(std::span<const ThermometryRecord> records, const ShadowFitOptions& options) {
  if (records.size() < options.min_records)
    throw Error(ErrorCode::InvalidArgument, "shadow fit needs at least " + std::to_string(options.min_records) +
                                                " records, got " + std::to_string(records.size()));
  std::size_t excited = 0;
  for (const auto& r : records) {
    if (!(r.omega > 0.0)) throw Error(ErrorCode::InvalidArgument, "shadow energies must be positive");
    excited += r.outcome ? 1 : 0;
  }
  // The likelihood slope at beta = 0 is sum omega (1/2 - n); a finite
  // positive temperature needs it positive.
  auto positive_slope_at_zero = [](std::span<const ThermometryRecord> rs) {
    double slope = 0.0;
    for (const auto& r : rs) slope += r.omega * (0.5 - r.outcome);
    return slope > 0.0;
  };
  if (excited == 0) {
    auto expected = [&records](double t) {
      double sum = 0.0;
      for (const auto& r : records) sum += fermi_dirac(r.omega, t);
      return sum;
    };
    throw ZeroExcitationsError(solve_increasing(expected, -std::log(0.05)));
  }
  if (!positive_slope_at_zero(records))
    throw Error(ErrorCode::Estimation, "shadow excitations too frequent for a positive temperature");

  const BetaFit fit = maximize_likelihood(records);
  ShadowFit out;
  const double t = 1.0 / fit.beta;
  out.fisher_std_error = 1.0 / std::sqrt(fit.fisher) / (fit.beta * fit.beta);
  out.bins = bin_occupations(records, options.bins, options.omega_low, options.omega_high);

  if (options.bootstrap_resamples > 0) {
    Rng rng(options.seed);
    std::vector<ThermometryRecord> resampled(records.size());
    std::vector<double> temps;
    for (std::size_t b = 0; b < options.bootstrap_resamples; ++b) {
      std::size_t hits = 0;
      for (auto& r : resampled) {
        r = records[rng.below(records.size())];
        hits += r.outcome ? 1 : 0;
      }
      if (hits == 0 || !positive_slope_at_zero(resampled)) continue;
      try {
        temps.push_back(1.0 / maximize_likelihood(resampled).beta);
      } catch (const Error&) {
      }
    }
    out.bootstrap_std_error = sample_std(temps);
  } else {
    out.bootstrap_std_error = kNaN;
  }

  const bool use_bootstrap = options.report == StderrSource::Bootstrap && std::isfinite(out.bootstrap_std_error);
  out.estimate = {t, use_bootstrap ? out.bootstrap_std_error : out.fisher_std_error, TemperatureMethod::Shadow};
  return out;
}

double offresonant_rate(double coupling, double omega, double delta, RateBranch branch) {
  if (!(omega > 0.0)) throw Error(ErrorCode::InvalidArgument, "shadow energy must be positive");
  const double c2 = coupling * coupling;
  const double shifted = branch == RateBranch::Plus ? c2 + delta : c2 - delta;
  return (c2 * omega / 2.0) / (shifted * shifted + omega * omega / 16.0);
}

double overestimation_ratio(double t_shadow, double t_fkl, double t_energy) {
  if (!(t_shadow > 0.0 && t_fkl > 0.0 && t_energy > 0.0))
    throw Error(ErrorCode::InvalidArgument, "temperatures must be positive");
  return 2.0 * t_shadow / (t_fkl + t_energy);
}

double overestimation_ratio_stderr(const TemperatureEstimate& shadow, const TemperatureEstimate& fkl,
                                   const TemperatureEstimate& energy) {
  const double sum = fkl.value + energy.value;
  const double d_shadow = 2.0 / sum;
  const double d_bench = 2.0 * shadow.value / (sum * sum);
  return std::sqrt(d_shadow * d_shadow * shadow.std_error * shadow.std_error +
                   d_bench * d_bench * (fkl.std_error * fkl.std_error + energy.std_error * energy.std_error));
}

}  // namespace rqe
