#include <doctest.h>

#include <cmath>
#include <numbers>

#include "rqe/error.hpp"
#include "rqe/rng.hpp"
#include "rqe/spectra.hpp"
#include "rqe/thermometry.hpp"

using namespace rqe;

namespace {

std::vector<ThermometryRecord> synthetic_records(double t, std::size_t n, std::uint64_t seed, double lo = 1.0,
                                                 double hi = 6.0) {
  Rng rng(seed);
  std::vector<ThermometryRecord> out;
  for (std::size_t i = 0; i < n; ++i) {
    const double w = rng.uniform(lo, hi);
    out.push_back({w, rng.uniform() < fermi_dirac(w, t) ? 1 : 0});
  }
  return out;
}

ThermalEnsemble two_level() { return diagonalize(build_shadow_hamiltonian(std::vector<double>{2.0}, 0), true); }

}  // namespace

TEST_CASE("energy thermometer examples") {
  const auto heis = diagonalize(build_heisenberg(6, 1.0), false);
  const auto est = temperature_from_energy(heis, energy_at_temperature(heis, 1.0));
  CHECK(std::abs(est.value - 1.0) < 1e-5);
  CHECK(est.method == TemperatureMethod::Energy);
  CHECK(est.std_error == 0.0);

  CHECK(std::abs(temperature_from_energy(two_level(), -0.76159415595576488812).value - 1.0) < 1e-5);

  const double e_gs = ground_state_energy(heis);
  CHECK_THROWS_AS(temperature_from_energy(heis, e_gs - 0.1), Error);
  CHECK_THROWS_AS(temperature_from_energy(heis, e_gs), Error);
  CHECK_THROWS_AS(temperature_from_energy(heis, infinite_temperature_energy(heis) + 0.1), Error);
  CHECK_THROWS_AS(temperature_from_excess_energy(heis, -1.0), Error);
}

TEST_CASE("energy thermometer round trip on the shipped models") {
  for (std::size_t n : {4, 6, 8}) {
    for (const auto& h : {build_tfim(n, 1.0, 0.75), build_tfim(n, 1.0, 0.9), build_heisenberg(n, 1.0),
                          build_xxz(n, 1.0, 0.5, 1.0)}) {
      const auto ens = diagonalize(h, false);
      for (double t : {0.05, 0.1, 0.3, 1.0, 3.0, 10.0}) {
        const double excess = excess_energy_at_temperature(ens, t);
        CHECK(std::abs(temperature_from_excess_energy(ens, excess).value / t - 1.0) < 1e-5);
        // absolute energies lose the information once the excess is below rounding
        if (excess > 1e-9 * std::abs(ground_state_energy(ens)))
          CHECK(std::abs(temperature_from_energy(ens, energy_at_temperature(ens, t)).value / t - 1.0) < 1e-5);
      }
    }
  }
}

TEST_CASE("energy thermometer stderr follows the local slope") {
  const auto ens = diagonalize(build_tfim(6, 1.0, 0.9), false);
  const double t = 0.8;
  const double h = 1e-4;
  const double slope = (energy_at_temperature(ens, t + h) - energy_at_temperature(ens, t - h)) / (2 * h);
  const auto est = temperature_from_energy(ens, energy_at_temperature(ens, t), 0.02);
  CHECK(est.std_error == doctest::Approx(0.02 / slope).epsilon(1e-5));
}

TEST_CASE("K-L divergence") {
  const std::vector<double> p{0.05, 0.15, 0.3, 0.5};
  const std::vector<double> q{0.4, 0.3, 0.2, 0.1};
  CHECK(kl_divergence(p, p) == 0.0);
  CHECK(kl_divergence(std::vector<double>{1.0, 0.0}, std::vector<double>{0.5, 0.5}) ==
        doctest::Approx(std::numbers::ln2).epsilon(1e-15));
  // 40-digit mpmath reference
  CHECK(std::abs(kl_divergence(p, q) - 0.71841433448151584713) < 1e-12);
  CHECK(std::abs(kl_divergence(std::vector<double>{0.7, 0.0, 0.2, 0.1}, std::vector<double>(4, 0.25)) -
                 0.58447580857655322923) < 1e-12);
  CHECK(kl_divergence(q, p) > 0.0);
  CHECK_THROWS_AS(kl_divergence(p, std::vector<double>{0.5, 0.5}), Error);
}

TEST_CASE("empirical distribution and smoothing") {
  const std::vector<std::uint64_t> samples{0, 3, 3, 1, 3, 0};
  const auto emp = EmpiricalDistribution::from_samples(samples, 4);
  CHECK(emp.total_shots == 6.0);
  CHECK(emp.counts == std::vector<double>{2, 1, 0, 3});
  const auto p = emp.probabilities();
  CHECK(p[3] == doctest::Approx(0.5));
  const auto s = emp.smoothed();
  const double eps = 1.0 / 12.0;
  const double norm = 1.0 + 4 * eps;
  CHECK(s[2] == doctest::Approx(eps / norm));
  CHECK(s[3] == doctest::Approx((0.5 + eps) / norm));
  double sum = 0;
  for (double x : s) sum += x;
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-15));

  CHECK_THROWS_AS(EmpiricalDistribution::from_samples(std::vector<std::uint64_t>{4}, 4), Error);
  CHECK_THROWS_AS(EmpiricalDistribution{}.smoothed(), Error);
}

TEST_CASE("F_KL identities") {
  const auto ens = diagonalize(build_heisenberg(4, 1.0), true);
  const auto thermal = thermal_zbasis_distribution(ens, 1.3);
  const auto exact = EmpiricalDistribution::from_probabilities(thermal, 1e7);
  CHECK(fkl(exact, ens, 1.3) > 1.0 - 1e-3);
  CHECK(fkl(exact, ens, 1.3) <= 1.0);

  // uniform against uniform: both divergences vanish
  const std::vector<double> uniform(16, 1.0 / 16);
  CHECK(fkl_from_distributions(uniform, uniform) == 0.0);
  // a perfect match scores exactly one
  const auto sm = exact.smoothed();
  CHECK(fkl_from_distributions(sm, sm) == 1.0);

  Rng rng(6);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<std::uint64_t> samples;
    for (int i = 0; i < 200; ++i) samples.push_back(rng.below(16));
    const auto emp = EmpiricalDistribution::from_samples(samples, 16);
    for (double t : {0.1, 1.0, 10.0}) CHECK(fkl(emp, ens, t) <= 1.0);
  }
  CHECK_THROWS_AS(fkl(EmpiricalDistribution::from_probabilities(std::vector<double>(8, 0.125), 10), ens, 1.0), Error);
}

TEST_CASE("F_KL temperature round trip") {
  const auto ens = diagonalize(build_tfim(4, 1.0, 0.75), true);
  const auto grid = geometric_grid(0.1, 2.0, 60);
  const auto emp = EmpiricalDistribution::from_probabilities(thermal_zbasis_distribution(ens, 0.5), 1e6);
  const auto fit = temperature_from_fkl(emp, ens, grid);
  const double step = grid[1] / grid[0];
  CHECK(fit.estimate.value > 0.5 / step);
  CHECK(fit.estimate.value < 0.5 * step);
  CHECK(fit.estimate.method == TemperatureMethod::Fkl);
  CHECK(fit.estimate.std_error >= 0.0);
  CHECK(fit.peak_fkl > 0.99);
  CHECK(fit.curve.size() == 60);

  const auto uniform = EmpiricalDistribution::from_probabilities(std::vector<double>(16, 1.0 / 16), 1e4);
  try {
    (void)temperature_from_fkl(uniform, ens, grid);
    FAIL("uniform empirical should put the maximum on the grid boundary");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Estimation);
  }
  CHECK_THROWS_AS(temperature_from_fkl(emp, ens, std::vector<double>{0.1, 0.2}), Error);
  CHECK_THROWS_AS(temperature_from_fkl(emp, ens, std::vector<double>{0.3, 0.2, 0.4}), Error);
}

TEST_CASE("geometric grid") {
  const auto g = default_temperature_grid();
  REQUIRE(g.size() == 200);
  CHECK(g.front() == doctest::Approx(0.02));
  CHECK(g.back() == doctest::Approx(20.0));
  for (std::size_t i = 2; i < g.size(); ++i) CHECK(g[i] / g[i - 1] == doctest::Approx(g[1] / g[0]));
  CHECK_THROWS_AS(geometric_grid(1.0, 0.5, 10), Error);
}

TEST_CASE("Fermi-Dirac closed forms") {
  CHECK(fermi_dirac(0.0, 1.3) == 0.5);
  CHECK(fermi_dirac(1000.0, 1.0) < 1e-300);
  CHECK(fermi_dirac(2.0, 2.0) == doctest::Approx(0.26894142136999512075).epsilon(1e-15));
  for (double w : {0.1, 1.0, 5.0})
    for (double t : {0.05, 1.0, 100.0}) {
      CHECK(fermi_dirac(w, t) > 0.0);
      CHECK(fermi_dirac(w, t) <= 0.5);
    }
  CHECK_THROWS_AS(fermi_dirac(1.0, 0.0), Error);
}

TEST_CASE("shadow fit recovers synthetic temperatures") {
  for (double t : {0.4, 0.8, 2.0}) {
    const auto records = synthetic_records(t, 10000, 1234);
    const auto fit = fit_shadow_temperature(records);
    CHECK(fit.estimate.method == TemperatureMethod::Shadow);
    CHECK(std::abs(fit.estimate.value - t) < 3 * fit.estimate.std_error);
    CHECK(fit.estimate.std_error == fit.bootstrap_std_error);
    CHECK(fit.fisher_std_error > 0.0);
    CHECK(fit.bootstrap_std_error == doctest::Approx(fit.fisher_std_error).epsilon(0.35));
    REQUIRE(fit.bins.size() == 10);
    std::size_t total = 0;
    for (const auto& b : fit.bins) total += b.count;
    CHECK(total == records.size());
  }

  ShadowFitOptions fisher;
  fisher.report = StderrSource::Fisher;
  const auto records = synthetic_records(0.8, 10000, 99);
  const auto fit = fit_shadow_temperature(records, fisher);
  CHECK(fit.estimate.std_error == fit.fisher_std_error);
}

TEST_CASE("shadow fit stderr shrinks as one over root n") {
  const auto small = fit_shadow_temperature(synthetic_records(0.8, 2500, 5));
  const auto large = fit_shadow_temperature(synthetic_records(0.8, 40000, 6));
  const double ratio = small.fisher_std_error / large.fisher_std_error;
  CHECK(ratio > 4.0 * 0.8);
  CHECK(ratio < 4.0 * 1.25);
  CHECK(std::abs(large.estimate.value - 0.8) < std::abs(small.estimate.value - 0.8) + 3 * large.fisher_std_error);
}

TEST_CASE("shadow fit error paths") {
  std::vector<ThermometryRecord> cold;
  for (int i = 0; i < 400; ++i) cold.push_back({1.0 + 5.0 * i / 400.0, 0});
  try {
    (void)fit_shadow_temperature(cold);
    FAIL("expected a zero-excitation error");
  } catch (const ZeroExcitationsError& e) {
    CHECK(e.code() == ErrorCode::Estimation);
    double expected = 0;
    for (const auto& r : cold) expected += fermi_dirac(r.omega, e.upper_bound());
    CHECK(expected == doctest::Approx(-std::log(0.05)).epsilon(1e-6));
  }

  CHECK_THROWS_AS(fit_shadow_temperature(synthetic_records(0.8, 50, 1)), Error);

  std::vector<ThermometryRecord> hot;
  for (int i = 0; i < 200; ++i) hot.push_back({2.0, i % 3 == 0 ? 0 : 1});
  CHECK_THROWS_AS(fit_shadow_temperature(hot), Error);
}

TEST_CASE("occupation bins") {
  std::vector<ThermometryRecord> recs{{1.0, 1}, {1.4, 0}, {5.99, 1}, {3.5, 0}, {6.0, 1}};
  const auto bins = bin_occupations(recs, 5, 1.0, 6.0);
  REQUIRE(bins.size() == 5);
  CHECK(bins[0].count == 2);
  CHECK(bins[0].excited == 1);
  CHECK(bins[0].mean_occupation() == 0.5);
  CHECK(bins[2].count == 1);
  CHECK(bins[4].count == 2);
  CHECK(bins[1].mean_occupation() == 0.0);
  CHECK(bins[0].omega_center() == doctest::Approx(1.5));
  CHECK_THROWS_AS(bin_occupations(recs, 0, 1.0, 6.0), Error);
}

TEST_CASE("off-resonant rate") {
  const double c = 0.7;
  const double w = 2.5;
  const double peak = 8 * c * c / w;
  CHECK(offresonant_rate(c, w, -c * c, RateBranch::Plus) == doctest::Approx(peak));
  CHECK(offresonant_rate(c, w, c * c, RateBranch::Minus) == doctest::Approx(peak));
  for (double d : {-3.0, -0.2, 0.0, 0.6, 4.0}) {
    CHECK(offresonant_rate(c, w, d, RateBranch::Plus) <= peak + 1e-12);
    CHECK(offresonant_rate(c, w, d, RateBranch::Plus) == offresonant_rate(c, w, -d, RateBranch::Minus));
  }
  CHECK(offresonant_rate(c, w, 1e8, RateBranch::Plus) < 1e-14);
  CHECK_THROWS_AS(offresonant_rate(c, 0.0, 1.0, RateBranch::Plus), Error);
}

TEST_CASE("overestimation ratio") {
  CHECK(overestimation_ratio(0.7, 0.7, 0.7) == 1.0);
  CHECK(overestimation_ratio(2.0, 0.8, 1.2) == 2.0);
  CHECK_THROWS_AS(overestimation_ratio(0.0, 1.0, 1.0), Error);

  const TemperatureEstimate s{1.2, 0.1, TemperatureMethod::Shadow};
  const TemperatureEstimate f{0.9, 0.05, TemperatureMethod::Fkl};
  const TemperatureEstimate e{1.0, 0.02, TemperatureMethod::Energy};
  const double b = f.value + e.value;
  const double expected = std::sqrt(std::pow(2 * s.std_error / b, 2) +
                                    std::pow(2 * s.value / (b * b), 2) * (f.std_error * f.std_error + e.std_error * e.std_error));
  CHECK(overestimation_ratio_stderr(s, f, e) == doctest::Approx(expected).epsilon(1e-12));
}
