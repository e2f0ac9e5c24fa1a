#include "rqe/spectra.hpp"

#include <lapacke.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <string>

#include "rqe/error.hpp"

namespace rqe {

namespace {

Complex i_power(std::size_t k) {
  static constexpr Complex table[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
  return table[k % 4];
}

void check_temperature(double temperature) {
  if (!(temperature > 0.0)) throw Error(ErrorCode::InvalidArgument, "temperature must be positive");
}

// Boltzmann weights relative to the ground state.
std::vector<double> relative_weights(std::span<const double> eigenvalues, double temperature) {
  const double e0 = eigenvalues.front();
  std::vector<double> w(eigenvalues.size());
  for (std::size_t j = 0; j < w.size(); ++j) w[j] = std::exp(-(eigenvalues[j] - e0) / temperature);
  return w;
}

}  // namespace

std::vector<Complex> dense_matrix(const HamiltonianSpec& h) {
  h.validate();
  if (h.n_qubits > kMaxDiagonalizationQubits)
    throw Error(ErrorCode::ResourceLimit, "dense matrices are limited to " +
                                              std::to_string(kMaxDiagonalizationQubits) + " qubits");
  const std::size_t dim = std::size_t{1} << h.n_qubits;
  std::vector<Complex> m(dim * dim);
  for (const auto& term : h.terms) {
    const std::uint64_t flip = term.string.flip_mask();
    const std::uint64_t sign = term.string.sign_mask();
    const Complex g = term.coefficient * i_power(term.string.y_count());
    for (std::uint64_t b = 0; b < dim; ++b) {
      const std::uint64_t row = b ^ flip;
      m[row + b * dim] += (std::popcount(b & sign) & 1) ? -g : g;
    }
  }
  return m;
}

ThermalEnsemble::ThermalEnsemble(std::vector<double> eigenvalues, std::vector<double> squared_overlaps,
                                 std::vector<Complex> eigenvectors)
    : eigenvalues_(std::move(eigenvalues)),
      squared_overlaps_(std::move(squared_overlaps)),
      eigenvectors_(std::move(eigenvectors)) {
  if (eigenvalues_.empty()) throw Error(ErrorCode::InvalidArgument, "empty spectrum");
  if (!std::is_sorted(eigenvalues_.begin(), eigenvalues_.end()))
    throw Error(ErrorCode::InvalidArgument, "eigenvalues must be ascending");
}

ThermalEnsemble diagonalize(const HamiltonianSpec& h, bool keep_vectors) {
  std::vector<Complex> m = dense_matrix(h);
  const auto dim = static_cast<lapack_int>(std::size_t{1} << h.n_qubits);
  const bool real = std::all_of(m.begin(), m.end(), [](const Complex& z) { return z.imag() == 0.0; });
  const char jobz = keep_vectors ? 'V' : 'N';
  std::vector<double> w(static_cast<std::size_t>(dim));
  std::vector<Complex> vectors;
  lapack_int info = 0;

  if (real) {
    std::vector<double> a(m.size());
    std::transform(m.begin(), m.end(), a.begin(), [](const Complex& z) { return z.real(); });
    m.clear();
    m.shrink_to_fit();
    info = LAPACKE_dsyevd(LAPACK_COL_MAJOR, jobz, 'U', dim, a.data(), dim, w.data());
    if (info == 0 && keep_vectors) vectors.assign(a.begin(), a.end());
  } else {
    info = LAPACKE_zheevd(LAPACK_COL_MAJOR, jobz, 'U', dim, reinterpret_cast<lapack_complex_double*>(m.data()), dim,
                          w.data());
    if (info == 0 && keep_vectors) vectors = std::move(m);
  }
  if (info != 0) throw Error(ErrorCode::Numerical, "eigensolver failed with info " + std::to_string(info));

  std::vector<double> overlaps;
  if (keep_vectors) {
    overlaps.resize(vectors.size());
    std::transform(vectors.begin(), vectors.end(), overlaps.begin(), [](const Complex& z) { return std::norm(z); });
  }
  return ThermalEnsemble(std::move(w), std::move(overlaps), std::move(vectors));
}

double ground_state_energy(const ThermalEnsemble& ens) { return ens.eigenvalues().front(); }

double excess_energy_at_temperature(const ThermalEnsemble& ens, double temperature) {
  check_temperature(temperature);
  const auto e = ens.eigenvalues();
  const auto w = relative_weights(e, temperature);
  double z = 0.0;
  double excess = 0.0;
  for (std::size_t j = 0; j < e.size(); ++j) {
    z += w[j];
    excess += (e[j] - e.front()) * w[j];
  }
  return excess / z;
}

double energy_at_temperature(const ThermalEnsemble& ens, double temperature) {
  return ens.eigenvalues().front() + excess_energy_at_temperature(ens, temperature);
}

double infinite_temperature_energy(const ThermalEnsemble& ens) {
  const auto e = ens.eigenvalues();
  return std::accumulate(e.begin(), e.end(), 0.0) / static_cast<double>(e.size());
}

std::vector<double> thermal_zbasis_distribution(const ThermalEnsemble& ens, double temperature) {
  check_temperature(temperature);
  if (!ens.has_vectors())
    throw Error(ErrorCode::InvalidArgument, "thermal Z-basis distribution needs retained eigenvectors");
  const std::size_t dim = ens.dimension();
  auto w = relative_weights(ens.eigenvalues(), temperature);
  const double z = std::accumulate(w.begin(), w.end(), 0.0);
  const auto overlaps = ens.squared_overlaps();
  std::vector<double> q(dim, 0.0);
  for (std::size_t j = 0; j < dim; ++j) {
    const double pj = w[j] / z;
    if (pj == 0.0) continue;
    const double* column = overlaps.data() + j * dim;
    for (std::size_t s = 0; s < dim; ++s) q[s] += pj * column[s];
  }
  return q;
}

}  // namespace rqe
