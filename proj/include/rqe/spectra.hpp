#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "rqe/models.hpp"
#include "rqe/qstate.hpp"

namespace rqe {

inline constexpr std::size_t kMaxDiagonalizationQubits = 14;

/// Dense matrix of a Hamiltonian in the computational basis, column-major.
std::vector<Complex> dense_matrix(const HamiltonianSpec& h);

/// Full spectrum of a primary Hamiltonian, ascending, optionally with the
/// orthonormal eigenvectors (k_B = hbar = 1).
class ThermalEnsemble {
 public:
  ThermalEnsemble(std::vector<double> eigenvalues, std::vector<double> squared_overlaps,
                  std::vector<Complex> eigenvectors);

  std::span<const double> eigenvalues() const { return eigenvalues_; }
  std::size_t dimension() const { return eigenvalues_.size(); }
  bool has_vectors() const { return !eigenvectors_.empty(); }
  /// Column j holds eigenvector j (column-major, dimension x dimension).
  std::span<const Complex> eigenvectors() const { return eigenvectors_; }
  /// |<z|E_j>|^2 at [z + j * dimension].
  std::span<const double> squared_overlaps() const { return squared_overlaps_; }

 private:
  std::vector<double> eigenvalues_;
  std::vector<double> squared_overlaps_;
  std::vector<Complex> eigenvectors_;
};

ThermalEnsemble diagonalize(const HamiltonianSpec& h, bool keep_vectors);

double ground_state_energy(const ThermalEnsemble& ens);

/// Boltzmann average of the spectrum at temperature T, evaluated relative
/// to the ground state so no weight under- or overflows.
double energy_at_temperature(const ThermalEnsemble& ens, double temperature);

/// E(T) - E_GS, kept at full relative precision when it is tiny.
double excess_energy_at_temperature(const ThermalEnsemble& ens, double temperature);

/// Mean of all eigenvalues (the infinite-temperature energy).
double infinite_temperature_energy(const ThermalEnsemble& ens);

/// Diagonal of exp(-H/T)/Z in the computational basis.
std::vector<double> thermal_zbasis_distribution(const ThermalEnsemble& ens, double temperature);

}  // namespace rqe
