#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rqe/qstate.hpp"
#include "rqe/rng.hpp"

namespace rqe {

struct PauliTerm {
  double coefficient;
  PauliString string;
};

/// Real-weighted sum of Pauli strings. Term order is the Trotter order used
/// by the engine.
struct HamiltonianSpec {
  std::size_t n_qubits = 0;
  std::vector<PauliTerm> terms;

  void validate() const;
  bool operator==(const HamiltonianSpec& other) const;
};

enum class ModelKind { Tfim, Heisenberg, Xxz };

std::string_view model_kind_name(ModelKind kind);
ModelKind parse_model_kind(std::string_view name);

/// -J sum Z_j Z_{j+1} - kappa sum X_j. Bonds are emitted even, odd, then the
/// wrap bond, followed by the field terms.
HamiltonianSpec build_tfim(std::size_t n, double j, double kappa, bool periodic = true);

/// sum_a J_a sigma^a_j sigma^a_{j+1} for a = x, y, z; one full bond sweep per
/// axis in the order XX, YY, ZZ.
HamiltonianSpec build_xxz(std::size_t n, double jx, double jy, double jz, bool periodic = true);

inline HamiltonianSpec build_heisenberg(std::size_t n, double j, bool periodic = true) {
  return build_xxz(n, j, j, j, periodic);
}

/// sign * (omega_j / 2) Z on qubit first_shadow + j. The default sign is
/// the printed form where |0> carries +omega/2.
HamiltonianSpec build_shadow_hamiltonian(std::span<const double> omegas, std::size_t first_shadow,
                                         double sign = 1.0);

enum class CouplingMode { FixedAxis, RandomAxis };

struct CouplingPair {
  std::size_t primary;
  std::size_t shadow;  // index within the shadow register
};

struct CouplingMap {
  std::size_t n_primary = 0;
  std::size_t n_shadow = 0;
  std::vector<CouplingPair> pairs;
  CouplingMode mode = CouplingMode::FixedAxis;
  Axis axis = Axis::Y;

  /// Shadow k couples to primaries 2k and 2k+1 (when present).
  static CouplingMap two_to_one(std::size_t n_primary, std::size_t n_shadow,
                                CouplingMode mode = CouplingMode::FixedAxis, Axis axis = Axis::Y);

  void validate() const;
};

/// One two-qubit term per pair with coefficient `amplitude`. In random mode
/// each pair draws its axis from {X, Y, Z} using `rng`; fixed mode leaves
/// `rng` untouched.
HamiltonianSpec build_coupling(const CouplingMap& map, double amplitude, Rng& rng);

/// Character i is qubit i: alternating "0101..." for TFIM, all zeros for the
/// antiferromagnetic models.
std::string initial_primary_state(ModelKind kind, std::size_t n);

/// <psi|H|psi>.
double expectation(const StateVector& state, const HamiltonianSpec& h);

}  // namespace rqe
