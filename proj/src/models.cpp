#include "rqe/models.hpp"

#include <cmath>
#include <string>

#include "rqe/error.hpp"

namespace rqe {

namespace {

void check_ring(std::size_t n, bool periodic) {
  if (periodic && n < 3) throw Error(ErrorCode::InvalidArgument, "a ring needs at least 3 sites");
  if (!periodic && n < 2) throw Error(ErrorCode::InvalidArgument, "a chain needs at least 2 sites");
}

// Bonds (j, j+1): even j, odd j, then the wrap bond (n-1, 0).
std::vector<std::pair<std::size_t, std::size_t>> bond_order(std::size_t n, bool periodic) {
  std::vector<std::pair<std::size_t, std::size_t>> bonds;
  for (std::size_t start : {std::size_t{0}, std::size_t{1}})
    for (std::size_t j = start; j + 1 < n; j += 2) bonds.emplace_back(j, j + 1);
  if (periodic) bonds.emplace_back(n - 1, 0);
  return bonds;
}

}  // namespace

void HamiltonianSpec::validate() const {
  for (const auto& t : terms) {
    if (!std::isfinite(t.coefficient))
      throw Error(ErrorCode::InvalidArgument, "Hamiltonian coefficient is not finite");
    if (t.string.span_qubits() > n_qubits)
      throw Error(ErrorCode::OutOfRange, "Hamiltonian term exceeds register of " + std::to_string(n_qubits) + " qubits");
  }
}

bool HamiltonianSpec::operator==(const HamiltonianSpec& other) const {
  if (n_qubits != other.n_qubits || terms.size() != other.terms.size()) return false;
  for (std::size_t i = 0; i < terms.size(); ++i)
    if (terms[i].coefficient != other.terms[i].coefficient || !(terms[i].string == other.terms[i].string))
      return false;
  return true;
}

std::string_view model_kind_name(ModelKind kind) {
  switch (kind) {
    case ModelKind::Tfim: return "tfim";
    case ModelKind::Heisenberg: return "heisenberg";
    case ModelKind::Xxz: return "xxz";
  }
  return "unknown";
}

ModelKind parse_model_kind(std::string_view name) {
  if (name == "tfim") return ModelKind::Tfim;
  if (name == "heisenberg") return ModelKind::Heisenberg;
  if (name == "xxz") return ModelKind::Xxz;
  throw Error(ErrorCode::Config, "unknown model kind '" + std::string(name) + "'");
}

HamiltonianSpec build_tfim(std::size_t n, double j, double kappa, bool periodic) {
  check_ring(n, periodic);
  if (!(j > 0.0)) throw Error(ErrorCode::InvalidArgument, "TFIM coupling J must be positive");
  if (!(kappa >= 0.0)) throw Error(ErrorCode::InvalidArgument, "TFIM field kappa must be non-negative");
  HamiltonianSpec h{n, {}};
  for (auto [a, b] : bond_order(n, periodic)) h.terms.push_back({-j, PauliString::pair(a, Axis::Z, b, Axis::Z)});
  for (std::size_t q = 0; q < n; ++q) h.terms.push_back({-kappa, PauliString::single(q, Axis::X)});
  return h;
}

HamiltonianSpec build_xxz(std::size_t n, double jx, double jy, double jz, bool periodic) {
  check_ring(n, periodic);
  HamiltonianSpec h{n, {}};
  const auto bonds = bond_order(n, periodic);
  for (auto [axis, coupling] : {std::pair{Axis::X, jx}, std::pair{Axis::Y, jy}, std::pair{Axis::Z, jz}})
    for (auto [a, b] : bonds) h.terms.push_back({coupling, PauliString::pair(a, axis, b, axis)});
  h.validate();
  return h;
}

HamiltonianSpec build_shadow_hamiltonian(std::span<const double> omegas, std::size_t first_shadow, double sign) {
  if (omegas.empty()) throw Error(ErrorCode::InvalidArgument, "shadow register is empty");
  HamiltonianSpec h{first_shadow + omegas.size(), {}};
  for (std::size_t k = 0; k < omegas.size(); ++k) {
    if (!(omegas[k] > 0.0)) throw Error(ErrorCode::InvalidArgument, "shadow energies must be positive");
    h.terms.push_back({sign * omegas[k] / 2.0, PauliString::single(first_shadow + k, Axis::Z)});
  }
  return h;
}

CouplingMap CouplingMap::two_to_one(std::size_t n_primary, std::size_t n_shadow, CouplingMode mode, Axis axis) {
  CouplingMap map{n_primary, n_shadow, {}, mode, axis};
  for (std::size_t k = 0; k < n_shadow; ++k)
    for (std::size_t p : {2 * k, 2 * k + 1})
      if (p < n_primary) map.pairs.push_back({p, k});
  map.validate();
  return map;
}

void CouplingMap::validate() const {
  if (n_primary == 0 || n_shadow == 0) throw Error(ErrorCode::InvalidArgument, "coupling map needs both registers");
  std::vector<bool> seen(n_shadow, false);
  for (const auto& pair : pairs) {
    if (pair.primary >= n_primary || pair.shadow >= n_shadow)
      throw Error(ErrorCode::InvalidArgument, "coupling pair (" + std::to_string(pair.primary) + ", " +
                                                  std::to_string(pair.shadow) + ") out of range");
    seen[pair.shadow] = true;
  }
  for (std::size_t k = 0; k < n_shadow; ++k)
    if (!seen[k]) throw Error(ErrorCode::InvalidArgument, "shadow qubit " + std::to_string(k) + " is not coupled");
}

HamiltonianSpec build_coupling(const CouplingMap& map, double amplitude, Rng& rng) {
  map.validate();
  if (!(amplitude >= 0.0)) throw Error(ErrorCode::InvalidArgument, "coupling amplitude must be non-negative");
  HamiltonianSpec h{map.n_primary + map.n_shadow, {}};
  for (const auto& pair : map.pairs) {
    Axis axis = map.axis;
    if (map.mode == CouplingMode::RandomAxis) axis = static_cast<Axis>(rng.below(3));
    h.terms.push_back({amplitude, PauliString::pair(pair.primary, axis, map.n_primary + pair.shadow, axis)});
  }
  return h;
}

std::string initial_primary_state(ModelKind kind, std::size_t n) {
  std::string bits(n, '0');
  if (kind == ModelKind::Tfim)
    for (std::size_t q = 1; q < n; q += 2) bits[q] = '1';
  return bits;
}

double expectation(const StateVector& state, const HamiltonianSpec& h) {
  Complex total{};
  for (const auto& t : h.terms) total += t.coefficient * state.pauli_expectation(t.string);
  if (std::abs(total.imag()) > 1e-10)
    throw Error(ErrorCode::Numerical, "energy expectation has imaginary part " + std::to_string(total.imag()));
  return total.real();
}

}  // namespace rqe
