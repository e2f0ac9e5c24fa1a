#include "rqe/noise.hpp"

#include "rqe/error.hpp"

namespace rqe {

namespace {

bool is_probability(double p) { return p >= 0.0 && p <= 1.0; }

// Draws u once; on u < p, u / p is uniform on [0, 1) and picks one of
// `choices` outcomes.
std::optional<std::size_t> sample_choice(double p, std::size_t choices, Rng& rng) {
  if (p <= 0.0) return std::nullopt;
  const double u = rng.uniform();
  if (u >= p) return std::nullopt;
  const auto k = static_cast<std::size_t>(u / p * static_cast<double>(choices));
  return k < choices ? k : choices - 1;
}

}  // namespace

void NoiseModel::validate() const {
  if (!is_probability(p2)) throw Error(ErrorCode::Config, "noise.p2 must lie in [0, 1]");
  if (p1_override && !is_probability(*p1_override)) throw Error(ErrorCode::Config, "noise.p1 must lie in [0, 1]");
  if (!is_probability(p_measure)) throw Error(ErrorCode::Config, "noise.p_m must lie in [0, 1]");
  if (!is_probability(p_reset)) throw Error(ErrorCode::Config, "noise.p_r must lie in [0, 1]");
}

std::optional<PauliError> sample_two_qubit_error(const NoiseModel& nm, std::size_t qubit_a, std::size_t qubit_b,
                                                 Rng& rng) {
  if (qubit_a == qubit_b) throw Error(ErrorCode::InvalidArgument, "two-qubit gate needs distinct qubits");
  const auto k = sample_choice(nm.p2, 6, rng);
  if (!k) return std::nullopt;
  return PauliError{*k < 3 ? qubit_a : qubit_b, static_cast<Axis>(*k % 3)};
}

std::optional<PauliError> sample_single_qubit_error(const NoiseModel& nm, std::size_t qubit, Rng& rng) {
  const auto k = sample_choice(nm.p1(), 3, rng);
  if (!k) return std::nullopt;
  return PauliError{qubit, static_cast<Axis>(*k)};
}

std::optional<PauliError> sample_gate_error(const NoiseModel& nm, std::span<const PauliFactor> qubits, Rng& rng) {
  if (qubits.empty()) return std::nullopt;
  if (qubits.size() == 1) return sample_single_qubit_error(nm, qubits[0].qubit, rng);
  if (qubits.size() == 2) return sample_two_qubit_error(nm, qubits[0].qubit, qubits[1].qubit, rng);
  const auto k = sample_choice(nm.p2, 3 * qubits.size(), rng);
  if (!k) return std::nullopt;
  return PauliError{qubits[*k / 3].qubit, static_cast<Axis>(*k % 3)};
}

bool sample_event(double probability, Rng& rng) {
  if (probability <= 0.0) return false;
  return rng.uniform() < probability;
}

}  // namespace rqe
