#pragma once

#include <cstddef>
#include <optional>
#include <span>

#include "rqe/qstate.hpp"
#include "rqe/rng.hpp"

namespace rqe {

struct PauliError {
  std::size_t qubit;
  Axis axis;

  bool operator==(const PauliError&) const = default;
};

/// Stochastic depolarizing gate noise, unraveled into Pauli trajectories.
struct NoiseModel {
  double p2 = 0.0;
  /// Single-qubit gate error; p2 / 10 unless set.
  std::optional<double> p1_override;
  double p_measure = 0.0;
  double p_reset = 0.0;
  /// Whether the shadow-register Z rotations draw single-qubit errors.
  bool shadow_rotation_noise = true;

  double p1() const { return p1_override.value_or(p2 / 10.0); }
  void validate() const;
};

// A channel with probability 0 consumes no random draw; otherwise each call
// consumes exactly one, whose value also selects the qubit and axis.

/// Probability p2 of an error; then qubit uniform over {qubit_a, qubit_b}
/// and axis uniform over {X, Y, Z}.
std::optional<PauliError> sample_two_qubit_error(const NoiseModel& nm, std::size_t qubit_a, std::size_t qubit_b,
                                                 Rng& rng);

std::optional<PauliError> sample_single_qubit_error(const NoiseModel& nm, std::size_t qubit, Rng& rng);

/// Error draw for a gate on `qubits`: one-qubit gates use p1, anything wider
/// uses p2 with the faulty qubit uniform over the support.
std::optional<PauliError> sample_gate_error(const NoiseModel& nm, std::span<const PauliFactor> qubits, Rng& rng);

/// True when a Bernoulli(probability) event fires; no draw for probability 0.
bool sample_event(double probability, Rng& rng);

}  // namespace rqe
