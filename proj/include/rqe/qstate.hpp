#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace rqe {

using Complex = std::complex<double>;

enum class Axis : std::uint8_t { X, Y, Z };

char axis_name(Axis axis);
Axis parse_axis(std::string_view name);

struct PauliFactor {
  std::size_t qubit;
  Axis axis;
};

/// Tensor product of single-qubit Pauli operators on distinct qubits.
/// Any such product squares to the identity.
class PauliString {
 public:
  PauliString() = default;
  explicit PauliString(std::vector<PauliFactor> factors);

  static PauliString single(std::size_t qubit, Axis axis);
  static PauliString pair(std::size_t qubit_a, Axis axis_a, std::size_t qubit_b, Axis axis_b);

  std::span<const PauliFactor> factors() const { return factors_; }
  std::size_t weight() const { return factors_.size(); }

  /// Qubits carrying X or Y (bits flipped by the operator).
  std::uint64_t flip_mask() const { return flip_mask_; }
  /// Qubits carrying Y or Z (contribute a sign on |1>).
  std::uint64_t sign_mask() const { return sign_mask_; }
  std::size_t y_count() const { return y_count_; }
  bool is_diagonal() const { return flip_mask_ == 0; }
  /// One past the highest qubit index, 0 for the identity.
  std::size_t span_qubits() const;

  bool operator==(const PauliString& other) const;

 private:
  std::vector<PauliFactor> factors_;
  std::uint64_t flip_mask_ = 0;
  std::uint64_t sign_mask_ = 0;
  std::size_t y_count_ = 0;
};

inline constexpr std::size_t kMaxQubits = 30;

/// Dense pure state over n qubits. Qubit q is bit q of the basis index
/// (qubit 0 is the least significant bit).
class StateVector {
 public:
  explicit StateVector(std::size_t n_qubits);

  /// Basis state where character i of `bits` ('0' or '1') sets qubit i.
  static StateVector basis(std::size_t n_qubits, std::string_view bits);
  /// Takes ownership of `amplitudes` (length must be a power of two) and
  /// normalizes them.
  static StateVector from_amplitudes(std::vector<Complex> amplitudes);

  std::size_t n_qubits() const { return n_qubits_; }
  std::size_t dimension() const { return amplitudes_.size(); }
  std::span<const Complex> amplitudes() const { return amplitudes_; }
  Complex amplitude(std::uint64_t index) const { return amplitudes_[index]; }

  double norm() const;

  /// state <- exp(-i theta P) state.
  void apply_pauli_exp(const PauliString& p, double theta);
  /// state <- P state.
  void apply_pauli_string(const PauliString& p);
  void apply_pauli(std::size_t qubit, Axis axis);

  /// Probability of reading 1 on `qubit`.
  double probability_one(std::size_t qubit) const;
  /// Projective Z measurement; outcome is 1 iff `rand` < Pr(1).
  int measure(std::size_t qubit, double rand);
  /// Measure, then flip to |0> if the outcome was 1.
  void reset(std::size_t qubit, double rand);

  /// <psi|P|psi>.
  Complex pauli_expectation(const PauliString& p) const;
  /// Full basis index sampled from |amplitude|^2 with a single uniform draw.
  std::uint64_t sample_index(double rand) const;

 private:
  void check_qubit(std::size_t qubit) const;
  void check_string(const PauliString& p) const;

  std::size_t n_qubits_;
  std::vector<Complex> amplitudes_;
};

}  // namespace rqe
