#include "rqe/qstate.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <string>

#include "rqe/error.hpp"

namespace rqe {

namespace {

inline bool parity(std::uint64_t x) { return (std::popcount(x) & 1) != 0; }

// i^k for k mod 4.
Complex i_power(std::size_t k) {
  switch (k % 4) {
    case 0: return {1.0, 0.0};
    case 1: return {0.0, 1.0};
    case 2: return {-1.0, 0.0};
    default: return {0.0, -1.0};
  }
}

// Spreads the bits of `i` around a zero at position `bit`.
inline std::uint64_t insert_zero(std::uint64_t i, unsigned bit) {
  const std::uint64_t low = i & ((std::uint64_t{1} << bit) - 1);
  return ((i >> bit) << (bit + 1)) | low;
}

}  // namespace

char axis_name(Axis axis) {
  switch (axis) {
    case Axis::X: return 'X';
    case Axis::Y: return 'Y';
    case Axis::Z: return 'Z';
  }
  return '?';
}

Axis parse_axis(std::string_view name) {
  if (name == "X" || name == "x") return Axis::X;
  if (name == "Y" || name == "y") return Axis::Y;
  if (name == "Z" || name == "z") return Axis::Z;
  throw Error(ErrorCode::InvalidArgument, "unknown Pauli axis '" + std::string(name) + "'");
}

PauliString::PauliString(std::vector<PauliFactor> factors) : factors_(std::move(factors)) {
  for (const auto& f : factors_) {
    if (f.qubit >= 64) throw Error(ErrorCode::OutOfRange, "Pauli factor qubit index exceeds 63");
    const std::uint64_t bit = std::uint64_t{1} << f.qubit;
    if ((flip_mask_ | sign_mask_) & bit)
      throw Error(ErrorCode::InvalidArgument, "Pauli string repeats qubit " + std::to_string(f.qubit));
    switch (f.axis) {
      case Axis::X: flip_mask_ |= bit; break;
      case Axis::Y: flip_mask_ |= bit; sign_mask_ |= bit; ++y_count_; break;
      case Axis::Z: sign_mask_ |= bit; break;
    }
  }
}

PauliString PauliString::single(std::size_t qubit, Axis axis) {
  return PauliString({{qubit, axis}});
}

PauliString PauliString::pair(std::size_t qubit_a, Axis axis_a, std::size_t qubit_b, Axis axis_b) {
  return PauliString({{qubit_a, axis_a}, {qubit_b, axis_b}});
}

std::size_t PauliString::span_qubits() const {
  const std::uint64_t all = flip_mask_ | sign_mask_;
  return all == 0 ? 0 : static_cast<std::size_t>(64 - std::countl_zero(all));
}

bool PauliString::operator==(const PauliString& other) const {
  return flip_mask_ == other.flip_mask_ && sign_mask_ == other.sign_mask_;
}

StateVector::StateVector(std::size_t n_qubits) : n_qubits_(n_qubits) {
  if (n_qubits > kMaxQubits)
    throw Error(ErrorCode::ResourceLimit, "state vector limited to " + std::to_string(kMaxQubits) + " qubits");
  amplitudes_.assign(std::size_t{1} << n_qubits, Complex{});
  amplitudes_[0] = 1.0;
}

StateVector StateVector::basis(std::size_t n_qubits, std::string_view bits) {
  if (bits.size() != n_qubits)
    throw Error(ErrorCode::InvalidArgument, "bitstring length " + std::to_string(bits.size()) +
                                                " does not match qubit count " + std::to_string(n_qubits));
  StateVector state(n_qubits);
  std::uint64_t index = 0;
  for (std::size_t q = 0; q < n_qubits; ++q) {
    if (bits[q] == '1') {
      index |= std::uint64_t{1} << q;
    } else if (bits[q] != '0') {
      throw Error(ErrorCode::InvalidArgument, "bitstring may only contain '0' and '1'");
    }
  }
  state.amplitudes_[0] = 0.0;
  state.amplitudes_[index] = 1.0;
  return state;
}

StateVector StateVector::from_amplitudes(std::vector<Complex> amplitudes) {
  const std::size_t dim = amplitudes.size();
  if (dim == 0 || !std::has_single_bit(dim))
    throw Error(ErrorCode::InvalidArgument, "amplitude count must be a power of two");
  StateVector state(static_cast<std::size_t>(std::countr_zero(dim)));
  state.amplitudes_ = std::move(amplitudes);
  const double n = state.norm();
  if (!(n > 0.0)) throw Error(ErrorCode::Numerical, "zero state vector");
  for (auto& a : state.amplitudes_) a /= n;
  return state;
}

double StateVector::norm() const {
  double sum = 0.0;
  for (const auto& a : amplitudes_) sum += std::norm(a);
  return std::sqrt(sum);
}

void StateVector::check_qubit(std::size_t qubit) const {
  if (qubit >= n_qubits_)
    throw Error(ErrorCode::OutOfRange, "qubit " + std::to_string(qubit) + " out of range for " +
                                           std::to_string(n_qubits_) + "-qubit state");
}

void StateVector::check_string(const PauliString& p) const {
  if (p.span_qubits() > n_qubits_)
    throw Error(ErrorCode::OutOfRange, "Pauli string acts on qubit " + std::to_string(p.span_qubits() - 1) +
                                           " of a " + std::to_string(n_qubits_) + "-qubit state");
}

void StateVector::apply_pauli_exp(const PauliString& p, double theta) {
  check_string(p);
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  const std::uint64_t sign = p.sign_mask();
  Complex* a = amplitudes_.data();
  const std::uint64_t dim = amplitudes_.size();

  if (p.is_diagonal()) {
    // exp(-i theta (+-1)) per basis state.
    const Complex plus(c, -s);
    const Complex minus(c, s);
    for (std::uint64_t b = 0; b < dim; ++b) a[b] *= parity(b & sign) ? minus : plus;
    return;
  }

  // (P a)[c] = i^nY (-1)^{|d & sign|} a[d] with d = c ^ flip.
  const std::uint64_t flip = p.flip_mask();
  const Complex g = i_power(p.y_count()) * Complex(0.0, -s);  // -i sin(theta) i^nY
  const unsigned low = static_cast<unsigned>(std::countr_zero(flip));
  const std::uint64_t half = dim >> 1;
  for (std::uint64_t i = 0; i < half; ++i) {
    const std::uint64_t x = insert_zero(i, low);
    const std::uint64_t y = x ^ flip;
    const Complex ax = a[x];
    const Complex ay = a[y];
    const Complex gy = parity(y & sign) ? -g : g;
    const Complex gx = parity(x & sign) ? -g : g;
    a[x] = c * ax + gy * ay;
    a[y] = c * ay + gx * ax;
  }
}

void StateVector::apply_pauli_string(const PauliString& p) {
  check_string(p);
  const std::uint64_t flip = p.flip_mask();
  const std::uint64_t sign = p.sign_mask();
  const Complex g = i_power(p.y_count());
  Complex* a = amplitudes_.data();
  const std::uint64_t dim = amplitudes_.size();
  if (flip == 0) {
    for (std::uint64_t b = 0; b < dim; ++b)
      if (parity(b & sign)) a[b] = -a[b];
    return;
  }
  const unsigned low = static_cast<unsigned>(std::countr_zero(flip));
  for (std::uint64_t i = 0; i < (dim >> 1); ++i) {
    const std::uint64_t x = insert_zero(i, low);
    const std::uint64_t y = x ^ flip;
    const Complex ax = a[x];
    const Complex ay = a[y];
    a[x] = (parity(y & sign) ? -g : g) * ay;
    a[y] = (parity(x & sign) ? -g : g) * ax;
  }
}

void StateVector::apply_pauli(std::size_t qubit, Axis axis) {
  check_qubit(qubit);
  apply_pauli_string(PauliString::single(qubit, axis));
}

double StateVector::probability_one(std::size_t qubit) const {
  check_qubit(qubit);
  const std::uint64_t half = amplitudes_.size() >> 1;
  const unsigned bit = static_cast<unsigned>(qubit);
  double p = 0.0;
  for (std::uint64_t i = 0; i < half; ++i)
    p += std::norm(amplitudes_[insert_zero(i, bit) | (std::uint64_t{1} << bit)]);
  return p;
}

int StateVector::measure(std::size_t qubit, double rand) {
  const double p1 = std::clamp(probability_one(qubit), 0.0, 1.0);
  int outcome = rand < p1 ? 1 : 0;
  // A branch whose weight is pure round-off cannot be renormalized.
  constexpr double kNegligible = 1e-14;
  if (outcome == 1 && p1 < kNegligible) outcome = 0;
  if (outcome == 0 && 1.0 - p1 < kNegligible) outcome = 1;

  const std::uint64_t mask = std::uint64_t{1} << qubit;
  const std::uint64_t keep = outcome == 1 ? mask : 0;
  double kept = 0.0;
  for (std::uint64_t b = 0; b < amplitudes_.size(); ++b) {
    if ((b & mask) != keep) {
      amplitudes_[b] = 0.0;
    } else {
      kept += std::norm(amplitudes_[b]);
    }
  }
  if (!(kept > 0.0)) throw Error(ErrorCode::Numerical, "state norm vanished after projection");
  const double scale = 1.0 / std::sqrt(kept);
  for (auto& a : amplitudes_) a *= scale;
  return outcome;
}

void StateVector::reset(std::size_t qubit, double rand) {
  if (measure(qubit, rand) == 1) apply_pauli(qubit, Axis::X);
}

Complex StateVector::pauli_expectation(const PauliString& p) const {
  check_string(p);
  const std::uint64_t flip = p.flip_mask();
  const std::uint64_t sign = p.sign_mask();
  const Complex* a = amplitudes_.data();
  const std::uint64_t dim = amplitudes_.size();
  if (flip == 0) {
    double sum = 0.0;
    for (std::uint64_t b = 0; b < dim; ++b) sum += parity(b & sign) ? -std::norm(a[b]) : std::norm(a[b]);
    return sum;
  }
  // sum_c conj(a[c]) (-1)^{|d & sign|} a[d], d = c ^ flip, times i^nY.
  Complex sum{};
  for (std::uint64_t c = 0; c < dim; ++c) {
    const std::uint64_t d = c ^ flip;
    const Complex term = std::conj(a[c]) * a[d];
    sum += parity(d & sign) ? -term : term;
  }
  return i_power(p.y_count()) * sum;
}

std::uint64_t StateVector::sample_index(double rand) const {
  double acc = 0.0;
  std::uint64_t last_nonzero = 0;
  for (std::uint64_t b = 0; b < amplitudes_.size(); ++b) {
    const double w = std::norm(amplitudes_[b]);
    if (w == 0.0) continue;
    acc += w;
    last_nonzero = b;
    if (rand < acc) return b;
  }
  return last_nonzero;
}

}  // namespace rqe
