#pragma once

#include <cstddef>
#include <cstdint>
#include <numbers>
#include <string>
#include <vector>

#include "rqe/models.hpp"
#include "rqe/noise.hpp"
#include "rqe/qstate.hpp"
#include "rqe/rng.hpp"

namespace rqe {

/// Shadow-qubit energy and measured bit (1 = excited) from the final cycle.
struct ThermometryRecord {
  double omega;
  int outcome;

  bool operator==(const ThermometryRecord&) const = default;
};

enum class SweepGranularity { PerCycle, PerLayer };

/// How dt maps to the rotation angle per unit energy in one layer.
/// Radians: exp(-i dt H). Turns: exp(-2 pi i dt H).
enum class PhaseConvention { Radians, Turns };

struct RqeSchedule {
  double dt = 0.0667;
  std::size_t layers_per_pulse = 20;
  std::size_t n_resets = 40;
  double sweep_high = 6.0;
  double sweep_low = 0.75;
  double sweep_fraction = 0.75;
  double pulse_phase_sum = std::numbers::pi / 4.0;
  SweepGranularity sweep_granularity = SweepGranularity::PerCycle;
  PhaseConvention phase_convention = PhaseConvention::Radians;
  bool thermometry_final_cycle = true;
  double thermometry_omega_low = 1.0;
  double thermometry_omega_high = 6.0;

  void validate() const;
  /// Rotation angle per unit coefficient in one layer.
  double layer_phase() const {
    return phase_convention == PhaseConvention::Turns ? 2.0 * std::numbers::pi * dt : dt;
  }
};

/// Dome pulse A * 4t(1-t), t = (layer+1)/(N_LPS+1), with A fixed so the
/// pulse sums to `pulse_phase_sum` over the layers of one cycle.
double dome_amplitude(std::size_t layer, const RqeSchedule& sched);

/// Downhill sweep: linear from sweep_high at cycle 0 to sweep_low at cycle
/// ceil(sweep_fraction * N_r) - 1, then held.
double sweep_omega(std::size_t cycle, const RqeSchedule& sched);

/// Same sweep resolved per layer over the N_r * N_LPS layers of the run.
double sweep_omega_at_layer(std::size_t cycle, std::size_t layer, const RqeSchedule& sched);

/// The primary Hamiltonian together with the shadow register wiring.
/// Primary qubits occupy [0, N_P), shadow qubits [N_P, N_P + N_S).
struct RqeSystem {
  HamiltonianSpec primary;
  CouplingMap coupling;
  /// Multiplies the shadow Hamiltonian; -1 makes |0> the low-energy state.
  double shadow_sign = -1.0;

  std::size_t n_primary() const { return coupling.n_primary; }
  std::size_t n_shadow() const { return coupling.n_shadow; }
  std::size_t n_qubits() const { return n_primary() + n_shadow(); }
  void validate() const;
};

struct CycleSetup {
  /// Shadow energies held for the whole cycle, one per shadow qubit.
  std::vector<double> omegas;
  /// When non-empty, one energy per layer shared by every shadow qubit.
  std::vector<double> layer_omegas;
  /// Reset the shadows at the end; otherwise measure them and report records.
  bool reset = true;
  /// Multiplies the dome pulse (0 switches the coupling gates off).
  double coupling_scale = 1.0;
};

/// Applies exp(-i phase c_k P_k) for every term in order, each followed by
/// its sampled gate error. Single-qubit terms only draw noise when
/// `single_qubit_noise` is set.
void apply_trotter_layer(StateVector& state, const HamiltonianSpec& h, double phase, const NoiseModel& nm, Rng& rng,
                         bool single_qubit_noise = true);

/// One reset cycle: N_LPS layers of H_P, H_S, H_PS followed by a reset or a
/// measurement of every shadow qubit.
///
/// Random draws, in order: coupling axes (random mode, one per pair), gate
/// errors in application order, then per shadow qubit ascending the
/// measurement draw and its reset/readout error draw.
std::vector<ThermometryRecord> run_cycle(StateVector& state, const RqeSystem& system, const CycleSetup& setup,
                                         const RqeSchedule& sched, const NoiseModel& nm, Rng& rng);

struct TrajectoryConfig {
  RqeSystem system;
  std::string initial_primary;
  RqeSchedule schedule;
  NoiseModel noise;
  /// Z-basis bitstrings drawn from the final primary marginal.
  std::size_t zbasis_samples = 16;

  void validate() const;
};

struct TrajectoryResult {
  double final_energy = 0.0;
  /// <H_P> after each cycle's reset or measurement.
  std::vector<double> energy_history;
  std::vector<ThermometryRecord> thermometry_records;
  /// Primary-register basis indices.
  std::vector<std::uint64_t> zbasis_samples;
  std::uint64_t seed = 0;

  bool operator==(const TrajectoryResult&) const = default;
};

TrajectoryResult run_trajectory(const TrajectoryConfig& config, std::uint64_t seed);

}  // namespace rqe
