#include "rqe/engine.hpp"

#include <cmath>
#include <string>

#include "rqe/error.hpp"

namespace rqe {

namespace {

// Last index of the sweep ramp for `steps` steps.
std::size_t ramp_end(double fraction, std::size_t steps) {
  const double x = std::ceil(fraction * static_cast<double>(steps) - 1e-9);
  return x < 1.0 ? 0 : static_cast<std::size_t>(x) - 1;
}

double ramp(std::size_t position, std::size_t end, double high, double low) {
  if (position == 0) return high;
  if (position >= end) return low;
  return high + (low - high) * static_cast<double>(position) / static_cast<double>(end);
}

void apply_error(StateVector& state, const std::optional<PauliError>& err) {
  if (err) state.apply_pauli(err->qubit, err->axis);
}

}  // namespace

void RqeSchedule::validate() const {
  if (!(dt > 0.0)) throw Error(ErrorCode::Config, "schedule.dt must be positive");
  if (layers_per_pulse < 1) throw Error(ErrorCode::Config, "schedule.layers_per_pulse must be at least 1");
  if (n_resets < 1) throw Error(ErrorCode::Config, "schedule.n_resets must be at least 1");
  if (!(sweep_low > 0.0) || !(sweep_high >= sweep_low))
    throw Error(ErrorCode::Config, "schedule needs sweep_high >= sweep_low > 0");
  if (!(sweep_fraction > 0.0 && sweep_fraction <= 1.0))
    throw Error(ErrorCode::Config, "schedule.sweep_fraction must lie in (0, 1]");
  if (!(pulse_phase_sum > 0.0)) throw Error(ErrorCode::Config, "schedule.pulse_phase_sum must be positive");
  if (!(thermometry_omega_low > 0.0 && thermometry_omega_high > thermometry_omega_low))
    throw Error(ErrorCode::Config, "thermometry omega range must satisfy 0 < low < high");
}

double dome_amplitude(std::size_t layer, const RqeSchedule& sched) {
  const std::size_t n = sched.layers_per_pulse;
  if (layer >= n)
    throw Error(ErrorCode::OutOfRange, "layer " + std::to_string(layer) + " outside pulse of " + std::to_string(n));
  auto shape = [n](std::size_t k) {
    const double t = static_cast<double>(k + 1) / static_cast<double>(n + 1);
    return 4.0 * t * (1.0 - t);
  };
  double area = 0.0;
  for (std::size_t k = 0; k < n; ++k) area += shape(k);
  return sched.pulse_phase_sum / (area * sched.dt) * shape(layer);
}

double sweep_omega(std::size_t cycle, const RqeSchedule& sched) {
  if (cycle >= sched.n_resets)
    throw Error(ErrorCode::OutOfRange, "cycle " + std::to_string(cycle) + " beyond " + std::to_string(sched.n_resets));
  return ramp(cycle, ramp_end(sched.sweep_fraction, sched.n_resets), sched.sweep_high, sched.sweep_low);
}

double sweep_omega_at_layer(std::size_t cycle, std::size_t layer, const RqeSchedule& sched) {
  if (cycle >= sched.n_resets || layer >= sched.layers_per_pulse)
    throw Error(ErrorCode::OutOfRange, "sweep position outside the run");
  const std::size_t steps = sched.n_resets * sched.layers_per_pulse;
  return ramp(cycle * sched.layers_per_pulse + layer, ramp_end(sched.sweep_fraction, steps), sched.sweep_high,
              sched.sweep_low);
}

void RqeSystem::validate() const {
  coupling.validate();
  primary.validate();
  if (primary.n_qubits != n_primary())
    throw Error(ErrorCode::Config, "primary Hamiltonian size does not match the coupling map");
}

void apply_trotter_layer(StateVector& state, const HamiltonianSpec& h, double phase, const NoiseModel& nm, Rng& rng,
                         bool single_qubit_noise) {
  for (const auto& term : h.terms) {
    state.apply_pauli_exp(term.string, phase * term.coefficient);
    if (term.string.weight() == 1 && !single_qubit_noise) continue;
    apply_error(state, sample_gate_error(nm, term.string.factors(), rng));
  }
}

std::vector<ThermometryRecord> run_cycle(StateVector& state, const RqeSystem& system, const CycleSetup& setup,
                                         const RqeSchedule& sched, const NoiseModel& nm, Rng& rng) {
  const std::size_t n_p = system.n_primary();
  const std::size_t n_s = system.n_shadow();
  if (state.n_qubits() != n_p + n_s)
    throw Error(ErrorCode::InvalidArgument, "state does not cover the primary and shadow registers");
  if (setup.layer_omegas.empty() && setup.omegas.size() != n_s)
    throw Error(ErrorCode::InvalidArgument, "cycle needs one shadow energy per shadow qubit");
  if (!setup.layer_omegas.empty() && setup.layer_omegas.size() != sched.layers_per_pulse)
    throw Error(ErrorCode::InvalidArgument, "per-layer shadow energies must cover every layer");

  const double phase = sched.layer_phase();
  HamiltonianSpec coupling = build_coupling(system.coupling, 1.0, rng);
  const bool coupling_on = setup.coupling_scale != 0.0;

  HamiltonianSpec shadow;
  if (setup.layer_omegas.empty()) shadow = build_shadow_hamiltonian(setup.omegas, n_p, system.shadow_sign);
  std::vector<double> shared(n_s);

  for (std::size_t layer = 0; layer < sched.layers_per_pulse; ++layer) {
    if (!setup.layer_omegas.empty()) {
      shared.assign(n_s, setup.layer_omegas[layer]);
      shadow = build_shadow_hamiltonian(shared, n_p, system.shadow_sign);
    }
    apply_trotter_layer(state, system.primary, phase, nm, rng);
    apply_trotter_layer(state, shadow, phase, nm, rng, nm.shadow_rotation_noise);
    if (coupling_on) {
      const double omega_ps = setup.coupling_scale * dome_amplitude(layer, sched);
      for (auto& term : coupling.terms) term.coefficient = omega_ps;
      apply_trotter_layer(state, coupling, phase, nm, rng);
    }
  }

  std::vector<ThermometryRecord> records;
  for (std::size_t k = 0; k < n_s; ++k) {
    const std::size_t qubit = n_p + k;
    if (setup.reset) {
      state.reset(qubit, rng.uniform());
      if (sample_event(nm.p_reset, rng)) state.apply_pauli(qubit, Axis::X);
    } else {
      int bit = state.measure(qubit, rng.uniform());
      if (sample_event(nm.p_measure, rng)) bit ^= 1;
      const double omega = setup.layer_omegas.empty() ? setup.omegas[k] : setup.layer_omegas.back();
      records.push_back({omega, bit});
    }
  }
  return records;
}

void TrajectoryConfig::validate() const {
  system.validate();
  schedule.validate();
  noise.validate();
  if (initial_primary.size() != system.n_primary())
    throw Error(ErrorCode::Config, "initial primary bitstring length does not match N_P");
}

TrajectoryResult run_trajectory(const TrajectoryConfig& config, std::uint64_t seed) {
  config.validate();
  const auto& sched = config.schedule;
  const std::size_t n_p = config.system.n_primary();
  const std::size_t n_s = config.system.n_shadow();

  Rng rng(seed);
  StateVector state = StateVector::basis(n_p + n_s, config.initial_primary + std::string(n_s, '0'));

  TrajectoryResult result;
  result.seed = seed;
  result.energy_history.reserve(sched.n_resets);

  for (std::size_t cycle = 0; cycle < sched.n_resets; ++cycle) {
    CycleSetup setup;
    const bool thermometry = sched.thermometry_final_cycle && cycle + 1 == sched.n_resets;
    if (thermometry) {
      setup.reset = false;
      setup.omegas.resize(n_s);
      for (auto& w : setup.omegas) w = rng.uniform(sched.thermometry_omega_low, sched.thermometry_omega_high);
    } else if (sched.sweep_granularity == SweepGranularity::PerLayer) {
      setup.layer_omegas.resize(sched.layers_per_pulse);
      for (std::size_t k = 0; k < sched.layers_per_pulse; ++k)
        setup.layer_omegas[k] = sweep_omega_at_layer(cycle, k, sched);
    } else {
      setup.omegas.assign(n_s, sweep_omega(cycle, sched));
    }

    auto records = run_cycle(state, config.system, setup, sched, config.noise, rng);
    if (thermometry) result.thermometry_records = std::move(records);
    result.energy_history.push_back(expectation(state, config.system.primary));
  }
  result.final_energy = result.energy_history.back();

  const std::uint64_t primary_mask = (std::uint64_t{1} << n_p) - 1;
  result.zbasis_samples.reserve(config.zbasis_samples);
  for (std::size_t s = 0; s < config.zbasis_samples; ++s)
    result.zbasis_samples.push_back(state.sample_index(rng.uniform()) & primary_mask);
  return result;
}

}  // namespace rqe
