#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "rqe/engine.hpp"
#include "rqe/models.hpp"
#include "rqe/noise.hpp"
#include "rqe/thermometry.hpp"

namespace rqe {

inline constexpr std::string_view kCodeVersion = "0.1.0";
inline constexpr int kResultsSchemaVersion = 1;

struct ModelConfig {
  ModelKind kind = ModelKind::Heisenberg;
  double j = 1.0;
  double kappa = 0.75;
  double jx = 1.0;
  double jy = 0.5;
  double jz = 1.0;
};

struct ThermometryConfig {
  std::size_t zbasis_samples = 16;
  bool fkl_enabled = true;
  double grid_low = 0.02;
  double grid_high = 20.0;
  std::size_t grid_points = 200;
  std::size_t bootstrap_resamples = 100;
  std::size_t shadow_bins = 10;
  StderrSource shadow_stderr = StderrSource::Bootstrap;
};

struct ExperimentConfig {
  ModelConfig model;
  std::size_t n_primary = 10;
  /// 0 selects ceil(n_primary / 2).
  std::size_t n_shadow = 0;
  CouplingMode coupling_mode = CouplingMode::FixedAxis;
  Axis coupling_axis = Axis::Y;
  /// Custom (primary, shadow) wiring; empty selects the 2:1 map.
  std::vector<CouplingPair> coupling_pairs;
  double shadow_sign = -1.0;
  RqeSchedule schedule;
  NoiseModel noise;
  ThermometryConfig thermometry;
  std::size_t n_trajectories = 1000;
  std::uint64_t master_seed = 1;
  std::string output_path = "results.json";

  std::size_t shadow_count() const;
  HamiltonianSpec primary_hamiltonian() const;
  CouplingMap coupling_map() const;
  TrajectoryConfig trajectory_config() const;
  void validate() const;
};

nlohmann::json config_to_json(const ExperimentConfig& cfg);
/// Unknown keys are rejected; missing keys keep their defaults.
ExperimentConfig config_from_json(const nlohmann::json& doc);
ExperimentConfig load_config(const std::filesystem::path& path);
/// Applies "dotted.key=value" to a config document; the value is parsed as
/// JSON when possible and taken as a string otherwise.
void apply_override(nlohmann::json& doc, std::string_view assignment);
/// FNV-1a over the canonical config document, as 16 hex digits.
std::string config_hash(const ExperimentConfig& cfg);

struct EstimateSlot {
  std::optional<TemperatureEstimate> estimate;
  std::string error;
};

struct AggregateResult {
  ExperimentConfig config;
  std::string config_hash;
  std::string code_version{kCodeVersion};
  std::string created_at;

  std::size_t n_trajectories = 0;
  std::vector<std::uint64_t> seeds;
  std::vector<double> final_energies;

  double ground_state_energy = 0.0;
  double infinite_temperature_energy = 0.0;
  double mean_energy = 0.0;
  /// NaN for a single trajectory.
  double mean_energy_stderr = 0.0;
  double approximation_ratio = 0.0;
  double approximation_ratio_stderr = 0.0;
  std::vector<double> energy_curve;
  std::vector<double> energy_curve_stderr;

  std::vector<ThermometryRecord> thermometry_records;
  std::vector<std::uint64_t> zbasis_counts;

  EstimateSlot t_energy;
  EstimateSlot t_fkl;
  EstimateSlot t_shadow;
  double peak_fkl = 0.0;
  double shadow_fisher_stderr = 0.0;
  std::vector<OccupationBin> shadow_bins;
  std::optional<double> overestimation_ratio;
  std::optional<double> overestimation_ratio_stderr;

  bool stderr_defined() const { return n_trajectories > 1; }
};

struct RunOptions {
  /// 0 reads RQE_WORKERS, then falls back to the hardware concurrency.
  std::size_t workers = 0;
};

std::size_t resolve_workers(std::size_t requested);

/// Runs `count` trajectories with seeds derive_seed(master_seed, i); the
/// output order is the trajectory index regardless of scheduling.
std::vector<TrajectoryResult> run_trajectories(const TrajectoryConfig& config, std::size_t count,
                                               std::uint64_t master_seed, std::size_t workers);

/// Pools trajectories into aggregates and fills every temperature estimate.
AggregateResult aggregate(const ExperimentConfig& cfg, const std::vector<TrajectoryResult>& trajectories);

/// Recomputes the ensemble-dependent quantities from the stored raw data.
void compute_estimates(AggregateResult& result);

AggregateResult run_experiment(const ExperimentConfig& cfg, const RunOptions& options = {});

enum class SweepAxis { NPrimary, NResets, P2, Kappa };

SweepAxis parse_sweep_axis(std::string_view name);
std::string_view sweep_axis_name(SweepAxis axis);
ExperimentConfig with_axis_value(const ExperimentConfig& base, SweepAxis axis, double value);

std::vector<AggregateResult> run_sweep(const ExperimentConfig& base, SweepAxis axis, std::span<const double> values,
                                       const RunOptions& options = {});

nlohmann::json result_to_json(const AggregateResult& result);
AggregateResult result_from_json(const nlohmann::json& doc);

/// Writes the JSON document plus companion CSVs next to it
/// (<stem>.energy_curve.csv, <stem>.shadow_bins.csv, <stem>.zbasis.csv).
void save_results(const AggregateResult& result, const std::filesystem::path& path);
AggregateResult load_results(const std::filesystem::path& path);

/// Thermometry summary: the three estimates and the overestimation ratio.
nlohmann::json estimates_to_json(const AggregateResult& result);

void write_sweep_csv(const std::filesystem::path& path, SweepAxis axis, std::span<const double> values,
                     std::span<const AggregateResult> results);
void write_shadow_bins_csv(const std::filesystem::path& path, const AggregateResult& result);
void write_energy_curve_csv(const std::filesystem::path& path, const AggregateResult& result);
/// Spectrum (index, energy) and E(T) over the configured temperature grid.
void write_spectrum_csv(const std::filesystem::path& path, const ThermalEnsemble& ens);
void write_thermal_curve_csv(const std::filesystem::path& path, const ThermalEnsemble& ens,
                             std::span<const double> grid, const AggregateResult* result);
/// Figure-ready CSVs for one results file into `directory`.
void write_report(const AggregateResult& result, const std::filesystem::path& directory);

}  // namespace rqe
