#include "rqe/harness.hpp"

#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <exception>
#include <fstream>
#include <limits>
#include <mutex>
#include <numeric>
#include <set>
#include <array>
#include <thread>

#include "rqe/error.hpp"
#include "rqe/spectra.hpp"

namespace rqe {

using nlohmann::json;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

json number(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

double number_or_nan(const json& j) { return j.is_null() ? kNaN : j.get<double>(); }

std::string format_number(double x) {
  if (!std::isfinite(x)) return "";
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, end);
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::ofstream open_output(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::Io, "cannot open '" + path.string() + "' for writing");
  return out;
}

void finish(std::ofstream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) throw Error(ErrorCode::Io, "failed writing '" + path.string() + "'");
}

// ---- config (de)serialization helpers ----------------------------------

class Reader {
 public:
  Reader(const json& doc, std::string prefix) : doc_(doc), prefix_(std::move(prefix)) {
    if (!doc_.is_object()) throw Error(ErrorCode::Config, "config section '" + prefix_ + "' must be an object");
  }

  ~Reader() noexcept(false) {
    if (std::uncaught_exceptions() > 0) return;
    for (const auto& [key, value] : doc_.items())
      if (!consumed_.contains(key))
        throw Error(ErrorCode::Config, "unknown config key '" + prefix_ + key + "'");
  }

  template <class T>
  void get(const char* key, T& target) {
    consumed_.insert(key);
    if (!doc_.contains(key)) return;
    try {
      target = doc_.at(key).get<T>();
    } catch (const json::exception& e) {
      throw Error(ErrorCode::Config, "config key '" + prefix_ + key + "': " + e.what());
    }
  }

  const json* section(const char* key) {
    consumed_.insert(key);
    return doc_.contains(key) ? &doc_.at(key) : nullptr;
  }

  std::string path(const char* key) const { return prefix_ + key; }

 private:
  const json& doc_;
  std::string prefix_;
  std::set<std::string> consumed_;
};

std::string_view granularity_name(SweepGranularity g) { return g == SweepGranularity::PerLayer ? "layer" : "cycle"; }

SweepGranularity parse_granularity(const std::string& s) {
  if (s == "cycle") return SweepGranularity::PerCycle;
  if (s == "layer") return SweepGranularity::PerLayer;
  throw Error(ErrorCode::Config, "schedule.sweep_granularity must be 'cycle' or 'layer'");
}

std::string_view convention_name(PhaseConvention c) { return c == PhaseConvention::Turns ? "turns" : "radians"; }

PhaseConvention parse_convention(const std::string& s) {
  if (s == "radians") return PhaseConvention::Radians;
  if (s == "turns") return PhaseConvention::Turns;
  throw Error(ErrorCode::Config, "schedule.phase_convention must be 'radians' or 'turns'");
}

CouplingMode parse_coupling_mode(const std::string& s) {
  if (s == "fixed") return CouplingMode::FixedAxis;
  if (s == "random") return CouplingMode::RandomAxis;
  throw Error(ErrorCode::Config, "coupling.mode must be 'fixed' or 'random'");
}

StderrSource parse_stderr_source(const std::string& s) {
  if (s == "bootstrap") return StderrSource::Bootstrap;
  if (s == "fisher") return StderrSource::Fisher;
  throw Error(ErrorCode::Config, "thermometry.shadow_stderr must be 'bootstrap' or 'fisher'");
}

json estimate_json(const EstimateSlot& slot) {
  if (!slot.estimate) return json{{"error", slot.error}};
  return json{{"value", number(slot.estimate->value)},
              {"stderr", number(slot.estimate->std_error)},
              {"method", std::string(method_name(slot.estimate->method))}};
}

EstimateSlot estimate_from_json(const json& j, TemperatureMethod method) {
  EstimateSlot slot;
  if (j.contains("value")) {
    slot.estimate = TemperatureEstimate{number_or_nan(j.at("value")), number_or_nan(j.at("stderr")), method};
  } else {
    slot.error = j.value("error", std::string{});
  }
  return slot;
}

double mean_of(std::span<const double> v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double stderr_of(std::span<const double> v) {
  if (v.size() < 2) return kNaN;
  const double m = mean_of(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(v.size() - 1)) / std::sqrt(static_cast<double>(v.size()));
}

}  // namespace

// ---- ExperimentConfig -----------------------------------------------------

std::size_t ExperimentConfig::shadow_count() const {
  return n_shadow != 0 ? n_shadow : (n_primary + 1) / 2;
}

HamiltonianSpec ExperimentConfig::primary_hamiltonian() const {
  switch (model.kind) {
    case ModelKind::Tfim: return build_tfim(n_primary, model.j, model.kappa);
    case ModelKind::Heisenberg: return build_heisenberg(n_primary, model.j);
    case ModelKind::Xxz: return build_xxz(n_primary, model.jx, model.jy, model.jz);
  }
  throw Error(ErrorCode::Config, "unknown model");
}

CouplingMap ExperimentConfig::coupling_map() const {
  if (coupling_pairs.empty()) return CouplingMap::two_to_one(n_primary, shadow_count(), coupling_mode, coupling_axis);
  CouplingMap map{n_primary, shadow_count(), coupling_pairs, coupling_mode, coupling_axis};
  map.validate();
  return map;
}

TrajectoryConfig ExperimentConfig::trajectory_config() const {
  TrajectoryConfig tc;
  tc.system = RqeSystem{primary_hamiltonian(), coupling_map(), shadow_sign};
  tc.initial_primary = initial_primary_state(model.kind, n_primary);
  tc.schedule = schedule;
  tc.noise = noise;
  tc.zbasis_samples = thermometry.zbasis_samples;
  return tc;
}

void ExperimentConfig::validate() const {
  if (n_primary < 3) throw Error(ErrorCode::Config, "n_primary must be at least 3 for a ring");
  if (n_primary > kMaxDiagonalizationQubits)
    throw Error(ErrorCode::ResourceLimit, "n_primary exceeds the exact-diagonalization limit of " +
                                              std::to_string(kMaxDiagonalizationQubits));
  if (coupling_pairs.empty() && (2 * shadow_count() < n_primary || 2 * shadow_count() > n_primary + 1))
    throw Error(ErrorCode::Config, "the 2:1 coupling map needs n_shadow = ceil(n_primary / 2); give coupling.pairs "
                                   "for other register sizes");
  if (n_primary + shadow_count() > kMaxQubits) throw Error(ErrorCode::ResourceLimit, "too many qubits");
  if (n_trajectories < 1) throw Error(ErrorCode::Config, "n_trajectories must be at least 1");
  if (shadow_sign != 1.0 && shadow_sign != -1.0) throw Error(ErrorCode::Config, "shadow_sign must be +1 or -1");
  if (thermometry.grid_points < 3 || !(thermometry.grid_low > 0.0 && thermometry.grid_high > thermometry.grid_low))
    throw Error(ErrorCode::Config, "thermometry grid needs 0 < low < high and at least 3 points");
  if (thermometry.shadow_bins < 1) throw Error(ErrorCode::Config, "thermometry.shadow_bins must be positive");
  trajectory_config().validate();
}

json config_to_json(const ExperimentConfig& cfg) {
  json pairs = json::array();
  for (const auto& p : cfg.coupling_pairs) pairs.push_back({p.primary, p.shadow});
  const auto& s = cfg.schedule;
  const auto& n = cfg.noise;
  const auto& t = cfg.thermometry;
  return json{
      {"model",
       {{"kind", std::string(model_kind_name(cfg.model.kind))},
        {"J", cfg.model.j},
        {"kappa", cfg.model.kappa},
        {"jx", cfg.model.jx},
        {"jy", cfg.model.jy},
        {"jz", cfg.model.jz}}},
      {"n_primary", cfg.n_primary},
      {"n_shadow", cfg.n_shadow},
      {"coupling",
       {{"mode", cfg.coupling_mode == CouplingMode::RandomAxis ? "random" : "fixed"},
        {"axis", std::string(1, axis_name(cfg.coupling_axis))},
        {"pairs", pairs}}},
      {"shadow_sign", cfg.shadow_sign},
      {"schedule",
       {{"dt", s.dt},
        {"layers_per_pulse", s.layers_per_pulse},
        {"n_resets", s.n_resets},
        {"sweep_high", s.sweep_high},
        {"sweep_low", s.sweep_low},
        {"sweep_fraction", s.sweep_fraction},
        {"pulse_phase_sum", s.pulse_phase_sum},
        {"sweep_granularity", std::string(granularity_name(s.sweep_granularity))},
        {"phase_convention", std::string(convention_name(s.phase_convention))},
        {"thermometry_final_cycle", s.thermometry_final_cycle},
        {"thermometry_omega_low", s.thermometry_omega_low},
        {"thermometry_omega_high", s.thermometry_omega_high}}},
      {"noise",
       {{"p2", n.p2},
        {"p1", n.p1_override ? json(*n.p1_override) : json(nullptr)},
        {"p_m", n.p_measure},
        {"p_r", n.p_reset},
        {"shadow_rotation_noise", n.shadow_rotation_noise}}},
      {"thermometry",
       {{"zbasis_samples", t.zbasis_samples},
        {"fkl_enabled", t.fkl_enabled},
        {"grid_low", t.grid_low},
        {"grid_high", t.grid_high},
        {"grid_points", t.grid_points},
        {"bootstrap_resamples", t.bootstrap_resamples},
        {"shadow_bins", t.shadow_bins},
        {"shadow_stderr", t.shadow_stderr == StderrSource::Fisher ? "fisher" : "bootstrap"}}},
      {"n_trajectories", cfg.n_trajectories},
      {"master_seed", cfg.master_seed},
      {"output_path", cfg.output_path},
  };
}

ExperimentConfig config_from_json(const json& doc) {
  ExperimentConfig cfg;
  Reader top(doc, "");
  if (const json* m = top.section("model")) {
    Reader r(*m, "model.");
    std::string kind{model_kind_name(cfg.model.kind)};
    r.get("kind", kind);
    cfg.model.kind = parse_model_kind(kind);
    r.get("J", cfg.model.j);
    r.get("kappa", cfg.model.kappa);
    r.get("jx", cfg.model.jx);
    r.get("jy", cfg.model.jy);
    r.get("jz", cfg.model.jz);
  }
  top.get("n_primary", cfg.n_primary);
  top.get("n_shadow", cfg.n_shadow);
  if (const json* c = top.section("coupling")) {
    Reader r(*c, "coupling.");
    std::string mode = "fixed";
    std::string axis(1, axis_name(cfg.coupling_axis));
    std::vector<std::array<std::size_t, 2>> pairs;
    r.get("mode", mode);
    r.get("axis", axis);
    r.get("pairs", pairs);
    cfg.coupling_mode = parse_coupling_mode(mode);
    cfg.coupling_axis = parse_axis(axis);
    for (const auto& p : pairs) cfg.coupling_pairs.push_back({p[0], p[1]});
  }
  top.get("shadow_sign", cfg.shadow_sign);
  if (const json* sj = top.section("schedule")) {
    Reader r(*sj, "schedule.");
    auto& s = cfg.schedule;
    std::string granularity{granularity_name(s.sweep_granularity)};
    std::string convention{convention_name(s.phase_convention)};
    r.get("dt", s.dt);
    r.get("layers_per_pulse", s.layers_per_pulse);
    r.get("n_resets", s.n_resets);
    r.get("sweep_high", s.sweep_high);
    r.get("sweep_low", s.sweep_low);
    r.get("sweep_fraction", s.sweep_fraction);
    r.get("pulse_phase_sum", s.pulse_phase_sum);
    r.get("sweep_granularity", granularity);
    r.get("phase_convention", convention);
    r.get("thermometry_final_cycle", s.thermometry_final_cycle);
    r.get("thermometry_omega_low", s.thermometry_omega_low);
    r.get("thermometry_omega_high", s.thermometry_omega_high);
    s.sweep_granularity = parse_granularity(granularity);
    s.phase_convention = parse_convention(convention);
  }
  if (const json* nj = top.section("noise")) {
    Reader r(*nj, "noise.");
    auto& n = cfg.noise;
    r.get("p2", n.p2);
    std::optional<double> p1;
    if (const json* p1j = r.section("p1"); p1j && !p1j->is_null()) p1 = p1j->get<double>();
    n.p1_override = p1;
    r.get("p_m", n.p_measure);
    r.get("p_r", n.p_reset);
    r.get("shadow_rotation_noise", n.shadow_rotation_noise);
  }
  if (const json* tj = top.section("thermometry")) {
    Reader r(*tj, "thermometry.");
    auto& t = cfg.thermometry;
    std::string source = t.shadow_stderr == StderrSource::Fisher ? "fisher" : "bootstrap";
    r.get("zbasis_samples", t.zbasis_samples);
    r.get("fkl_enabled", t.fkl_enabled);
    r.get("grid_low", t.grid_low);
    r.get("grid_high", t.grid_high);
    r.get("grid_points", t.grid_points);
    r.get("bootstrap_resamples", t.bootstrap_resamples);
    r.get("shadow_bins", t.shadow_bins);
    r.get("shadow_stderr", source);
    t.shadow_stderr = parse_stderr_source(source);
  }
  top.get("n_trajectories", cfg.n_trajectories);
  top.get("master_seed", cfg.master_seed);
  top.get("output_path", cfg.output_path);
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open config '" + path.string() + "'");
  try {
    return config_from_json(json::parse(in));
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::Config, "config '" + path.string() + "' is not valid JSON: " + e.what());
  }
}

void apply_override(json& doc, std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos || eq == 0)
    throw Error(ErrorCode::Config, "override must look like key.path=value");
  const std::string key(assignment.substr(0, eq));
  const std::string raw(assignment.substr(eq + 1));
  json value;
  try {
    value = json::parse(raw);
  } catch (const json::parse_error&) {
    value = raw;
  }
  std::string pointer;
  for (std::size_t start = 0; start <= key.size();) {
    const auto dot = key.find('.', start);
    pointer += "/" + key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (dot == std::string::npos) break;
    start = dot + 1;
  }
  doc[json::json_pointer(pointer)] = value;
}

std::string config_hash(const ExperimentConfig& cfg) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : config_to_json(cfg).dump()) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

// ---- running ----------------------------------------------------------------

std::size_t resolve_workers(std::size_t requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("RQE_WORKERS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && v > 0) return static_cast<std::size_t>(v);
  }
  return std::max<std::size_t>(1, std::thread::hardware_concurrency());
}

std::vector<TrajectoryResult> run_trajectories(const TrajectoryConfig& config, std::size_t count,
                                               std::uint64_t master_seed, std::size_t workers) {
  config.validate();
  std::vector<TrajectoryResult> results(count);
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;

  auto work = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        results[i] = run_trajectory(config, derive_seed(master_seed, i));
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = count;
      }
    }
  };

  const std::size_t n_threads = std::min(resolve_workers(workers), std::max<std::size_t>(count, 1));
  if (n_threads <= 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(n_threads);
    for (std::size_t t = 0; t < n_threads; ++t) pool.emplace_back(work);
  }
  if (failure) std::rethrow_exception(failure);
  return results;
}

AggregateResult aggregate(const ExperimentConfig& cfg, const std::vector<TrajectoryResult>& trajectories) {
  if (trajectories.empty()) throw Error(ErrorCode::InvalidArgument, "no trajectories to aggregate");
  AggregateResult r;
  r.config = cfg;
  r.config_hash = config_hash(cfg);
  r.created_at = utc_timestamp();
  r.n_trajectories = trajectories.size();

  const std::size_t cycles = trajectories.front().energy_history.size();
  r.energy_curve.assign(cycles, 0.0);
  r.energy_curve_stderr.assign(cycles, kNaN);
  r.zbasis_counts.assign(std::size_t{1} << cfg.n_primary, 0);
  std::vector<double> column(trajectories.size());
  for (std::size_t c = 0; c < cycles; ++c) {
    for (std::size_t t = 0; t < trajectories.size(); ++t) column[t] = trajectories[t].energy_history[c];
    r.energy_curve[c] = mean_of(column);
    r.energy_curve_stderr[c] = stderr_of(column);
  }
  for (const auto& t : trajectories) {
    r.seeds.push_back(t.seed);
    r.final_energies.push_back(t.final_energy);
    r.thermometry_records.insert(r.thermometry_records.end(), t.thermometry_records.begin(),
                                 t.thermometry_records.end());
    for (auto s : t.zbasis_samples) ++r.zbasis_counts.at(s);
  }
  compute_estimates(r);
  return r;
}

void compute_estimates(AggregateResult& r) {
  const auto& cfg = r.config;
  const bool want_vectors = cfg.thermometry.fkl_enabled;
  const ThermalEnsemble ens = diagonalize(cfg.primary_hamiltonian(), want_vectors);
  r.ground_state_energy = ground_state_energy(ens);
  r.infinite_temperature_energy = infinite_temperature_energy(ens);
  r.n_trajectories = r.final_energies.size();
  r.mean_energy = mean_of(r.final_energies);
  r.mean_energy_stderr = stderr_of(r.final_energies);
  r.approximation_ratio = r.mean_energy / r.ground_state_energy;
  r.approximation_ratio_stderr = r.mean_energy_stderr / std::abs(r.ground_state_energy);

  r.t_energy = {};
  r.t_fkl = {};
  r.t_shadow = {};
  r.peak_fkl = kNaN;
  r.shadow_fisher_stderr = kNaN;
  r.shadow_bins.clear();
  r.overestimation_ratio.reset();
  r.overestimation_ratio_stderr.reset();

  try {
    const double se = std::isfinite(r.mean_energy_stderr) ? r.mean_energy_stderr : 0.0;
    r.t_energy.estimate = temperature_from_energy(ens, r.mean_energy, se);
    if (!std::isfinite(r.mean_energy_stderr)) r.t_energy.estimate->std_error = kNaN;
  } catch (const Error& e) {
    r.t_energy.error = e.what();
  }

  if (!want_vectors) {
    r.t_fkl.error = "F_KL estimation disabled";
  } else {
    try {
      double shots = 0.0;
      std::vector<double> counts(r.zbasis_counts.size());
      for (std::size_t i = 0; i < counts.size(); ++i) {
        counts[i] = static_cast<double>(r.zbasis_counts[i]);
        shots += counts[i];
      }
      if (shots == 0.0) throw Error(ErrorCode::Estimation, "no Z-basis samples recorded");
      const auto grid = geometric_grid(cfg.thermometry.grid_low, cfg.thermometry.grid_high, cfg.thermometry.grid_points);
      FklFitOptions options;
      options.bootstrap_resamples = cfg.thermometry.bootstrap_resamples;
      options.seed = cfg.master_seed ^ 0xF1F1F1F1ULL;
      const FklFit fit = temperature_from_fkl({std::move(counts), shots}, ens, grid, options);
      r.t_fkl.estimate = fit.estimate;
      r.peak_fkl = fit.peak_fkl;
    } catch (const Error& e) {
      r.t_fkl.error = e.what();
    }
  }

  r.shadow_bins = bin_occupations(r.thermometry_records, cfg.thermometry.shadow_bins,
                                  cfg.schedule.thermometry_omega_low, cfg.schedule.thermometry_omega_high);
  try {
    ShadowFitOptions options;
    options.bootstrap_resamples = cfg.thermometry.bootstrap_resamples;
    options.bins = cfg.thermometry.shadow_bins;
    options.omega_low = cfg.schedule.thermometry_omega_low;
    options.omega_high = cfg.schedule.thermometry_omega_high;
    options.report = cfg.thermometry.shadow_stderr;
    options.seed = cfg.master_seed ^ 0x5AD0ULL;
    const ShadowFit fit = fit_shadow_temperature(r.thermometry_records, options);
    r.t_shadow.estimate = fit.estimate;
    r.shadow_fisher_stderr = fit.fisher_std_error;
  } catch (const Error& e) {
    r.t_shadow.error = e.what();
  }

  if (r.t_energy.estimate && r.t_fkl.estimate && r.t_shadow.estimate) {
    r.overestimation_ratio =
        overestimation_ratio(r.t_shadow.estimate->value, r.t_fkl.estimate->value, r.t_energy.estimate->value);
    r.overestimation_ratio_stderr =
        overestimation_ratio_stderr(*r.t_shadow.estimate, *r.t_fkl.estimate, *r.t_energy.estimate);
  }
}

AggregateResult run_experiment(const ExperimentConfig& cfg, const RunOptions& options) {
  cfg.validate();
  const auto trajectories = run_trajectories(cfg.trajectory_config(), cfg.n_trajectories, cfg.master_seed,
                                             options.workers);
  return aggregate(cfg, trajectories);
}

// ---- sweeps -------------------------------------------------------------------

SweepAxis parse_sweep_axis(std::string_view name) {
  if (name == "n_primary") return SweepAxis::NPrimary;
  if (name == "n_resets") return SweepAxis::NResets;
  if (name == "p2") return SweepAxis::P2;
  if (name == "kappa") return SweepAxis::Kappa;
  throw Error(ErrorCode::Config, "unknown sweep axis '" + std::string(name) + "'");
}

std::string_view sweep_axis_name(SweepAxis axis) {
  switch (axis) {
    case SweepAxis::NPrimary: return "n_primary";
    case SweepAxis::NResets: return "n_resets";
    case SweepAxis::P2: return "p2";
    case SweepAxis::Kappa: return "kappa";
  }
  return "unknown";
}

ExperimentConfig with_axis_value(const ExperimentConfig& base, SweepAxis axis, double value) {
  ExperimentConfig cfg = base;
  auto as_count = [&](const char* what) {
    if (!(value >= 1.0) || value != std::floor(value))
      throw Error(ErrorCode::Config, std::string(what) + " sweep values must be positive integers");
    return static_cast<std::size_t>(value);
  };
  switch (axis) {
    case SweepAxis::NPrimary:
      cfg.n_primary = as_count("n_primary");
      cfg.n_shadow = 0;
      break;
    case SweepAxis::NResets: cfg.schedule.n_resets = as_count("n_resets"); break;
    case SweepAxis::P2: cfg.noise.p2 = value; break;
    case SweepAxis::Kappa:
      if (cfg.model.kind != ModelKind::Tfim) throw Error(ErrorCode::Config, "kappa sweeps need the TFIM model");
      cfg.model.kappa = value;
      break;
  }
  cfg.validate();
  return cfg;
}

std::vector<AggregateResult> run_sweep(const ExperimentConfig& base, SweepAxis axis, std::span<const double> values,
                                       const RunOptions& options) {
  if (values.empty()) throw Error(ErrorCode::Config, "sweep needs at least one value");
  std::vector<ExperimentConfig> configs;
  for (double v : values) configs.push_back(with_axis_value(base, axis, v));
  std::vector<AggregateResult> results;
  for (const auto& cfg : configs) results.push_back(run_experiment(cfg, options));
  return results;
}

// ---- persistence ---------------------------------------------------------------

json result_to_json(const AggregateResult& r) {
  json bins = json::array();
  for (const auto& b : r.shadow_bins)
    bins.push_back({{"omega_low", b.omega_low}, {"omega_high", b.omega_high}, {"count", b.count}, {"excited", b.excited}});
  json omegas = json::array();
  json outcomes = json::array();
  for (const auto& rec : r.thermometry_records) {
    omegas.push_back(rec.omega);
    outcomes.push_back(rec.outcome);
  }
  json curve_stderr = json::array();
  for (double v : r.energy_curve_stderr) curve_stderr.push_back(number(v));
  return json{
      {"schema", "rqe-results"},
      {"schema_version", kResultsSchemaVersion},
      {"code_version", r.code_version},
      {"created_at", r.created_at},
      {"config", config_to_json(r.config)},
      {"config_hash", r.config_hash},
      {"n_trajectories", r.n_trajectories},
      {"stderr_defined", r.stderr_defined()},
      {"trajectories", {{"seeds", r.seeds}, {"final_energies", r.final_energies}}},
      {"ground_state_energy", r.ground_state_energy},
      {"infinite_temperature_energy", r.infinite_temperature_energy},
      {"mean_energy", {{"value", r.mean_energy}, {"stderr", number(r.mean_energy_stderr)}}},
      {"approximation_ratio", {{"value", r.approximation_ratio}, {"stderr", number(r.approximation_ratio_stderr)}}},
      {"energy_curve", {{"mean", r.energy_curve}, {"stderr", curve_stderr}}},
      {"thermometry_records", {{"omega", omegas}, {"outcome", outcomes}}},
      {"zbasis_counts", r.zbasis_counts},
      {"estimates",
       {{"energy", estimate_json(r.t_energy)},
        {"fkl", estimate_json(r.t_fkl)},
        {"shadow", estimate_json(r.t_shadow)},
        {"peak_fkl", number(r.peak_fkl)},
        {"shadow_fisher_stderr", number(r.shadow_fisher_stderr)},
        {"overestimation_ratio",
         r.overestimation_ratio ? json{{"value", number(*r.overestimation_ratio)},
                                       {"stderr", number(r.overestimation_ratio_stderr.value_or(kNaN))}}
                                : json(nullptr)}}},
      {"shadow_bins", bins},
  };
}

AggregateResult result_from_json(const json& doc) {
  try {
    if (doc.value("schema", std::string{}) != "rqe-results")
      throw Error(ErrorCode::SchemaVersion, "document is not an RQE results file");
    const int version = doc.at("schema_version").get<int>();
    if (version != kResultsSchemaVersion)
      throw Error(ErrorCode::SchemaVersion, "results schema version " + std::to_string(version) +
                                                " is not supported (expected " +
                                                std::to_string(kResultsSchemaVersion) + ")");
    AggregateResult r;
    r.config = config_from_json(doc.at("config"));
    r.config_hash = doc.at("config_hash").get<std::string>();
    r.code_version = doc.at("code_version").get<std::string>();
    r.created_at = doc.at("created_at").get<std::string>();
    r.n_trajectories = doc.at("n_trajectories").get<std::size_t>();
    r.seeds = doc.at("trajectories").at("seeds").get<std::vector<std::uint64_t>>();
    r.final_energies = doc.at("trajectories").at("final_energies").get<std::vector<double>>();
    r.ground_state_energy = doc.at("ground_state_energy").get<double>();
    r.infinite_temperature_energy = doc.at("infinite_temperature_energy").get<double>();
    r.mean_energy = doc.at("mean_energy").at("value").get<double>();
    r.mean_energy_stderr = number_or_nan(doc.at("mean_energy").at("stderr"));
    r.approximation_ratio = doc.at("approximation_ratio").at("value").get<double>();
    r.approximation_ratio_stderr = number_or_nan(doc.at("approximation_ratio").at("stderr"));
    r.energy_curve = doc.at("energy_curve").at("mean").get<std::vector<double>>();
    for (const auto& v : doc.at("energy_curve").at("stderr")) r.energy_curve_stderr.push_back(number_or_nan(v));
    const auto omegas = doc.at("thermometry_records").at("omega").get<std::vector<double>>();
    const auto outcomes = doc.at("thermometry_records").at("outcome").get<std::vector<int>>();
    if (omegas.size() != outcomes.size()) throw Error(ErrorCode::Config, "thermometry record columns differ in length");
    for (std::size_t i = 0; i < omegas.size(); ++i) r.thermometry_records.push_back({omegas[i], outcomes[i]});
    r.zbasis_counts = doc.at("zbasis_counts").get<std::vector<std::uint64_t>>();
    const auto& est = doc.at("estimates");
    r.t_energy = estimate_from_json(est.at("energy"), TemperatureMethod::Energy);
    r.t_fkl = estimate_from_json(est.at("fkl"), TemperatureMethod::Fkl);
    r.t_shadow = estimate_from_json(est.at("shadow"), TemperatureMethod::Shadow);
    r.peak_fkl = number_or_nan(est.at("peak_fkl"));
    r.shadow_fisher_stderr = number_or_nan(est.at("shadow_fisher_stderr"));
    if (!est.at("overestimation_ratio").is_null()) {
      r.overestimation_ratio = number_or_nan(est.at("overestimation_ratio").at("value"));
      r.overestimation_ratio_stderr = number_or_nan(est.at("overestimation_ratio").at("stderr"));
    }
    for (const auto& b : doc.at("shadow_bins"))
      r.shadow_bins.push_back({b.at("omega_low").get<double>(), b.at("omega_high").get<double>(),
                               b.at("count").get<std::size_t>(), b.at("excited").get<std::size_t>()});
    return r;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Config, std::string("malformed results document: ") + e.what());
  }
}

namespace {

std::filesystem::path companion(const std::filesystem::path& path, const char* suffix) {
  auto out = path;
  out.replace_filename(path.stem().string() + suffix);
  return out;
}

}  // namespace

void save_results(const AggregateResult& result, const std::filesystem::path& path) {
  auto out = open_output(path);
  out << result_to_json(result).dump(2) << '\n';
  finish(out, path);
  write_energy_curve_csv(companion(path, ".energy_curve.csv"), result);
  write_shadow_bins_csv(companion(path, ".shadow_bins.csv"), result);

  const auto zpath = companion(path, ".zbasis.csv");
  auto z = open_output(zpath);
  z << "bitstring_index,count\n";
  for (std::size_t i = 0; i < result.zbasis_counts.size(); ++i) z << i << ',' << result.zbasis_counts[i] << '\n';
  finish(z, zpath);
}

AggregateResult load_results(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open results '" + path.string() + "'");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::Io, "results '" + path.string() + "' are not valid JSON: " + e.what());
  }
  return result_from_json(doc);
}

json estimates_to_json(const AggregateResult& r) {
  return json{
      {"config_hash", r.config_hash},
      {"n_trajectories", r.n_trajectories},
      {"ground_state_energy", r.ground_state_energy},
      {"mean_energy", {{"value", r.mean_energy}, {"stderr", number(r.mean_energy_stderr)}}},
      {"approximation_ratio", {{"value", r.approximation_ratio}, {"stderr", number(r.approximation_ratio_stderr)}}},
      {"t_energy", estimate_json(r.t_energy)},
      {"t_fkl", estimate_json(r.t_fkl)},
      {"t_shadow", estimate_json(r.t_shadow)},
      {"peak_fkl", number(r.peak_fkl)},
      {"shadow_fisher_stderr", number(r.shadow_fisher_stderr)},
      {"overestimation_ratio",
       r.overestimation_ratio ? json{{"value", number(*r.overestimation_ratio)},
                                     {"stderr", number(r.overestimation_ratio_stderr.value_or(kNaN))}}
                              : json(nullptr)},
  };
}

// ---- CSV ------------------------------------------------------------------------

void write_sweep_csv(const std::filesystem::path& path, SweepAxis axis, std::span<const double> values,
                     std::span<const AggregateResult> results) {
  if (values.size() != results.size()) throw Error(ErrorCode::InvalidArgument, "one result per sweep value");
  auto out = open_output(path);
  out << "axis,value,n_primary,n_shadow,n_resets,p2,kappa,n_trajectories,ground_state_energy,mean_energy,"
         "mean_energy_stderr,approximation_ratio,approximation_ratio_stderr,t_energy,t_energy_stderr,t_fkl,"
         "t_fkl_stderr,peak_fkl,t_shadow,t_shadow_stderr,overestimation_ratio,overestimation_ratio_stderr\n";
  auto est = [](const EstimateSlot& s) {
    return s.estimate ? format_number(s.estimate->value) + "," + format_number(s.estimate->std_error)
                      : std::string(",");
  };
  for (std::size_t i = 0; i < results.size(); ++i) {
    const auto& r = results[i];
    const auto& c = r.config;
    out << sweep_axis_name(axis) << ',' << format_number(values[i]) << ',' << c.n_primary << ',' << c.shadow_count()
        << ',' << c.schedule.n_resets << ',' << format_number(c.noise.p2) << ','
        << (c.model.kind == ModelKind::Tfim ? format_number(c.model.kappa) : std::string()) << ','
        << r.n_trajectories << ',' << format_number(r.ground_state_energy) << ',' << format_number(r.mean_energy)
        << ',' << format_number(r.mean_energy_stderr) << ',' << format_number(r.approximation_ratio) << ','
        << format_number(r.approximation_ratio_stderr) << ',' << est(r.t_energy) << ',' << est(r.t_fkl) << ','
        << format_number(r.peak_fkl) << ',' << est(r.t_shadow) << ','
        << format_number(r.overestimation_ratio.value_or(kNaN)) << ','
        << format_number(r.overestimation_ratio_stderr.value_or(kNaN)) << '\n';
  }
  finish(out, path);
}

void write_shadow_bins_csv(const std::filesystem::path& path, const AggregateResult& result) {
  auto out = open_output(path);
  out << "omega_low,omega_high,omega_center,count,excited,mean_occupation,fermi_dirac_fit\n";
  for (const auto& b : result.shadow_bins) {
    const double fit =
        result.t_shadow.estimate ? fermi_dirac(b.omega_center(), result.t_shadow.estimate->value) : kNaN;
    out << format_number(b.omega_low) << ',' << format_number(b.omega_high) << ',' << format_number(b.omega_center())
        << ',' << b.count << ',' << b.excited << ',' << format_number(b.mean_occupation()) << ','
        << format_number(fit) << '\n';
  }
  finish(out, path);
}

void write_energy_curve_csv(const std::filesystem::path& path, const AggregateResult& result) {
  auto out = open_output(path);
  out << "cycle,mean_energy,stderr,approximation_ratio\n";
  for (std::size_t c = 0; c < result.energy_curve.size(); ++c) {
    const double se = c < result.energy_curve_stderr.size() ? result.energy_curve_stderr[c] : kNaN;
    out << c << ',' << format_number(result.energy_curve[c]) << ',' << format_number(se) << ','
        << format_number(result.energy_curve[c] / result.ground_state_energy) << '\n';
  }
  finish(out, path);
}

void write_spectrum_csv(const std::filesystem::path& path, const ThermalEnsemble& ens) {
  auto out = open_output(path);
  out << "index,energy\n";
  const auto e = ens.eigenvalues();
  for (std::size_t i = 0; i < e.size(); ++i) out << i << ',' << format_number(e[i]) << '\n';
  finish(out, path);
}

void write_thermal_curve_csv(const std::filesystem::path& path, const ThermalEnsemble& ens,
                             std::span<const double> grid, const AggregateResult* result) {
  std::vector<double> counts;
  double shots = 0.0;
  const bool with_fkl = result && ens.has_vectors() && result->zbasis_counts.size() == ens.dimension();
  if (with_fkl) {
    for (auto c : result->zbasis_counts) counts.push_back(static_cast<double>(c));
    shots = std::accumulate(counts.begin(), counts.end(), 0.0);
  }
  const EmpiricalDistribution empirical{counts, shots};
  auto out = open_output(path);
  out << "temperature,energy,excess_energy" << (with_fkl && shots > 0 ? ",fkl" : "") << '\n';
  for (double t : grid) {
    out << format_number(t) << ',' << format_number(energy_at_temperature(ens, t)) << ','
        << format_number(excess_energy_at_temperature(ens, t));
    if (with_fkl && shots > 0) out << ',' << format_number(fkl(empirical, ens, t));
    out << '\n';
  }
  finish(out, path);
}

void write_report(const AggregateResult& result, const std::filesystem::path& directory) {
  std::filesystem::create_directories(directory);
  const auto& cfg = result.config;
  const ThermalEnsemble ens = diagonalize(cfg.primary_hamiltonian(), cfg.thermometry.fkl_enabled);
  const auto grid = geometric_grid(cfg.thermometry.grid_low, cfg.thermometry.grid_high, cfg.thermometry.grid_points);
  write_energy_curve_csv(directory / "energy_curve.csv", result);
  write_shadow_bins_csv(directory / "shadow_bins.csv", result);
  write_thermal_curve_csv(directory / "thermal_curve.csv", ens, grid, &result);
  const double value = cfg.model.kind == ModelKind::Tfim ? cfg.model.kappa : kNaN;
  const std::vector<double> values{value};
  write_sweep_csv(directory / "summary.csv", SweepAxis::Kappa, values, std::span(&result, 1));
}

}  // namespace rqe
