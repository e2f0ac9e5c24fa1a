#include "rqe/rqe.h"

#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <string>

#include "rqe/error.hpp"
#include "rqe/harness.hpp"
#include "rqe/spectra.hpp"

struct rqe_config {
  nlohmann::json doc;
};

struct rqe_result {
  rqe::AggregateResult result;
};

namespace {

thread_local std::string last_error;

rqe_status fail(rqe_status status, const char* message) {
  last_error = message;
  return status;
}

template <class F>
rqe_status guarded(F&& body) {
  try {
    body();
    last_error.clear();
    return RQE_OK;
  } catch (const rqe::Error& e) {
    return fail(static_cast<rqe_status>(e.code()), e.what());
  } catch (const nlohmann::json::exception& e) {
    return fail(RQE_ERR_CONFIG, e.what());
  } catch (const std::filesystem::filesystem_error& e) {
    return fail(RQE_ERR_IO, e.what());
  } catch (const std::bad_alloc&) {
    return fail(RQE_ERR_RESOURCE_LIMIT, "out of memory");
  } catch (const std::exception& e) {
    return fail(RQE_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(RQE_ERR_INTERNAL, "unknown error");
  }
}

void require(const void* p, const char* what) {
  if (!p) throw rqe::Error(rqe::ErrorCode::InvalidArgument, std::string(what) + " must not be NULL");
}

char* copy_string(const std::string& s) {
  char* out = new char[s.size() + 1];
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

rqe::ExperimentConfig to_config(const rqe_config* cfg) {
  require(cfg, "config");
  return rqe::config_from_json(cfg->doc);
}

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

}  // namespace

extern "C" {

const char* rqe_version(void) { return rqe::kCodeVersion.data(); }

const char* rqe_last_error(void) { return last_error.c_str(); }

void rqe_string_free(char* s) { delete[] s; }

rqe_status rqe_config_default(rqe_config** out) {
  return guarded([&] {
    require(out, "out");
    *out = new rqe_config{rqe::config_to_json(rqe::ExperimentConfig{})};
  });
}

rqe_status rqe_config_load(const char* path, rqe_config** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    *out = new rqe_config{rqe::config_to_json(rqe::load_config(path))};
  });
}

rqe_status rqe_config_parse(const char* json_text, rqe_config** out) {
  return guarded([&] {
    require(json_text, "json_text");
    require(out, "out");
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::parse_error& e) {
      throw rqe::Error(rqe::ErrorCode::Config, std::string("config is not valid JSON: ") + e.what());
    }
    *out = new rqe_config{rqe::config_to_json(rqe::config_from_json(doc))};
  });
}

rqe_status rqe_config_set(rqe_config* cfg, const char* assignment) {
  return guarded([&] {
    require(cfg, "config");
    require(assignment, "assignment");
    nlohmann::json doc = cfg->doc;
    rqe::apply_override(doc, assignment);
    cfg->doc = rqe::config_to_json(rqe::config_from_json(doc));
  });
}

rqe_status rqe_config_to_json(const rqe_config* cfg, char** out) {
  return guarded([&] {
    require(out, "out");
    *out = copy_string(rqe::config_to_json(to_config(cfg)).dump(2));
  });
}

rqe_status rqe_config_hash(const rqe_config* cfg, char** out) {
  return guarded([&] {
    require(out, "out");
    *out = copy_string(rqe::config_hash(to_config(cfg)));
  });
}

rqe_status rqe_config_output_path(const rqe_config* cfg, char** out) {
  return guarded([&] {
    require(out, "out");
    *out = copy_string(to_config(cfg).output_path);
  });
}

void rqe_config_free(rqe_config* cfg) { delete cfg; }

rqe_status rqe_run(const rqe_config* cfg, size_t workers, rqe_result** out) {
  return guarded([&] {
    require(out, "out");
    *out = new rqe_result{rqe::run_experiment(to_config(cfg), rqe::RunOptions{workers})};
  });
}

rqe_status rqe_result_load(const char* path, rqe_result** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    *out = new rqe_result{rqe::load_results(path)};
  });
}

rqe_status rqe_result_save(const rqe_result* result, const char* path) {
  return guarded([&] {
    require(result, "result");
    require(path, "path");
    rqe::save_results(result->result, path);
  });
}

rqe_status rqe_result_summary(const rqe_result* result, rqe_summary* out) {
  return guarded([&] {
    require(result, "result");
    require(out, "out");
    const auto& r = result->result;
    auto fill = [](const rqe::EstimateSlot& s, double& value, double& se) {
      value = s.estimate ? s.estimate->value : kNaN;
      se = s.estimate ? s.estimate->std_error : kNaN;
    };
    rqe_summary s{};
    s.n_trajectories = r.n_trajectories;
    s.ground_state_energy = r.ground_state_energy;
    s.mean_energy = r.mean_energy;
    s.mean_energy_stderr = r.mean_energy_stderr;
    s.approximation_ratio = r.approximation_ratio;
    s.approximation_ratio_stderr = r.approximation_ratio_stderr;
    fill(r.t_energy, s.t_energy, s.t_energy_stderr);
    fill(r.t_fkl, s.t_fkl, s.t_fkl_stderr);
    fill(r.t_shadow, s.t_shadow, s.t_shadow_stderr);
    s.peak_fkl = r.peak_fkl;
    s.overestimation_ratio = r.overestimation_ratio.value_or(kNaN);
    s.overestimation_ratio_stderr = r.overestimation_ratio_stderr.value_or(kNaN);
    *out = s;
  });
}

rqe_status rqe_result_to_json(const rqe_result* result, char** out) {
  return guarded([&] {
    require(result, "result");
    require(out, "out");
    *out = copy_string(rqe::result_to_json(result->result).dump(2));
  });
}

rqe_status rqe_result_estimates_json(const rqe_result* result, char** out) {
  return guarded([&] {
    require(result, "result");
    require(out, "out");
    *out = copy_string(rqe::estimates_to_json(result->result).dump(2));
  });
}

rqe_status rqe_result_final_energies(const rqe_result* result, const double** data, size_t* count) {
  return guarded([&] {
    require(result, "result");
    require(data, "data");
    require(count, "count");
    *data = result->result.final_energies.data();
    *count = result->result.final_energies.size();
  });
}

void rqe_result_free(rqe_result* result) { delete result; }

rqe_status rqe_thermo(const char* results_path, const char* estimates_json_path, const char* bins_csv_path,
                      char** estimates_json) {
  return guarded([&] {
    require(results_path, "results_path");
    auto r = rqe::load_results(results_path);
    rqe::compute_estimates(r);
    const std::string text = rqe::estimates_to_json(r).dump(2);
    if (estimates_json_path) {
      const std::filesystem::path path(estimates_json_path);
      if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
      std::ofstream out(path);
      out << text << '\n';
      if (!out) throw rqe::Error(rqe::ErrorCode::Io, "cannot write '" + path.string() + "'");
    }
    if (bins_csv_path) rqe::write_shadow_bins_csv(bins_csv_path, r);
    if (estimates_json) *estimates_json = copy_string(text);
  });
}

rqe_status rqe_sweep(const rqe_config* base, const char* axis, const double* values, size_t n_values, size_t workers,
                     const char* csv_path, const char* results_dir) {
  return guarded([&] {
    require(axis, "axis");
    require(csv_path, "csv_path");
    if (n_values > 0) require(values, "values");
    const auto cfg = to_config(base);
    const auto parsed_axis = rqe::parse_sweep_axis(axis);
    const std::span<const double> points(values, n_values);
    const auto results = rqe::run_sweep(cfg, parsed_axis, points, rqe::RunOptions{workers});
    rqe::write_sweep_csv(csv_path, parsed_axis, points, results);
    if (results_dir) {
      for (std::size_t i = 0; i < results.size(); ++i)
        rqe::save_results(results[i], std::filesystem::path(results_dir) / ("point_" + std::to_string(i) + ".json"));
    }
  });
}

rqe_status rqe_diag(const rqe_config* cfg, const char* out_dir) {
  return guarded([&] {
    require(out_dir, "out_dir");
    const auto c = to_config(cfg);
    const auto ens = rqe::diagonalize(c.primary_hamiltonian(), false);
    const std::filesystem::path dir(out_dir);
    std::filesystem::create_directories(dir);
    rqe::write_spectrum_csv(dir / "spectrum.csv", ens);
    const auto grid = rqe::geometric_grid(c.thermometry.grid_low, c.thermometry.grid_high, c.thermometry.grid_points);
    rqe::write_thermal_curve_csv(dir / "thermal_curve.csv", ens, grid, nullptr);
  });
}

rqe_status rqe_report(const char* results_path, const char* out_dir) {
  return guarded([&] {
    require(results_path, "results_path");
    require(out_dir, "out_dir");
    rqe::write_report(rqe::load_results(results_path), out_dir);
  });
}

}  // extern "C"
