#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "rqe/rqe.h"

namespace {

struct ConfigDeleter {
  void operator()(rqe_config* c) const { rqe_config_free(c); }
};
struct ResultDeleter {
  void operator()(rqe_result* r) const { rqe_result_free(r); }
};
using ConfigPtr = std::unique_ptr<rqe_config, ConfigDeleter>;
using ResultPtr = std::unique_ptr<rqe_result, ResultDeleter>;

struct Failure {
  rqe_status status;
};

void check(rqe_status status) {
  if (status != RQE_OK) {
    std::fprintf(stderr, "rqe: %s\n", rqe_last_error());
    throw Failure{status};
  }
}

void print_owned(char* text) {
  std::printf("%s\n", text);
  rqe_string_free(text);
}

struct CommonOptions {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> trajectories;
  std::size_t workers = 0;
  std::string out;
  std::vector<std::string> overrides;
};

void add_config_flags(CLI::App* cmd, CommonOptions& o, bool with_run_flags) {
  cmd->add_option("--config", o.config_path, "JSON experiment config")->check(CLI::ExistingFile);
  cmd->add_option("--set", o.overrides, "Override a config key, e.g. noise.p2=0.001 (repeatable)");
  if (!with_run_flags) return;
  cmd->add_option("--seed", o.seed, "Master seed");
  cmd->add_option("--trajectories", o.trajectories, "Trajectories per experiment");
  cmd->add_option("--workers", o.workers, "Worker threads (default: RQE_WORKERS, then all cores)");
}

ConfigPtr build_config(const CommonOptions& o) {
  rqe_config* raw = nullptr;
  check(o.config_path.empty() ? rqe_config_default(&raw) : rqe_config_load(o.config_path.c_str(), &raw));
  ConfigPtr cfg(raw);
  for (const auto& s : o.overrides) check(rqe_config_set(cfg.get(), s.c_str()));
  if (o.seed) check(rqe_config_set(cfg.get(), ("master_seed=" + std::to_string(*o.seed)).c_str()));
  if (o.trajectories) check(rqe_config_set(cfg.get(), ("n_trajectories=" + std::to_string(*o.trajectories)).c_str()));
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Relaxational quantum eigensolver trajectory simulator"};
  app.set_version_flag("--version", std::string(rqe_version()));
  app.require_subcommand(1);

  CommonOptions run_opts;
  auto* run = app.add_subcommand("run", "Run one experiment and write a results file");
  add_config_flags(run, run_opts, true);
  run->add_option("--out", run_opts.out, "Results JSON (default: config output_path, else results.json)");

  CommonOptions sweep_opts;
  std::string axis;
  std::vector<double> values;
  std::string results_dir;
  auto* sweep = app.add_subcommand("sweep", "Run one experiment per value of a single axis");
  add_config_flags(sweep, sweep_opts, true);
  sweep->add_option("--axis", axis, "n_primary, n_resets, p2 or kappa")->required();
  sweep->add_option("--values", values, "Axis values")->required()->expected(1, -1);
  sweep->add_option("--out", sweep_opts.out, "Combined CSV")->required();
  sweep->add_option("--results-dir", results_dir, "Also save each point's results file here");

  std::string thermo_in;
  std::string thermo_out;
  std::string thermo_bins;
  auto* thermo = app.add_subcommand("thermo", "Temperature estimates from a results file");
  thermo->add_option("results", thermo_in, "Results JSON")->required()->check(CLI::ExistingFile);
  thermo->add_option("--out", thermo_out, "Estimates JSON (default: stdout only)");
  thermo->add_option("--bins", thermo_bins, "Binned shadow occupation CSV");

  CommonOptions diag_opts;
  auto* diag = app.add_subcommand("diag", "Dump the spectrum and E(T) curve of the primary Hamiltonian");
  add_config_flags(diag, diag_opts, false);
  diag->add_option("--out", diag_opts.out, "Output directory")->required();

  std::string report_in;
  std::string report_out;
  auto* report = app.add_subcommand("report", "Figure-ready CSVs from a results file");
  report->add_option("results", report_in, "Results JSON")->required()->check(CLI::ExistingFile);
  report->add_option("--out", report_out, "Output directory")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      auto cfg = build_config(run_opts);
      std::string out = run_opts.out;
      if (out.empty()) {
        char* text = nullptr;
        check(rqe_config_output_path(cfg.get(), &text));
        out = text;
        rqe_string_free(text);
        if (out.empty()) out = "results.json";
      }
      rqe_result* raw = nullptr;
      check(rqe_run(cfg.get(), run_opts.workers, &raw));
      ResultPtr result(raw);
      check(rqe_result_save(result.get(), out.c_str()));
      char* estimates = nullptr;
      check(rqe_result_estimates_json(result.get(), &estimates));
      print_owned(estimates);
      std::fprintf(stderr, "wrote %s\n", out.c_str());
    } else if (*sweep) {
      auto cfg = build_config(sweep_opts);
      check(rqe_sweep(cfg.get(), axis.c_str(), values.data(), values.size(), sweep_opts.workers,
                      sweep_opts.out.c_str(), results_dir.empty() ? nullptr : results_dir.c_str()));
      std::fprintf(stderr, "wrote %s\n", sweep_opts.out.c_str());
    } else if (*thermo) {
      std::string bins = thermo_bins;
      if (bins.empty() && !thermo_out.empty()) {
        std::filesystem::path p(thermo_out);
        bins = (p.parent_path() / (p.stem().string() + ".shadow_bins.csv")).string();
      }
      char* estimates = nullptr;
      check(rqe_thermo(thermo_in.c_str(), thermo_out.empty() ? nullptr : thermo_out.c_str(),
                       bins.empty() ? nullptr : bins.c_str(), &estimates));
      print_owned(estimates);
    } else if (*diag) {
      auto cfg = build_config(diag_opts);
      check(rqe_diag(cfg.get(), diag_opts.out.c_str()));
      std::fprintf(stderr, "wrote %s/spectrum.csv and %s/thermal_curve.csv\n", diag_opts.out.c_str(),
                   diag_opts.out.c_str());
    } else if (*report) {
      check(rqe_report(report_in.c_str(), report_out.c_str()));
      std::fprintf(stderr, "wrote report to %s\n", report_out.c_str());
    }
  } catch (const Failure& f) {
    return static_cast<int>(f.status);
  }
  return 0;
}
