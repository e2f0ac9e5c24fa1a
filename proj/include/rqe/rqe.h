#ifndef RQE_RQE_H
#define RQE_RQE_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(__GNUC__)
#define RQE_API __attribute__((visibility("default")))
#else
#define RQE_API
#endif

typedef enum rqe_status {
  RQE_OK = 0,
  RQE_ERR_INVALID_ARGUMENT = 1,
  RQE_ERR_OUT_OF_RANGE = 2,
  RQE_ERR_NUMERICAL = 3,
  RQE_ERR_CONFIG = 4,
  RQE_ERR_IO = 5,
  RQE_ERR_SCHEMA_VERSION = 6,
  RQE_ERR_RESOURCE_LIMIT = 7,
  RQE_ERR_ESTIMATION = 8,
  RQE_ERR_INTERNAL = 99
} rqe_status;

typedef struct rqe_config rqe_config;
typedef struct rqe_result rqe_result;

typedef struct rqe_summary {
  size_t n_trajectories;
  double ground_state_energy;
  double mean_energy;
  double mean_energy_stderr;
  double approximation_ratio;
  double approximation_ratio_stderr;
  /* NaN when the estimate is unavailable. */
  double t_energy, t_energy_stderr;
  double t_fkl, t_fkl_stderr;
  double t_shadow, t_shadow_stderr;
  double peak_fkl;
  double overestimation_ratio, overestimation_ratio_stderr;
} rqe_summary;

RQE_API const char* rqe_version(void);
/* Message for the most recent failure on the calling thread. */
RQE_API const char* rqe_last_error(void);
RQE_API void rqe_string_free(char* s);

RQE_API rqe_status rqe_config_default(rqe_config** out);
RQE_API rqe_status rqe_config_load(const char* path, rqe_config** out);
RQE_API rqe_status rqe_config_parse(const char* json_text, rqe_config** out);
/* "dotted.key=value"; the config is left unchanged on failure. */
RQE_API rqe_status rqe_config_set(rqe_config* cfg, const char* assignment);
RQE_API rqe_status rqe_config_to_json(const rqe_config* cfg, char** out);
RQE_API rqe_status rqe_config_hash(const rqe_config* cfg, char** out);
/* Empty string when the config names no output path. */
RQE_API rqe_status rqe_config_output_path(const rqe_config* cfg, char** out);
RQE_API void rqe_config_free(rqe_config* cfg);

/* workers = 0 reads RQE_WORKERS, then uses the hardware concurrency. */
RQE_API rqe_status rqe_run(const rqe_config* cfg, size_t workers, rqe_result** out);
RQE_API rqe_status rqe_result_load(const char* path, rqe_result** out);
RQE_API rqe_status rqe_result_save(const rqe_result* result, const char* path);
RQE_API rqe_status rqe_result_summary(const rqe_result* result, rqe_summary* out);
RQE_API rqe_status rqe_result_to_json(const rqe_result* result, char** out);
RQE_API rqe_status rqe_result_estimates_json(const rqe_result* result, char** out);
RQE_API rqe_status rqe_result_final_energies(const rqe_result* result, const double** data, size_t* count);
RQE_API void rqe_result_free(rqe_result* result);

/* Recomputes the estimates from a results file. Either output path may be NULL. */
RQE_API rqe_status rqe_thermo(const char* results_path, const char* estimates_json_path, const char* bins_csv_path,
                              char** estimates_json);
/* One row per value in csv_path; per-point results go to results_dir when it is not NULL. */
RQE_API rqe_status rqe_sweep(const rqe_config* base, const char* axis, const double* values, size_t n_values,
                             size_t workers, const char* csv_path, const char* results_dir);
/* spectrum.csv and thermal_curve.csv for the configured primary Hamiltonian. */
RQE_API rqe_status rqe_diag(const rqe_config* cfg, const char* out_dir);
RQE_API rqe_status rqe_report(const char* results_path, const char* out_dir);

#ifdef __cplusplus
}
#endif

#endif
