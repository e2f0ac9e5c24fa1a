#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>
#include <unistd.h>

#include "rqe/rqe.h"

namespace fs = std::filesystem;

namespace {

std::string take(char* s) {
  std::string out(s);
  rqe_string_free(s);
  return out;
}

rqe_config* small_config() {
  rqe_config* cfg = nullptr;
  REQUIRE(rqe_config_default(&cfg) == RQE_OK);
  for (const char* s : {"n_primary=4", "schedule.n_resets=4", "schedule.layers_per_pulse=5", "n_trajectories=12",
                        "thermometry.bootstrap_resamples=10"})
    REQUIRE(rqe_config_set(cfg, s) == RQE_OK);
  return cfg;
}

fs::path scratch() {
  auto dir = fs::temp_directory_path() / ("rqe_capi_" + std::to_string(::getpid()));
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::size_t line_count(const fs::path& p) {
  std::ifstream in(p);
  std::size_t n = 0;
  for (std::string line; std::getline(in, line);) ++n;
  return n;
}

}  // namespace

TEST_CASE("config handles") {
  CHECK(std::string(rqe_version()).size() > 0);
  rqe_config* cfg = small_config();
  char* text = nullptr;
  REQUIRE(rqe_config_to_json(cfg, &text) == RQE_OK);
  const std::string before = take(text);
  CHECK(before.find("\"n_primary\": 4") != std::string::npos);

  CHECK(rqe_config_set(cfg, "noise.bogus=1") == RQE_ERR_CONFIG);
  CHECK(std::string(rqe_last_error()).find("bogus") != std::string::npos);
  CHECK(rqe_config_set(cfg, "n_primary=\"x\"") == RQE_ERR_CONFIG);
  REQUIRE(rqe_config_to_json(cfg, &text) == RQE_OK);
  CHECK(take(text) == before);

  char* hash = nullptr;
  REQUIRE(rqe_config_hash(cfg, &hash) == RQE_OK);
  CHECK(take(hash).size() == 16);

  rqe_config* parsed = nullptr;
  CHECK(rqe_config_parse("{\"n_primary\": 6}", &parsed) == RQE_OK);
  rqe_config_free(parsed);
  CHECK(rqe_config_parse("{oops", &parsed) == RQE_ERR_CONFIG);
  CHECK(rqe_config_load("/nonexistent.json", &parsed) == RQE_ERR_IO);
  CHECK(rqe_config_set(nullptr, "a=1") == RQE_ERR_INVALID_ARGUMENT);
  CHECK(rqe_config_default(nullptr) == RQE_ERR_INVALID_ARGUMENT);
  rqe_config_free(cfg);
  rqe_config_free(nullptr);
}

TEST_CASE("run, summarize, save, load") {
  const auto dir = scratch();
  rqe_config* cfg = small_config();
  rqe_result* result = nullptr;
  REQUIRE(rqe_run(cfg, 2, &result) == RQE_OK);
  rqe_summary s{};
  REQUIRE(rqe_result_summary(result, &s) == RQE_OK);
  CHECK(s.n_trajectories == 12);
  CHECK(s.ground_state_energy == doctest::Approx(-8.0));
  CHECK(s.approximation_ratio == doctest::Approx(s.mean_energy / s.ground_state_energy));

  const double* energies = nullptr;
  std::size_t count = 0;
  REQUIRE(rqe_result_final_energies(result, &energies, &count) == RQE_OK);
  CHECK(count == 12);

  const auto path = (dir / "r.json").string();
  REQUIRE(rqe_result_save(result, path.c_str()) == RQE_OK);
  rqe_result* loaded = nullptr;
  REQUIRE(rqe_result_load(path.c_str(), &loaded) == RQE_OK);
  char* a = nullptr;
  char* b = nullptr;
  REQUIRE(rqe_result_to_json(result, &a) == RQE_OK);
  REQUIRE(rqe_result_to_json(loaded, &b) == RQE_OK);
  CHECK(take(a) == take(b));

  char* est = nullptr;
  REQUIRE(rqe_thermo(path.c_str(), (dir / "t.json").c_str(), (dir / "bins.csv").c_str(), &est) == RQE_OK);
  CHECK(take(est).find("t_shadow") != std::string::npos);
  CHECK(fs::exists(dir / "t.json"));
  CHECK(line_count(dir / "bins.csv") == 11);

  REQUIRE(rqe_report(path.c_str(), (dir / "report").c_str()) == RQE_OK);
  CHECK(fs::exists(dir / "report" / "thermal_curve.csv"));
  REQUIRE(rqe_diag(cfg, (dir / "diag").c_str()) == RQE_OK);
  CHECK(line_count(dir / "diag" / "spectrum.csv") == 17);

  const double values[] = {0.0, 0.01, 0.02, 0.05};
  REQUIRE(rqe_sweep(cfg, "p2", values, 4, 1, (dir / "sweep.csv").c_str(), nullptr) == RQE_OK);
  CHECK(line_count(dir / "sweep.csv") == 5);
  CHECK(rqe_sweep(cfg, "p2", values, 0, 1, (dir / "empty.csv").c_str(), nullptr) == RQE_ERR_CONFIG);
  CHECK(rqe_sweep(cfg, "dt", values, 4, 1, (dir / "x.csv").c_str(), nullptr) == RQE_ERR_CONFIG);

  {
    std::ifstream in(path);
    std::string doc((std::istreambuf_iterator<char>(in)), {});
    const auto at = doc.find("\"schema_version\": 1");
    REQUIRE(at != std::string::npos);
    doc.replace(at, 19, "\"schema_version\": 9");
    std::ofstream(dir / "future.json") << doc;
  }
  rqe_result* future = nullptr;
  CHECK(rqe_result_load((dir / "future.json").c_str(), &future) == RQE_ERR_SCHEMA_VERSION);
  CHECK(rqe_result_load((dir / "none.json").c_str(), &future) == RQE_ERR_IO);

  rqe_result_free(result);
  rqe_result_free(loaded);
  rqe_config_free(cfg);
  fs::remove_all(dir);
}

TEST_CASE("resource limits surface as status codes") {
  rqe_config* cfg = nullptr;
  REQUIRE(rqe_config_default(&cfg) == RQE_OK);
  REQUIRE(rqe_config_set(cfg, "n_primary=16") == RQE_OK);
  rqe_result* result = nullptr;
  CHECK(rqe_run(cfg, 1, &result) == RQE_ERR_RESOURCE_LIMIT);
  CHECK(result == nullptr);
  rqe_config_free(cfg);
}
