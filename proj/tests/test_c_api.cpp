#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "dasgp/dasgp.h"

namespace {

std::string tempPath(const char* name) {
  return (std::filesystem::path(DASGP_TEST_DATA_DIR) / name).string();
}

}  // namespace

TEST_CASE("version and error reporting") {
  CHECK(std::strlen(dasgp_version()) > 0);
  dasgp_config* cfg = nullptr;
  CHECK(dasgp_config_from_preset("nope", &cfg) == DASGP_ERR_INVALID_ARGUMENT);
  CHECK(cfg == nullptr);
  CHECK(std::string(dasgp_last_error()).find("nope") != std::string::npos);
  CHECK(dasgp_config_create(nullptr) == DASGP_ERR_INVALID_ARGUMENT);
  dasgp_config_destroy(nullptr);
  dasgp_result_destroy(nullptr);
  dasgp_field_destroy(nullptr);
}

TEST_CASE("config lifecycle and run") {
  dasgp_config* cfg = nullptr;
  REQUIRE(dasgp_config_create(&cfg) == DASGP_OK);
  CHECK(std::string(dasgp_config_experiment(cfg)) == "das-1d");
  CHECK(dasgp_config_set(cfg, "L", "15") == DASGP_OK);
  CHECK(dasgp_config_set(cfg, "rounds", "4") == DASGP_OK);
  CHECK(dasgp_config_set(cfg, "seeds", "1..2") == DASGP_OK);
  CHECK(dasgp_config_set(cfg, "policy", "max-variance,random") == DASGP_OK);
  CHECK(dasgp_config_set(cfg, "bogus", "1") == DASGP_ERR_INVALID_ARGUMENT);
  CHECK(dasgp_config_set(cfg, "L", "abc") != DASGP_OK);
  CHECK(dasgp_config_validate(cfg) == DASGP_OK);
  CHECK(std::string(dasgp_config_output_path(cfg)).empty());
  CHECK(dasgp_config_output_format(cfg) == DASGP_FORMAT_CSV);
  CHECK(dasgp_config_timestamp(cfg) == 0);

  dasgp_result* res = nullptr;
  REQUIRE(dasgp_run(cfg, &res) == DASGP_OK);
  CHECK(dasgp_result_record_count(res) == 2 * 2 * 4);
  CHECK(dasgp_result_aggregate_count(res) == 2 * 4);
  CHECK(dasgp_result_failure_count(res) == 0);

  dasgp_record rec{};
  REQUIRE(dasgp_result_record(res, 0, &rec) == DASGP_OK);
  CHECK(rec.seed == 1);
  CHECK(rec.round == 1);
  CHECK(std::string(rec.metric).rfind("mse/", 0) == 0);
  CHECK(rec.value > 0.0);
  CHECK(dasgp_result_record(res, 1000, &rec) == DASGP_ERR_INVALID_ARGUMENT);

  const std::string csv = dasgp_result_csv(res);
  CHECK(csv.rfind("seed,round,metric,value,extra\n", 0) == 0);

  const auto path = tempPath("capi.csv");
  CHECK(dasgp_result_write(res, DASGP_FORMAT_CSV, path.c_str(), 0) == DASGP_OK);
  CHECK(std::filesystem::exists(path + ".agg"));
  CHECK(dasgp_result_write(res, DASGP_FORMAT_JSON, tempPath("nodir/x.json").c_str(), 0) ==
        DASGP_ERR_IO);

  dasgp_result_destroy(res);
  dasgp_config_destroy(cfg);
}

TEST_CASE("config files and presets") {
  const auto path = tempPath("capi.cfg");
  std::ofstream(path) << "experiment = aloha\nL = 30\nB = 2\nQ = 5\nrounds = 3\nseeds = 4\n"
                         "out = somewhere.csv\nformat = json\n";
  dasgp_config* cfg = nullptr;
  REQUIRE(dasgp_config_create(&cfg) == DASGP_OK);
  REQUIRE(dasgp_config_load_file(cfg, path.c_str()) == DASGP_OK);
  CHECK(std::string(dasgp_config_experiment(cfg)) == "aloha");
  CHECK(std::string(dasgp_config_output_path(cfg)) == "somewhere.csv");
  CHECK(dasgp_config_output_format(cfg) == DASGP_FORMAT_JSON);

  const auto bad = tempPath("capi_bad.cfg");
  std::ofstream(bad) << "rounds = 7\nL = x\n";
  CHECK(dasgp_config_load_file(cfg, bad.c_str()) != DASGP_OK);
  CHECK(std::string(dasgp_last_error()).find("config line 2") != std::string::npos);
  CHECK(dasgp_config_load_file(cfg, tempPath("absent.cfg").c_str()) == DASGP_ERR_IO);

  dasgp_result* res = nullptr;
  REQUIRE(dasgp_run(cfg, &res) == DASGP_OK);
  CHECK(dasgp_result_record_count(res) > 0);
  dasgp_result_destroy(res);
  dasgp_config_destroy(cfg);

  dasgp_config* preset = nullptr;
  REQUIRE(dasgp_config_from_preset("fig6", &preset) == DASGP_OK);
  CHECK(std::string(dasgp_config_experiment(preset)) == "aloha");
  CHECK(dasgp_config_validate(preset) == DASGP_OK);
  dasgp_config_destroy(preset);
}

TEST_CASE("run-time failures") {
  dasgp_config* cfg = nullptr;
  REQUIRE(dasgp_config_create(&cfg) == DASGP_OK);
  CHECK(dasgp_config_set(cfg, "rounds", "0") == DASGP_OK);
  CHECK(dasgp_config_validate(cfg) == DASGP_ERR_INVALID_ARGUMENT);
  dasgp_result* res = nullptr;
  CHECK(dasgp_run(cfg, &res) == DASGP_ERR_INVALID_ARGUMENT);
  CHECK(res == nullptr);
  dasgp_config_destroy(cfg);
}

TEST_CASE("fields through the C API") {
  dasgp_field* f = nullptr;
  REQUIRE(dasgp_field_generate(DASGP_FIELD_2D, 40, 0.1, 3, &f) == DASGP_OK);
  CHECK(dasgp_field_size(f) == 40);
  CHECK(dasgp_field_dim(f) == 2);
  double coords[2];
  double mean = 0.0;
  double meas = 0.0;
  CHECK(dasgp_field_sensor(f, 5, coords, &mean, &meas) == DASGP_OK);
  CHECK(coords[0] >= 0.0);
  CHECK(coords[1] <= 1.0);
  CHECK(dasgp_field_sensor(f, 40, coords, &mean, &meas) == DASGP_ERR_INVALID_ARGUMENT);

  std::vector<double> mse(40);
  std::vector<size_t> sel(40);
  REQUIRE(dasgp_das_run(f, DASGP_POLICY_MAX_VARIANCE, 40, 1.0, 1.0, 1, mse.data(), sel.data()) ==
          DASGP_OK);
  CHECK(mse.back() == 0.0);
  for (std::size_t i = 1; i < mse.size(); ++i) CHECK(mse[i] <= mse[i - 1] + 1e-9);
  CHECK(dasgp_das_run(f, DASGP_POLICY_RANDOM, 41, 1.0, 1.0, 1, mse.data(), sel.data()) ==
        DASGP_ERR_INVALID_ARGUMENT);
  dasgp_field_destroy(f);

  CHECK(dasgp_field_generate(DASGP_FIELD_1D, 0, 0.1, 1, &f) == DASGP_ERR_INVALID_ARGUMENT);

  const auto path = tempPath("capi_field.csv");
  std::ofstream(path) << "x,y\n0,1\n1,2\n2,oops\n";
  CHECK(dasgp_field_load_csv(path.c_str(), 0.1, &f) == DASGP_ERR_PARSE);
  CHECK(std::string(dasgp_last_error()).find("line 4") != std::string::npos);
  std::ofstream(path) << "x,y\n0,1\n1,2\n2,3\n";
  REQUIRE(dasgp_field_load_csv(path.c_str(), 0.1, &f) == DASGP_OK);
  CHECK(dasgp_field_size(f) == 3);
  CHECK(dasgp_field_dim(f) == 1);
  dasgp_field_destroy(f);
}

TEST_CASE("numerical primitives") {
  const double obs[] = {0.0};
  const double y[] = {0.7};
  double mean = 0.0;
  double cov = 0.0;
  REQUIRE(dasgp_posterior(1, 1, obs, y, 1, obs, 1.0, 1.0, 0.01, &mean, &cov) == DASGP_OK);
  CHECK(mean == doctest::Approx(0.7 / 1.01));
  CHECK(cov == doctest::Approx(1.0 - 1.0 / 1.01));
  CHECK(dasgp_posterior(1, 1, obs, y, 1, obs, 1.0, 1.0, 0.01, &mean, nullptr) == DASGP_OK);
  CHECK(dasgp_posterior(1, 1, obs, y, 1, obs, 1.0, 1.0, -1.0, &mean, nullptr) ==
        DASGP_ERR_INVALID_ARGUMENT);
  const double nan[] = {NAN};
  CHECK(dasgp_posterior(1, 1, obs, nan, 1, obs, 1.0, 1.0, 0.1, &mean, nullptr) ==
        DASGP_ERR_NON_FINITE);

  CHECK(dasgp_expected_throughput(0.3, 3, 10) == doctest::Approx(3.0 * std::pow(0.9, 9)));
  const double p[] = {0.3, 0.3};
  double s[2];
  REQUIRE(dasgp_success_probabilities(p, 2, 3, s) == DASGP_OK);
  CHECK(s[0] == doctest::Approx(0.3 * 0.9));
  CHECK(dasgp_upload_probability(0.0, 0.0) == 0.0);
  CHECK(dasgp_sse_lower_bound(0.1, 10, 3) == doctest::Approx(0.88964).epsilon(1e-5));
}
