#include "dasgp/dasgp.h"

#include <algorithm>
#include <exception>
#include <fstream>
#include <new>
#include <sstream>
#include <string>

#include "dasgp/aloha.hpp"
#include "dasgp/error.hpp"
#include "dasgp/experiment.hpp"
#include "dasgp/field.hpp"

struct dasgp_config {
  dasgp::ExperimentConfig cfg;
  std::string experimentName;
};

struct dasgp_result {
  dasgp::RunResult result;
  std::string csv;
};

struct dasgp_field {
  dasgp::SensorField field;
};

namespace {

thread_local std::string lastError;

dasgp_status toStatus(dasgp::ErrorCode code) {
  using dasgp::ErrorCode;
  switch (code) {
    case ErrorCode::InvalidArgument: return DASGP_ERR_INVALID_ARGUMENT;
    case ErrorCode::DimensionMismatch: return DASGP_ERR_DIMENSION_MISMATCH;
    case ErrorCode::NonFinite: return DASGP_ERR_NON_FINITE;
    case ErrorCode::NumericalFailure: return DASGP_ERR_NUMERICAL;
    case ErrorCode::EmptySelection: return DASGP_ERR_EMPTY_SELECTION;
    case ErrorCode::Io: return DASGP_ERR_IO;
    case ErrorCode::Parse: return DASGP_ERR_PARSE;
  }
  return DASGP_ERR_INTERNAL;
}

template <typename Fn>
dasgp_status guarded(Fn&& fn) {
  try {
    fn();
    return DASGP_OK;
  } catch (const dasgp::Error& e) {
    lastError = e.what();
    return toStatus(e.code());
  } catch (const std::bad_alloc&) {
    lastError = "out of memory";
    return DASGP_ERR_INTERNAL;
  } catch (const std::exception& e) {
    lastError = e.what();
    return DASGP_ERR_INTERNAL;
  }
}

void requirePointer(const void* p, const char* what) {
  if (p == nullptr) {
    dasgp::fail(dasgp::ErrorCode::InvalidArgument, std::string(what) + " is null");
  }
}

std::vector<dasgp::Location> unpackLocations(const double* coords, std::size_t n,
                                             std::size_t dim) {
  std::vector<dasgp::Location> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    out.emplace_back(std::vector<double>(coords + i * dim, coords + (i + 1) * dim));
  }
  return out;
}

}  // namespace

extern "C" {

const char* dasgp_version(void) { return "1.0.0"; }

const char* dasgp_last_error(void) { return lastError.c_str(); }

dasgp_status dasgp_config_create(dasgp_config** out) {
  return guarded([&] {
    requirePointer(out, "out");
    *out = new dasgp_config{};
  });
}

dasgp_status dasgp_config_from_preset(const char* name, dasgp_config** out) {
  return guarded([&] {
    requirePointer(name, "name");
    requirePointer(out, "out");
    *out = new dasgp_config{dasgp::presetConfig(name), {}};
  });
}

dasgp_status dasgp_config_load_file(dasgp_config* cfg, const char* path) {
  return guarded([&] {
    requirePointer(cfg, "config");
    requirePointer(path, "path");
    std::ifstream in(path, std::ios::binary);
    if (!in) dasgp::fail(dasgp::ErrorCode::Io, std::string("cannot open config file ") + path);
    std::stringstream ss;
    ss << in.rdbuf();
    // Applied to a copy so a bad line leaves cfg untouched.
    auto updated = cfg->cfg;
    dasgp::applyConfigText(updated, ss.str());
    cfg->cfg = std::move(updated);
  });
}

dasgp_status dasgp_config_set(dasgp_config* cfg, const char* key, const char* value) {
  return guarded([&] {
    requirePointer(cfg, "config");
    requirePointer(key, "key");
    requirePointer(value, "value");
    dasgp::setConfigValue(cfg->cfg, key, value);
  });
}

dasgp_status dasgp_config_validate(const dasgp_config* cfg) {
  return guarded([&] {
    requirePointer(cfg, "config");
    cfg->cfg.validate();
  });
}

const char* dasgp_config_experiment(const dasgp_config* cfg) {
  if (cfg == nullptr) return "";
  auto* mut = const_cast<dasgp_config*>(cfg);
  mut->experimentName = dasgp::toString(cfg->cfg.experiment);
  return mut->experimentName.c_str();
}

const char* dasgp_config_output_path(const dasgp_config* cfg) {
  return cfg == nullptr ? "" : cfg->cfg.out.c_str();
}

dasgp_format dasgp_config_output_format(const dasgp_config* cfg) {
  return cfg != nullptr && cfg->cfg.format == dasgp::OutputFormat::Json ? DASGP_FORMAT_JSON
                                                                         : DASGP_FORMAT_CSV;
}

int dasgp_config_timestamp(const dasgp_config* cfg) {
  return cfg != nullptr && cfg->cfg.timestamp ? 1 : 0;
}

void dasgp_config_destroy(dasgp_config* cfg) { delete cfg; }

dasgp_status dasgp_run(const dasgp_config* cfg, dasgp_result** out) {
  return guarded([&] {
    requirePointer(cfg, "config");
    requirePointer(out, "out");
    *out = new dasgp_result{dasgp::runExperiment(cfg->cfg), {}};
  });
}

size_t dasgp_result_record_count(const dasgp_result* result) {
  return result == nullptr ? 0 : result->result.records.size();
}

dasgp_status dasgp_result_record(const dasgp_result* result, size_t index, dasgp_record* out) {
  return guarded([&] {
    requirePointer(result, "result");
    requirePointer(out, "out");
    if (index >= result->result.records.size()) {
      dasgp::fail(dasgp::ErrorCode::InvalidArgument, "record index out of range");
    }
    const auto& r = result->result.records[index];
    *out = {r.seed, r.round, r.metric.c_str(), r.value, r.extra.c_str()};
  });
}

size_t dasgp_result_aggregate_count(const dasgp_result* result) {
  return result == nullptr ? 0 : result->result.aggregates.size();
}

size_t dasgp_result_failure_count(const dasgp_result* result) {
  return result == nullptr ? 0 : result->result.failures.size();
}

dasgp_status dasgp_result_failure(const dasgp_result* result, size_t index, uint64_t* seed,
                                  const char** message) {
  return guarded([&] {
    requirePointer(result, "result");
    if (index >= result->result.failures.size()) {
      dasgp::fail(dasgp::ErrorCode::InvalidArgument, "failure index out of range");
    }
    const auto& f = result->result.failures[index];
    if (seed != nullptr) *seed = f.seed;
    if (message != nullptr) *message = f.message.c_str();
  });
}

dasgp_status dasgp_result_write(const dasgp_result* result, dasgp_format format,
                                const char* path, int timestamp) {
  return guarded([&] {
    requirePointer(result, "result");
    requirePointer(path, "path");
    dasgp::emitResults(result->result,
                       format == DASGP_FORMAT_JSON ? dasgp::OutputFormat::Json
                                                   : dasgp::OutputFormat::Csv,
                       path, timestamp != 0);
  });
}

const char* dasgp_result_csv(dasgp_result* result) {
  if (result == nullptr) return "";
  result->csv = dasgp::formatRecordsCsv(result->result.records);
  return result->csv.c_str();
}

void dasgp_result_destroy(dasgp_result* result) { delete result; }

dasgp_status dasgp_field_generate(dasgp_field_kind kind, size_t sensors, double noise_variance,
                                  uint64_t seed, dasgp_field** out) {
  return guarded([&] {
    requirePointer(out, "out");
    dasgp::Rng rng = dasgp::StreamSeeder(seed).stream(0, dasgp::Stream::Field);
    dasgp::SensorField f;
    switch (kind) {
      case DASGP_FIELD_1D: f = dasgp::gen1D(sensors, noise_variance, rng); break;
      case DASGP_FIELD_2D: f = dasgp::gen2D(sensors, noise_variance, rng); break;
      case DASGP_FIELD_RANDOM_SINUSOID:
        f = dasgp::genRandomSinusoid(sensors, 10, noise_variance, rng);
        break;
      default: dasgp::fail(dasgp::ErrorCode::InvalidArgument, "unknown field kind");
    }
    *out = new dasgp_field{std::move(f)};
  });
}

dasgp_status dasgp_field_load_csv(const char* path, double noise_variance, dasgp_field** out) {
  return guarded([&] {
    requirePointer(path, "path");
    requirePointer(out, "out");
    *out = new dasgp_field{dasgp::loadCsv(path, noise_variance).field};
  });
}

size_t dasgp_field_size(const dasgp_field* field) {
  return field == nullptr ? 0 : field->field.size();
}

size_t dasgp_field_dim(const dasgp_field* field) {
  return field == nullptr || field->field.locations.empty()
             ? 0
             : field->field.locations.front().dim();
}

dasgp_status dasgp_field_sensor(const dasgp_field* field, size_t index, double* coords,
                                double* true_mean, double* measurement) {
  return guarded([&] {
    requirePointer(field, "field");
    if (index >= field->field.size()) {
      dasgp::fail(dasgp::ErrorCode::InvalidArgument, "sensor index out of range");
    }
    const auto& loc = field->field.locations[index];
    if (coords != nullptr) {
      for (std::size_t i = 0; i < loc.dim(); ++i) coords[i] = loc[i];
    }
    if (true_mean != nullptr) *true_mean = field->field.trueMeans[index];
    if (measurement != nullptr) *measurement = field->field.measurements[index];
  });
}

void dasgp_field_destroy(dasgp_field* field) { delete field; }

dasgp_status dasgp_das_run(const dasgp_field* field, dasgp_policy policy, size_t rounds,
                           double length_scale, double signal_variance, uint64_t seed,
                           double* mse, size_t* selected) {
  return guarded([&] {
    requirePointer(field, "field");
    requirePointer(mse, "mse");
    requirePointer(selected, "selected");
    const dasgp::KernelParams params{length_scale, signal_variance};
    dasgp::Rng rng = dasgp::StreamSeeder(seed).stream(0, dasgp::Stream::Selection);
    const auto chooser = policy == DASGP_POLICY_RANDOM ? dasgp::randomPolicy()
                                                       : dasgp::maxVariancePolicy();
    const auto log = dasgp::runDas(field->field, chooser, rounds, params, rng);
    for (std::size_t t = 0; t < log.size(); ++t) {
      mse[t] = log[t].mse;
      selected[t] = log[t].selected;
    }
  });
}

dasgp_status dasgp_posterior(size_t dim, size_t n_observed, const double* observed_coords,
                             const double* observed_values, size_t n_targets,
                             const double* target_coords, double length_scale,
                             double signal_variance, double noise_variance, double* mean,
                             double* cov) {
  return guarded([&] {
    if (dim == 0) dasgp::fail(dasgp::ErrorCode::InvalidArgument, "dim must be positive");
    if (n_observed > 0) {
      requirePointer(observed_coords, "observed_coords");
      requirePointer(observed_values, "observed_values");
    }
    requirePointer(target_coords, "target_coords");
    requirePointer(mean, "mean");
    const auto obs = unpackLocations(observed_coords, n_observed, dim);
    const auto targets = unpackLocations(target_coords, n_targets, dim);
    const std::span<const double> values(observed_values, n_observed);
    const auto post = dasgp::posterior(obs, values, targets, {length_scale, signal_variance},
                                       noise_variance);
    for (std::size_t i = 0; i < n_targets; ++i) mean[i] = post.mean(static_cast<Eigen::Index>(i));
    if (cov != nullptr) {
      for (std::size_t i = 0; i < n_targets; ++i) {
        for (std::size_t j = 0; j < n_targets; ++j) {
          cov[i * n_targets + j] =
              post.covariance(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
        }
      }
    }
  });
}

double dasgp_expected_throughput(double p_up, size_t channels, size_t candidates) {
  dasgp::AlohaConfig cfg;
  cfg.channels = channels;
  cfg.candidates = candidates;
  return dasgp::expectedThroughput(p_up, cfg);
}

dasgp_status dasgp_success_probabilities(const double* p, size_t n, size_t channels,
                                         double* out) {
  return guarded([&] {
    requirePointer(p, "p");
    requirePointer(out, "out");
    if (channels == 0) dasgp::fail(dasgp::ErrorCode::InvalidArgument, "channels must be >= 1");
    const auto s = dasgp::perSensorSuccessProbability(std::span(p, n), channels);
    std::copy(s.begin(), s.end(), out);
  });
}

double dasgp_upload_probability(double error_sq, double psi) {
  return dasgp::uploadProbabilityFromError(error_sq, psi);
}

double dasgp_sse_lower_bound(double noise_variance, size_t candidates, size_t channels) {
  return dasgp::sseLowerBound(noise_variance, candidates, channels).value;
}

}  // extern "C"
