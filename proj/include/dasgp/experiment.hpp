#pragma once

// Experiment orchestration: configuration, seed batches, aggregation and
// result files.
//
// Config files are flat "key = value" lines; '#' starts a comment. Keys:
//   experiment      das-1d | das-2d | das-csv | das-virtual | aloha
//   policy          comma list of max-variance, random, app-weighted, virtual
//   rounds, seeds   seeds accept "7", "1..100" or "1,4,10..12"
//   L, noise_variance, length_scale, signal_variance, terms, csv_path
//   virtual         points separated by ';', coordinates by ','
//   apps, betas     applications for app-weighted: mean | sensor:<i> | region:<lo>:<hi>
//   B, Q            comma lists (aloha sweeps every pair)
//   p_sleep, mu, psi0, mode (comma list of conventional, modified)
//   out, format, threads, timestamp

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dasgp/aloha.hpp"
#include "dasgp/gp.hpp"

namespace dasgp {

enum class ExperimentKind { Das1D, Das2D, DasCsv, DasVirtual, Aloha };
enum class PolicyKind { MaxVariance, Random, AppWeighted, Virtual };
enum class OutputFormat { Csv, Json };

struct AlohaSettings {
  std::vector<std::size_t> channels{3};
  std::vector<std::size_t> candidates{10};
  double pSleep = 0.0;
  double mu = 0.5;
  double psi0 = 0.0;
  std::vector<AlohaMode> modes{AlohaMode::Conventional, AlohaMode::Modified};
};

struct ExperimentConfig {
  ExperimentKind experiment = ExperimentKind::Das1D;
  std::size_t sensors = 100;
  double noiseVariance = 0.01;
  KernelParams kernel;
  std::size_t sinusoidTerms = 10;
  std::string csvPath;
  std::vector<PolicyKind> policies{PolicyKind::MaxVariance};
  std::size_t rounds = 20;
  std::vector<std::uint64_t> seeds{1};
  std::vector<Location> virtualLocs;
  std::vector<std::string> apps{"mean"};
  std::vector<double> betas{1.0};
  std::optional<AlohaSettings> aloha;
  std::string out;
  OutputFormat format = OutputFormat::Csv;
  unsigned threads = 1;
  bool timestamp = false;

  void validate() const;
};

/// Applies one key/value pair; throws on unknown keys or bad values.
void setConfigValue(ExperimentConfig& cfg, std::string_view key, std::string_view value);

void applyConfigText(ExperimentConfig& cfg, std::string_view text);
ExperimentConfig loadConfigFile(const std::filesystem::path& path);

/// Shipped figure presets: fig2, fig3, fig4, fig6, fig7, fig8.
std::vector<std::string> presetNames();
std::string presetText(std::string_view name);
ExperimentConfig presetConfig(std::string_view name);

std::vector<std::uint64_t> parseSeeds(std::string_view spec);

std::string toString(ExperimentKind kind);
std::string toString(PolicyKind policy);
std::string toString(AlohaMode mode);

struct Record {
  std::uint64_t seed = 0;
  std::size_t round = 0;
  std::string metric;
  double value = 0.0;
  std::string extra;

  bool operator==(const Record&) const = default;
};

struct Aggregate {
  std::size_t round = 0;
  std::string metric;
  double mean = 0.0;
  double stddev = 0.0;  // population
  std::size_t count = 0;
};

struct SeedFailure {
  std::uint64_t seed = 0;
  std::string message;
};

struct RunResult {
  std::vector<Record> records;  // sorted by seed, then round
  std::vector<Aggregate> aggregates;
  std::vector<SeedFailure> failures;
};

RunResult runExperiment(const ExperimentConfig& cfg);

std::vector<Aggregate> aggregate(const std::vector<Record>& records);

/// Writes records to `path` and aggregates to `path` + ".agg".
void emitResults(const RunResult& result, OutputFormat format,
                 const std::filesystem::path& path, bool timestamp = false);

std::string formatRecordsCsv(const std::vector<Record>& records, bool timestamp = false);
std::vector<Record> parseRecordsCsv(std::string_view text);

}  // namespace dasgp
