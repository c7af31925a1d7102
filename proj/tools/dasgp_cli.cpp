// Command-line front end. Talks to the library only through the C API.

#include <cstdio>
#include <cstring>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "dasgp/dasgp.h"

namespace {

enum ExitCode { kOk = 0, kUsage = 1, kConfig = 2, kRun = 3, kOutput = 4 };

struct ConfigDeleter {
  void operator()(dasgp_config* c) const { dasgp_config_destroy(c); }
};
struct ResultDeleter {
  void operator()(dasgp_result* r) const { dasgp_result_destroy(r); }
};

int report(const char* stage, ExitCode code) {
  std::cerr << "dasgp: " << stage << " failed: " << dasgp_last_error() << "\n";
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Data-aided sensing with Gaussian process regression: DAS and ALOHA experiments"};
  app.require_subcommand(1);
  app.set_version_flag("--version", dasgp_version());

  std::string configPath;
  std::string preset;
  std::string seeds;
  std::string policy;
  std::string outPath;
  std::string format;
  long long rounds = -1;
  std::vector<std::string> overrides;
  bool timestamp = false;

  auto* das = app.add_subcommand("das", "Run a data-aided sensing experiment");
  auto* aloha = app.add_subcommand("aloha", "Run a multichannel ALOHA experiment");
  for (auto* sub : {das, aloha}) {
    sub->add_option("--config", configPath, "Key = value configuration file");
    sub->add_option("--preset", preset, "Figure preset: fig2, fig3, fig4, fig6, fig7, fig8");
    sub->add_option("--seed", seeds, "Seed, range a..b, or comma list");
    sub->add_option("--rounds", rounds, "Number of rounds")->check(CLI::PositiveNumber);
    sub->add_option("--policy", policy, "Selection policy list (das only)");
    sub->add_option("--out", outPath, "Output path; aggregates go to <out>.agg");
    sub->add_option("--format", format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
    sub->add_option("--set", overrides, "Extra key=value override (repeatable)");
    sub->add_flag("--timestamp", timestamp, "Stamp output files with the generation time");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kUsage;
  }
  const bool wantAloha = aloha->parsed();

  dasgp_config* raw = nullptr;
  if (!preset.empty()) {
    if (dasgp_config_from_preset(preset.c_str(), &raw) != DASGP_OK) return report("config", kConfig);
  } else if (dasgp_config_create(&raw) != DASGP_OK) {
    return report("config", kConfig);
  }
  std::unique_ptr<dasgp_config, ConfigDeleter> cfg(raw);

  auto set = [&](const char* key, const std::string& value) {
    return dasgp_config_set(cfg.get(), key, value.c_str()) == DASGP_OK;
  };
  if (preset.empty() && configPath.empty() && wantAloha && !set("experiment", "aloha")) {
    return report("config", kConfig);
  }
  if (!configPath.empty() && dasgp_config_load_file(cfg.get(), configPath.c_str()) != DASGP_OK) {
    return report("config", kConfig);
  }
  for (const auto& kv : overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) {
      std::cerr << "dasgp: config failed: --set expects key=value, got '" << kv << "'\n";
      return kConfig;
    }
    if (!set(kv.substr(0, eq).c_str(), kv.substr(eq + 1))) return report("config", kConfig);
  }
  if ((!seeds.empty() && !set("seeds", seeds)) ||
      (rounds > 0 && !set("rounds", std::to_string(rounds))) ||
      (!policy.empty() && !set("policy", policy)) || (!outPath.empty() && !set("out", outPath)) ||
      (!format.empty() && !set("format", format)) || (timestamp && !set("timestamp", "true"))) {
    return report("config", kConfig);
  }

  const bool isAloha = std::strcmp(dasgp_config_experiment(cfg.get()), "aloha") == 0;
  if (isAloha != wantAloha) {
    std::cerr << "dasgp: config failed: experiment '" << dasgp_config_experiment(cfg.get())
              << "' cannot run under the '" << (wantAloha ? "aloha" : "das")
              << "' subcommand\n";
    return kConfig;
  }
  if (dasgp_config_validate(cfg.get()) != DASGP_OK) return report("config", kConfig);

  dasgp_result* rawResult = nullptr;
  if (dasgp_run(cfg.get(), &rawResult) != DASGP_OK) return report("run", kRun);
  std::unique_ptr<dasgp_result, ResultDeleter> result(rawResult);

  for (std::size_t i = 0; i < dasgp_result_failure_count(result.get()); ++i) {
    std::uint64_t seed = 0;
    const char* msg = nullptr;
    dasgp_result_failure(result.get(), i, &seed, &msg);
    std::cerr << "dasgp: run failed for seed " << seed << ": " << msg << "\n";
  }

  const std::string out = dasgp_config_output_path(cfg.get());
  if (out.empty()) {
    std::fputs(dasgp_result_csv(result.get()), stdout);
  } else if (dasgp_result_write(result.get(), dasgp_config_output_format(cfg.get()), out.c_str(),
                                dasgp_config_timestamp(cfg.get())) != DASGP_OK) {
    return report("output", kOutput);
  }
  return dasgp_result_failure_count(result.get()) == 0 ? kOk : kRun;
}
