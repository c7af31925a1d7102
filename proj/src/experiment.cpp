#include "dasgp/experiment.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <map>
#include <sstream>
#include <thread>

#include "json.hpp"

#include "dasgp/applications.hpp"
#include "dasgp/das.hpp"
#include "dasgp/error.hpp"
#include "dasgp/field.hpp"

namespace dasgp {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    parts.push_back(trim(s.substr(start, pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

[[noreturn]] void badValue(std::string_view key, std::string_view value, std::string_view why) {
  fail(ErrorCode::InvalidArgument, "config key '" + std::string(key) + "': bad value '" +
                                       std::string(value) + "' (" + std::string(why) + ")");
}

double toDouble(std::string_view key, std::string_view v) {
  v = trim(v);
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (v.empty() || ec != std::errc() || ptr != v.data() + v.size() || !std::isfinite(out)) {
    badValue(key, v, "expected a number");
  }
  return out;
}

std::uint64_t toUnsigned(std::string_view key, std::string_view v) {
  v = trim(v);
  std::uint64_t out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (v.empty() || ec != std::errc() || ptr != v.data() + v.size()) {
    badValue(key, v, "expected a non-negative integer");
  }
  return out;
}

std::vector<std::size_t> toSizeList(std::string_view key, std::string_view v) {
  std::vector<std::size_t> out;
  for (auto part : split(v, ',')) out.push_back(static_cast<std::size_t>(toUnsigned(key, part)));
  return out;
}

ExperimentKind parseKind(std::string_view v) {
  if (v == "das-1d") return ExperimentKind::Das1D;
  if (v == "das-2d") return ExperimentKind::Das2D;
  if (v == "das-csv") return ExperimentKind::DasCsv;
  if (v == "das-virtual") return ExperimentKind::DasVirtual;
  if (v == "aloha") return ExperimentKind::Aloha;
  badValue("experiment", v, "unknown experiment");
}

PolicyKind parsePolicy(std::string_view v) {
  if (v == "max-variance") return PolicyKind::MaxVariance;
  if (v == "random") return PolicyKind::Random;
  if (v == "app-weighted") return PolicyKind::AppWeighted;
  if (v == "virtual") return PolicyKind::Virtual;
  badValue("policy", v, "unknown policy");
}

AlohaMode parseMode(std::string_view v) {
  if (v == "conventional") return AlohaMode::Conventional;
  if (v == "modified") return AlohaMode::Modified;
  badValue("mode", v, "unknown mode");
}

AlohaSettings& alohaSettings(ExperimentConfig& cfg) {
  if (!cfg.aloha) cfg.aloha.emplace();
  return *cfg.aloha;
}

std::string formatDouble(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

std::string nowStamp() {
  const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  char buf[32];
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

LinearApplication buildApplication(std::string_view spec, const SensorField& field) {
  const auto parts = split(spec, ':');
  const std::size_t n = field.size();
  if (parts[0] == "mean" && parts.size() == 1) return meanApplication(n);
  if (parts[0] == "sensor" && parts.size() == 2) {
    const auto idx = toUnsigned("apps", parts[1]);
    if (idx >= n) badValue("apps", spec, "sensor index out of range");
    LinearApplication app{std::vector<double>(n, 0.0), std::string(spec)};
    app.weights[idx] = 1.0;
    return app;
  }
  if (parts[0] == "region" && parts.size() == 3) {
    const double lo = toDouble("apps", parts[1]);
    const double hi = toDouble("apps", parts[2]);
    LinearApplication app{std::vector<double>(n, 0.0), std::string(spec)};
    std::size_t inside = 0;
    for (std::size_t l = 0; l < n; ++l) {
      if (field.locations[l][0] >= lo && field.locations[l][0] <= hi) {
        app.weights[l] = 1.0;
        ++inside;
      }
    }
    if (inside == 0) badValue("apps", spec, "region contains no sensors");
    for (double& w : app.weights) w /= static_cast<double>(inside);
    return app;
  }
  badValue("apps", spec, "expected mean, sensor:<i> or region:<lo>:<hi>");
}

SelectionPolicy makePolicy(PolicyKind kind, const ExperimentConfig& cfg,
                           const SensorField& field) {
  switch (kind) {
    case PolicyKind::MaxVariance:
      return maxVariancePolicy();
    case PolicyKind::Random:
      return randomPolicy();
    case PolicyKind::Virtual:
      return virtualTargetPolicy(cfg.virtualLocs);
    case PolicyKind::AppWeighted: {
      std::vector<LinearApplication> apps;
      for (const auto& a : cfg.apps) apps.push_back(buildApplication(a, field));
      return appWeightedPolicy(std::move(apps), cfg.betas);
    }
  }
  fail(ErrorCode::InvalidArgument, "unknown policy");
}

void runDasSeed(const ExperimentConfig& cfg, std::uint64_t seed,
                const std::optional<SensorField>& sharedField, std::vector<Record>& out) {
  const StreamSeeder seeder(seed);
  SensorField field;
  if (sharedField) {
    field = *sharedField;
  } else {
    Rng fieldRng = seeder.stream(0, Stream::Field);
    field = cfg.experiment == ExperimentKind::Das2D ? gen2D(cfg.sensors, cfg.noiseVariance, fieldRng)
                                                    : gen1D(cfg.sensors, cfg.noiseVariance, fieldRng);
  }
  if (cfg.rounds > field.size()) {
    fail(ErrorCode::InvalidArgument, "rounds (" + std::to_string(cfg.rounds) +
                                         ") exceeds sensor count (" +
                                         std::to_string(field.size()) + ")");
  }

  for (PolicyKind kind : cfg.policies) {
    Rng rng = seeder.stream(0, Stream::Selection);
    const bool heldOut = cfg.experiment == ExperimentKind::DasCsv;
    const auto log = runDas(field, makePolicy(kind, cfg, field), cfg.rounds, cfg.kernel, rng,
                            {.logEstimates = heldOut});
    const std::string name = toString(kind);
    std::vector<bool> uploaded(field.size(), false);
    std::optional<GpConditioner> atVirtual;
    if (!cfg.virtualLocs.empty()) atVirtual.emplace(cfg.kernel, field.noiseVariance);
    for (const auto& rec : log) {
      out.push_back({seed, rec.round, "mse/" + name, rec.mse, std::to_string(rec.selected)});
      if (heldOut) {
        // Real data has no ground truth: score predictions against the
        // measurements of sensors that have not uploaded yet.
        uploaded[rec.selected] = true;
        double sse = 0.0;
        for (std::size_t l = 0; l < field.size(); ++l) {
          if (uploaded[l]) continue;
          const double e = rec.estimate->values[l] - field.measurements[l];
          sse += e * e;
        }
        out.push_back({seed, rec.round, "heldout_sse/" + name, sse, {}});
      }
      if (atVirtual) {
        atVirtual->observe(field.locations[rec.selected], field.measurements[rec.selected]);
        double trace = 0.0;
        for (const auto& v : cfg.virtualLocs) trace += atVirtual->predict(v).variance;
        out.push_back({seed, rec.round, "virtual_mse/" + name, trace, {}});
      }
    }
  }
}

void runAlohaSeed(const ExperimentConfig& cfg, std::uint64_t seed, std::vector<Record>& out) {
  const StreamSeeder seeder(seed);
  Rng fieldRng = seeder.stream(0, Stream::Field);
  const SensorField field =
      genRandomSinusoid(cfg.sensors, cfg.sinusoidTerms, cfg.noiseVariance, fieldRng);
  const auto& settings = *cfg.aloha;
  for (std::size_t b : settings.channels) {
    for (std::size_t q : settings.candidates) {
      const std::string suffix = "/B" + std::to_string(b) + "/Q" + std::to_string(q);
      const double bound = sseLowerBound(cfg.noiseVariance, q, b).value;
      for (std::size_t t = 1; t <= cfg.rounds; ++t) {
        out.push_back({seed, t, "sse_bound" + suffix, bound, {}});
      }
      for (AlohaMode mode : settings.modes) {
        const AlohaConfig ac{b, q, settings.pSleep, settings.mu, settings.psi0, mode};
        const auto run = runAloha(field, ac, cfg.rounds, randomCandidates(), cfg.kernel, seeder);
        const std::string tag = toString(mode) + suffix;
        for (const auto& r : run.rounds) {
          out.push_back({seed, r.round, "sse/" + tag, r.sse,
                         "successes=" + std::to_string(r.successes.size())});
          out.push_back({seed, r.round, "active/" + tag,
                         static_cast<double>(r.activeCount), {}});
          if (mode == AlohaMode::Modified) {
            out.push_back({seed, r.round, "psi/" + tag, r.psi, {}});
          }
        }
      }
    }
  }
}

}  // namespace

std::string toString(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::Das1D: return "das-1d";
    case ExperimentKind::Das2D: return "das-2d";
    case ExperimentKind::DasCsv: return "das-csv";
    case ExperimentKind::DasVirtual: return "das-virtual";
    case ExperimentKind::Aloha: return "aloha";
  }
  return "?";
}

std::string toString(PolicyKind policy) {
  switch (policy) {
    case PolicyKind::MaxVariance: return "max-variance";
    case PolicyKind::Random: return "random";
    case PolicyKind::AppWeighted: return "app-weighted";
    case PolicyKind::Virtual: return "virtual";
  }
  return "?";
}

std::string toString(AlohaMode mode) {
  return mode == AlohaMode::Conventional ? "conventional" : "modified";
}

std::vector<std::uint64_t> parseSeeds(std::string_view spec) {
  std::vector<std::uint64_t> seeds;
  for (auto part : split(spec, ',')) {
    const auto dots = part.find("..");
    if (dots == std::string_view::npos) {
      seeds.push_back(toUnsigned("seeds", part));
      continue;
    }
    const auto lo = toUnsigned("seeds", part.substr(0, dots));
    const auto hi = toUnsigned("seeds", part.substr(dots + 2));
    if (hi < lo) badValue("seeds", part, "empty range");
    if (hi - lo > 10'000'000) badValue("seeds", part, "range too large");
    for (auto s = lo; s <= hi; ++s) seeds.push_back(s);
  }
  std::sort(seeds.begin(), seeds.end());
  seeds.erase(std::unique(seeds.begin(), seeds.end()), seeds.end());
  return seeds;
}

void setConfigValue(ExperimentConfig& cfg, std::string_view key, std::string_view value) {
  key = trim(key);
  value = trim(value);
  if (key == "experiment") {
    cfg.experiment = parseKind(value);
    if (cfg.experiment == ExperimentKind::Aloha) alohaSettings(cfg);
  } else if (key == "policy") {
    cfg.policies.clear();
    for (auto p : split(value, ',')) cfg.policies.push_back(parsePolicy(p));
  } else if (key == "rounds") {
    cfg.rounds = static_cast<std::size_t>(toUnsigned(key, value));
  } else if (key == "seeds" || key == "seed") {
    cfg.seeds = parseSeeds(value);
  } else if (key == "L") {
    cfg.sensors = static_cast<std::size_t>(toUnsigned(key, value));
  } else if (key == "noise_variance") {
    cfg.noiseVariance = toDouble(key, value);
  } else if (key == "length_scale") {
    cfg.kernel.lengthScale = toDouble(key, value);
  } else if (key == "signal_variance") {
    cfg.kernel.signalVariance = toDouble(key, value);
  } else if (key == "terms") {
    cfg.sinusoidTerms = static_cast<std::size_t>(toUnsigned(key, value));
  } else if (key == "csv_path") {
    cfg.csvPath = std::string(value);
  } else if (key == "virtual") {
    cfg.virtualLocs.clear();
    if (!value.empty()) {
      for (auto point : split(value, ';')) {
        std::vector<double> coords;
        for (auto c : split(point, ',')) coords.push_back(toDouble(key, c));
        cfg.virtualLocs.emplace_back(std::move(coords));
      }
    }
  } else if (key == "apps") {
    cfg.apps.clear();
    for (auto a : split(value, ',')) cfg.apps.emplace_back(a);
  } else if (key == "betas") {
    cfg.betas.clear();
    for (auto b : split(value, ',')) cfg.betas.push_back(toDouble(key, b));
  } else if (key == "B") {
    alohaSettings(cfg).channels = toSizeList(key, value);
  } else if (key == "Q") {
    alohaSettings(cfg).candidates = toSizeList(key, value);
  } else if (key == "p_sleep") {
    alohaSettings(cfg).pSleep = toDouble(key, value);
  } else if (key == "mu") {
    alohaSettings(cfg).mu = toDouble(key, value);
  } else if (key == "psi0") {
    alohaSettings(cfg).psi0 = toDouble(key, value);
  } else if (key == "mode") {
    auto& s = alohaSettings(cfg);
    s.modes.clear();
    for (auto m : split(value, ',')) s.modes.push_back(parseMode(m));
  } else if (key == "out") {
    cfg.out = std::string(value);
  } else if (key == "format") {
    if (value == "csv") {
      cfg.format = OutputFormat::Csv;
    } else if (value == "json") {
      cfg.format = OutputFormat::Json;
    } else {
      badValue(key, value, "expected csv or json");
    }
  } else if (key == "threads") {
    cfg.threads = static_cast<unsigned>(toUnsigned(key, value));
  } else if (key == "timestamp") {
    if (value != "true" && value != "false") badValue(key, value, "expected true or false");
    cfg.timestamp = value == "true";
  } else {
    fail(ErrorCode::InvalidArgument, "unknown config key '" + std::string(key) + "'");
  }
}

void applyConfigText(ExperimentConfig& cfg, std::string_view text) {
  std::size_t lineNo = 0;
  for (auto line : split(text, '\n')) {
    ++lineNo;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) {
      line = trim(line.substr(0, hash));
    }
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      fail(ErrorCode::Parse, "config line " + std::to_string(lineNo) + ": expected key = value");
    }
    try {
      setConfigValue(cfg, line.substr(0, eq), line.substr(eq + 1));
    } catch (const Error& e) {
      fail(e.code(), "config line " + std::to_string(lineNo) + ": " + e.what());
    }
  }
}

ExperimentConfig loadConfigFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::Io, "cannot open config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  ExperimentConfig cfg;
  applyConfigText(cfg, ss.str());
  return cfg;
}

std::vector<std::string> presetNames() {
  return {"fig2", "fig3", "fig4", "fig6", "fig7", "fig8"};
}

std::string presetText(std::string_view name) {
  if (name == "fig2") {
    return "experiment = das-1d\nL = 100\nnoise_variance = 0.01\n"
           "policy = max-variance,random\nrounds = 100\nseeds = 1\n";
  }
  if (name == "fig3") {
    return "experiment = das-2d\nL = 100\nnoise_variance = 0.1\n"
           "policy = max-variance,random\nrounds = 100\nseeds = 1\n";
  }
  if (name == "fig4") {
    return "experiment = das-1d\nL = 30\nnoise_variance = 0.1\n"
           "policy = max-variance,random\nrounds = 30\nseeds = 1..1000\n";
  }
  const std::string aloha =
      "experiment = aloha\nL = 200\nnoise_variance = 0.1\nterms = 10\nmu = 0.5\npsi0 = 0\n"
      "mode = conventional,modified\nrounds = 40\nseeds = 1..1000\n";
  if (name == "fig6") return aloha + "B = 3\nQ = 10\n";
  if (name == "fig7") return aloha + "B = 1,2,3,4,5\nQ = 10\n";
  if (name == "fig8") return aloha + "B = 4\nQ = 4,6,8,10,12\n";
  fail(ErrorCode::InvalidArgument, "unknown preset '" + std::string(name) + "'");
}

ExperimentConfig presetConfig(std::string_view name) {
  ExperimentConfig cfg;
  applyConfigText(cfg, presetText(name));
  return cfg;
}

void ExperimentConfig::validate() const {
  auto bad = [](const std::string& why) { fail(ErrorCode::InvalidArgument, why); };
  if (rounds == 0) bad("rounds must be >= 1");
  if (seeds.empty()) bad("at least one seed is required");
  kernel.validate();
  if (!(noiseVariance > 0.0)) bad("noise_variance must be positive");
  const bool isAloha = experiment == ExperimentKind::Aloha;
  if (aloha.has_value() != isAloha) {
    bad(isAloha ? "aloha experiment without aloha settings"
                : "aloha settings (B, Q, p_sleep, mu, psi0, mode) given for a DAS experiment");
  }
  if (experiment != ExperimentKind::DasCsv && sensors == 0) bad("L must be >= 1");
  if (!isAloha && experiment != ExperimentKind::DasCsv && rounds > sensors) {
    bad("rounds must not exceed L");
  }
  if (experiment == ExperimentKind::DasCsv && csvPath.empty()) bad("das-csv needs csv_path");
  if (isAloha) {
    if (aloha->channels.empty() || aloha->candidates.empty() || aloha->modes.empty()) {
      bad("B, Q and mode lists must be non-empty");
    }
    for (std::size_t b : aloha->channels) {
      for (std::size_t q : aloha->candidates) {
        AlohaConfig{b, q, aloha->pSleep, aloha->mu, aloha->psi0, AlohaMode::Conventional}
            .validate();
      }
    }
    if (sinusoidTerms == 0) bad("terms must be >= 1");
    return;
  }
  if (policies.empty()) bad("at least one policy is required");
  const bool wantsVirtual =
      std::find(policies.begin(), policies.end(), PolicyKind::Virtual) != policies.end();
  if ((wantsVirtual || experiment == ExperimentKind::DasVirtual) && virtualLocs.empty()) {
    bad("virtual locations are required for das-virtual and the virtual policy");
  }
  const std::size_t dim = experiment == ExperimentKind::Das2D ? 2 : 1;
  if (experiment != ExperimentKind::DasCsv) {
    for (const auto& v : virtualLocs) {
      if (v.dim() != dim) bad("virtual location dimension does not match the field");
    }
  }
  if (apps.size() != betas.size()) bad("apps and betas must have the same length");
  for (double b : betas) {
    if (!(b > 0.0)) bad("betas must be positive");
  }
}

std::vector<Aggregate> aggregate(const std::vector<Record>& records) {
  std::vector<std::string> order;
  std::map<std::string, std::map<std::size_t, std::vector<double>>> groups;
  for (const auto& r : records) {
    auto [it, fresh] = groups.try_emplace(r.metric);
    if (fresh) order.push_back(r.metric);
    it->second[r.round].push_back(r.value);
  }
  std::vector<Aggregate> out;
  for (const auto& metric : order) {
    for (const auto& [round, values] : groups[metric]) {
      const double n = static_cast<double>(values.size());
      double mean = 0.0;
      for (double v : values) mean += v;
      mean /= n;
      double ss = 0.0;
      for (double v : values) ss += (v - mean) * (v - mean);
      out.push_back({round, metric, mean, std::sqrt(ss / n), values.size()});
    }
  }
  return out;
}

RunResult runExperiment(const ExperimentConfig& cfg) {
  cfg.validate();
  std::optional<SensorField> shared;
  if (cfg.experiment == ExperimentKind::DasCsv) {
    shared = loadCsv(cfg.csvPath, cfg.noiseVariance).field;
    shared->validate();
    if (cfg.rounds > shared->size()) fail(ErrorCode::InvalidArgument, "rounds exceed sensor count");
    const std::size_t dim = shared->locations.front().dim();
    for (const auto& v : cfg.virtualLocs) {
      if (v.dim() != dim) fail(ErrorCode::InvalidArgument, "virtual location dimension mismatch");
    }
  }

  const std::size_t n = cfg.seeds.size();
  std::vector<std::vector<Record>> perSeed(n);
  std::vector<std::optional<std::string>> errors(n);
  auto work = [&](std::size_t i) {
    try {
      if (cfg.experiment == ExperimentKind::Aloha) {
        runAlohaSeed(cfg, cfg.seeds[i], perSeed[i]);
      } else {
        runDasSeed(cfg, cfg.seeds[i], shared, perSeed[i]);
      }
      std::stable_sort(perSeed[i].begin(), perSeed[i].end(),
                       [](const Record& a, const Record& b) { return a.round < b.round; });
    } catch (const std::exception& e) {
      perSeed[i].clear();
      errors[i] = e.what();
    }
  };

  const unsigned workers = std::max(1u, std::min<unsigned>(cfg.threads, static_cast<unsigned>(n)));
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) work(i);
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        for (std::size_t i = w; i < n; i += workers) work(i);
      });
    }
  }

  RunResult result;
  for (std::size_t i = 0; i < n; ++i) {
    if (errors[i]) {
      result.failures.push_back({cfg.seeds[i], *errors[i]});
      continue;
    }
    result.records.insert(result.records.end(), std::make_move_iterator(perSeed[i].begin()),
                          std::make_move_iterator(perSeed[i].end()));
  }
  result.aggregates = aggregate(result.records);
  return result;
}

std::string formatRecordsCsv(const std::vector<Record>& records, bool timestamp) {
  std::string out;
  if (timestamp) out += "# generated_at=" + nowStamp() + "\n";
  out += "seed,round,metric,value,extra\n";
  for (const auto& r : records) {
    out += std::to_string(r.seed);
    out += ',';
    out += std::to_string(r.round);
    out += ',';
    out += r.metric;
    out += ',';
    out += formatDouble(r.value);
    out += ',';
    out += r.extra;
    out += '\n';
  }
  return out;
}

std::vector<Record> parseRecordsCsv(std::string_view text) {
  std::vector<Record> records;
  bool header = true;
  std::size_t lineNo = 0;
  for (auto line : split(text, '\n')) {
    ++lineNo;
    if (line.empty() || line.front() == '#') continue;
    if (header) {
      header = false;
      continue;
    }
    const auto cells = split(line, ',');
    if (cells.size() != 5) {
      fail(ErrorCode::Parse, "results line " + std::to_string(lineNo) + ": expected 5 columns");
    }
    records.push_back({toUnsigned("seed", cells[0]),
                       static_cast<std::size_t>(toUnsigned("round", cells[1])),
                       std::string(cells[2]), toDouble("value", cells[3]), std::string(cells[4])});
  }
  return records;
}

void emitResults(const RunResult& result, OutputFormat format, const std::filesystem::path& path,
                 bool timestamp) {
  std::filesystem::path aggPath = path;
  aggPath += ".agg";
  std::string body;
  std::string aggBody;
  if (format == OutputFormat::Csv) {
    body = formatRecordsCsv(result.records, timestamp);
    aggBody = "round,metric,mean,std,count\n";
    for (const auto& a : result.aggregates) {
      aggBody += std::to_string(a.round) + ',' + a.metric + ',' + formatDouble(a.mean) + ',' +
                 formatDouble(a.stddev) + ',' + std::to_string(a.count) + '\n';
    }
  } else {
    nlohmann::ordered_json doc;
    if (timestamp) doc["generated_at"] = nowStamp();
    auto& recs = doc["records"] = nlohmann::ordered_json::array();
    for (const auto& r : result.records) {
      recs.push_back({{"seed", r.seed},
                      {"round", r.round},
                      {"metric", r.metric},
                      {"value", r.value},
                      {"extra", r.extra}});
    }
    auto& fails = doc["failures"] = nlohmann::ordered_json::array();
    for (const auto& f : result.failures) {
      fails.push_back({{"seed", f.seed}, {"message", f.message}});
    }
    body = doc.dump(1) + "\n";
    nlohmann::ordered_json agg = nlohmann::ordered_json::array();
    for (const auto& a : result.aggregates) {
      agg.push_back({{"round", a.round},
                     {"metric", a.metric},
                     {"mean", a.mean},
                     {"std", a.stddev},
                     {"count", a.count}});
    }
    aggBody = agg.dump(1) + "\n";
  }

  for (const auto& [p, text] : {std::pair{path, &body}, std::pair{aggPath, &aggBody}}) {
    std::ofstream f(p, std::ios::binary | std::ios::trunc);
    if (!f) fail(ErrorCode::Io, "cannot write " + p.string());
    f << *text;
    if (!f) fail(ErrorCode::Io, "write failed for " + p.string());
  }
}

}  // namespace dasgp
