#include "dasgp/aloha.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "dasgp/error.hpp"

namespace dasgp {

void AlohaConfig::validate() const {
  if (channels == 0) fail(ErrorCode::InvalidArgument, "number of channels B must be >= 1");
  if (candidates == 0) fail(ErrorCode::InvalidArgument, "candidates per round Q must be >= 1");
  if (!(pSleep >= 0.0 && pSleep < 1.0)) {
    fail(ErrorCode::InvalidArgument, "p_sleep must lie in [0, 1)");
  }
  if (!(mu > 0.0) || !std::isfinite(mu)) fail(ErrorCode::InvalidArgument, "mu must be positive");
  if (!std::isfinite(psi0)) fail(ErrorCode::NonFinite, "psi0 must be finite");
}

double equalUploadProbability(const AlohaConfig& cfg) {
  return std::min(1.0, static_cast<double>(cfg.channels) / static_cast<double>(cfg.candidates));
}

double expectedThroughput(double pUp, const AlohaConfig& cfg) {
  const double q = static_cast<double>(cfg.candidates);
  const double b = static_cast<double>(cfg.channels);
  return pUp * q * std::pow(1.0 - pUp / b, q - 1.0);
}

std::size_t sleepAdjustedQ(std::size_t channels, double pSleep) {
  if (!(pSleep >= 0.0 && pSleep < 1.0)) {
    fail(ErrorCode::InvalidArgument, "p_sleep must lie in [0, 1)");
  }
  const double q = std::round(static_cast<double>(channels) / (1.0 - pSleep));
  return std::max(channels, static_cast<std::size_t>(q));
}

std::vector<double> perSensorSuccessProbability(std::span<const double> p,
                                                std::size_t channels) {
  const double b = static_cast<double>(channels);
  std::vector<double> s(p.size());
  for (std::size_t q = 0; q < p.size(); ++q) {
    double prod = p[q];
    for (std::size_t t = 0; t < p.size(); ++t) {
      if (t != q) prod *= 1.0 - p[t] / b;
    }
    s[q] = prod;
  }
  return s;
}

double uploadProbabilityFromError(double errorSq, double psi) {
  if (!(errorSq > 0.0)) return 0.0;
  const double raw = std::numbers::e * (std::log(errorSq) - psi);
  return std::clamp(raw, 0.0, 1.0);
}

DualState dualAscentStep(DualState state, std::size_t active, std::size_t channels,
                         double mu) {
  state.psi += mu * (static_cast<double>(active) - static_cast<double>(channels));
  const std::size_t round = state.history.empty() ? 1 : state.history.back().round + 1;
  state.history.push_back({round, active, state.psi});
  return state;
}

SseBound sseLowerBound(double sigmaSq, std::size_t candidates, std::size_t channels) {
  const double slack =
      static_cast<double>(candidates) - static_cast<double>(channels) / std::numbers::e;
  if (slack < 0.0) return {0.0, true};
  return {sigmaSq * slack, false};
}

RoundResult simulateRound(std::span<const std::size_t> candidates,
                          std::span<const double> predictions, const SensorField& field,
                          DasState state, DualState dual, const AlohaConfig& cfg,
                          const StreamSeeder& streams) {
  cfg.validate();
  if (predictions.size() != candidates.size()) {
    fail(ErrorCode::DimensionMismatch, "one prediction per candidate required");
  }
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    if (!state.isRemaining(candidates[i])) {
      fail(ErrorCode::InvalidArgument,
           "candidate " + std::to_string(candidates[i]) + " is not in the remaining set");
    }
    if (std::find(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(i),
                  candidates[i]) != candidates.begin() + static_cast<std::ptrdiff_t>(i)) {
      fail(ErrorCode::InvalidArgument, "duplicate candidate " + std::to_string(candidates[i]));
    }
  }

  const std::size_t n = candidates.size();
  const std::size_t roundNo = state.round() + 1;
  AlohaRound r;
  r.round = roundNo;
  r.candidates.assign(candidates.begin(), candidates.end());
  r.predictions.assign(predictions.begin(), predictions.end());
  r.psi = dual.psi;
  r.errors.resize(n);
  r.probabilities.resize(n);
  r.dormant.resize(n);
  r.activity.resize(n);
  r.channelChoice.assign(n, -1);

  const double pEqual = equalUploadProbability(cfg);
  for (std::size_t i = 0; i < n; ++i) {
    r.errors[i] = r.predictions[i] - field.measurements[candidates[i]];
    r.probabilities[i] = cfg.mode == AlohaMode::Conventional
                             ? pEqual
                             : uploadProbabilityFromError(r.errors[i] * r.errors[i], dual.psi);
  }

  // Each stream draws once per candidate regardless of the outcome.
  Rng sleepRng = streams.stream(roundNo, Stream::Sleep);
  Rng activityRng = streams.stream(roundNo, Stream::Activity);
  Rng channelRng = streams.stream(roundNo, Stream::Channel);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<int> channel(0, static_cast<int>(cfg.channels) - 1);
  std::vector<int> load(cfg.channels, 0);
  for (std::size_t i = 0; i < n; ++i) {
    const double uSleep = unit(sleepRng);
    const double uActive = unit(activityRng);
    const int ch = channel(channelRng);
    r.dormant[i] = uSleep < cfg.pSleep;
    r.activity[i] = !r.dormant[i] && uActive < r.probabilities[i];
    if (r.activity[i]) {
      r.channelChoice[i] = ch;
      ++load[static_cast<std::size_t>(ch)];
      ++r.activeCount;
    }
  }

  std::vector<bool> delivered(n, false);
  for (std::size_t i = 0; i < n; ++i) {
    if (!r.activity[i]) continue;
    if (load[static_cast<std::size_t>(r.channelChoice[i])] == 1) {
      delivered[i] = true;
      r.successes.push_back(candidates[i]);
      state.upload(candidates[i], field.measurements[candidates[i]]);
    } else {
      r.collided.push_back(candidates[i]);
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!delivered[i]) r.sse += r.errors[i] * r.errors[i];
  }

  if (cfg.mode == AlohaMode::Modified) {
    dual = dualAscentStep(std::move(dual), r.activeCount, cfg.channels, cfg.mu);
    dual.history.back().round = roundNo;
  }
  state.advanceRound();
  return {std::move(r), std::move(state), std::move(dual)};
}

RoundResult simulateRound(std::span<const std::size_t> candidates, const SensorField& field,
                          DasState state, DualState dual, const AlohaConfig& cfg,
                          const KernelParams& params, const StreamSeeder& streams) {
  std::vector<double> predictions;
  if (!candidates.empty()) {
    std::vector<Location> targets;
    for (std::size_t l : candidates) {
      if (l >= field.size()) fail(ErrorCode::InvalidArgument, "candidate index out of range");
      targets.push_back(field.locations[l]);
    }
    const auto post = posterior(state.uploadedLocations(field), state.uploadedValues(),
                                targets, params, field.noiseVariance);
    predictions.assign(post.mean.data(), post.mean.data() + post.mean.size());
  }
  return simulateRound(candidates, predictions, field, std::move(state), std::move(dual), cfg,
                       streams);
}

CandidatePolicy randomCandidates() {
  return [](const SensorField&, const DasState& state, std::size_t q, Rng& rng) {
    std::vector<std::size_t> pool = state.remaining();
    const std::size_t take = std::min(q, pool.size());
    // Partial Fisher-Yates.
    for (std::size_t i = 0; i < take; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, pool.size() - 1);
      std::swap(pool[i], pool[pick(rng)]);
    }
    pool.resize(take);
    return pool;
  };
}

AlohaRun runAloha(const SensorField& field, const AlohaConfig& cfg, std::size_t rounds,
                  const CandidatePolicy& candidatePolicy, const KernelParams& params,
                  const StreamSeeder& streams) {
  field.validate();
  cfg.validate();
  if (rounds == 0) fail(ErrorCode::InvalidArgument, "rounds must be >= 1");

  AlohaRun run{{}, DasState(field.size()), DualState{cfg.psi0, {}}};
  GpConditioner predictor(params, field.noiseVariance);
  run.rounds.reserve(rounds);
  for (std::size_t t = 1; t <= rounds; ++t) {
    Rng candRng = streams.stream(t, Stream::Candidates);
    const auto candidates = candidatePolicy(field, run.state, cfg.candidates, candRng);
    std::vector<double> predictions;
    predictions.reserve(candidates.size());
    for (std::size_t l : candidates) {
      if (l >= field.size()) fail(ErrorCode::InvalidArgument, "candidate index out of range");
      predictions.push_back(predictor.predict(field.locations[l]).mean);
    }
    auto res = simulateRound(candidates, predictions, field, std::move(run.state),
                             std::move(run.dual), cfg, streams);
    for (std::size_t l : res.round.successes) {
      predictor.observe(field.locations[l], field.measurements[l]);
    }
    run.state = std::move(res.state);
    run.dual = std::move(res.dual);
    run.rounds.push_back(std::move(res.round));
  }
  return run;
}

}  // namespace dasgp
