#pragma once

// Multichannel slotted ALOHA uploading of DAS candidates, with and without
// prediction feedback.
//
// In conventional mode every candidate transmits with probability min(1, B/Q).
// In modified mode the base station broadcasts its prediction m_q and the dual
// variable psi; each candidate computes its own error e_q = m_q - y_q and
// transmits with p_q = [e (ln e_q^2 - psi)]_0^1. The base station then moves
// psi by mu (K - B), K being the number of active transmitters it observed.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "dasgp/das.hpp"
#include "dasgp/random.hpp"

namespace dasgp {

enum class AlohaMode { Conventional, Modified };

struct AlohaConfig {
  std::size_t channels = 3;    // B
  std::size_t candidates = 10; // Q
  double pSleep = 0.0;
  double mu = 0.5;
  double psi0 = 0.0;
  AlohaMode mode = AlohaMode::Conventional;

  void validate() const;
};

struct DualState {
  struct Entry {
    std::size_t round = 0;
    std::size_t active = 0;
    double psi = 0.0;  // value after the update
  };

  double psi = 0.0;
  std::vector<Entry> history;
};

struct AlohaRound {
  std::size_t round = 0;
  std::vector<std::size_t> candidates;
  std::vector<double> predictions;
  std::vector<double> errors;
  std::vector<double> probabilities;
  std::vector<bool> dormant;
  std::vector<bool> activity;
  /// Channel picked by each candidate; -1 when it did not transmit.
  std::vector<int> channelChoice;
  std::vector<std::size_t> successes;
  std::vector<std::size_t> collided;
  std::size_t activeCount = 0;
  double psi = 0.0;  // value broadcast for this round
  double sse = 0.0;
};

double equalUploadProbability(const AlohaConfig& cfg);

/// Mean number of collision-free uploads when Q candidates each transmit
/// with probability pUp over B channels.
double expectedThroughput(double pUp, const AlohaConfig& cfg);

/// Candidate count that keeps the expected number of awake sensors at B.
std::size_t sleepAdjustedQ(std::size_t channels, double pSleep);

/// s_q = p_q * prod_{t != q} (1 - p_t / B).
std::vector<double> perSensorSuccessProbability(std::span<const double> p,
                                                std::size_t channels);

double uploadProbabilityFromError(double errorSq, double psi);

DualState dualAscentStep(DualState state, std::size_t active, std::size_t channels,
                         double mu);

struct SseBound {
  double value = 0.0;
  bool clamped = false;  // B/e exceeded Q
};

/// sigma^2 (Q - B/e): the SSE left when predictions are exact and only
/// collisions lose data.
SseBound sseLowerBound(double sigmaSq, std::size_t candidates, std::size_t channels);

struct RoundResult {
  AlohaRound round;
  DasState state;
  DualState dual;
};

/// Plays one round for the given candidates. Predictions are computed from
/// scratch from the uploads recorded in `state`.
RoundResult simulateRound(std::span<const std::size_t> candidates, const SensorField& field,
                          DasState state, DualState dual, const AlohaConfig& cfg,
                          const KernelParams& params, const StreamSeeder& streams);

/// Same as above with predictions supplied by the caller (one per candidate).
RoundResult simulateRound(std::span<const std::size_t> candidates,
                          std::span<const double> predictions, const SensorField& field,
                          DasState state, DualState dual, const AlohaConfig& cfg,
                          const StreamSeeder& streams);

using CandidatePolicy = std::function<std::vector<std::size_t>(
    const SensorField&, const DasState&, std::size_t q, Rng&)>;

/// Uniform random q-subset of the remaining sensors (all of them if fewer).
CandidatePolicy randomCandidates();

struct AlohaRun {
  std::vector<AlohaRound> rounds;
  DasState state;
  DualState dual;
};

AlohaRun runAloha(const SensorField& field, const AlohaConfig& cfg, std::size_t rounds,
                  const CandidatePolicy& candidatePolicy, const KernelParams& params,
                  const StreamSeeder& streams);

}  // namespace dasgp
