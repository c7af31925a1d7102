#include "dasgp/das.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "dasgp/error.hpp"

namespace dasgp {

namespace {

void requireRemaining(const DasState& state) {
  if (state.remaining().empty()) {
    fail(ErrorCode::EmptySelection, "no remaining sensors to select from");
  }
}

void requireConsistent(const SensorField& field, const DasState& state) {
  if (state.sensorCount() != field.size()) {
    fail(ErrorCode::DimensionMismatch, "state and field disagree on sensor count");
  }
}

FieldEstimate estimateFromTracker(const SensorField& field, const DasState& state,
                                  const MarginalTracker& tracker) {
  FieldEstimate est;
  est.values = tracker.means();
  est.perSensorVariance = tracker.variances();
  for (std::size_t l : state.uploaded()) {
    est.values[l] = field.measurements[l];
    est.perSensorVariance[l] = 0.0;
  }
  for (std::size_t l : state.remaining()) est.mse += est.perSensorVariance[l];
  return est;
}

}  // namespace

void SensorField::validate() const {
  if (locations.empty()) fail(ErrorCode::InvalidArgument, "sensor field is empty");
  if (trueMeans.size() != locations.size() || measurements.size() != locations.size()) {
    fail(ErrorCode::DimensionMismatch, "sensor field vectors differ in length");
  }
  if (!std::isfinite(noiseVariance) || noiseVariance <= 0.0) {
    fail(ErrorCode::InvalidArgument, "noise variance must be positive");
  }
  const std::size_t d = locations.front().dim();
  for (std::size_t l = 0; l < locations.size(); ++l) {
    if (locations[l].dim() != d) fail(ErrorCode::DimensionMismatch, "mixed location dimensions");
    for (double c : locations[l].coords) {
      if (!std::isfinite(c)) fail(ErrorCode::NonFinite, "non-finite sensor location");
    }
    if (!std::isfinite(trueMeans[l]) || !std::isfinite(measurements[l])) {
      fail(ErrorCode::NonFinite, "non-finite value at sensor " + std::to_string(l));
    }
  }
}

DasState::DasState(std::size_t sensorCount) : isUploaded_(sensorCount, false) {
  remaining_.resize(sensorCount);
  for (std::size_t l = 0; l < sensorCount; ++l) remaining_[l] = l;
}

bool DasState::isRemaining(std::size_t sensor) const {
  return sensor < isUploaded_.size() && !isUploaded_[sensor];
}

void DasState::upload(std::size_t sensor, double value) {
  if (!isRemaining(sensor)) {
    fail(ErrorCode::InvalidArgument,
         "sensor " + std::to_string(sensor) + " is not in the remaining set");
  }
  isUploaded_[sensor] = true;
  remaining_.erase(std::lower_bound(remaining_.begin(), remaining_.end(), sensor));
  uploaded_.push_back(sensor);
  values_.push_back(value);
}

std::vector<Location> DasState::uploadedLocations(const SensorField& field) const {
  std::vector<Location> out;
  out.reserve(uploaded_.size());
  for (std::size_t l : uploaded_) out.push_back(field.locations[l]);
  return out;
}

std::vector<Location> DasState::remainingLocations(const SensorField& field) const {
  std::vector<Location> out;
  out.reserve(remaining_.size());
  for (std::size_t l : remaining_) out.push_back(field.locations[l]);
  return out;
}

FieldEstimate estimate(const SensorField& field, const DasState& state,
                       const KernelParams& params) {
  requireConsistent(field, state);
  FieldEstimate est;
  est.values = field.measurements;
  est.perSensorVariance.assign(field.size(), 0.0);
  if (state.remaining().empty()) return est;

  const auto post = posterior(state.uploadedLocations(field), state.uploadedValues(),
                              state.remainingLocations(field), params, field.noiseVariance);
  const auto& rem = state.remaining();
  for (std::size_t i = 0; i < rem.size(); ++i) {
    const auto idx = static_cast<Eigen::Index>(i);
    est.values[rem[i]] = post.mean(idx);
    est.perSensorVariance[rem[i]] = post.covariance(idx, idx);
    est.mse += post.covariance(idx, idx);
  }
  return est;
}

double quantizeScore(double v) { return std::round(v * 1e12); }

std::size_t selectMaxVariance(const DasState& state, std::span<const double> variances) {
  requireRemaining(state);
  if (variances.size() != state.sensorCount()) {
    fail(ErrorCode::DimensionMismatch, "variance vector does not match sensor count");
  }
  std::size_t best = state.remaining().front();
  double bestScore = quantizeScore(variances[best]);
  for (std::size_t l : state.remaining()) {
    const double s = quantizeScore(variances[l]);
    if (s > bestScore) {
      best = l;
      bestScore = s;
    }
  }
  return best;
}

std::size_t selectMaxVariance(const SensorField& field, const DasState& state,
                              const KernelParams& params) {
  requireRemaining(state);
  return selectMaxVariance(state, estimate(field, state, params).perSensorVariance);
}

std::size_t selectRandom(const DasState& state, Rng& rng) {
  requireRemaining(state);
  std::uniform_int_distribution<std::size_t> pick(0, state.remaining().size() - 1);
  return state.remaining()[pick(rng)];
}

std::size_t selectVirtualTarget(const SensorField& field, const DasState& state,
                                std::span<const Location> virtualLocs,
                                const KernelParams& params) {
  requireConsistent(field, state);
  requireRemaining(state);
  if (virtualLocs.empty()) fail(ErrorCode::InvalidArgument, "no virtual locations given");

  const auto& rem = state.remaining();
  std::vector<Location> joint = state.remainingLocations(field);
  joint.insert(joint.end(), virtualLocs.begin(), virtualLocs.end());
  const auto post = posterior(state.uploadedLocations(field), state.uploadedValues(), joint,
                              params, field.noiseVariance);
  const auto r = static_cast<Eigen::Index>(rem.size());
  const auto v = static_cast<Eigen::Index>(virtualLocs.size());
  const double traceNow = post.covariance.bottomRightCorner(v, v).trace();

  // Conditioning on a noisy upload at candidate i removes
  // sum_j C(i,j)^2 / (C(i,i) + noise) from the virtual-target trace.
  std::size_t best = rem.front();
  double bestScore = 0.0;
  for (Eigen::Index i = 0; i < r; ++i) {
    const double denom = post.covariance(i, i) + field.noiseVariance;
    const double reduction = post.covariance.block(i, r, 1, v).squaredNorm() / denom;
    const double score = quantizeScore(traceNow - reduction);
    if (i == 0 || score < bestScore) {
      best = rem[static_cast<std::size_t>(i)];
      bestScore = score;
    }
  }
  return best;
}

SelectionPolicy maxVariancePolicy() {
  return [](const RoundContext& ctx) {
    return selectMaxVariance(ctx.state, ctx.tracker.variances());
  };
}

SelectionPolicy randomPolicy() {
  return [](const RoundContext& ctx) { return selectRandom(ctx.state, ctx.rng); };
}

SelectionPolicy virtualTargetPolicy(std::vector<Location> virtualLocs) {
  return [locs = std::move(virtualLocs)](const RoundContext& ctx) {
    return selectVirtualTarget(ctx.field, ctx.state, locs, ctx.params);
  };
}

std::vector<DasRoundRecord> runDas(const SensorField& field, const SelectionPolicy& policy,
                                   std::size_t rounds, const KernelParams& params, Rng& rng,
                                   DasRunOptions options) {
  field.validate();
  if (rounds == 0 || rounds > field.size()) {
    fail(ErrorCode::InvalidArgument, "rounds must be in [1, L]");
  }
  DasState state(field.size());
  MarginalTracker tracker(field.locations, params, field.noiseVariance);
  std::vector<DasRoundRecord> log;
  log.reserve(rounds);

  for (std::size_t t = 1; t <= rounds; ++t) {
    const RoundContext ctx{field, state, params, tracker, rng};
    const std::size_t pick = policy(ctx);
    state.upload(pick, field.measurements[pick]);
    state.advanceRound();
    tracker.observe(field.locations[pick], field.measurements[pick]);

    DasRoundRecord rec;
    rec.round = t;
    rec.selected = pick;
    for (std::size_t l : state.remaining()) rec.mse += tracker.variances()[l];
    if (options.logEstimates) rec.estimate = estimateFromTracker(field, state, tracker);
    log.push_back(std::move(rec));
  }
  return log;
}

}  // namespace dasgp
