#pragma once

// Data-aided sensing: the round loop in which the base station picks the next
// sensor to upload from what it has already received.

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "dasgp/gp.hpp"
#include "dasgp/random.hpp"

namespace dasgp {

/// Ground truth for one run: where the sensors are, the latent field at each
/// sensor, and what each sensor would report.
struct SensorField {
  std::vector<Location> locations;
  std::vector<double> trueMeans;
  std::vector<double> measurements;
  double noiseVariance = 0.0;

  std::size_t size() const noexcept { return locations.size(); }
  void validate() const;
};

/// Which sensors have uploaded (in upload order) and which have not.
class DasState {
 public:
  DasState() = default;
  explicit DasState(std::size_t sensorCount);

  const std::vector<std::size_t>& uploaded() const noexcept { return uploaded_; }
  /// Sorted ascending.
  const std::vector<std::size_t>& remaining() const noexcept { return remaining_; }
  const std::vector<double>& uploadedValues() const noexcept { return values_; }
  std::size_t round() const noexcept { return round_; }
  std::size_t sensorCount() const noexcept { return isUploaded_.size(); }

  bool isRemaining(std::size_t sensor) const;

  /// Moves `sensor` from remaining to uploaded. Does not advance the round.
  void upload(std::size_t sensor, double value);
  void advanceRound() noexcept { ++round_; }

  std::vector<Location> uploadedLocations(const SensorField& field) const;
  std::vector<Location> remainingLocations(const SensorField& field) const;

 private:
  std::vector<std::size_t> uploaded_;
  std::vector<std::size_t> remaining_;
  std::vector<double> values_;
  std::vector<bool> isUploaded_;
  std::size_t round_ = 0;
};

struct FieldEstimate {
  std::vector<double> values;
  std::vector<double> perSensorVariance;
  double mse = 0.0;
};

/// Uploaded entries carry the raw measurement, the rest the posterior mean.
/// `mse` is the summed posterior variance over the remaining sensors.
FieldEstimate estimate(const SensorField& field, const DasState& state,
                       const KernelParams& params);

/// Selection scores are compared after rounding to a 1e-12 grid so that
/// last-bit differences never flip an argmax. Ties go to the lowest index.
double quantizeScore(double v);

std::size_t selectMaxVariance(const SensorField& field, const DasState& state,
                              const KernelParams& params);

/// Same rule over precomputed per-sensor posterior variances (indexed by
/// sensor, entries for uploaded sensors are ignored).
std::size_t selectMaxVariance(const DasState& state, std::span<const double> variances);

std::size_t selectRandom(const DasState& state, Rng& rng);

/// Picks the remaining sensor whose upload would most reduce the summed
/// posterior variance at `virtualLocs`. Only covariances are involved, so the
/// candidate's value is not needed.
std::size_t selectVirtualTarget(const SensorField& field, const DasState& state,
                                std::span<const Location> virtualLocs,
                                const KernelParams& params);

struct RoundContext {
  const SensorField& field;
  const DasState& state;
  const KernelParams& params;
  /// Posterior marginals at every sensor location given the uploads so far.
  const MarginalTracker& tracker;
  Rng& rng;
};

using SelectionPolicy = std::function<std::size_t(const RoundContext&)>;

SelectionPolicy maxVariancePolicy();
SelectionPolicy randomPolicy();
SelectionPolicy virtualTargetPolicy(std::vector<Location> virtualLocs);

struct DasRoundRecord {
  std::size_t round = 0;
  double mse = 0.0;
  std::size_t selected = 0;
  std::optional<FieldEstimate> estimate;
};

struct DasRunOptions {
  bool logEstimates = false;
};

/// Runs `rounds` single-upload rounds. Record t holds the sensor chosen at
/// round t and the MSE after its upload.
std::vector<DasRoundRecord> runDas(const SensorField& field, const SelectionPolicy& policy,
                                   std::size_t rounds, const KernelParams& params, Rng& rng,
                                   DasRunOptions options = {});

}  // namespace dasgp
