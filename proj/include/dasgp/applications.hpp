#pragma once

// Application-driven sensor selection. A linear application consumes
// w^T Yhat; its error is the quadratic form of w with the estimate covariance.

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dasgp/das.hpp"

namespace dasgp {

struct LinearApplication {
  std::vector<double> weights;
  std::string label;
};

/// Covariance of the full-field estimate: zero rows/cols for uploaded
/// sensors, posterior covariance on the remaining block.
struct EstimateCovariance {
  Eigen::MatrixXd matrix;
};

EstimateCovariance estimateCovariance(const SensorField& field, const DasState& state,
                                      const KernelParams& params);

double applicationOutput(const LinearApplication& app, const FieldEstimate& est);

double applicationMse(const LinearApplication& app, const EstimateCovariance& cov);

/// Remaining sensor whose upload minimizes this application's next-round MSE.
std::size_t selectForApplication(const LinearApplication& app, const SensorField& field,
                                 const DasState& state, const KernelParams& params);

std::size_t selectWeightedSum(std::span<const LinearApplication> apps,
                              std::span<const double> betas, const SensorField& field,
                              const DasState& state, const KernelParams& params);

/// Sensor holding the largest estimated value, if that value is a prediction
/// rather than an uploaded measurement.
std::optional<std::size_t> selectMaxValueApp(const SensorField& field, const DasState& state,
                                             const FieldEstimate& est);

/// Deduplicates per-application picks (dropping empty ones), then tops up to
/// min(Q, |remaining|) with one max-variance pick followed by uniform random
/// remaining sensors.
std::vector<std::size_t> buildCandidateSet(std::span<const std::optional<std::size_t>> picks,
                                           std::size_t q, const SensorField& field,
                                           const DasState& state, const KernelParams& params,
                                           Rng& rng);

/// Round policy choosing by the beta-weighted sum of application MSEs.
SelectionPolicy appWeightedPolicy(std::vector<LinearApplication> apps,
                                  std::vector<double> betas);

/// Uniform 1/L weights: the field-average application.
LinearApplication meanApplication(std::size_t sensorCount);

}  // namespace dasgp
