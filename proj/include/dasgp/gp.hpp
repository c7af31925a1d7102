#pragma once

// Gaussian process regression with a squared-exponential kernel.
//
// Two evaluation paths are provided: `posterior` recomputes everything from
// the observation set (the reference path), while `GpConditioner` and
// `MarginalTracker` extend a Cholesky factor one observation at a time for
// the round-by-round loops.

#include <cstddef>
#include <initializer_list>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace dasgp {

/// A point in a 1- or 2-dimensional field.
struct Location {
  std::vector<double> coords;

  Location() = default;
  Location(std::initializer_list<double> c) : coords(c) {}
  explicit Location(std::vector<double> c) : coords(std::move(c)) {}

  std::size_t dim() const noexcept { return coords.size(); }
  double operator[](std::size_t i) const { return coords[i]; }

  bool operator==(const Location&) const = default;
};

double squaredDistance(const Location& a, const Location& b);

struct KernelParams {
  double lengthScale = 1.0;
  double signalVariance = 1.0;

  void validate() const;
};

/// signalVariance * exp(-|a-b|^2 / (2 lengthScale^2)).
double kernel(const Location& a, const Location& b, const KernelParams& params);

Eigen::MatrixXd gram(std::span<const Location> rows,
                     std::span<const Location> cols,
                     const KernelParams& params);

struct GprPosterior {
  Eigen::VectorXd mean;
  Eigen::MatrixXd covariance;
  std::vector<Location> targetLocations;
};

/// Posterior of the latent field at `targets` given noisy observations.
/// With no observations this is the zero-mean prior.
GprPosterior posterior(std::span<const Location> observedLocs,
                       std::span<const double> observedValues,
                       std::span<const Location> targets,
                       const KernelParams& params, double noiseVariance);

struct PointPrediction {
  double mean = 0.0;
  double variance = 0.0;
};

PointPrediction pointwiseConditional(std::span<const Location> observedLocs,
                                     std::span<const double> observedValues,
                                     const Location& target,
                                     const KernelParams& params,
                                     double noiseVariance);

/// Applies the variance clamp: values in [-1e-10, 0) become 0, anything
/// more negative throws.
double clampVariance(double v);

/// Cholesky factor of K(X0,X0) + noise*I that grows one row per observation.
class GpConditioner {
 public:
  GpConditioner(KernelParams params, double noiseVariance);

  void observe(const Location& loc, double value);

  /// Forward-solves L c = k(X0, x), the building block of every prediction.
  std::vector<double> solveLower(const Location& x) const;

  PointPrediction predict(const Location& x) const;

  std::size_t size() const noexcept { return locs_.size(); }
  const std::vector<Location>& locations() const noexcept { return locs_; }
  const KernelParams& params() const noexcept { return params_; }
  double noiseVariance() const noexcept { return noise_; }

  /// Appends a row given the already-solved c = L^{-1} k(X0, x); returns the
  /// new pivot. Used by MarginalTracker to avoid solving twice.
  double appendRow(const Location& loc, double value, std::vector<double> c);

  double whitenedValue(std::size_t i) const { return z_[i]; }

 private:
  KernelParams params_;
  double noise_;
  std::vector<Location> locs_;
  std::vector<std::vector<double>> rows_;  // lower-triangular rows of L
  std::vector<double> z_;                  // L^{-1} y
};

/// Posterior marginals over a fixed target set, updated in O(n M) per
/// observation instead of refactorizing.
class MarginalTracker {
 public:
  MarginalTracker(std::vector<Location> targets, KernelParams params,
                  double noiseVariance);

  void observe(const Location& loc, double value);

  /// Posterior covariance between a hypothetical location and every target.
  std::vector<double> crossCovariance(const Location& x) const;

  const std::vector<double>& means() const noexcept { return mean_; }
  const std::vector<double>& variances() const noexcept { return var_; }
  const std::vector<Location>& targets() const noexcept { return targets_; }
  const GpConditioner& conditioner() const noexcept { return cond_; }

 private:
  std::vector<Location> targets_;
  GpConditioner cond_;
  std::vector<std::vector<double>> whitenedCross_;  // rows of L^{-1} K(X0, T)
  std::vector<double> mean_;
  std::vector<double> var_;
};

}  // namespace dasgp
