#include "dasgp/gp.hpp"

#include <cmath>
#include <string>

#include "dasgp/error.hpp"

namespace dasgp {

namespace {

constexpr double kVarianceClampTolerance = 1e-10;
constexpr double kJitterStart = 1e-10;
constexpr double kJitterMax = 1e-6;

void requireFinite(const Location& x) {
  for (double c : x.coords) {
    if (!std::isfinite(c)) fail(ErrorCode::NonFinite, "non-finite location coordinate");
  }
}

void requireNoise(double noiseVariance) {
  if (!std::isfinite(noiseVariance) || noiseVariance <= 0.0) {
    fail(ErrorCode::InvalidArgument, "noise variance must be positive and finite");
  }
}

// Factorizes A, adding escalating jitter to the diagonal when the plain
// factorization fails.
Eigen::LLT<Eigen::MatrixXd> factorWithJitter(Eigen::MatrixXd a, double signalVariance) {
  Eigen::LLT<Eigen::MatrixXd> llt(a);
  if (llt.info() == Eigen::Success) return llt;
  double added = 0.0;
  for (double jitter = kJitterStart; jitter <= kJitterMax * 1.0000001; jitter *= 10.0) {
    const double step = jitter * signalVariance - added;
    a.diagonal().array() += step;
    added += step;
    llt.compute(a);
    if (llt.info() == Eigen::Success) return llt;
  }
  fail(ErrorCode::NumericalFailure, "Cholesky factorization failed after maximum jitter");
}

}  // namespace

double squaredDistance(const Location& a, const Location& b) {
  if (a.dim() != b.dim()) {
    fail(ErrorCode::DimensionMismatch,
         "location dimensions differ: " + std::to_string(a.dim()) + " vs " +
             std::to_string(b.dim()));
  }
  double s = 0.0;
  for (std::size_t i = 0; i < a.dim(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

void KernelParams::validate() const {
  if (!(lengthScale > 0.0) || !std::isfinite(lengthScale)) {
    fail(ErrorCode::InvalidArgument, "kernel length scale must be positive");
  }
  if (!(signalVariance > 0.0) || !std::isfinite(signalVariance)) {
    fail(ErrorCode::InvalidArgument, "kernel signal variance must be positive");
  }
}

double kernel(const Location& a, const Location& b, const KernelParams& params) {
  const double r2 = squaredDistance(a, b);
  return params.signalVariance *
         std::exp(-r2 / (2.0 * params.lengthScale * params.lengthScale));
}

Eigen::MatrixXd gram(std::span<const Location> rows, std::span<const Location> cols,
                     const KernelParams& params) {
  Eigen::MatrixXd k(static_cast<Eigen::Index>(rows.size()),
                    static_cast<Eigen::Index>(cols.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < cols.size(); ++j) {
      k(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          kernel(rows[i], cols[j], params);
    }
  }
  return k;
}

double clampVariance(double v) {
  if (v >= 0.0) return v;
  if (v >= -kVarianceClampTolerance) return 0.0;
  fail(ErrorCode::NumericalFailure,
       "posterior variance " + std::to_string(v) + " is negative beyond tolerance");
}

GprPosterior posterior(std::span<const Location> observedLocs,
                       std::span<const double> observedValues,
                       std::span<const Location> targets, const KernelParams& params,
                       double noiseVariance) {
  params.validate();
  requireNoise(noiseVariance);
  if (observedLocs.size() != observedValues.size()) {
    fail(ErrorCode::DimensionMismatch, "observed locations and values differ in length");
  }
  if (targets.empty()) fail(ErrorCode::InvalidArgument, "target location list is empty");
  for (const auto& x : observedLocs) requireFinite(x);
  for (const auto& x : targets) requireFinite(x);
  for (double y : observedValues) {
    if (!std::isfinite(y)) fail(ErrorCode::NonFinite, "non-finite observed value");
  }

  GprPosterior post;
  post.targetLocations.assign(targets.begin(), targets.end());
  const auto m = static_cast<Eigen::Index>(targets.size());
  Eigen::MatrixXd k11 = gram(targets, targets, params);

  if (observedLocs.empty()) {
    post.mean = Eigen::VectorXd::Zero(m);
    post.covariance = std::move(k11);
    return post;
  }

  const auto n = static_cast<Eigen::Index>(observedLocs.size());
  Eigen::MatrixXd k00 = gram(observedLocs, observedLocs, params);
  k00.diagonal().array() += noiseVariance;
  const auto llt = factorWithJitter(std::move(k00), params.signalVariance);

  const Eigen::MatrixXd k01 = gram(observedLocs, targets, params);
  const Eigen::Map<const Eigen::VectorXd> y(observedValues.data(), n);

  const Eigen::MatrixXd v = llt.matrixL().solve(k01);
  const Eigen::VectorXd w = llt.matrixL().solve(y);

  post.mean = v.transpose() * w;
  Eigen::MatrixXd cov = k11 - v.transpose() * v;
  post.covariance = 0.5 * (cov + cov.transpose());
  for (Eigen::Index i = 0; i < m; ++i) {
    post.covariance(i, i) = clampVariance(post.covariance(i, i));
  }
  return post;
}

PointPrediction pointwiseConditional(std::span<const Location> observedLocs,
                                     std::span<const double> observedValues,
                                     const Location& target, const KernelParams& params,
                                     double noiseVariance) {
  const auto post = posterior(observedLocs, observedValues, std::span(&target, 1), params,
                              noiseVariance);
  return {post.mean(0), post.covariance(0, 0)};
}

GpConditioner::GpConditioner(KernelParams params, double noiseVariance)
    : params_(params), noise_(noiseVariance) {
  params_.validate();
  requireNoise(noise_);
}

std::vector<double> GpConditioner::solveLower(const Location& x) const {
  const std::size_t n = locs_.size();
  std::vector<double> c(n);
  for (std::size_t i = 0; i < n; ++i) {
    double s = kernel(locs_[i], x, params_);
    const auto& row = rows_[i];
    for (std::size_t j = 0; j < i; ++j) s -= row[j] * c[j];
    c[i] = s / row[i];
  }
  return c;
}

double GpConditioner::appendRow(const Location& loc, double value, std::vector<double> c) {
  requireFinite(loc);
  if (!std::isfinite(value)) fail(ErrorCode::NonFinite, "non-finite observed value");
  double pivotSq = kernel(loc, loc, params_) + noise_;
  double cz = 0.0;
  for (std::size_t i = 0; i < c.size(); ++i) {
    pivotSq -= c[i] * c[i];
    cz += c[i] * z_[i];
  }
  if (!(pivotSq > 0.0)) {
    const double base = pivotSq;
    for (double jitter = kJitterStart; jitter <= kJitterMax * 1.0000001; jitter *= 10.0) {
      pivotSq = base + jitter * params_.signalVariance;
      if (pivotSq > 0.0) break;
    }
    if (!(pivotSq > 0.0)) {
      fail(ErrorCode::NumericalFailure, "Cholesky update failed after maximum jitter");
    }
  }
  const double pivot = std::sqrt(pivotSq);
  c.push_back(pivot);
  rows_.push_back(std::move(c));
  z_.push_back((value - cz) / pivot);
  locs_.push_back(loc);
  return pivot;
}

void GpConditioner::observe(const Location& loc, double value) {
  appendRow(loc, value, solveLower(loc));
}

PointPrediction GpConditioner::predict(const Location& x) const {
  const auto c = solveLower(x);
  double mean = 0.0;
  double reduction = 0.0;
  for (std::size_t i = 0; i < c.size(); ++i) {
    mean += c[i] * z_[i];
    reduction += c[i] * c[i];
  }
  return {mean, clampVariance(kernel(x, x, params_) - reduction)};
}

MarginalTracker::MarginalTracker(std::vector<Location> targets, KernelParams params,
                                 double noiseVariance)
    : targets_(std::move(targets)), cond_(params, noiseVariance) {
  mean_.assign(targets_.size(), 0.0);
  var_.resize(targets_.size());
  for (std::size_t j = 0; j < targets_.size(); ++j) {
    requireFinite(targets_[j]);
    var_[j] = kernel(targets_[j], targets_[j], cond_.params());
  }
}

std::vector<double> MarginalTracker::crossCovariance(const Location& x) const {
  const auto c = cond_.solveLower(x);
  std::vector<double> out(targets_.size());
  for (std::size_t j = 0; j < targets_.size(); ++j) {
    out[j] = kernel(x, targets_[j], cond_.params());
  }
  for (std::size_t i = 0; i < c.size(); ++i) {
    const auto& row = whitenedCross_[i];
    for (std::size_t j = 0; j < targets_.size(); ++j) out[j] -= c[i] * row[j];
  }
  return out;
}

void MarginalTracker::observe(const Location& loc, double value) {
  // The new row of L^{-1} K(X0, T) is the cross covariance scaled by the pivot.
  auto c = cond_.solveLower(loc);
  std::vector<double> row(targets_.size());
  for (std::size_t j = 0; j < targets_.size(); ++j) {
    row[j] = kernel(loc, targets_[j], cond_.params());
  }
  for (std::size_t i = 0; i < c.size(); ++i) {
    const auto& prev = whitenedCross_[i];
    for (std::size_t j = 0; j < targets_.size(); ++j) row[j] -= c[i] * prev[j];
  }
  const double pivot = cond_.appendRow(loc, value, std::move(c));
  const double zNew = cond_.whitenedValue(cond_.size() - 1);
  for (std::size_t j = 0; j < targets_.size(); ++j) {
    row[j] /= pivot;
    mean_[j] += row[j] * zNew;
    var_[j] = clampVariance(var_[j] - row[j] * row[j]);
  }
  whitenedCross_.push_back(std::move(row));
}

}  // namespace dasgp
