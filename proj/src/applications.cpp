#include "dasgp/applications.hpp"

#include <algorithm>
#include <cmath>

#include "dasgp/error.hpp"

namespace dasgp {

namespace {

void requireWeights(const LinearApplication& app, std::size_t n) {
  if (app.weights.size() != n) {
    fail(ErrorCode::DimensionMismatch, "application '" + app.label + "' has " +
                                           std::to_string(app.weights.size()) +
                                           " weights for " + std::to_string(n) + " sensors");
  }
  for (double w : app.weights) {
    if (!std::isfinite(w)) fail(ErrorCode::NonFinite, "non-finite application weight");
  }
}

// Posterior covariance over the remaining sensors, ordered like remaining().
Eigen::MatrixXd remainingCovariance(const SensorField& field, const DasState& state,
                                    const KernelParams& params) {
  return posterior(state.uploadedLocations(field), state.uploadedValues(),
                   state.remainingLocations(field), params, field.noiseVariance)
      .covariance;
}

}  // namespace

EstimateCovariance estimateCovariance(const SensorField& field, const DasState& state,
                                      const KernelParams& params) {
  const auto n = static_cast<Eigen::Index>(field.size());
  EstimateCovariance out{Eigen::MatrixXd::Zero(n, n)};
  const auto& rem = state.remaining();
  if (rem.empty()) return out;
  const auto c = remainingCovariance(field, state, params);
  for (std::size_t i = 0; i < rem.size(); ++i) {
    for (std::size_t j = 0; j < rem.size(); ++j) {
      out.matrix(static_cast<Eigen::Index>(rem[i]), static_cast<Eigen::Index>(rem[j])) =
          c(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    }
  }
  return out;
}

double applicationOutput(const LinearApplication& app, const FieldEstimate& est) {
  requireWeights(app, est.values.size());
  double z = 0.0;
  for (std::size_t l = 0; l < est.values.size(); ++l) z += app.weights[l] * est.values[l];
  return z;
}

double applicationMse(const LinearApplication& app, const EstimateCovariance& cov) {
  requireWeights(app, static_cast<std::size_t>(cov.matrix.rows()));
  const Eigen::Map<const Eigen::VectorXd> w(app.weights.data(), cov.matrix.rows());
  return clampVariance(w.dot(cov.matrix * w));
}

std::size_t selectWeightedSum(std::span<const LinearApplication> apps,
                              std::span<const double> betas, const SensorField& field,
                              const DasState& state, const KernelParams& params) {
  if (apps.empty() || apps.size() != betas.size()) {
    fail(ErrorCode::DimensionMismatch, "need one positive weight per application");
  }
  for (double b : betas) {
    if (!(b > 0.0) || !std::isfinite(b)) {
      fail(ErrorCode::InvalidArgument, "application weights must be positive");
    }
  }
  for (const auto& app : apps) requireWeights(app, field.size());
  const auto& rem = state.remaining();
  if (rem.empty()) fail(ErrorCode::EmptySelection, "no remaining sensors to select from");

  const auto c = remainingCovariance(field, state, params);
  const auto r = static_cast<Eigen::Index>(rem.size());
  Eigen::VectorXd score = Eigen::VectorXd::Zero(r);
  Eigen::VectorXd w(r);
  for (std::size_t q = 0; q < apps.size(); ++q) {
    for (Eigen::Index i = 0; i < r; ++i) w(i) = apps[q].weights[rem[static_cast<std::size_t>(i)]];
    const Eigen::VectorXd u = c * w;
    const double base = w.dot(u);
    // Uploading candidate i zeroes its row/col and conditions the rest on it.
    for (Eigen::Index i = 0; i < r; ++i) {
      const double cii = c(i, i);
      const double without = base - 2.0 * w(i) * u(i) + w(i) * w(i) * cii;
      const double cross = u(i) - w(i) * cii;
      score(i) += betas[q] * (without - cross * cross / (cii + field.noiseVariance));
    }
  }

  std::size_t best = rem.front();
  double bestScore = quantizeScore(score(0));
  for (Eigen::Index i = 1; i < r; ++i) {
    const double s = quantizeScore(score(i));
    if (s < bestScore) {
      best = rem[static_cast<std::size_t>(i)];
      bestScore = s;
    }
  }
  return best;
}

std::size_t selectForApplication(const LinearApplication& app, const SensorField& field,
                                 const DasState& state, const KernelParams& params) {
  const double beta = 1.0;
  return selectWeightedSum(std::span(&app, 1), std::span(&beta, 1), field, state, params);
}

std::optional<std::size_t> selectMaxValueApp(const SensorField& field, const DasState& state,
                                             const FieldEstimate& est) {
  if (est.values.size() != field.size() || est.values.empty()) return std::nullopt;
  const auto it = std::max_element(est.values.begin(), est.values.end());
  const auto l = static_cast<std::size_t>(it - est.values.begin());
  if (state.isRemaining(l)) return l;
  return std::nullopt;
}

std::vector<std::size_t> buildCandidateSet(std::span<const std::optional<std::size_t>> picks,
                                           std::size_t q, const SensorField& field,
                                           const DasState& state, const KernelParams& params,
                                           Rng& rng) {
  if (q == 0) fail(ErrorCode::InvalidArgument, "candidate set size must be positive");
  const std::size_t target = std::min(q, state.remaining().size());
  std::vector<std::size_t> out;
  auto taken = [&out](std::size_t l) {
    return std::find(out.begin(), out.end(), l) != out.end();
  };

  for (const auto& p : picks) {
    if (out.size() == target) return out;
    if (p && state.isRemaining(*p) && !taken(*p)) out.push_back(*p);
  }
  if (out.size() == target) return out;

  const auto variances = estimate(field, state, params).perSensorVariance;
  std::optional<std::size_t> fill;
  double fillScore = 0.0;
  for (std::size_t l : state.remaining()) {
    if (taken(l)) continue;
    const double s = quantizeScore(variances[l]);
    if (!fill || s > fillScore) {
      fill = l;
      fillScore = s;
    }
  }
  out.push_back(*fill);

  std::vector<std::size_t> pool;
  for (std::size_t l : state.remaining()) {
    if (!taken(l)) pool.push_back(l);
  }
  while (out.size() < target) {
    std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
    const std::size_t k = pick(rng);
    out.push_back(pool[k]);
    pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(k));
  }
  return out;
}

SelectionPolicy appWeightedPolicy(std::vector<LinearApplication> apps,
                                  std::vector<double> betas) {
  return [apps = std::move(apps), betas = std::move(betas)](const RoundContext& ctx) {
    return selectWeightedSum(apps, betas, ctx.field, ctx.state, ctx.params);
  };
}

LinearApplication meanApplication(std::size_t sensorCount) {
  return {std::vector<double>(sensorCount, 1.0 / static_cast<double>(sensorCount)), "mean"};
}

}  // namespace dasgp
