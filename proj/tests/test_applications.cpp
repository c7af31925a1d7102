#include <cmath>
#include <random>
#include <set>

#include "doctest.h"
#include "dasgp/applications.hpp"
#include "dasgp/error.hpp"
#include "oracles.hpp"

using namespace dasgp;

namespace {

LinearApplication basis(std::size_t n, std::size_t l) {
  LinearApplication a{std::vector<double>(n, 0.0), "e"};
  a.weights[l] = 1.0;
  return a;
}

LinearApplication randomApp(std::mt19937_64& rng, std::size_t n) {
  std::normal_distribution<double> g(0.0, 1.0);
  LinearApplication a{std::vector<double>(n), "rand"};
  for (auto& w : a.weights) w = g(rng);
  return a;
}

/// Brute-force next-round application MSE: upload l, rebuild the full
/// estimate covariance with the naive oracle, take the quadratic form.
double bruteAppMse(const SensorField& f, const DasState& s, const LinearApplication& app,
                   std::size_t l) {
  auto up = s.uploaded();
  up.push_back(l);
  return oracle::quadForm(app.weights, oracle::estimateCovariance(f, up));
}

}  // namespace

TEST_CASE("application output") {
  std::mt19937_64 rng(1);
  const auto f = oracle::randomField(rng, 6, 1, 4.0, 0.1);
  DasState s(6);
  for (std::size_t l = 0; l < 6; ++l) s.upload(l, f.measurements[l]);
  const auto est = estimate(f, s, {});
  double mean = 0.0;
  for (double y : f.measurements) mean += y / 6.0;
  CHECK(applicationOutput(meanApplication(6), est) == doctest::Approx(mean).epsilon(1e-14));
  CHECK(applicationOutput(basis(6, 3), est) == est.values[3]);
  CHECK(applicationOutput({std::vector<double>(6, 0.0), "zero"}, est) == 0.0);
  CHECK_THROWS_AS(applicationOutput(meanApplication(5), est), Error);
}

TEST_CASE("application MSE") {
  SUBCASE("everything uploaded") {
    std::mt19937_64 rng(2);
    const auto f = oracle::randomField(rng, 5, 2, 3.0, 0.1);
    DasState s(5);
    for (std::size_t l = 0; l < 5; ++l) s.upload(l, f.measurements[l]);
    CHECK(applicationMse(meanApplication(5), estimateCovariance(f, s, {})) == 0.0);
  }
  SUBCASE("two sensors at distance one, no uploads") {
    SensorField f;
    f.noiseVariance = 0.1;
    f.locations = {{0.0}, {1.0}};
    f.trueMeans = f.measurements = {0.0, 0.0};
    const double expected = 0.25 * (2.0 + 2.0 * std::exp(-0.5));
    CHECK(applicationMse(meanApplication(2), estimateCovariance(f, DasState(2), {})) ==
          doctest::Approx(expected).epsilon(1e-14));
  }
  SUBCASE("basis weights pick the per-sensor variance") {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 30; ++trial) {
      const auto f = oracle::randomField(rng, 8, 1 + trial % 2, 4.0, 0.05);
      const auto s = oracle::randomState(rng, f, 3);
      const auto cov = estimateCovariance(f, s, {});
      const auto est = estimate(f, s, {});
      for (std::size_t l : s.remaining()) {
        CHECK(std::abs(applicationMse(basis(8, l), cov) - est.perSensorVariance[l]) < 1e-10);
        const auto p = pointwiseConditional(s.uploadedLocations(f), s.uploadedValues(),
                                            f.locations[l], {}, f.noiseVariance);
        CHECK(std::abs(applicationMse(basis(8, l), cov) - p.variance) < 1e-10);
      }
    }
  }
  SUBCASE("length mismatch") {
    std::mt19937_64 rng(4);
    const auto f = oracle::randomField(rng, 3, 1, 2.0, 0.1);
    CHECK_THROWS_AS(applicationMse(meanApplication(4), estimateCovariance(f, DasState(3), {})),
                    Error);
  }
}

TEST_CASE("estimate covariance structure") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const auto f = oracle::randomField(rng, 9, 2, 3.0, 0.05);
    const auto s = oracle::randomState(rng, f, 4);
    const auto& m = estimateCovariance(f, s, {}).matrix;
    const auto ref = oracle::estimateCovariance(f, s.uploaded());
    CHECK((m - m.transpose()).cwiseAbs().maxCoeff() <= 1e-10);
    for (std::size_t l : s.uploaded()) {
      const auto i = static_cast<Eigen::Index>(l);
      CHECK(m.row(i).cwiseAbs().maxCoeff() == 0.0);
      CHECK(m.col(i).cwiseAbs().maxCoeff() == 0.0);
    }
    for (Eigen::Index i = 0; i < 9; ++i) {
      for (Eigen::Index j = 0; j < 9; ++j) {
        CHECK(std::abs(m(i, j) - ref[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]) <
              1e-9);
      }
    }
  }
}

TEST_CASE("per-application selection") {
  std::mt19937_64 rng(6);
  SUBCASE("basis application selects its own sensor") {
    const auto f = oracle::randomField(rng, 7, 1, 4.0, 0.1);
    const auto s = oracle::randomState(rng, f, 2);
    for (std::size_t l : s.remaining()) CHECK(selectForApplication(basis(7, l), f, s, {}) == l);
  }
  SUBCASE("single remaining sensor") {
    const auto f = oracle::randomField(rng, 4, 1, 4.0, 0.1);
    const auto s = oracle::randomState(rng, f, 3);
    CHECK(selectForApplication(meanApplication(4), f, s, {}) == s.remaining().front());
  }
  SUBCASE("matches brute force") {
    std::uniform_int_distribution<std::size_t> sizeDist(2, 10);
    for (int trial = 0; trial < 100; ++trial) {
      const std::size_t n = sizeDist(rng);
      const auto f = oracle::randomField(rng, n, 1 + trial % 2, 4.0, 0.1);
      std::uniform_int_distribution<std::size_t> upDist(0, n - 1);
      const auto s = oracle::randomState(rng, f, upDist(rng));
      const auto app = trial % 3 == 0 ? meanApplication(n) : randomApp(rng, n);
      const auto expected = oracle::argminOver(
          s.remaining(), [&](std::size_t l) { return bruteAppMse(f, s, app, l); });
      CHECK(selectForApplication(app, f, s, {}) == expected);
    }
  }
  SUBCASE("uniform weights agree with max variance for well separated sensors") {
    SensorField f;
    f.noiseVariance = 0.1;
    std::uniform_real_distribution<double> jitter(-0.5, 0.5);
    for (int l = 0; l < 8; ++l) {
      f.locations.push_back({20.0 * l + jitter(rng)});
      f.trueMeans.push_back(0.0);
      f.measurements.push_back(0.0);
    }
    DasState s(8);
    s.upload(3, 0.0);
    s.upload(5, 0.0);
    CHECK(selectForApplication(meanApplication(8), f, s, {}) == selectMaxVariance(f, s, {}));
  }
}

TEST_CASE("weighted-sum selection") {
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<std::size_t> sizeDist(2, 10);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = sizeDist(rng);
    const auto f = oracle::randomField(rng, n, 2, 3.0, 0.1);
    std::uniform_int_distribution<std::size_t> upDist(0, n - 1);
    const auto s = oracle::randomState(rng, f, upDist(rng));
    const std::vector<LinearApplication> apps{randomApp(rng, n), randomApp(rng, n)};
    std::uniform_real_distribution<double> betaDist(0.1, 3.0);
    const std::vector<double> betas{betaDist(rng), betaDist(rng)};
    const auto expected = oracle::argminOver(s.remaining(), [&](std::size_t l) {
      return betas[0] * bruteAppMse(f, s, apps[0], l) + betas[1] * bruteAppMse(f, s, apps[1], l);
    });
    const auto got = selectWeightedSum(apps, betas, f, s, {});
    CHECK(got == expected);

    const std::vector<double> scaled{betas[0] * 4.0, betas[1] * 4.0};
    CHECK(selectWeightedSum(apps, scaled, f, s, {}) == got);

    const std::vector<LinearApplication> one{apps[0]};
    const std::vector<double> unit{1.0};
    const std::vector<LinearApplication> twice{apps[0], apps[0]};
    const std::vector<double> mixed{0.3, 2.0};
    const auto single = selectForApplication(apps[0], f, s, {});
    CHECK(selectWeightedSum(one, unit, f, s, {}) == single);
    CHECK(selectWeightedSum(twice, mixed, f, s, {}) == single);
  }

  const auto f = oracle::randomField(rng, 4, 1, 2.0, 0.1);
  const std::vector<LinearApplication> apps{meanApplication(4)};
  const std::vector<double> two{1.0, 1.0};
  const std::vector<double> negative{-1.0};
  CHECK_THROWS_AS(selectWeightedSum(apps, two, f, DasState(4), {}), Error);
  CHECK_THROWS_AS(selectWeightedSum(apps, negative, f, DasState(4), {}), Error);
}

TEST_CASE("max-value application") {
  SensorField f;
  f.noiseVariance = 0.01;
  f.locations = {{0.0}, {1.0}, {2.0}};
  f.trueMeans = f.measurements = {0.2, 0.9, 0.4};
  DasState s(3);
  FieldEstimate est{{0.2, 0.9, 0.4}, {0, 0, 0}, 0.0};

  s.upload(1, 0.9);
  CHECK_FALSE(selectMaxValueApp(f, s, est).has_value());

  est.values = {0.2, 0.9, 1.3};
  CHECK(selectMaxValueApp(f, s, est) == std::optional<std::size_t>(2));

  s.upload(0, 0.2);
  s.upload(2, 0.4);
  CHECK_FALSE(selectMaxValueApp(f, s, estimate(f, s, {})).has_value());
}

TEST_CASE("candidate set construction") {
  std::mt19937_64 gen(8);
  const auto f = oracle::randomField(gen, 12, 1, 10.0, 0.1);
  DasState s(12);
  s.upload(0, f.measurements[0]);
  Rng rng(1);

  SUBCASE("distinct picks fill the set") {
    const std::vector<std::optional<std::size_t>> picks{3, 5, 7};
    CHECK(buildCandidateSet(picks, 3, f, s, {}, rng) == std::vector<std::size_t>{3, 5, 7});
  }
  SUBCASE("duplicates are topped up with the max-variance sensor") {
    const std::vector<std::optional<std::size_t>> picks{4, 4};
    const auto out = buildCandidateSet(picks, 2, f, s, {}, rng);
    REQUIRE(out.size() == 2);
    CHECK(out[0] == 4);
    const auto est = estimate(f, s, {});
    double best = -1.0;
    for (std::size_t l : s.remaining()) {
      if (l != 4) best = std::max(best, est.perSensorVariance[l]);
    }
    CHECK(est.perSensorVariance[out[1]] == doctest::Approx(best).epsilon(1e-12));
  }
  SUBCASE("more slots than sensors") {
    const std::vector<std::optional<std::size_t>> picks{std::nullopt, 2};
    auto out = buildCandidateSet(picks, 50, f, s, {}, rng);
    std::sort(out.begin(), out.end());
    CHECK(out == s.remaining());
  }
  SUBCASE("always a duplicate-free subset of the remaining set") {
    std::uniform_int_distribution<std::size_t> idx(0, 11);
    std::uniform_int_distribution<std::size_t> qDist(1, 12);
    for (int trial = 0; trial < 200; ++trial) {
      std::vector<std::optional<std::size_t>> picks;
      for (int k = 0; k < 4; ++k) {
        if (idx(gen) % 3 == 0) picks.emplace_back(std::nullopt);
        else picks.emplace_back(idx(gen));
      }
      const auto q = qDist(gen);
      const auto out = buildCandidateSet(picks, q, f, s, {}, rng);
      CHECK(out.size() == std::min<std::size_t>(q, 11));
      CHECK(std::set<std::size_t>(out.begin(), out.end()).size() == out.size());
      for (std::size_t l : out) CHECK(s.isRemaining(l));
    }
  }
  CHECK_THROWS_AS(buildCandidateSet({}, 0, f, s, {}, rng), Error);
}

TEST_CASE("app-weighted policy drives runDas") {
  std::mt19937_64 g(4);
  const auto f = oracle::randomField(g, 15, 1, 8.0, 0.05);
  Rng rng(1);
  const auto log = runDas(f, appWeightedPolicy({meanApplication(15)}, {1.0}), 10, {}, rng);
  DasState s(15);
  for (const auto& r : log) {
    CHECK(r.selected == selectForApplication(meanApplication(15), f, s, {}));
    s.upload(r.selected, f.measurements[r.selected]);
  }
}
