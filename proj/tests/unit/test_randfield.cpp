#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "lrdh/error.hpp"
#include "lrdh/numeric.hpp"
#include "lrdh/randfield.hpp"
#include "lrdh/rng.hpp"

using namespace lrdh;
using namespace lrdh::randfield;

namespace {

const CovarianceSpec kCauchy{0.5, CovarianceModel::kCauchy};
const CovarianceSpec kFgn{0.5, CovarianceModel::kFgnIncrement};

// Empirical lag covariance over seeds, with its standard error.
MeanSe lag_covariance(const CovarianceSpec& spec, const GridSpec& grid, std::size_t i,
                      std::size_t j, int seeds, SamplingMethod method, std::uint64_t salt) {
  std::vector<double> prods(seeds);
  for (int s = 0; s < seeds; ++s) {
    const auto f = sample_field(spec, grid, derive_seed(salt, {std::uint64_t(s)}), method);
    prods[s] = f.values[i] * f.values[j];
  }
  return mean_se(prods);
}

}  // namespace

TEST(Covariance, ClosedForms) {
  EXPECT_DOUBLE_EQ(covariance_value(kCauchy, 0.0), 1.0);
  EXPECT_NEAR(covariance_value(kCauchy, 3.0), std::pow(10.0, -0.25), 1e-15);
  EXPECT_NEAR(covariance_value(kCauchy, 3.0), 0.562341, 1e-6);
  EXPECT_DOUBLE_EQ(covariance_value(kFgn, 0.0), 1.0);
  // fGn lag 1: (2^{2H} - 2)/2 with H = 0.75.
  EXPECT_NEAR(covariance_value(kFgn, 1.0), 0.5 * (std::pow(2.0, 1.5) - 2.0), 1e-15);
}

TEST(Covariance, EvenAndValidated) {
  for (double x : {0.3, 1.0, 7.5, 120.0}) {
    EXPECT_DOUBLE_EQ(covariance_value(kCauchy, x), covariance_value(kCauchy, -x));
    EXPECT_DOUBLE_EQ(covariance_value(kFgn, x), covariance_value(kFgn, -x));
  }
  EXPECT_THROW(covariance_value(kCauchy, NAN), Error);
  EXPECT_THROW(covariance_value(CovarianceSpec{1.0, CovarianceModel::kCauchy}, 1.0), Error);
  EXPECT_THROW(covariance_value(CovarianceSpec{0.0, CovarianceModel::kCauchy}, 1.0), Error);
  EXPECT_DOUBLE_EQ(kFgn.kappa_g(), 0.75 * 0.5);
  EXPECT_DOUBLE_EQ(kCauchy.kappa_g(), 1.0);
}

TEST(TailConstant, ApproachesKappa) {
  const std::vector<double> xs = {100.0};
  EXPECT_NEAR(tail_constant_check(kCauchy, xs)[0], 1.0, 1e-3);
  EXPECT_NEAR(tail_constant_check(kFgn, xs)[0], 0.375, 0.0375);
  EXPECT_TRUE(tail_constant_check(kCauchy, std::vector<double>{}).empty());
  EXPECT_THROW(tail_constant_check(kCauchy, std::vector<double>{2.0, 1.0}), Error);
  EXPECT_THROW(tail_constant_check(kCauchy, std::vector<double>{-1.0}), Error);
  // Both models across alpha.
  for (double alpha : {0.2, 0.5, 0.9}) {
    const CovarianceSpec c{alpha, CovarianceModel::kCauchy}, f{alpha, CovarianceModel::kFgnIncrement};
    const std::vector<double> far = {1000.0};
    EXPECT_NEAR(tail_constant_check(c, far)[0] / c.kappa_g(), 1.0, 0.1);
    EXPECT_NEAR(tail_constant_check(f, far)[0] / f.kappa_g(), 1.0, 0.1);
  }
}

TEST(SampleField, DeterministicPerSeed) {
  const GridSpec g{0.0, 0.125, 3000};
  const auto a = sample_field(kFgn, g, 99);
  const auto b = sample_field(kFgn, g, 99);
  const auto c = sample_field(kFgn, g, 100);
  EXPECT_EQ(a.values, b.values);
  EXPECT_NE(a.values, c.values);
  EXPECT_EQ(a.values.size(), g.count);
  EXPECT_EQ(a.seed, 99u);
}

TEST(SampleField, RejectsDegenerateGrid) {
  EXPECT_THROW(sample_field(kCauchy, GridSpec{0.0, 0.0, 2}, 1), Error);
  EXPECT_THROW(sample_field(kCauchy, GridSpec{0.0, 1.0, 1}, 1), Error);
}

TEST(SampleField, LagOneCovarianceCauchy) {
  const GridSpec g{0.0, 1.0, 64};
  const auto ms = lag_covariance(kCauchy, g, 10, 11, 10000, SamplingMethod::kCirculant, 1);
  EXPECT_NEAR(ms.mean, std::pow(2.0, -0.25), 3.0 * ms.se);
}

TEST(SampleField, FarPointsDecorrelate) {
  // Two points 1e6 apart: R = (1 + 1e12)^{-1/4} ~ 1e-3.
  const GridSpec g{0.0, 1e6, 2};
  std::vector<double> a(10000), b(10000);
  for (int s = 0; s < 10000; ++s) {
    const auto f = sample_field(kCauchy, g, derive_seed(5, {std::uint64_t(s)}));
    a[s] = f.values[0];
    b[s] = f.values[1];
  }
  const double ma = compensated_sum(a) / 1e4, mb = compensated_sum(b) / 1e4;
  double sab = 0, saa = 0, sbb = 0;
  for (int s = 0; s < 10000; ++s) {
    sab += (a[s] - ma) * (b[s] - mb);
    saa += (a[s] - ma) * (a[s] - ma);
    sbb += (b[s] - mb) * (b[s] - mb);
  }
  EXPECT_LT(std::abs(sab / std::sqrt(saa * sbb)), 0.05);
}

TEST(SampleField, MethodsAgreeOnLagCovariances) {
  // 2000 points: the circulant route succeeds here (no fallback).
  const GridSpec g{0.0, 0.125, 2000};
  for (std::size_t lag : {0u, 1u, 5u}) {
    const auto c = lag_covariance(kFgn, g, 700, 700 + lag, 4000, SamplingMethod::kCirculant, 11);
    const auto d = lag_covariance(kFgn, g, 700, 700 + lag, 4000, SamplingMethod::kCholesky, 12);
    EXPECT_LT(std::abs(c.mean - d.mean), 3.0 * std::hypot(c.se, d.se)) << "lag " << lag;
    const double exact = covariance_value(kFgn, 0.125 * lag);
    EXPECT_NEAR(c.mean, exact, 3.0 * c.se);
    EXPECT_NEAR(d.mean, exact, 3.0 * d.se);
  }
}

TEST(SampleField, StationaryZeroMean) {
  const GridSpec g{0.0, 1.0, 32};
  const int seeds = 10000;
  std::vector<double> sums(g.count, 0.0);
  for (int s = 0; s < seeds; ++s) {
    const auto f = sample_field(kCauchy, g, derive_seed(77, {std::uint64_t(s)}));
    for (std::size_t i = 0; i < g.count; ++i) sums[i] += f.values[i];
  }
  // 3 / sqrt(n) per point, with a union allowance of one extra SE.
  for (double s : sums) EXPECT_LT(std::abs(s / seeds), 4.0 / std::sqrt(double(seeds)));
}

TEST(TransformedCovariance, SeriesExamples) {
  const std::vector<double> identity = {0.0, 1.0};
  for (double x : {0.0, 0.5, 4.0, 100.0})
    EXPECT_DOUBLE_EQ(transformed_covariance(kCauchy, identity, x, 5), covariance_value(kCauchy, x));
  // R_g(x) = 0.5 at x = sqrt(2^{2/alpha} - 1) = sqrt(15) for the Cauchy model.
  const double x_half = std::sqrt(15.0);
  ASSERT_NEAR(covariance_value(kCauchy, x_half), 0.5, 1e-14);
  const std::vector<double> v = {0.0, 1.0, 1.0};
  EXPECT_NEAR(transformed_covariance(kCauchy, v, x_half, 2), 0.625, 1e-14);
  EXPECT_THROW(transformed_covariance(kCauchy, v, 1.0, 0), Error);
}

TEST(TransformedCovariance, SeriesAtSmallBaseCovariance) {
  const std::vector<double> v = {0.0, 2.0, 0.0, 1.0};
  const double r = covariance_value(kCauchy, 1e8);
  EXPECT_NEAR(transformed_covariance(kCauchy, v, 1e8, 3), 4.0 * r + r * r * r / 6.0, 1e-18);
}

TEST(TransformedCovariance, RankOneTail) {
  const std::vector<double> v = {0.0, 3.0, 0.0, 6.0};  // cubic
  for (double x : {100.0, 1000.0}) {
    const double lhs = transformed_covariance(kFgn, v, x, 3) * std::pow(x, 0.5);
    EXPECT_NEAR(lhs / (9.0 * kFgn.kappa_g()), 1.0, 0.1);
  }
  const std::vector<double> e = {1.0, 1.0, 1.0, 1.0};
  EXPECT_GE(transformed_covariance_tail_bound(kCauchy, e, 2.0, 2), 0.0);
}
