#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "lrdh/bm_paths.hpp"
#include "lrdh/error.hpp"
#include "lrdh/numeric.hpp"
#include "lrdh/rng.hpp"
#include "lrdh/stats.hpp"

using namespace lrdh;
using namespace lrdh::bm_paths;

namespace {

// Profile value at level y (0 off the support).
double profile_at(const LocalTimeProfile& p, double y) {
  const double pos = (y - p.edges.start) / p.width();
  if (pos < 0.0 || pos >= double(p.bins())) return 0.0;
  return p.masses[static_cast<std::size_t>(pos)];
}

double occupation_error(const BrownianPath& path, int bins) {
  double direct = 0.0;
  for (std::size_t i = 0; i < path.n; ++i) direct += path.positions[i] * path.positions[i] * path.dt();
  const double binned = local_time(path, bins).integrate([](double y) { return y * y; });
  return std::abs(binned - direct) / direct;
}

}  // namespace

TEST(Brownian, OneStepVariance) {
  std::vector<double> ends(10000);
  for (std::size_t s = 0; s < ends.size(); ++s) ends[s] = sample_brownian(1.0, 1, derive_seed(1, {s})).end();
  EXPECT_NEAR(mean_se(ends).variance, 1.0, 0.05);
}

TEST(Brownian, StartsAtZeroAndIsDeterministic) {
  const auto a = sample_brownian(2.0, 100, 4), b = sample_brownian(2.0, 100, 4);
  EXPECT_EQ(a.positions[0], 0.0);
  EXPECT_EQ(a.positions, b.positions);
  EXPECT_EQ(a.positions.size(), 101u);
  EXPECT_DOUBLE_EQ(a.dt(), 0.02);
  EXPECT_THROW(sample_brownian(0.0, 10, 1), Error);
  EXPECT_THROW(sample_brownian(1.0, 0, 1), Error);
}

TEST(Brownian, DiffusiveScaling) {
  std::vector<double> v1(10000), v4(10000);
  for (std::size_t s = 0; s < v1.size(); ++s) {
    v1[s] = std::pow(sample_brownian(1.0, 10, derive_seed(2, {s})).end(), 2);
    v4[s] = std::pow(sample_brownian(4.0, 10, derive_seed(3, {s})).end(), 2);
  }
  const auto a = mean_se(v1), b = mean_se(v4);
  const double ratio = b.mean / a.mean;
  const double se = ratio * std::hypot(a.se / a.mean, b.se / b.mean);
  EXPECT_NEAR(ratio, 4.0, 3.0 * se);
}

TEST(LocalTime, MassConservationAndSupport) {
  for (int bins : {8, 64, 256, 1000}) {
    const auto path = sample_brownian(1.7, 5000, 9);
    const auto p = local_time(path, bins);
    EXPECT_EQ(p.bins(), std::size_t(bins));
    double mass = 0.0;
    for (double m : p.masses) {
      EXPECT_GE(m, 0.0);
      mass += m * p.width();
    }
    EXPECT_NEAR(mass, 1.7, 1e-12);
    // Padding bins are empty.
    EXPECT_EQ(p.masses.front(), 0.0);
    EXPECT_EQ(p.masses.back(), 0.0);
  }
  EXPECT_THROW(local_time(sample_brownian(1.0, 10, 1), 4), Error);
}

TEST(LocalTime, ShiftMovesLevelsOnly) {
  const auto p = local_time(sample_brownian(1.0, 1000, 5), 64);
  const auto q = p.shifted(2.5);
  EXPECT_EQ(p.masses, q.masses);
  EXPECT_DOUBLE_EQ(q.edges.start, p.edges.start + 2.5);
  EXPECT_DOUBLE_EQ(q.width(), p.width());
}

TEST(LocalTime, OccupationIdentity) {
  const auto path = sample_brownian(1.0, 10000, 12);
  EXPECT_LT(occupation_error(path, 256), 0.02);
}

TEST(LocalTime, OccupationErrorShrinksWithBins) {
  double prev = INFINITY;
  for (int bins : {64, 128, 256, 512}) {
    double acc = 0.0;
    for (std::size_t s = 0; s < 20; ++s) acc += occupation_error(sample_brownian(1.0, 10000, derive_seed(13, {s})), bins);
    EXPECT_LT(acc, 1.1 * prev) << bins;  // monotone within noise
    prev = acc;
  }
}

TEST(LocalTime, HoelderScalingInLevel) {
  // E|L(y) - L(y')|^2 ~ |y - y'| for small gaps. Bins must be much finer than
  // the gaps; level pairs are averaged over centers near the start to cut noise.
  const std::vector<double> gaps = {0.01, 0.02, 0.04, 0.08};
  std::vector<double> msq(gaps.size(), 0.0);
  const int seeds = 250, centers = 31;
  for (int s = 0; s < seeds; ++s) {
    const auto p = local_time(sample_brownian(1.0, 400000, derive_seed(14, {std::uint64_t(s)})), 2048);
    for (std::size_t k = 0; k < gaps.size(); ++k)
      for (int c = 0; c < centers; ++c) {
        const double y = 0.02 * (c - centers / 2);
        const double d = profile_at(p, y + 0.5 * gaps[k]) - profile_at(p, y - 0.5 * gaps[k]);
        msq[k] += d * d / (seeds * centers);
      }
  }
  const auto fit = stats::fit_power_law(gaps, msq);
  EXPECT_GE(fit.exponent, 0.8);
  EXPECT_LE(fit.exponent, 1.2);
}

TEST(DefaultBins, Rule) {
  EXPECT_EQ(default_bins(1000), 256);
  EXPECT_EQ(default_bins(10000), 256);
  EXPECT_EQ(default_bins(40000), 512);
}

TEST(Ito, ConstantIntegrandTelescopes) {
  const auto path = sample_brownian(1.0, 500, 15);
  const std::vector<double> ones(path.n, 1.0);
  EXPECT_NEAR(ito_integral(ones, path), path.end(), 1e-13);
  EXPECT_THROW(ito_integral(std::vector<double>(path.n + 1, 1.0), path), Error);
}

TEST(Ito, MartingaleAndIsometry) {
  std::vector<double> vals(10000);
  for (std::size_t s = 0; s < vals.size(); ++s) {
    const auto path = sample_brownian(1.0, 1000, derive_seed(16, {s}));
    const std::vector<double> h(path.positions.begin(), path.positions.end() - 1);
    vals[s] = ito_integral(h, path);
  }
  const auto ms = mean_se(vals);
  EXPECT_NEAR(ms.mean, 0.0, 3.0 * ms.se);
  // Left-point isometry on the grid: sum_i i dt^2 = (1 - 1/n)/2. SE of the
  // sample variance from the fourth central moment.
  double m4 = 0.0;
  for (double v : vals) m4 += std::pow(v - ms.mean, 4) / double(vals.size());
  const double var_se = std::sqrt((m4 - ms.variance * ms.variance) / double(vals.size()));
  EXPECT_NEAR(ms.variance, 0.5 * (1.0 - 1.0 / 1000.0), 3.0 * var_se);
}
