#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "lrdh/error.hpp"
#include "lrdh/fbm.hpp"
#include "lrdh/rng.hpp"
#include "lrdh/young.hpp"

using namespace lrdh;
using namespace lrdh::young;

namespace {

SampledFunction sample(double (*fn)(double), std::size_t n, double a = 0.0, double b = 1.0) {
  SampledFunction f{GridSpec{a, (b - a) / double(n), n + 1}, {}};
  for (std::size_t i = 0; i <= n; ++i) f.values.push_back(fn(f.grid.at(i)));
  return f;
}

SampledFunction fbm_on_unit(double hurst, std::size_t n, std::uint64_t seed) {
  const auto p = fbm::sample_fbm_fast(hurst, GridSpec{0.0, 1.0 / double(n), n + 1}, seed);
  return {p.grid, p.values};
}

double id(double x) { return x; }
double sq(double x) { return x * x; }
double three(double) { return 3.0; }
double wave(double x) { return std::sin(7.0 * x); }

}  // namespace

TEST(YoungIntegral, ClassicalExamples) {
  EXPECT_NEAR(young_integral(sample(id, 1000), sample(id, 1000)), 0.4995, 1e-13);
  for (std::size_t n : {100u, 1000u, 10000u})
    EXPECT_LE(std::abs(young_integral(sample(id, n), sample(sq, n)) - 2.0 / 3.0), 1.0 / double(n));
}

TEST(YoungIntegral, ConstantIntegrandTelescopes) {
  const auto g = fbm_on_unit(0.75, 512, 3);
  EXPECT_NEAR(young_integral(sample(three, 512), g), 3.0 * (g.values.back() - g.values.front()), 1e-12);
}

TEST(YoungIntegral, GridMismatch) {
  try {
    young_integral(sample(id, 100), sample(id, 101));
    FAIL() << "expected GridMismatch";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kGridMismatch);
  }
}

TEST(YoungIntegral, Bilinear) {
  const auto f = fbm_on_unit(0.7, 1024, 1), h = fbm_on_unit(0.8, 1024, 2), g = fbm_on_unit(0.75, 1024, 3);
  SampledFunction comb = f;
  for (std::size_t i = 0; i < comb.values.size(); ++i) comb.values[i] = 2.5 * f.values[i] - 1.5 * h.values[i];
  EXPECT_NEAR(young_integral(comb, g), 2.5 * young_integral(f, g) - 1.5 * young_integral(h, g), 1e-12);
}

TEST(YoungIntegral, IntegrationByParts) {
  // Exact discrete identity, and the correction shrinks like n^{1-(g1+g2)}.
  for (std::size_t n : {1024u, 16384u}) {
    const auto f = fbm_on_unit(0.75, n, 10), g = fbm_on_unit(0.75, n, 11);
    double cross = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      cross += (f.values[i + 1] - f.values[i]) * (g.values[i + 1] - g.values[i]);
    const double lhs = young_integral(f, g) + young_integral(g, f);
    const double rhs = f.values.back() * g.values.back() - f.values[0] * g.values[0];
    EXPECT_NEAR(lhs + cross, rhs, 1e-10);
    EXPECT_LE(std::abs(cross), std::pow(double(n), -0.5));
  }
}

TEST(YoungIntegral, RefinementStable) {
  // Doubling resolution on a fixed fBm pair moves the sum by at most C n^{-1/2}.
  const std::size_t fine = 1 << 14;
  const auto f = fbm_on_unit(0.75, fine, 20), g = fbm_on_unit(0.75, fine, 21);
  auto coarse = [&](const SampledFunction& s, std::size_t n) {
    SampledFunction c{GridSpec{0.0, 1.0 / double(n), n + 1}, {}};
    for (std::size_t i = 0; i <= n; ++i) c.values.push_back(s.values[i * (fine / n)]);
    return c;
  };
  for (std::size_t n : {256u, 1024u, 4096u}) {
    const double a = young_integral(coarse(f, n), coarse(g, n));
    const double b = young_integral(coarse(f, 2 * n), coarse(g, 2 * n));
    EXPECT_LE(std::abs(a - b), 2.0 * std::pow(double(n), -0.5)) << n;
  }
}

TEST(Holder, LinearFunctionSeminorm) {
  const auto f = sample(id, 64);
  EXPECT_NEAR(holder_seminorm(f, 1.0), 1.0, 1e-12);
  EXPECT_NEAR(holder_norm(f, 1.0), 2.0, 1e-12);
  EXPECT_THROW(holder_seminorm(f, 1.5), Error);
}

TEST(Continuity, Examples) {
  const auto f = fbm_on_unit(0.75, 2048, 30), g = fbm_on_unit(0.75, 2048, 31);
  EXPECT_DOUBLE_EQ(continuity_residual(f, f, g, g, 0.6, 0.6).residual, 0.0);

  SampledFunction shifted = g;
  for (auto& v : shifted.values) v += 4.0;
  EXPECT_NEAR(continuity_residual(f, f, g, shifted, 0.6, 0.6).residual, 0.0, 1e-12);

  for (double delta : {1e-3, 1e-2, 1e-1}) {
    SampledFunction fp = f;
    const auto w = sample(wave, 2048);
    for (std::size_t i = 0; i < fp.values.size(); ++i) fp.values[i] += delta * w.values[i];
    const auto r = continuity_residual(f, fp, g, g, 0.6, 0.6);
    EXPECT_GT(r.constant, 0.0);
    EXPECT_LE(r.residual, r.bound) << delta;
  }
  EXPECT_THROW(continuity_residual(f, f, g, g, 0.4, 0.5), Error);
}

TEST(ChangeOfVariable, ConstantAndLinearAreExact) {
  const auto path = fbm::sample_fbm_fast(0.75, GridSpec{0.0, 1.0 / 4096, 4097}, 8);
  const auto c = change_of_variable_residuals(test_function("constant"), path, 128, 0.3);
  EXPECT_DOUBLE_EQ(c.young_residual, 0.0);
  EXPECT_DOUBLE_EQ(c.tanaka_residual, 0.0);
  const auto l = change_of_variable_residuals(test_function("linear"), path, 128, 0.3);
  EXPECT_LT(l.young_residual, 1e-12);
  EXPECT_LT(l.tanaka_residual, 1e-12);
  EXPECT_DOUBLE_EQ(l.correction, 0.0);
}

TEST(ChangeOfVariable, ChainRuleResidualShrinksWithResolution) {
  // The left-point chain-rule error is a quadratic-variation term, ~ n^{1-2H}.
  const auto f = test_function("cos");
  double coarse = 0.0, fine = 0.0;
  for (int s = 0; s < 20; ++s) {
    const auto seed = derive_seed(50, {std::uint64_t(s)});
    coarse += change_of_variable_residuals(f, fbm::sample_fbm_fast(0.75, GridSpec{0.0, 1.0 / 256, 257}, seed), 64).young_residual;
    fine += change_of_variable_residuals(f, fbm::sample_fbm_fast(0.75, GridSpec{0.0, 1.0 / 16384, 16385}, seed), 64).young_residual;
  }
  EXPECT_LT(fine, coarse);
}

TEST(TestFunctions, DerivativesMatchFiniteDifferences) {
  for (const char* name : {"cos", "gaussian-bump", "cubic-cutoff"}) {
    const auto f = test_function(name);
    for (double y : {-1.3, 0.2, 2.0}) {
      const double h = 1e-5;
      EXPECT_NEAR(f.df(y), (f.f(y + h) - f.f(y - h)) / (2 * h), 1e-8) << name;
      EXPECT_NEAR(f.d2f(y), (f.df(y + h) - f.df(y - h)) / (2 * h), 1e-7) << name;
    }
  }
  EXPECT_THROW(test_function("tan"), Error);
}
