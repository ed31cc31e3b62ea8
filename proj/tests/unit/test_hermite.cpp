#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "lrdh/error.hpp"
#include "lrdh/hermite.hpp"
#include "lrdh/numeric.hpp"
#include "lrdh/rng.hpp"

using namespace lrdh;
using namespace lrdh::hermite;

TEST(HermitePolynomial, LowOrders) {
  for (double z : {-2.0, -0.3, 0.0, 1.7}) {
    EXPECT_DOUBLE_EQ(hermite_polynomial(0, z), 1.0);
    EXPECT_DOUBLE_EQ(hermite_polynomial(1, z), z);
    EXPECT_NEAR(hermite_polynomial(2, z), z * z - 1.0, 1e-14);
    EXPECT_NEAR(hermite_polynomial(3, z), z * z * z - 3.0 * z, 1e-13);
    EXPECT_NEAR(hermite_polynomial(4, z), std::pow(z, 4) - 6.0 * z * z + 3.0, 1e-12);
  }
}

TEST(GaussRule, WeightsAndMoments) {
  const auto rule = gauss_hermite_rule(32);
  double w = 0, m2 = 0, m4 = 0;
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
    w += rule.weights[i];
    m2 += rule.weights[i] * std::pow(rule.nodes[i], 2);
    m4 += rule.weights[i] * std::pow(rule.nodes[i], 4);
  }
  EXPECT_NEAR(w, 1.0, 1e-13);
  EXPECT_NEAR(m2, 1.0, 1e-12);
  EXPECT_NEAR(m4, 3.0, 1e-11);
}

TEST(Coefficients, Identity) {
  const auto v = hermite_coefficients(parse_transform("identity").phi, 3);
  ASSERT_EQ(v.size(), 4u);
  EXPECT_NEAR(v[0], 0.0, 1e-12);
  EXPECT_NEAR(v[1], 1.0, 1e-12);
  EXPECT_NEAR(v[2], 0.0, 1e-12);
  EXPECT_NEAR(v[3], 0.0, 1e-12);
  EXPECT_EQ(hermite_rank(v), 1);
}

TEST(Coefficients, Cubic) {
  // z^3 = He_3 + 3 He_1, and V_q = E[z^3 He_q] = q! c_q.
  const auto v = hermite_coefficients(parse_transform("cubic").phi, 5);
  EXPECT_NEAR(v[0], 0.0, 1e-11);
  EXPECT_NEAR(v[1], 3.0, 1e-11);
  EXPECT_NEAR(v[2], 0.0, 1e-11);
  EXPECT_NEAR(v[3], 6.0, 1e-11);
  EXPECT_NEAR(v[4], 0.0, 1e-10);
  EXPECT_EQ(hermite_rank(v), 1);
  EXPECT_NEAR(parseval_sum(v), 15.0, 1e-10);  // E[z^6]
}

TEST(Coefficients, Exponential) {
  const auto v = hermite_coefficients(parse_transform("exp").phi, 6);
  for (double c : v) EXPECT_NEAR(c, std::exp(0.5), 1e-9);
  // Truncated Parseval: sum_{q<=8} e / q!, which tends to E[e^{2Z}] = e^2.
  double partial = 0.0, fact = 1.0;
  for (int q = 0; q <= 8; ++q) {
    if (q > 0) fact *= q;
    partial += std::exp(1.0) / fact;
  }
  EXPECT_NEAR(parseval_sum(hermite_coefficients(parse_transform("exp").phi, 8)), partial, 1e-8);
  EXPECT_NEAR(partial, std::exp(2.0), 1e-4);
}

TEST(Rank, HigherRanksAndFailure) {
  const auto h2 = hermite_coefficients(parse_transform("poly:-1,0,1").phi, 4);
  EXPECT_EQ(hermite_rank(h2), 2);
  EXPECT_NEAR(h2[2], 2.0, 1e-11);
  const std::vector<double> h3 = {0.0, 0.0, 0.0, 6.0};
  EXPECT_EQ(hermite_rank(h3), 3);
  const std::vector<double> flat = {2.0, 1e-12, 0.0};
  try {
    hermite_rank(flat);
    FAIL() << "expected RankNotFound";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kRankNotFound);
  }
}

TEST(Transform, CatalogAndParsing) {
  EXPECT_TRUE(parse_transform("identity").bounded_second_derivative);
  EXPECT_FALSE(parse_transform("cubic").bounded_second_derivative);
  EXPECT_FALSE(parse_transform("exp").bounded_second_derivative);
  EXPECT_TRUE(parse_transform("poly:1,2,3").bounded_second_derivative);
  EXPECT_FALSE(parse_transform("poly:0,0,0,1").bounded_second_derivative);
  EXPECT_DOUBLE_EQ(parse_transform("poly:1,2,3").phi(2.0), 17.0);
  EXPECT_THROW(parse_transform("sine"), Error);
  EXPECT_THROW(parse_transform("poly:1,x"), Error);
}

TEST(ApplyTransform, PointwiseAndOverflow) {
  randfield::FieldSample f{GridSpec{0.0, 1.0, 2}, {1.0, -2.0}, 9};
  const auto out = apply_transform(parse_transform("cubic").phi, f);
  EXPECT_EQ(out.values, (std::vector<double>{1.0, -8.0}));
  EXPECT_EQ(out.seed, 9u);
  EXPECT_TRUE(same_grid(out.grid, f.grid));

  randfield::FieldSample big{GridSpec{0.0, 1.0, 2}, {0.0, 710.0}, 0};
  try {
    apply_transform(parse_transform("exp").phi, big);
    FAIL() << "expected TransformOverflow";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kTransformOverflow);
  }
}

TEST(Parseval, MatchesMonteCarloSecondMoment) {
  const auto tr = parse_transform("poly:0.5,1,0,0.2");
  const double series = parseval_sum(hermite_coefficients(tr.phi, 8));
  auto rng = make_rng(3);
  std::normal_distribution<double> normal;
  std::vector<double> sq(200000);
  for (auto& s : sq) {
    const double v = tr.phi(normal(rng));
    s = v * v;
  }
  const auto ms = mean_se(sq);
  EXPECT_NEAR(series, ms.mean, 4.0 * ms.se);
}
