#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "lrdh/error.hpp"
#include "lrdh/fk_solver.hpp"
#include "lrdh/numeric.hpp"
#include "lrdh/rng.hpp"

using namespace lrdh;
using namespace lrdh::fk;

namespace {

const randfield::CovarianceSpec kCauchy{0.5, randfield::CovarianceModel::kCauchy};
const randfield::CovarianceSpec kFgn{0.5, randfield::CovarianceModel::kFgnIncrement};

// Constant field c on z in [-half, half] (field units, step 1/8).
randfield::FieldSample constant_field(double c, double half) {
  const auto count = static_cast<std::size_t>(std::lround(2 * half * 8)) + 1;
  return {GridSpec{-half, 0.125, count}, std::vector<double>(count, c), 0};
}

SolverConfig base_config(double eps, double t, std::size_t paths, std::size_t steps) {
  SolverConfig c;
  c.alpha = 0.5;
  c.epsilon = eps;
  c.t = t;
  c.n_paths = paths;
  c.n_steps = steps;
  return c;
}

// Variance with a normal-theory SE from the fourth moment.
MeanSe variance_of(const std::vector<double>& v) {
  const auto ms = mean_se(v);
  double m4 = 0.0;
  for (double x : v) m4 += std::pow(x - ms.mean, 4) / double(v.size());
  return {ms.variance, std::sqrt((m4 - ms.variance * ms.variance) / double(v.size())), 0.0};
}

}  // namespace

TEST(InitialCondition, Catalog) {
  EXPECT_DOUBLE_EQ(parse_initial_condition("constant-one").phi(3.0), 1.0);
  EXPECT_DOUBLE_EQ(parse_initial_condition("cosine").phi(0.0), 1.0);
  EXPECT_DOUBLE_EQ(parse_initial_condition("gaussian-bump").phi(0.0), 1.0);
  EXPECT_NEAR(parse_initial_condition("gaussian-bump:2,0.5").phi(0.5), 2.0 * std::exp(-0.5), 1e-15);
  const auto ind = parse_initial_condition("indicator-with-smoothing");
  EXPECT_NEAR(ind.phi(0.0), 1.0, 1e-8);
  EXPECT_NEAR(ind.phi(3.0), 0.0, 1e-8);
  EXPECT_NEAR(ind.phi(1.0), 0.5, 1e-8);
  EXPECT_THROW(parse_initial_condition("step"), Error);
}

TEST(Potential, BetaAndKappa) {
  EXPECT_NEAR(make_potential(kFgn, "identity").beta(), 1.0, 1e-12);
  EXPECT_NEAR(make_potential(kCauchy, "identity").beta(), 1.0 / std::sqrt(0.375), 1e-12);
  EXPECT_NEAR(make_potential(kCauchy, "identity").beta(), 1.63299, 1e-5);
  const auto cubic = make_potential(kCauchy, "cubic");
  EXPECT_NEAR(cubic.kappa(), 9.0, 1e-9);
  EXPECT_EQ(cubic.rank, 1);
  EXPECT_NEAR(cubic.covariance(0.0), 15.0, 1e-8);  // Var(Z^3)
  EXPECT_TRUE(zero_potential(kCauchy).zero);
  EXPECT_DOUBLE_EQ(zero_potential(kCauchy).covariance(1.0), 0.0);
}

TEST(WEps, Examples) {
  const auto one = constant_field(1.0, 40.0);
  EXPECT_DOUBLE_EQ(w_eps(one, 0.25, 0.5, 0.0), 0.0);
  EXPECT_NEAR(w_eps(one, 0.25, 0.5, 2.0), 2.0 * std::sqrt(2.0), 1e-12);
  EXPECT_NEAR(w_eps(one, 0.25, 0.5, 2.0), 2.82843, 1e-5);
  EXPECT_THROW(w_eps(one, 0.25, 0.5, 20.0), Error);
}

TEST(WEps, Additive) {
  auto f = randfield::sample_field(kCauchy, GridSpec{-80.0, 0.125, 1281}, 3);
  const MicroscaleEnv env(f, 0.1, 0.5);
  for (auto [a, b] : {std::pair{-3.0, 1.2}, {0.05, 0.6}, {-7.1, -6.9}}) {
    // Trapezoid integral of the interpolant over [a, b] at a fine sub-step.
    const int m = 20000;
    double acc = 0.0;
    for (int i = 0; i < m; ++i) {
      const double y0 = a + (b - a) * i / m, y1 = a + (b - a) * (i + 1) / m;
      acc += 0.5 * (env.a_at(y0) + env.a_at(y1)) * (y1 - y0);
    }
    EXPECT_NEAR(env.w(b) - env.w(a), std::pow(0.1, -0.25) * acc, 1e-6);
    EXPECT_NEAR(w_eps(f, 0.1, 0.5, b) - w_eps(f, 0.1, 0.5, a), env.w(b) - env.w(a), 1e-10);
  }
}

TEST(Representations, ZeroField) {
  const MicroscaleEnv env(constant_field(0.0, 400.0), 0.25, 0.5);
  const auto cfg = base_config(0.25, 1.0, 1, 1000);
  const auto path = bm_paths::sample_brownian(1.0, 1000, 4);
  EXPECT_DOUBLE_EQ(y_direct(env, path, cfg), 0.0);
  EXPECT_DOUBLE_EQ(y_occupation(env, path, cfg), 0.0);
  EXPECT_DOUBLE_EQ(y_ito(env, path, cfg), 0.0);
  LimitEnv lim{fbm::FbmPath{0.75, GridSpec{-10.0, 0.01, 2001}, std::vector<double>(2001, 0.0), 0}, 1.0};
  EXPECT_DOUBLE_EQ(y_limit(lim, path, cfg), 0.0);
}

TEST(Representations, ConstantField) {
  const double c = 0.7, eps = 0.25;
  const MicroscaleEnv env(constant_field(c, 200.0), eps, 0.5);
  auto cfg = base_config(eps, 1.0, 1, 10000);
  cfg.x = 0.4;
  const double exact = std::pow(eps, -0.25) * c * cfg.t;
  const auto path = bm_paths::sample_brownian(1.0, 10000, 6);
  EXPECT_NEAR(y_direct(env, path, cfg), exact, 1e-10);
  EXPECT_NEAR(y_occupation(env, path, cfg), exact, 1e-9);
  EXPECT_LT(std::abs(y_ito(env, path, cfg) - exact) / exact, 0.02);
}

TEST(Representations, AgreeOnRandomField) {
  const auto pot = make_potential(kFgn, "identity");
  auto cfg = base_config(0.2, 1.0, 1, 10000);
  cfg.bins = 256;
  std::vector<double> occ, ito;
  for (std::uint64_t e = 0; e < 10; ++e) {
    const auto env = make_microscale_env(pot, cfg, derive_seed(7, {e}));
    const auto path = bm_paths::sample_brownian(1.0, 10000, derive_seed(8, {e}));
    const double d = y_direct(env, path, cfg);
    occ.push_back(std::abs(y_occupation(env, path, cfg) - d) / (std::abs(d) + 0.01));
    ito.push_back(std::abs(y_ito(env, path, cfg) - d) / (std::abs(d) + 0.01));
  }
  std::sort(occ.begin(), occ.end());
  std::sort(ito.begin(), ito.end());
  EXPECT_LT(occ[5], 0.05);
  EXPECT_LT(ito[5], 0.05);
}

TEST(Representations, ZeroMeanOverEnvironments) {
  const auto pot = make_potential(kCauchy, "identity");
  const auto cfg = base_config(0.1, 1.0, 1, 400);
  const auto path = bm_paths::sample_brownian(1.0, 400, 9);
  std::vector<double> ys;
  for (std::uint64_t e = 0; e < 1000; ++e) ys.push_back(y_direct(make_microscale_env(pot, cfg, derive_seed(10, {e})), path, cfg));
  const auto ms = mean_se(ys);
  EXPECT_NEAR(ms.mean, 0.0, 3.0 * ms.se);
}

TEST(ConditionalVariance, MicroscaleMatchesDoubleSum) {
  const auto pot = make_potential(kCauchy, "identity");
  const auto cfg = base_config(0.1, 1.0, 1, 500);
  const auto path = bm_paths::sample_brownian(1.0, 500, 11);
  std::vector<double> ys;
  for (std::uint64_t e = 0; e < 2000; ++e) ys.push_back(y_direct(make_microscale_env(pot, cfg, derive_seed(12, {e})), path, cfg));
  const double oracle = conditional_variance_microscale(pot, path, 0.1);
  EXPECT_NEAR(variance_of(ys).mean / oracle, 1.0, 0.15);
}

TEST(ConditionalVariance, LimitMatchesDoubleSum) {
  auto cfg = base_config(0.1, 1.0, 1, 500);
  cfg.bins = 128;
  const auto path = bm_paths::sample_brownian(1.0, 500, 13);
  const auto profile = bm_paths::local_time(path, cfg.bins);
  std::vector<double> ys;
  for (std::uint64_t e = 0; e < 2000; ++e) ys.push_back(y_limit(make_limit_env(cfg, derive_seed(14, {e})), profile, cfg));
  const double oracle = conditional_variance_limit(path, 0.75, 1.0, profile.width());
  EXPECT_NEAR(variance_of(ys).mean / oracle, 1.0, 0.15);
}

TEST(ConditionalVariance, LimitScalesLikeTimeToTheHPlusOne) {
  // Var(Y) over (env x path) = beta^2 H(2H-1) c_H t^{H+1}.
  std::vector<double> var;
  for (double t : {1.0, 2.0}) {
    auto cfg = base_config(0.1, t, 1, 500);
    cfg.bins = 128;
    std::vector<double> ys;
    for (std::uint64_t e = 0; e < 3000; ++e) {
      const auto path = bm_paths::sample_brownian(t, 500, derive_seed(15, {e}));
      ys.push_back(y_limit(make_limit_env(cfg, derive_seed(16, {e})), path, cfg));
    }
    const double v = variance_of(ys).mean;
    EXPECT_NEAR(v / (0.375 * self_interaction_constant(0.75) * std::pow(t, 1.75)), 1.0, 0.15) << t;
    var.push_back(v);
  }
  EXPECT_NEAR(var[1] / var[0] / std::pow(2.0, 1.75), 1.0, 0.15);
}

TEST(Oracles, ClosedForms) {
  EXPECT_NEAR(abs_normal_moment(2.0), 1.0, 1e-14);
  EXPECT_NEAR(abs_normal_moment(1.0), std::sqrt(2.0 / M_PI), 1e-14);
  EXPECT_NEAR(abs_normal_moment(-0.5), 1.72008, 1e-5);
  EXPECT_NEAR(self_interaction_constant(0.75), 2.62108, 1e-5);
  EXPECT_THROW(abs_normal_moment(-1.0), Error);
}

TEST(Oracles, SelfInteractionByMonteCarlo) {
  // E int int |B_u - B_v|^{2H-2} from off-diagonal grid double sums.
  const double h = 0.75;
  const std::size_t n = 200;
  std::vector<double> sums(400);
  for (std::size_t s = 0; s < sums.size(); ++s) {
    const auto b = bm_paths::sample_brownian(1.0, n, derive_seed(17, {s}));
    const double dt = b.dt();
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (i != j) acc += std::pow(std::abs(b.positions[i] - b.positions[j]), 2 * h - 2) * dt * dt;
    sums[s] = acc;
  }
  // The omitted diagonal carries O(dt^H) of the mass.
  const auto ms = mean_se(sums);
  EXPECT_NEAR(ms.mean / self_interaction_constant(h), 1.0, 0.1);
}

TEST(Solve, ZeroPotential) {
  Environment env = MicroscaleEnv(constant_field(0.0, 400.0), 0.25, 0.5);
  auto cfg = base_config(0.25, 1.0, 100, 50);
  EXPECT_DOUBLE_EQ(solve_u(env, cfg).value, 1.0);
  cfg.phi = parse_initial_condition("cosine");
  cfg.n_paths = 100000;
  cfg.n_steps = 4;
  const auto u = solve_u(env, cfg);
  EXPECT_NEAR(u.value, std::exp(-0.5), 3.0 * u.inner_se);
}

TEST(Solve, ConstantPotential) {
  const double c = 0.3, eps = 0.25;
  Environment env = MicroscaleEnv(constant_field(c, 400.0), eps, 0.5);
  const auto cfg = base_config(eps, 1.0, 20, 200);
  EXPECT_NEAR(solve_u(env, cfg).value, std::exp(std::pow(eps, -0.25) * c), 1e-10);
}

TEST(Solve, GuardsAndCoverage) {
  Environment hot = MicroscaleEnv(constant_field(800.0, 400.0), 0.25, 0.5);
  const auto cfg = base_config(0.25, 1.0, 4, 20);
  try {
    solve_u(hot, cfg);
    FAIL() << "expected OverflowGuard";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kOverflowGuard);
  }
  Environment tiny = MicroscaleEnv(constant_field(0.0, 0.5), 0.25, 0.5);
  try {
    solve_u(tiny, base_config(0.25, 4.0, 4, 200));
    FAIL() << "expected CoverageError";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kCoverageError);
  }
}

TEST(Solve, CommonPathsAcrossEnvironments) {
  auto cfg = base_config(0.1, 1.0, 3, 10);
  const auto a = inner_paths(cfg, 1), b = inner_paths(cfg, 2);
  EXPECT_EQ(a[2].positions, b[2].positions);
  cfg.common_paths = false;
  EXPECT_NE(inner_paths(cfg, 1)[2].positions, inner_paths(cfg, 2)[2].positions);
}

TEST(ExponentialMoments, TrivialCases) {
  auto cfg = base_config(0.1, 1.0, 4, 100);
  const std::vector<double> eps = {0.4, 0.2};
  for (double m : exponential_moment_probe(make_potential(kFgn, "identity"), cfg, 0.0, eps, 5)) EXPECT_DOUBLE_EQ(m, 1.0);
  for (double m : exponential_moment_probe(zero_potential(kFgn), cfg, 2.0, eps, 5)) EXPECT_DOUBLE_EQ(m, 1.0);
}

TEST(ExponentialMoments, IndependentOfThreadCount) {
  auto cfg = base_config(0.1, 1.0, 4, 100);
  const std::vector<double> eps = {0.4, 0.2};
  const auto pot = make_potential(kFgn, "identity");
  EXPECT_EQ(exponential_moment_probe(pot, cfg, 1.0, eps, 6, 1), exponential_moment_probe(pot, cfg, 1.0, eps, 6, 3));
}
