#pragma once

// Estimators shared by the verification experiments.

#include <cstdint>
#include <span>
#include <vector>

namespace lrdh::stats {

struct FitResult {
  double exponent = 0.0;
  double prefactor = 0.0;
  double r_squared = 0.0;
  double stderr_exponent = 0.0;
  bool degenerate = false;  // two points: exact interpolation
};

/// Exact 1-D empirical W2 between equal-size samples. A larger sample is
/// subsampled without replacement with a generator seeded by `seed`.
double wasserstein2(std::span<const double> a, std::span<const double> b,
                    std::uint64_t seed = 0);

/// Least squares on (log x, log y).
FitResult fit_power_law(std::span<const double> xs, std::span<const double> ys);

/// Ordinary least squares y = a + b x; returns {b, a, r2, se(b)}.
FitResult fit_linear(std::span<const double> xs, std::span<const double> ys);

struct NormalityResult {
  double ks_stat = 0.0;
  double threshold_5pct = 0.0;
  bool rejected() const { return ks_stat > threshold_5pct; }
};

/// KS distance to the normal with the sample's mean and variance. The 5%
/// threshold 1.36/sqrt(n) is the asymptotic value for known parameters; with
/// estimated parameters it is approximate (no Lilliefors table).
NormalityResult normality_test(std::span<const double> sample);

/// Unbiased sample covariance.
double ensemble_covariance(std::span<const double> xs,
                           std::span<const double> ys);

/// Standard error of the sample covariance estimator.
double covariance_se(std::span<const double> xs, std::span<const double> ys);

/// int x^2 u dx / int u dx by the trapezoid rule.
double msd(std::span<const double> xs, std::span<const double> density);

double normal_cdf(double z);

/// Bootstrap standard error of W2 between two samples.
double wasserstein2_bootstrap_se(std::span<const double> a,
                                 std::span<const double> b, int resamples,
                                 std::uint64_t seed);

}  // namespace lrdh::stats
