#include "lrdh/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "lrdh/error.hpp"
#include "lrdh/numeric.hpp"
#include "lrdh/rng.hpp"

namespace lrdh::stats {
namespace {

std::vector<double> subsample(std::span<const double> v, std::size_t n,
                              std::uint64_t seed) {
  std::vector<double> out(v.begin(), v.end());
  if (out.size() == n) return out;
  auto rng = make_rng(seed);
  // Partial Fisher-Yates; std::shuffle's draw pattern is library-specific.
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng() % (out.size() - i));
    std::swap(out[i], out[j]);
  }
  out.resize(n);
  return out;
}

}  // namespace

double wasserstein2(std::span<const double> a, std::span<const double> b,
                    std::uint64_t seed) {
  if (a.empty() || b.empty()) fail(ErrorCode::kEmptySample, "wasserstein2 needs nonempty samples");
  const std::size_t n = std::min(a.size(), b.size());
  auto x = subsample(a, n, derive_seed(seed, {1}));
  auto y = subsample(b, n, derive_seed(seed, {2}));
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  CompensatedSum acc;
  for (std::size_t i = 0; i < n; ++i) acc.add((x[i] - y[i]) * (x[i] - y[i]));
  return std::sqrt(acc.value() / static_cast<double>(n));
}

FitResult fit_linear(std::span<const double> xs, std::span<const double> ys) {
  require(xs.size() == ys.size(), "fit: length mismatch");
  if (xs.size() < 2) fail(ErrorCode::kTooFewSamples, "fit needs at least 2 points");
  const auto n = static_cast<double>(xs.size());
  const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  if (sxx <= 0.0) fail(ErrorCode::kDegenerateFit, "fit needs distinct x values");
  FitResult r;
  r.exponent = sxy / sxx;
  r.prefactor = my - r.exponent * mx;
  double sse = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double e = ys[i] - r.prefactor - r.exponent * xs[i];
    sse += e * e;
  }
  r.r_squared = syy > 0.0 ? std::clamp(1.0 - sse / syy, 0.0, 1.0) : 1.0;
  if (xs.size() == 2) {
    r.degenerate = true;
    r.stderr_exponent = 0.0;
  } else {
    r.stderr_exponent = std::sqrt(sse / (n - 2.0) / sxx);
  }
  return r;
}

FitResult fit_power_law(std::span<const double> xs, std::span<const double> ys) {
  require(xs.size() == ys.size(), "fit: length mismatch");
  std::vector<double> lx(xs.size()), ly(ys.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (!(xs[i] > 0.0) || !(ys[i] > 0.0))
      fail(ErrorCode::kNonPositiveData, "power-law fit needs positive data");
    lx[i] = std::log(xs[i]);
    ly[i] = std::log(ys[i]);
  }
  auto r = fit_linear(lx, ly);
  r.prefactor = std::exp(r.prefactor);
  return r;
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

NormalityResult normality_test(std::span<const double> sample) {
  if (sample.size() < 100) fail(ErrorCode::kTooFewSamples, "normality test needs n >= 100");
  const auto ms = mean_se(sample);
  const double sd = std::sqrt(ms.variance);
  std::vector<double> s(sample.begin(), sample.end());
  std::sort(s.begin(), s.end());
  const auto n = static_cast<double>(s.size());
  NormalityResult r;
  r.threshold_5pct = 1.36 / std::sqrt(n);
  if (sd <= 0.0) {
    r.ks_stat = 1.0;
    return r;
  }
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double f = normal_cdf((s[i] - ms.mean) / sd);
    r.ks_stat = std::max({r.ks_stat, (static_cast<double>(i) + 1.0) / n - f,
                          f - static_cast<double>(i) / n});
  }
  return r;
}

double ensemble_covariance(std::span<const double> xs, std::span<const double> ys) {
  require(xs.size() == ys.size(), "covariance: length mismatch");
  if (xs.size() < 2) fail(ErrorCode::kTooFewSamples, "covariance needs at least 2 samples");
  const auto n = static_cast<double>(xs.size());
  const double mx = compensated_sum(xs) / n;
  const double my = compensated_sum(ys) / n;
  CompensatedSum acc;
  for (std::size_t i = 0; i < xs.size(); ++i) acc.add((xs[i] - mx) * (ys[i] - my));
  return acc.value() / (n - 1.0);
}

double covariance_se(std::span<const double> xs, std::span<const double> ys) {
  require(xs.size() == ys.size(), "covariance: length mismatch");
  if (xs.size() < 2) fail(ErrorCode::kTooFewSamples, "covariance needs at least 2 samples");
  const auto n = static_cast<double>(xs.size());
  const double mx = compensated_sum(xs) / n;
  const double my = compensated_sum(ys) / n;
  std::vector<double> prods(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) prods[i] = (xs[i] - mx) * (ys[i] - my);
  return mean_se(prods).se;
}

double msd(std::span<const double> xs, std::span<const double> density) {
  require(xs.size() == density.size() && xs.size() >= 2, "msd: need matching grids");
  CompensatedSum mass, second;
  for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
    require(density[i] >= 0.0 && density[i + 1] >= 0.0, "msd: density must be >= 0");
    const double h = xs[i + 1] - xs[i];
    mass.add(0.5 * h * (density[i] + density[i + 1]));
    second.add(0.5 * h * (xs[i] * xs[i] * density[i] + xs[i + 1] * xs[i + 1] * density[i + 1]));
  }
  if (!(mass.value() > 0.0)) fail(ErrorCode::kZeroMass, "msd: density has zero mass");
  return second.value() / mass.value();
}

double wasserstein2_bootstrap_se(std::span<const double> a, std::span<const double> b,
                                 int resamples, std::uint64_t seed) {
  require(resamples >= 2, "bootstrap needs at least 2 resamples");
  if (a.empty() || b.empty()) fail(ErrorCode::kEmptySample, "bootstrap needs nonempty samples");
  std::vector<double> reps(static_cast<std::size_t>(resamples));
  std::vector<double> ra(a.size()), rb(b.size());
  for (int r = 0; r < resamples; ++r) {
    auto rng = make_rng(derive_seed(seed, {static_cast<std::uint64_t>(r)}));
    for (auto& v : ra) v = a[rng() % a.size()];
    for (auto& v : rb) v = b[rng() % b.size()];
    reps[static_cast<std::size_t>(r)] = wasserstein2(ra, rb, seed);
  }
  return std::sqrt(mean_se(reps).variance);
}

}  // namespace lrdh::stats
