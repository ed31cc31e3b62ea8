#include "lrdh/fbm.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "lrdh/circulant.hpp"
#include "lrdh/error.hpp"
#include "lrdh/rng.hpp"

namespace lrdh::fbm {
namespace {

void check_hurst(double hurst) {
  require(std::isfinite(hurst) && hurst > 0.0 && hurst < 1.0,
          "Hurst index must lie in (0,1)");
}

// Unit-lag fGn autocovariance.
double fgn_covariance(double hurst, double k) {
  const double two_h = 2.0 * hurst;
  return 0.5 * (std::pow(std::abs(k + 1.0), two_h) +
                std::pow(std::abs(k - 1.0), two_h) - 2.0 * std::pow(std::abs(k), two_h));
}

std::string key(const char* tag, double hurst, const GridSpec& grid) {
  std::ostringstream os;
  os.precision(17);
  os << tag << '|' << hurst << '|' << grid.start << '|' << grid.step << '|'
     << grid.count;
  return os.str();
}

}  // namespace

double fbm_covariance(double hurst, double s, double t) {
  check_hurst(hurst);
  require(std::isfinite(s) && std::isfinite(t), "fBm times must be finite");
  const double two_h = 2.0 * hurst;
  return 0.5 * (std::pow(std::abs(s), two_h) + std::pow(std::abs(t), two_h) -
                std::pow(std::abs(s - t), two_h));
}

FbmPath sample_fbm_cholesky(double hurst, const GridSpec& grid,
                            std::uint64_t seed) {
  check_hurst(hurst);
  validate(grid, 1);
  require(grid.count <= kMaxCholeskyCount,
          "dense fBm sampler is limited to 4096 grid points");
  std::vector<std::size_t> free_nodes;
  for (std::size_t i = 0; i < grid.count; ++i)
    if (std::abs(grid.at(i)) > 1e-12 * grid.step) free_nodes.push_back(i);

  FbmPath path{hurst, grid, std::vector<double>(grid.count, 0.0), seed};
  if (free_nodes.empty()) return path;
  const std::size_t n = free_nodes.size();
  auto lower = detail::cached_cholesky(
      key("fbm-chol", hurst, grid),
      [&](std::size_t i, std::size_t j) {
        return fbm_covariance(hurst, grid.at(free_nodes[i]), grid.at(free_nodes[j]));
      },
      n);
  Rng rng = make_rng(seed);
  const auto draw = detail::cholesky_draw(*lower, n, rng);
  for (std::size_t i = 0; i < n; ++i) path.values[free_nodes[i]] = draw[i];
  return path;
}

FbmPath sample_fbm_fast(double hurst, const GridSpec& grid, std::uint64_t seed) {
  check_hurst(hurst);
  validate(grid, 1);
  const double k0_real = -grid.start / grid.step;
  const double k0_round = std::round(k0_real);
  require(std::abs(k0_real - k0_round) < 1e-9 * std::max(1.0, std::abs(k0_real)),
          "fast fBm sampler needs the origin on the grid lattice");
  const long long k0 = static_cast<long long>(k0_round);
  const long long last = static_cast<long long>(grid.count) - 1;
  const long long lo = std::min(0LL, k0);
  const long long hi = std::max(last, k0);
  const auto nodes = static_cast<std::size_t>(hi - lo + 1);

  FbmPath path{hurst, grid, std::vector<double>(grid.count, 0.0), seed};
  if (nodes == 1) return path;
  const std::size_t n_inc = nodes - 1;
  std::ostringstream os;
  os.precision(17);
  os << "fgn|" << hurst << '|' << n_inc;
  auto plan = detail::cached_plan(
      os.str(), [&](std::size_t k) { return fgn_covariance(hurst, static_cast<double>(k)); },
      n_inc);
  if (!plan)
    fail(ErrorCode::kCirculantEmbeddingFailure,
         "fGn embedding has negative spectral weights up to 16x");
  Rng rng = make_rng(seed);
  const auto noise = detail::circulant_draw(*plan, rng);

  std::vector<double> level(nodes, 0.0);
  for (std::size_t j = 0; j < n_inc; ++j) level[j + 1] = level[j] + noise[j];
  const double scale = std::pow(grid.step, hurst);
  const double anchor = level[static_cast<std::size_t>(k0 - lo)];
  for (std::size_t i = 0; i < grid.count; ++i)
    path.values[i] = scale * (level[static_cast<std::size_t>(static_cast<long long>(i) - lo)] - anchor);
  return path;
}

double hurst_from_variogram(std::span<const double> lags,
                            std::span<const double> msi) {
  require(lags.size() == msi.size() && lags.size() >= 2,
          "variogram needs >= 2 matching lags");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(lags.size());
  for (std::size_t i = 0; i < lags.size(); ++i) {
    if (!(msi[i] > 0.0))
      fail(ErrorCode::kDegenerateFit, "zero mean-squared increment");
    const double x = std::log(lags[i]);
    const double y = std::log(msi[i]);
    sx += x; sy += y; sxx += x * x; sxy += x * y;
  }
  const double denom = n * sxx - sx * sx;
  if (denom <= 0.0) fail(ErrorCode::kDegenerateFit, "lags are not distinct");
  return 0.5 * (n * sxy - sx * sy) / denom;
}

double estimate_hurst(const std::vector<double>& values, int max_lag) {
  require(max_lag >= 4, "max_lag must be >= 4");
  require(values.size() >= 2 * static_cast<std::size_t>(max_lag),
          "path must hold at least 2*max_lag points");
  std::vector<double> lags, msi;
  for (int lag = 1; lag <= max_lag; ++lag) {
    double acc = 0.0;
    const std::size_t count = values.size() - lag;
    for (std::size_t i = 0; i < count; ++i) {
      const double d = values[i + lag] - values[i];
      acc += d * d;
    }
    lags.push_back(lag);
    msi.push_back(acc / static_cast<double>(count));
  }
  return hurst_from_variogram(lags, msi);
}

double estimate_hurst(const FbmPath& path, int max_lag) {
  return estimate_hurst(path.values, max_lag);
}

double interpolate(const FbmPath& path, double x) {
  const double pos = (x - path.grid.start) / path.grid.step;
  const double last = static_cast<double>(path.grid.count - 1);
  if (!(pos >= -1e-9 && pos <= last + 1e-9))
    fail(ErrorCode::kCoverageError, "level outside the fBm window");
  const double clamped = std::clamp(pos, 0.0, last);
  auto k = static_cast<std::size_t>(clamped);
  if (k + 1 >= path.grid.count) return path.values.back();
  const double tau = clamped - static_cast<double>(k);
  return path.values[k] + tau * (path.values[k + 1] - path.values[k]);
}

}  // namespace lrdh::fbm
