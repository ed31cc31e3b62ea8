#pragma once

// Fractional Brownian motion: covariance, exact and FFT samplers, and a
// variogram-slope Hurst estimator.

#include <cstdint>
#include <span>
#include <vector>

#include "lrdh/grid.hpp"

namespace lrdh::fbm {

/// Sample of W^H on a grid; W^H(0) = 0, and a grid node at 0 carries 0.
struct FbmPath {
  double hurst = 0.75;
  GridSpec grid;
  std::vector<double> values;
  std::uint64_t seed = 0;
};

double fbm_covariance(double hurst, double s, double t);

inline constexpr std::size_t kMaxCholeskyCount = 4096;

/// Dense route: Sigma_ij from fbm_covariance, Sigma = L L^T, return L z. Nodes
/// at 0 are excluded from Sigma and pinned to 0. Any grid with count >= 1 and
/// count <= kMaxCholeskyCount.
FbmPath sample_fbm_cholesky(double hurst, const GridSpec& grid,
                            std::uint64_t seed);

/// FFT route: fGn by circulant embedding on the lattice containing the grid
/// and the origin, summed and re-anchored at 0. Requires start/step to be an
/// integer so that 0 is a lattice node.
FbmPath sample_fbm_fast(double hurst, const GridSpec& grid, std::uint64_t seed);

/// Half the least-squares slope of log mean-squared increment versus log lag
/// over lags 1..max_lag.
double estimate_hurst(const FbmPath& path, int max_lag);
double estimate_hurst(const std::vector<double>& values, int max_lag);

/// Half the log-log slope of given mean-squared increments against lags.
double hurst_from_variogram(std::span<const double> lags,
                            std::span<const double> msi);

/// Linear interpolation on the path grid; throws CoverageError outside it.
double interpolate(const FbmPath& path, double x);

}  // namespace lrdh::fbm
