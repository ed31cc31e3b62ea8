#include "lrdh/bm_paths.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "lrdh/error.hpp"
#include "lrdh/numeric.hpp"
#include "lrdh/rng.hpp"

namespace lrdh::bm_paths {

BrownianPath sample_brownian(double t, std::size_t n, std::uint64_t seed) {
  require(std::isfinite(t) && t > 0.0, "horizon must be > 0");
  require(n >= 1, "need at least one step");
  BrownianPath path;
  path.t = t;
  path.n = n;
  path.increments.resize(n);
  path.positions.assign(n + 1, 0.0);
  Rng rng = make_rng(seed);
  std::normal_distribution<double> normal;
  const double sd = std::sqrt(t / static_cast<double>(n));
  for (std::size_t i = 0; i < n; ++i) {
    path.increments[i] = sd * normal(rng);
    path.positions[i + 1] = path.positions[i] + path.increments[i];
  }
  return path;
}

LocalTimeProfile LocalTimeProfile::shifted(double x) const {
  LocalTimeProfile out = *this;
  out.edges.start += x;
  return out;
}

LocalTimeProfile occupation_profile(std::span<const double> positions,
                                    double dt, int bins) {
  require(bins >= 8, "local time needs >= 8 bins");
  require(positions.size() >= 2, "path needs at least one step");
  require(std::isfinite(dt) && dt > 0.0, "time step must be > 0");
  const auto [lo_it, hi_it] = std::minmax_element(positions.begin(), positions.end());
  const double range = std::max(*hi_it - *lo_it, 1e-12);
  const double width = range / static_cast<double>(bins - 2);

  LocalTimeProfile profile;
  profile.edges = GridSpec{*lo_it - width, width, static_cast<std::size_t>(bins) + 1};
  profile.t = dt * static_cast<double>(positions.size() - 1);
  std::vector<std::size_t> counts(bins, 0);
  for (std::size_t i = 0; i + 1 < positions.size(); ++i) {
    // Measured from the minimum so the padding bins stay empty; the maximum
    // closes the last interior bin.
    const double pos = (positions[i] - *lo_it) / width;
    const auto k = 1 + static_cast<std::size_t>(
        std::clamp(std::floor(pos), 0.0, static_cast<double>(bins - 3)));
    ++counts[k];
  }
  profile.masses.resize(bins);
  for (int k = 0; k < bins; ++k)
    profile.masses[k] = static_cast<double>(counts[k]) * dt / width;
  return profile;
}

LocalTimeProfile local_time(const BrownianPath& path, int bins) {
  return occupation_profile(path.positions, path.dt(), bins);
}

int default_bins(std::size_t n_steps) {
  if (n_steps <= 10000) return 256;
  return static_cast<int>(std::lround(256.0 * std::sqrt(n_steps / 1e4)));
}

double ito_integral(std::span<const double> integrand, const BrownianPath& path) {
  require(integrand.size() == path.n,
          "integrand needs one value per increment");
  CompensatedSum acc;
  for (std::size_t i = 0; i < path.n; ++i)
    acc.add(integrand[i] * path.increments[i]);
  return acc.value();
}

}  // namespace lrdh::bm_paths
