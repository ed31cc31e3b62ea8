#pragma once

// Brownian driving paths, binned local time, and left-point Ito sums.

#include <cstdint>
#include <span>
#include <vector>

#include "lrdh/grid.hpp"

namespace lrdh::bm_paths {

struct BrownianPath {
  double t = 1.0;
  std::size_t n = 1;
  std::vector<double> increments;  // n entries, each N(0, t/n)
  std::vector<double> positions;   // n + 1 entries, positions[0] == 0

  double dt() const { return t / static_cast<double>(n); }
  double end() const { return positions.back(); }
};

BrownianPath sample_brownian(double t, std::size_t n, std::uint64_t seed);

/// Piecewise-constant occupation density. edges has bins + 1 nodes;
/// masses[k] is the time spent in [edge_k, edge_{k+1}) divided by the width.
struct LocalTimeProfile {
  GridSpec edges;
  std::vector<double> masses;
  double t = 0.0;

  std::size_t bins() const { return masses.size(); }
  double width() const { return edges.step; }
  /// Profile of x + B: the same masses on edges shifted by x.
  LocalTimeProfile shifted(double x) const;
  /// int L(y) f(y) dy with f evaluated at bin midpoints.
  template <class F>
  double integrate(F&& f) const {
    double acc = 0.0;
    for (std::size_t k = 0; k < masses.size(); ++k)
      acc += masses[k] * f(edges.at(k) + 0.5 * edges.step);
    return acc * edges.step;
  }
};

/// Bins cover the sampled range padded by one bin on each side; each left
/// point positions[0..n-1] contributes dt to its bin.
LocalTimeProfile local_time(const BrownianPath& path, int bins);

/// Same construction for any sampled path with uniform time step dt.
LocalTimeProfile occupation_profile(std::span<const double> positions,
                                    double dt, int bins);

/// Default bin count: 256 up to 1e4 steps, growing like sqrt(n) beyond.
int default_bins(std::size_t n_steps);

/// sum_i h_i (B_{t_{i+1}} - B_{t_i}); h has one value per increment.
double ito_integral(std::span<const double> integrand, const BrownianPath& path);

}  // namespace lrdh::bm_paths
