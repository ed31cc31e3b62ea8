#pragma once

#include <cstddef>
#include <vector>

namespace lrdh {

/// Uniform grid start + i*step, i = 0..count-1.
struct GridSpec {
  double start = 0.0;
  double step = 1.0;
  std::size_t count = 2;

  double at(std::size_t i) const { return start + step * static_cast<double>(i); }
  double end() const { return at(count - 1); }

  bool operator==(const GridSpec&) const = default;
};

/// Throws InvalidArgument unless step > 0, finite, and count >= min_count.
void validate(const GridSpec& grid, std::size_t min_count = 2);

/// Same start/step/count up to a relative tolerance on the floating fields.
bool same_grid(const GridSpec& a, const GridSpec& b, double rel_tol = 1e-12);

std::vector<double> grid_points(const GridSpec& grid);

}  // namespace lrdh
