#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "lrdh/error.hpp"
#include "lrdh/grid.hpp"
#include "lrdh/numeric.hpp"
#include "lrdh/parallel.hpp"
#include "lrdh/rng.hpp"

namespace lrdh {

const char* error_code_name(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kCirculantEmbeddingFailure: return "CirculantEmbeddingFailure";
    case ErrorCode::kCholeskyFailure: return "CholeskyFailure";
    case ErrorCode::kQuadratureUnstable: return "QuadratureUnstable";
    case ErrorCode::kRankNotFound: return "RankNotFound";
    case ErrorCode::kTransformOverflow: return "TransformOverflow";
    case ErrorCode::kDegenerateFit: return "DegenerateFit";
    case ErrorCode::kGridMismatch: return "GridMismatch";
    case ErrorCode::kCoverageError: return "CoverageError";
    case ErrorCode::kOverflowGuard: return "OverflowGuard";
    case ErrorCode::kEmptySample: return "EmptySample";
    case ErrorCode::kNonPositiveData: return "NonPositiveData";
    case ErrorCode::kTooFewSamples: return "TooFewSamples";
    case ErrorCode::kZeroMass: return "ZeroMass";
    case ErrorCode::kConfigError: return "ConfigError";
    case ErrorCode::kIoError: return "IoError";
    case ErrorCode::kInternal: return "Internal";
  }
  return "Unknown";
}

void validate(const GridSpec& grid, std::size_t min_count) {
  require(std::isfinite(grid.start), "grid start must be finite");
  require(std::isfinite(grid.step) && grid.step > 0.0, "grid step must be > 0");
  require(grid.count >= min_count,
          "grid count must be >= " + std::to_string(min_count));
}

bool same_grid(const GridSpec& a, const GridSpec& b, double rel_tol) {
  if (a.count != b.count) return false;
  const double scale = std::max(std::abs(a.step), std::abs(b.step));
  if (std::abs(a.step - b.step) > rel_tol * scale) return false;
  const double sscale = std::max({std::abs(a.start), std::abs(b.start), scale});
  return std::abs(a.start - b.start) <= rel_tol * sscale;
}

std::vector<double> grid_points(const GridSpec& grid) {
  std::vector<double> out(grid.count);
  for (std::size_t i = 0; i < grid.count; ++i) out[i] = grid.at(i);
  return out;
}

std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t seed,
                          std::initializer_list<std::uint64_t> indices) noexcept {
  std::uint64_t h = splitmix64(seed ^ 0x6a09e667f3bcc909ULL);
  for (std::uint64_t idx : indices) h = splitmix64(h ^ splitmix64(idx + 0x1234567ULL));
  return h;
}

MeanSe mean_se(std::span<const double> xs) {
  MeanSe out;
  const std::size_t n = xs.size();
  if (n == 0) return out;
  out.mean = compensated_sum(xs) / static_cast<double>(n);
  if (n < 2) return out;
  CompensatedSum ss;
  for (double x : xs) ss.add((x - out.mean) * (x - out.mean));
  out.variance = ss.value() / static_cast<double>(n - 1);
  out.se = std::sqrt(out.variance / static_cast<double>(n));
  return out;
}

int resolve_threads(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("LRDH_THREADS")) {
    const int v = std::atoi(env);
    if (v > 0) return v;
  }
  return 1;
}

void parallel_for(std::size_t n, int threads,
                  const std::function<void(std::size_t)>& fn) {
  const std::size_t workers =
      std::min<std::size_t>(n, static_cast<std::size_t>(std::max(threads, 1)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        next.store(n);
        return;
      }
    }
  };
  std::vector<std::jthread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
  pool.clear();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace lrdh
