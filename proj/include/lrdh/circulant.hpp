#pragma once

// Shared circulant-embedding machinery for randfield and fbm.

#include <cstddef>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "lrdh/rng.hpp"

namespace lrdh::detail {

/// Spectral weights lambda_k / m of the circulant embedding of a stationary
/// covariance sequence c(0..n-1), or nullptr when every embedding size up to
/// max_factor times the minimum has a weight below -tolerance.
struct CirculantPlan {
  std::size_t n = 0;  // sequence length
  std::size_t m = 0;  // embedding size
  std::vector<double> sqrt_weights;  // sqrt(max(lambda_k/m, 0))
};

std::shared_ptr<const CirculantPlan> embed_covariance(
    const std::function<double(std::size_t)>& lag_cov, std::size_t n,
    std::size_t max_factor = 16, double tolerance = 1e-10);

/// One exact draw of the n-vector with the embedded covariance.
std::vector<double> circulant_draw(const CirculantPlan& plan, Rng& rng);

/// Plans are pure functions of (key); caching keeps ensembles cheap.
std::shared_ptr<const CirculantPlan> cached_plan(
    const std::string& key, const std::function<double(std::size_t)>& lag_cov,
    std::size_t n);

/// Lower-triangular factor of an n x n covariance (row-major), cached by key.
/// Adds 1e-12 diagonal jitter once before failing with CholeskyFailure.
std::shared_ptr<const std::vector<double>> cached_cholesky(
    const std::string& key,
    const std::function<double(std::size_t, std::size_t)>& cov, std::size_t n);

/// L z for a row-major lower-triangular factor.
std::vector<double> cholesky_draw(const std::vector<double>& lower,
                                  std::size_t n, Rng& rng);

}  // namespace lrdh::detail
