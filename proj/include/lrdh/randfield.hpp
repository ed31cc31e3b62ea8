#pragma once

// Stationary Gaussian fields with power-law covariance tails.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "lrdh/grid.hpp"

namespace lrdh::randfield {

enum class CovarianceModel {
  kCauchy,        // (1 + x^2)^(-alpha/2), kappa_g = 1
  kFgnIncrement,  // unit-window increments of fBm with H = 1 - alpha/2
};

CovarianceModel parse_model(const std::string& name);
std::string model_name(CovarianceModel model);

struct CovarianceSpec {
  double alpha = 0.5;
  CovarianceModel model = CovarianceModel::kFgnIncrement;

  double hurst() const { return 1.0 - alpha / 2.0; }
  /// Tail constant: |x|^alpha R_g(x) -> kappa_g.
  double kappa_g() const;
};

void validate(const CovarianceSpec& spec);

struct FieldSample {
  GridSpec grid;
  std::vector<double> values;
  std::uint64_t seed = 0;
};

enum class SamplingMethod { kCirculant, kCholesky };

double covariance_value(const CovarianceSpec& spec, double x);

/// |x|^alpha R_g(x) for each x; xs must be positive and increasing.
std::vector<double> tail_constant_check(const CovarianceSpec& spec,
                                        std::span<const double> xs);

/// Zero-mean Gaussian vector on `grid` with covariance R_g at pairwise
/// distances. Circulant embedding starts at the minimal power-of-two size and
/// doubles up to 16x; beyond that it falls back to dense Cholesky. Forcing
/// kCholesky skips the embedding.
FieldSample sample_field(const CovarianceSpec& spec, const GridSpec& grid,
                         std::uint64_t seed,
                         SamplingMethod method = SamplingMethod::kCirculant);

/// Truncated Hermite series sum_{q=1}^{q_max} V_q^2/q! R_g(x)^q. `coeffs` holds
/// V_0..V_Q; terms beyond Q count as zero.
double transformed_covariance(const CovarianceSpec& spec,
                              std::span<const double> coeffs, double x,
                              int q_max);

/// Bound sum_{q>q_max} (V_q^2/q!) |R_g(x)|^(q_max+1) on the truncation error,
/// using the coefficients available in `coeffs`.
double transformed_covariance_tail_bound(const CovarianceSpec& spec,
                                         std::span<const double> coeffs,
                                         double x, int q_max);

}  // namespace lrdh::randfield
