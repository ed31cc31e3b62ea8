#include "lrdh/randfield.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "lrdh/circulant.hpp"
#include "lrdh/error.hpp"

namespace lrdh::randfield {

CovarianceModel parse_model(const std::string& name) {
  if (name == "cauchy") return CovarianceModel::kCauchy;
  if (name == "fgn-increment" || name == "fgn") return CovarianceModel::kFgnIncrement;
  fail(ErrorCode::kInvalidArgument, "unknown covariance model '" + name + "'");
}

std::string model_name(CovarianceModel model) {
  return model == CovarianceModel::kCauchy ? "cauchy" : "fgn-increment";
}

double CovarianceSpec::kappa_g() const {
  if (model == CovarianceModel::kCauchy) return 1.0;
  const double h = hurst();
  return h * (2.0 * h - 1.0);
}

void validate(const CovarianceSpec& spec) {
  require(std::isfinite(spec.alpha) && spec.alpha > 0.0 && spec.alpha < 1.0,
          "alpha must lie in (0,1)");
}

double covariance_value(const CovarianceSpec& spec, double x) {
  validate(spec);
  require(std::isfinite(x), "covariance lag must be finite");
  const double ax = std::abs(x);
  if (spec.model == CovarianceModel::kCauchy)
    return std::pow(1.0 + ax * ax, -spec.alpha / 2.0);
  const double two_h = 2.0 * spec.hurst();
  return 0.5 * (std::pow(ax + 1.0, two_h) + std::pow(std::abs(ax - 1.0), two_h) -
                2.0 * std::pow(ax, two_h));
}

std::vector<double> tail_constant_check(const CovarianceSpec& spec,
                                        std::span<const double> xs) {
  validate(spec);
  std::vector<double> out;
  out.reserve(xs.size());
  double prev = 0.0;
  for (double x : xs) {
    require(std::isfinite(x) && x > 0.0, "tail grid must be positive");
    require(out.empty() || x > prev, "tail grid must be increasing");
    prev = x;
    out.push_back(std::pow(x, spec.alpha) * covariance_value(spec, x));
  }
  return out;
}

namespace {

constexpr std::size_t kMaxCholeskyFallback = 8192;

std::string cache_key(const char* tag, const CovarianceSpec& spec,
                      const GridSpec& grid) {
  std::ostringstream os;
  os.precision(17);
  os << tag << '|' << model_name(spec.model) << '|' << spec.alpha << '|'
     << grid.step << '|' << grid.count;
  return os.str();
}

FieldSample cholesky_sample(const CovarianceSpec& spec, const GridSpec& grid,
                            std::uint64_t seed) {
  auto lower = detail::cached_cholesky(
      cache_key("field-chol", spec, grid),
      [&](std::size_t i, std::size_t j) {
        const double lag = (static_cast<double>(i) - static_cast<double>(j)) * grid.step;
        return covariance_value(spec, lag);
      },
      grid.count);
  Rng rng = make_rng(seed);
  return {grid, detail::cholesky_draw(*lower, grid.count, rng), seed};
}

}  // namespace

FieldSample sample_field(const CovarianceSpec& spec, const GridSpec& grid,
                         std::uint64_t seed, SamplingMethod method) {
  validate(spec);
  validate(grid, 2);
  if (method == SamplingMethod::kCholesky) return cholesky_sample(spec, grid, seed);

  auto plan = detail::cached_plan(
      cache_key("field-circ", spec, grid),
      [&](std::size_t k) {
        return covariance_value(spec, static_cast<double>(k) * grid.step);
      },
      grid.count);
  if (!plan) {
    if (grid.count > kMaxCholeskyFallback)
      fail(ErrorCode::kCirculantEmbeddingFailure,
           "embedding has negative spectral weights up to 16x and the grid is "
           "too large for the Cholesky fallback");
    return cholesky_sample(spec, grid, seed);
  }
  Rng rng = make_rng(seed);
  return {grid, detail::circulant_draw(*plan, rng), seed};
}

namespace {

double factorial(int q) {
  double f = 1.0;
  for (int i = 2; i <= q; ++i) f *= i;
  return f;
}

}  // namespace

double transformed_covariance(const CovarianceSpec& spec,
                              std::span<const double> coeffs, double x,
                              int q_max) {
  require(q_max >= 1, "q_max must be >= 1");
  const double r = covariance_value(spec, x);
  double acc = 0.0;
  double rq = 1.0;
  const int q_end = std::min<int>(q_max, static_cast<int>(coeffs.size()) - 1);
  for (int q = 1; q <= q_end; ++q) {
    rq *= r;
    acc += coeffs[q] * coeffs[q] / factorial(q) * rq;
  }
  return acc;
}

double transformed_covariance_tail_bound(const CovarianceSpec& spec,
                                         std::span<const double> coeffs,
                                         double x, int q_max) {
  require(q_max >= 1, "q_max must be >= 1");
  const double r = std::abs(covariance_value(spec, x));
  double weight = 0.0;
  for (int q = q_max + 1; q < static_cast<int>(coeffs.size()); ++q)
    weight += coeffs[q] * coeffs[q] / factorial(q);
  return weight * std::pow(r, q_max + 1);
}

}  // namespace lrdh::randfield
