#include "lrdh/young.hpp"

#include <algorithm>
#include <cmath>

#include "lrdh/bm_paths.hpp"
#include "lrdh/error.hpp"
#include "lrdh/numeric.hpp"

namespace lrdh::young {
namespace {

void check(const SampledFunction& f) {
  validate(f.grid, 2);
  require(f.values.size() == f.grid.count, "values do not match the grid");
}

void check_pair(const SampledFunction& f, const SampledFunction& g) {
  check(f);
  check(g);
  if (!same_grid(f.grid, g.grid))
    fail(ErrorCode::kGridMismatch, "integrand and integrator grids differ");
}

SampledFunction difference(const SampledFunction& a, const SampledFunction& b) {
  SampledFunction d{a.grid, a.values};
  for (std::size_t i = 0; i < d.values.size(); ++i) d.values[i] -= b.values[i];
  return d;
}

// Converts a dyadic-gap seminorm into a bound on the full seminorm.
double dyadic_factor(double gamma) {
  return std::pow(8.0, 1.0 - gamma) + 1.0 / (1.0 - std::pow(2.0, -gamma));
}

double zeta(double s) {
  double acc = 0.0;
  for (int k = 1; k <= 100000; ++k) acc += std::pow(k, -s);
  // Integral tail estimate beyond the partial sum.
  return acc + std::pow(100000.0, 1.0 - s) / (s - 1.0);
}

}  // namespace

double young_integral(const SampledFunction& f, const SampledFunction& g) {
  check_pair(f, g);
  CompensatedSum acc;
  for (std::size_t i = 0; i + 1 < f.values.size(); ++i)
    acc.add(f.values[i] * (g.values[i + 1] - g.values[i]));
  return acc.value();
}

double holder_seminorm(const SampledFunction& f, double gamma) {
  check(f);
  require(gamma > 0.0 && gamma <= 1.0, "Hoelder exponent must lie in (0,1]");
  const std::size_t n = f.values.size();
  const std::size_t max_gap = std::max<std::size_t>(1, n / 4);
  double best = 0.0;
  for (std::size_t k = 1; k <= max_gap && k < n; k *= 2) {
    const double scale = std::pow(static_cast<double>(k) * f.grid.step, gamma);
    for (std::size_t i = 0; i + k < n; ++i)
      best = std::max(best, std::abs(f.values[i + k] - f.values[i]) / scale);
  }
  return best;
}

double holder_norm(const SampledFunction& f, double gamma) {
  double sup = 0.0;
  for (double v : f.values) sup = std::max(sup, std::abs(v));
  return sup + holder_seminorm(f, gamma);
}

ContinuityResidual continuity_residual(const SampledFunction& f,
                                       const SampledFunction& f_perturbed,
                                       const SampledFunction& g,
                                       const SampledFunction& g_perturbed,
                                       double gamma_f, double gamma_g) {
  check_pair(f, g);
  check_pair(f, f_perturbed);
  check_pair(g, g_perturbed);
  const double theta = gamma_f + gamma_g;
  require(theta > 1.0, "Hoelder exponents must sum above 1");

  ContinuityResidual out;
  out.residual =
      std::abs(young_integral(f_perturbed, g_perturbed) - young_integral(f, g));
  out.norm_terms =
      holder_norm(difference(f_perturbed, f), gamma_f) * holder_norm(g_perturbed, gamma_g) +
      holder_norm(f, gamma_f) * holder_norm(difference(g_perturbed, g), gamma_g);
  // Young-Loeve for discrete sums, constant 2^theta zeta(theta), on an
  // interval of length L; sup-norm part bounded through the increment of g.
  const double length = f.grid.end() - f.grid.start;
  const double young_loeve = std::pow(2.0, theta) * zeta(theta);
  out.constant = std::max(std::pow(length, gamma_g),
                          young_loeve * std::pow(length, theta)) *
                 dyadic_factor(gamma_f) * dyadic_factor(gamma_g);
  out.bound = out.constant * out.norm_terms;
  return out;
}

namespace {

double zero(double) { return 0.0; }
double one(double) { return 1.0; }
double ident(double y) { return y; }
double cos_f(double y) { return std::cos(y); }
double cos_d(double y) { return -std::sin(y); }
double cos_d2(double y) { return -std::cos(y); }
double bump_f(double y) { return std::exp(-0.5 * y * y); }
double bump_d(double y) { return -y * std::exp(-0.5 * y * y); }
double bump_d2(double y) { return (y * y - 1.0) * std::exp(-0.5 * y * y); }
double cubic_f(double y) { return y * y * y / (1.0 + y * y); }
double cubic_d(double y) {
  const double s = 1.0 + y * y;
  return (y * y * y * y + 3.0 * y * y) / (s * s);
}
double cubic_d2(double y) {
  const double s = 1.0 + y * y;
  return (6.0 * y - 2.0 * y * y * y) / (s * s * s);
}

}  // namespace

TestFunction test_function(const std::string& name) {
  if (name == "constant") return {name, one, zero, zero};
  if (name == "linear") return {name, ident, one, zero};
  if (name == "cos") return {name, cos_f, cos_d, cos_d2};
  if (name == "gaussian-bump") return {name, bump_f, bump_d, bump_d2};
  if (name == "cubic-cutoff") return {name, cubic_f, cubic_d, cubic_d2};
  fail(ErrorCode::kInvalidArgument, "unknown test function '" + name + "'");
}

ChangeOfVariableResiduals change_of_variable_residuals(const TestFunction& f,
                                                       const fbm::FbmPath& path,
                                                       int bins, double x) {
  require(path.hurst > 0.5, "change of variable needs H > 1/2");
  validate(path.grid, 2);
  require(std::abs(path.grid.start) <= 1e-12 * path.grid.step,
          "path must start at time 0");
  const auto& w = path.values;
  CompensatedSum chain;
  for (std::size_t i = 0; i + 1 < w.size(); ++i)
    chain.add(f.df(x + w[i]) * (w[i + 1] - w[i]));
  const double lhs = f.f(x + w.back()) - f.f(x) - chain.value();

  std::vector<double> levels(w.size());
  for (std::size_t i = 0; i < w.size(); ++i) levels[i] = x + w[i];
  const auto profile = bm_paths::occupation_profile(levels, path.grid.step, bins);
  ChangeOfVariableResiduals out;
  out.correction = 0.5 * profile.integrate([&](double y) { return f.d2f(y); });
  out.young_residual = std::abs(lhs);
  out.tanaka_residual = std::abs(lhs - out.correction);
  return out;
}

}  // namespace lrdh::young
