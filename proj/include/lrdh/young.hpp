#pragma once

// Left-point Riemann-Stieltjes (Young) sums and residual checks built on them.

#include <string>
#include <vector>

#include "lrdh/fbm.hpp"
#include "lrdh/grid.hpp"

namespace lrdh::young {

struct SampledFunction {
  GridSpec grid;
  std::vector<double> values;
};

/// sum_i f(t_i) [g(t_{i+1}) - g(t_i)]; throws GridMismatch unless both
/// functions live on the same grid.
double young_integral(const SampledFunction& f, const SampledFunction& g);

/// Discrete gamma-Hoelder seminorm: max over dyadic gaps k <= count/4 of
/// max_i |f_{i+k} - f_i| / (k step)^gamma.
double holder_seminorm(const SampledFunction& f, double gamma);

/// sup |f| + holder_seminorm(f, gamma).
double holder_norm(const SampledFunction& f, double gamma);

struct ContinuityResidual {
  double residual = 0.0;  // |int f' dg' - int f dg|
  double bound = 0.0;     // constant * (norm terms)
  double constant = 0.0;  // the reported constant
  double norm_terms = 0.0;
};

/// Young-Loeve continuity check for exponents gamma_f + gamma_g > 1. The
/// constant accounts for the discrete seminorm only sampling dyadic gaps.
ContinuityResidual continuity_residual(const SampledFunction& f,
                                       const SampledFunction& f_perturbed,
                                       const SampledFunction& g,
                                       const SampledFunction& g_perturbed,
                                       double gamma_f, double gamma_g);

/// C^2 test function with bounded derivatives.
struct TestFunction {
  std::string name;
  double (*f)(double);
  double (*df)(double);
  double (*d2f)(double);
};

/// "constant", "linear", "cos", "gaussian-bump", "cubic-cutoff".
TestFunction test_function(const std::string& name);

struct ChangeOfVariableResiduals {
  double young_residual = 0.0;   // |f(x+W_t) - f(x) - int f'(x+W) dW|
  double tanaka_residual = 0.0;  // same, less (1/2) int L_t(y) f''(y) dy
  double correction = 0.0;       // (1/2) int L_t(y) f''(y) dy
};

/// Path must start at t = 0 with W(0) = 0; local time is the binned level
/// occupation of x + W over the path horizon. Requires hurst > 1/2.
ChangeOfVariableResiduals change_of_variable_residuals(
    const TestFunction& f, const fbm::FbmPath& path, int bins, double x = 0.0);

}  // namespace lrdh::young
