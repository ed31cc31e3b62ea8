#pragma once

// Nonlinearities Phi, their Hermite expansions E[Phi(Z) He_q(Z)], and ranks.

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "lrdh/randfield.hpp"

namespace lrdh::hermite {

using ScalarFn = std::function<double(double)>;

/// Probabilists' Hermite polynomial He_q via the three-term recurrence.
double hermite_polynomial(int q, double z);

/// A catalog nonlinearity: "identity", "cubic", "exp", "poly:c0,c1,...".
struct Transform {
  std::string name;
  ScalarFn phi;
  /// |Phi''| bounded on the real line.
  bool bounded_second_derivative = true;
  /// Polynomial coefficients when the entry is polynomial (empty otherwise).
  std::vector<double> poly;
};

Transform parse_transform(const std::string& id);

/// V_0..V_{q_max} by Gauss-Hermite quadrature against the standard normal.
/// Repeats the computation with 2*quad_points nodes and throws
/// QuadratureUnstable if any coefficient moves by more than 1e-8.
std::vector<double> hermite_coefficients(const ScalarFn& phi, int q_max,
                                         int quad_points = 128);

/// Smallest q >= 1 with |V_q| > 1e-10; throws RankNotFound otherwise.
int hermite_rank(std::span<const double> coefficients);

/// sum_q V_q^2 / q!, which equals E[Phi(Z)^2] when the expansion is complete.
double parseval_sum(std::span<const double> coefficients);

/// Pointwise Phi on the sample; grid and seed are preserved.
randfield::FieldSample apply_transform(const ScalarFn& phi,
                                       const randfield::FieldSample& field);

/// Gauss-Hermite nodes and weights for E[f(Z)], Z ~ N(0,1); weights sum to 1.
struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};
GaussRule gauss_hermite_rule(int points);

}  // namespace lrdh::hermite
