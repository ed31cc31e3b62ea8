#include "lrdh/hermite.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <map>
#include <mutex>
#include <sstream>

#include "lrdh/error.hpp"

namespace lrdh::hermite {

double hermite_polynomial(int q, double z) {
  require(q >= 0, "Hermite degree must be >= 0");
  if (q == 0) return 1.0;
  double prev = 1.0;
  double cur = z;
  for (int k = 1; k < q; ++k) {
    const double next = z * cur - k * prev;
    prev = cur;
    cur = next;
  }
  return cur;
}

Transform parse_transform(const std::string& id) {
  if (id == "identity") return {id, [](double z) { return z; }, true, {0.0, 1.0}};
  if (id == "cubic")
    return {id, [](double z) { return z * z * z; }, false, {0.0, 0.0, 0.0, 1.0}};
  if (id == "exp") return {id, [](double z) { return std::exp(z); }, false, {}};
  if (id.rfind("poly:", 0) == 0) {
    std::vector<double> c;
    std::stringstream ss(id.substr(5));
    std::string item;
    while (std::getline(ss, item, ',')) {
      try {
        std::size_t used = 0;
        c.push_back(std::stod(item, &used));
        require(used == item.size(), "");
      } catch (const std::exception&) {
        fail(ErrorCode::kInvalidArgument, "bad polynomial coefficient '" + item + "'");
      }
    }
    require(!c.empty(), "poly: needs at least one coefficient");
    while (c.size() > 1 && c.back() == 0.0) c.pop_back();
    const bool bounded = c.size() <= 3;
    auto phi = [c](double z) {
      double acc = 0.0;
      for (auto it = c.rbegin(); it != c.rend(); ++it) acc = acc * z + *it;
      return acc;
    };
    return {id, phi, bounded, c};
  }
  fail(ErrorCode::kInvalidArgument, "unknown transform '" + id + "'");
}

GaussRule gauss_hermite_rule(int points) {
  require(points >= 2, "Gauss-Hermite rule needs >= 2 points");
  static std::mutex mutex;
  static std::map<int, GaussRule> cache;
  std::lock_guard lock(mutex);
  if (auto it = cache.find(points); it != cache.end()) return it->second;

  // Golub-Welsch: Jacobi matrix of the probabilists' Hermite recurrence.
  Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(points, points);
  for (int k = 1; k < points; ++k) {
    jacobi(k - 1, k) = std::sqrt(static_cast<double>(k));
    jacobi(k, k - 1) = jacobi(k - 1, k);
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(jacobi);
  if (solver.info() != Eigen::Success)
    fail(ErrorCode::kQuadratureUnstable, "Jacobi eigenproblem did not converge");
  GaussRule rule;
  rule.nodes.resize(points);
  rule.weights.resize(points);
  // Weights from the Christoffel function 1 / sum_k p_k(z)^2 with orthonormal
  // p_k: squared eigenvector entries lose all relative accuracy in the tails,
  // where exp-like integrands still see them.
  for (int i = 0; i < points; ++i) {
    const double z = solver.eigenvalues()(i);
    double prev = 0.0, cur = 1.0, sum = 1.0;
    for (int k = 1; k < points; ++k) {
      const double next = (z * cur - std::sqrt(static_cast<double>(k - 1)) * prev) /
                          std::sqrt(static_cast<double>(k));
      prev = cur;
      cur = next;
      sum += cur * cur;
    }
    rule.nodes[i] = z;
    rule.weights[i] = 1.0 / sum;
  }
  return cache.emplace(points, std::move(rule)).first->second;
}

namespace {

std::vector<double> coefficients_with(const ScalarFn& phi, int q_max,
                                      const GaussRule& rule) {
  std::vector<double> v(q_max + 1, 0.0);
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
    const double z = rule.nodes[i];
    const double wf = rule.weights[i] * phi(z);
    if (wf == 0.0) continue;
    double prev = 1.0;
    double cur = z;
    v[0] += wf;
    if (q_max >= 1) v[1] += wf * z;
    for (int q = 1; q < q_max; ++q) {
      const double next = z * cur - q * prev;
      prev = cur;
      cur = next;
      v[q + 1] += wf * cur;
    }
  }
  return v;
}

}  // namespace

std::vector<double> hermite_coefficients(const ScalarFn& phi, int q_max,
                                         int quad_points) {
  require(q_max >= 1, "q_max must be >= 1");
  require(quad_points >= 64, "quad_points must be >= 64");
  const auto coarse = coefficients_with(phi, q_max, gauss_hermite_rule(quad_points));
  const auto fine = coefficients_with(phi, q_max, gauss_hermite_rule(2 * quad_points));
  for (int q = 0; q <= q_max; ++q) {
    if (!std::isfinite(fine[q]) || std::abs(fine[q] - coarse[q]) > 1e-8)
      fail(ErrorCode::kQuadratureUnstable,
           "V_" + std::to_string(q) + " moved by more than 1e-8 when doubling nodes");
  }
  return fine;
}

int hermite_rank(std::span<const double> coefficients) {
  require(coefficients.size() >= 2, "need at least V_0 and V_1");
  for (std::size_t q = 1; q < coefficients.size(); ++q)
    if (std::abs(coefficients[q]) > 1e-10) return static_cast<int>(q);
  fail(ErrorCode::kRankNotFound,
       "no nonzero coefficient up to q = " + std::to_string(coefficients.size() - 1));
}

double parseval_sum(std::span<const double> coefficients) {
  double acc = 0.0;
  double fact = 1.0;
  for (std::size_t q = 0; q < coefficients.size(); ++q) {
    if (q > 1) fact *= static_cast<double>(q);
    acc += coefficients[q] * coefficients[q] / fact;
  }
  return acc;
}

randfield::FieldSample apply_transform(const ScalarFn& phi,
                                       const randfield::FieldSample& field) {
  require(field.values.size() == field.grid.count,
          "field values do not match the grid");
  randfield::FieldSample out{field.grid, {}, field.seed};
  out.values.resize(field.values.size());
  for (std::size_t i = 0; i < field.values.size(); ++i) {
    const double v = phi(field.values[i]);
    if (!std::isfinite(v))
      fail(ErrorCode::kTransformOverflow,
           "non-finite transform output at grid index " + std::to_string(i));
    out.values[i] = v;
  }
  return out;
}

}  // namespace lrdh::hermite
