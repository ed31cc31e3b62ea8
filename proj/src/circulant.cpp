#include "lrdh/circulant.hpp"

#include <fftw3.h>

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <cmath>
#include <complex>
#include <map>
#include <mutex>
#include <random>

#include "lrdh/error.hpp"

namespace lrdh::detail {
namespace {

std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

// In-place forward DFT. FFTW_ESTIMATE keeps the chosen algorithm, and hence
// the rounding, identical from run to run.
void forward_dft(std::vector<std::complex<double>>& data) {
  auto* ptr = reinterpret_cast<fftw_complex*>(data.data());
  fftw_plan plan;
  {
    std::lock_guard lock(fftw_planner_mutex());
    plan = fftw_plan_dft_1d(static_cast<int>(data.size()), ptr, ptr,
                            FFTW_FORWARD, FFTW_ESTIMATE);
  }
  fftw_execute(plan);
  std::lock_guard lock(fftw_planner_mutex());
  fftw_destroy_plan(plan);
}

std::size_t next_pow2(std::size_t v) {
  std::size_t p = 1;
  while (p < v) p <<= 1;
  return p;
}

template <class T>
class KeyedCache {
 public:
  template <class Make>
  std::shared_ptr<const T> get(const std::string& key, Make&& make) {
    {
      std::lock_guard lock(mutex_);
      if (auto it = entries_.find(key); it != entries_.end()) return it->second;
    }
    auto value = make();
    std::lock_guard lock(mutex_);
    if (entries_.size() >= kCapacity) entries_.clear();
    return entries_.emplace(key, std::move(value)).first->second;
  }

 private:
  static constexpr std::size_t kCapacity = 32;
  std::mutex mutex_;
  std::map<std::string, std::shared_ptr<const T>> entries_;
};

}  // namespace

std::shared_ptr<const CirculantPlan> embed_covariance(
    const std::function<double(std::size_t)>& lag_cov, std::size_t n,
    std::size_t max_factor, double tolerance) {
  require(n >= 1, "embedding needs at least one point");
  const std::size_t m_min = next_pow2(std::max<std::size_t>(2 * (n - 1), 2));
  for (std::size_t factor = 1; factor <= max_factor / 2; factor *= 2) {
    const std::size_t m = m_min * factor;
    std::vector<std::complex<double>> row(m);
    for (std::size_t k = 0; k <= m / 2; ++k) row[k] = lag_cov(k);
    for (std::size_t k = m / 2 + 1; k < m; ++k) row[k] = row[m - k];
    forward_dft(row);
    double min_weight = 0.0;
    for (const auto& v : row) min_weight = std::min(min_weight, v.real() / m);
    if (min_weight < -tolerance) continue;
    auto plan = std::make_shared<CirculantPlan>();
    plan->n = n;
    plan->m = m;
    plan->sqrt_weights.resize(m);
    for (std::size_t k = 0; k < m; ++k)
      plan->sqrt_weights[k] = std::sqrt(std::max(row[k].real() / m, 0.0));
    return plan;
  }
  return nullptr;
}

std::vector<double> circulant_draw(const CirculantPlan& plan, Rng& rng) {
  std::normal_distribution<double> normal;
  std::vector<std::complex<double>> z(plan.m);
  for (std::size_t k = 0; k < plan.m; ++k) {
    const double re = normal(rng);
    const double im = normal(rng);
    z[k] = plan.sqrt_weights[k] * std::complex<double>(re, im);
  }
  forward_dft(z);
  std::vector<double> out(plan.n);
  for (std::size_t i = 0; i < plan.n; ++i) out[i] = z[i].real();
  return out;
}

std::shared_ptr<const CirculantPlan> cached_plan(
    const std::string& key, const std::function<double(std::size_t)>& lag_cov,
    std::size_t n) {
  static KeyedCache<CirculantPlan> cache;
  // A failed embedding is cached as an empty plan (m == 0).
  auto plan = cache.get(key, [&]() -> std::shared_ptr<const CirculantPlan> {
    auto p = embed_covariance(lag_cov, n);
    if (p) return p;
    auto empty = std::make_shared<CirculantPlan>();
    empty->n = n;
    return empty;
  });
  return plan->m == 0 ? nullptr : plan;
}

std::shared_ptr<const std::vector<double>> cached_cholesky(
    const std::string& key,
    const std::function<double(std::size_t, std::size_t)>& cov, std::size_t n) {
  static KeyedCache<std::vector<double>> cache;
  return cache.get(key, [&] {
    Eigen::MatrixXd sigma(n, n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j <= i; ++j) sigma(i, j) = sigma(j, i) = cov(i, j);
    Eigen::LLT<Eigen::MatrixXd> llt(sigma);
    if (llt.info() != Eigen::Success) {
      sigma.diagonal().array() += 1e-12;
      llt.compute(sigma);
      if (llt.info() != Eigen::Success)
        fail(ErrorCode::kCholeskyFailure,
             "covariance matrix is not numerically positive definite (n=" +
                 std::to_string(n) + ")");
    }
    const Eigen::MatrixXd lower = llt.matrixL();
    auto out = std::make_shared<std::vector<double>>(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j <= i; ++j) (*out)[i * n + j] = lower(i, j);
    return std::shared_ptr<const std::vector<double>>(std::move(out));
  });
}

std::vector<double> cholesky_draw(const std::vector<double>& lower,
                                  std::size_t n, Rng& rng) {
  std::normal_distribution<double> normal;
  std::vector<double> z(n);
  for (auto& v : z) v = normal(rng);
  std::vector<double> out(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double* row = lower.data() + i * n;
    double acc = 0.0;
    for (std::size_t j = 0; j <= i; ++j) acc += row[j] * z[j];
    out[i] = acc;
  }
  return out;
}

}  // namespace lrdh::detail
