#include "lrdh/fk_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "lrdh/error.hpp"
#include "lrdh/numeric.hpp"
#include "lrdh/parallel.hpp"
#include "lrdh/rng.hpp"
#include "lrdh/young.hpp"

namespace lrdh::fk {
namespace {

std::vector<double> parse_params(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      out.push_back(std::stod(item));
    } catch (const std::exception&) {
      fail(ErrorCode::kInvalidArgument, "bad initial-condition parameter '" + item + "'");
    }
  }
  return out;
}

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

}  // namespace

InitialCondition parse_initial_condition(const std::string& id) {
  const auto colon = id.find(':');
  const std::string name = id.substr(0, colon);
  const auto params =
      colon == std::string::npos ? std::vector<double>{} : parse_params(id.substr(colon + 1));
  auto param = [&](std::size_t i, double fallback) {
    return i < params.size() ? params[i] : fallback;
  };
  InitialCondition ic;
  ic.id = id;
  if (name == "gaussian-bump") {
    const double amp = param(0, 1.0);
    const double width = param(1, 0.25);
    require(width > 0.0, "bump width must be > 0");
    ic.phi = [amp, width](double y) { return amp * std::exp(-0.5 * y * y / (width * width)); };
  } else if (name == "cosine") {
    ic.phi = [](double y) { return std::cos(y); };
  } else if (name == "indicator-with-smoothing") {
    const double half = param(0, 1.0);
    const double smooth = param(1, 0.1);
    require(half > 0.0 && smooth > 0.0, "indicator parameters must be > 0");
    ic.phi = [half, smooth](double y) {
      return 0.5 * (std::tanh((y + half) / smooth) - std::tanh((y - half) / smooth));
    };
  } else if (name == "constant-one") {
    ic.phi = [](double) { return 1.0; };
  } else {
    fail(ErrorCode::kInvalidArgument, "unknown initial condition '" + id + "'");
  }
  return ic;
}

double Potential::kappa() const {
  if (zero) return 0.0;
  return coeffs[1] * coeffs[1] * cov.kappa_g();
}

double Potential::beta() const {
  const double h = cov.hurst();
  return std::sqrt(kappa() / (h * (2.0 * h - 1.0)));
}

double Potential::covariance(double x) const {
  if (zero) return 0.0;
  return randfield::transformed_covariance(cov, coeffs, x,
                                           static_cast<int>(coeffs.size()) - 1);
}

Potential make_potential(const randfield::CovarianceSpec& cov,
                         const std::string& transform_id) {
  randfield::validate(cov);
  Potential p;
  p.cov = cov;
  p.transform = hermite::parse_transform(transform_id);
  p.coeffs = hermite::hermite_coefficients(p.transform.phi, 8, 128);
  p.rank = hermite::hermite_rank(p.coeffs);
  return p;
}

Potential zero_potential(const randfield::CovarianceSpec& cov) {
  randfield::validate(cov);
  Potential p;
  p.cov = cov;
  p.transform = {"zero", [](double) { return 0.0; }, true, {0.0}};
  p.coeffs.assign(9, 0.0);
  p.rank = 0;
  p.zero = true;
  return p;
}

double SolverConfig::span() const { return 6.0 * std::sqrt(t); }

void validate(const SolverConfig& cfg) {
  require(cfg.alpha > 0.0 && cfg.alpha < 1.0, "alpha must lie in (0,1)");
  require(cfg.epsilon > 0.0 && std::isfinite(cfg.epsilon), "epsilon must be > 0");
  require(cfg.t > 0.0 && std::isfinite(cfg.t), "t must be > 0");
  require(std::isfinite(cfg.x), "x must be finite");
  require(static_cast<bool>(cfg.phi.phi), "initial condition is unset");
  require(cfg.n_paths >= 1 && cfg.n_steps >= 1, "n_paths and n_steps must be >= 1");
  require(cfg.bins >= 8, "bins must be >= 8");
  require(std::isfinite(cfg.beta) && cfg.beta >= 0.0, "beta must be >= 0");
}

// ---------------------------------------------------------------------------
// MicroscaleEnv

MicroscaleEnv::MicroscaleEnv(randfield::FieldSample a_field, double epsilon,
                             double alpha)
    : field_(std::move(a_field)), epsilon_(epsilon), alpha_(alpha) {
  validate(field_.grid, 2);
  require(field_.values.size() == field_.grid.count, "field values do not match grid");
  require(epsilon > 0.0 && std::isfinite(epsilon), "epsilon must be > 0");
  require(alpha > 0.0 && alpha < 1.0, "alpha must lie in (0,1)");
  scale_ = std::pow(epsilon_, -alpha_ / 2.0);
  dx_ = epsilon_ * field_.grid.step;
  lo_ = epsilon_ * field_.grid.start;
  hi_ = epsilon_ * field_.grid.end();

  const auto& a = field_.values;
  const std::size_t n = a.size();
  w_nodes_.assign(n, 0.0);
  phi_nodes_.assign(n, 0.0);
  for (std::size_t k = 0; k + 1 < n; ++k) {
    const double d = a[k + 1] - a[k];
    w_nodes_[k + 1] = w_nodes_[k] + scale_ * dx_ * (a[k] + 0.5 * d);
    phi_nodes_[k + 1] =
        phi_nodes_[k] + dx_ * (w_nodes_[k] + scale_ * dx_ * (0.5 * a[k] + d / 6.0));
  }
  anchor_ = (lo_ <= 0.0 && 0.0 <= hi_) ? 0.0 : lo_;
  double tau = 0.0;
  const std::size_t k = cell(anchor_, tau);
  const double d = a[k + 1] - a[k];
  w_anchor_ = w_nodes_[k] + scale_ * dx_ * (a[k] * tau + 0.5 * d * tau * tau);
  phi_anchor_ = phi_nodes_[k] +
                dx_ * (w_nodes_[k] * tau +
                       scale_ * dx_ * (0.5 * a[k] * tau * tau + d * tau * tau * tau / 6.0));
}

bool MicroscaleEnv::covers(double y0, double y1) const {
  const double slack = 1e-9 * dx_;
  return std::min(y0, y1) >= lo_ - slack && std::max(y0, y1) <= hi_ + slack;
}

std::size_t MicroscaleEnv::cell(double y, double& tau) const {
  const double pos = (y - lo_) / dx_;
  const double last = static_cast<double>(field_.values.size() - 1);
  if (!(pos >= -1e-9 && pos <= last + 1e-9))
    fail(ErrorCode::kCoverageError, "level outside the environment window");
  const double clamped = std::clamp(pos, 0.0, last);
  const auto k = std::min(static_cast<std::size_t>(clamped), field_.values.size() - 2);
  tau = clamped - static_cast<double>(k);
  return k;
}

double MicroscaleEnv::a_at(double y) const {
  double tau = 0.0;
  const std::size_t k = cell(y, tau);
  const auto& a = field_.values;
  return a[k] + tau * (a[k + 1] - a[k]);
}

double MicroscaleEnv::w(double y) const {
  double tau = 0.0;
  const std::size_t k = cell(y, tau);
  const auto& a = field_.values;
  const double d = a[k + 1] - a[k];
  return w_nodes_[k] + scale_ * dx_ * (a[k] * tau + 0.5 * d * tau * tau) - w_anchor_;
}

double MicroscaleEnv::big_phi(double y) const {
  double tau = 0.0;
  const std::size_t k = cell(y, tau);
  const auto& a = field_.values;
  const double d = a[k + 1] - a[k];
  const double raw =
      phi_nodes_[k] +
      dx_ * (w_nodes_[k] * tau +
             scale_ * dx_ * (0.5 * a[k] * tau * tau + d * tau * tau * tau / 6.0));
  return raw - phi_anchor_ - w_anchor_ * (y - anchor_);
}

// ---------------------------------------------------------------------------
// Environments

MicroscaleEnv make_microscale_env(const Potential& potential,
                                  const SolverConfig& cfg,
                                  std::uint64_t env_seed) {
  validate(cfg);
  constexpr double kStep = 1.0 / 8.0;  // field units: 8 nodes per unit scale
  const double z_lo = (cfg.x - cfg.span()) / cfg.epsilon;
  const double z_hi = (cfg.x + cfg.span()) / cfg.epsilon;
  const double start = std::floor(z_lo / kStep) * kStep;
  const auto count = static_cast<std::size_t>(std::ceil((z_hi - start) / kStep)) + 1;
  GridSpec grid{start, kStep, count};
  if (potential.zero)
    return MicroscaleEnv({grid, std::vector<double>(count, 0.0), env_seed},
                         cfg.epsilon, cfg.alpha);
  auto g = randfield::sample_field(potential.cov, grid, env_seed);
  auto a = hermite::apply_transform(potential.transform.phi, g);
  const double v0 = potential.coeffs[0];
  for (double& v : a.values) v -= v0;
  return MicroscaleEnv(std::move(a), cfg.epsilon, cfg.alpha);
}

LimitEnv make_limit_env(const SolverConfig& cfg, std::uint64_t env_seed,
                        double span_override) {
  validate(cfg);
  const double span = span_override > 0.0 ? span_override : cfg.span();
  const double lo = std::min(cfg.x - span, 0.0);
  const double hi = std::max(cfg.x + span, 0.0);
  const double step = span / 2048.0;
  const double start = std::floor(lo / step) * step;
  const auto count = static_cast<std::size_t>(std::ceil((hi - start) / step)) + 1;
  return {fbm::sample_fbm_fast(cfg.hurst(), GridSpec{start, step, count}, env_seed),
          cfg.beta};
}

double w_eps(const randfield::FieldSample& a_field, double epsilon, double alpha,
             double x) {
  require(std::isfinite(x), "x must be finite");
  if (x == 0.0) return 0.0;
  MicroscaleEnv env(a_field, epsilon, alpha);
  if (!env.covers(0.0, x))
    fail(ErrorCode::kCoverageError, "microgrid does not span [0, x]");
  return env.w(x) - env.w(0.0);
}

// ---------------------------------------------------------------------------
// Y representations

namespace {

void check_coverage(const MicroscaleEnv& env, const bm_paths::BrownianPath& path,
                    double x) {
  const auto [lo, hi] = std::minmax_element(path.positions.begin(), path.positions.end());
  if (!env.covers(x + *lo, x + *hi))
    fail(ErrorCode::kCoverageError, "path leaves the environment window");
}

young::SampledFunction masses_as_function(const bm_paths::LocalTimeProfile& p) {
  young::SampledFunction f{p.edges, p.masses};
  f.values.push_back(0.0);
  return f;
}

}  // namespace

double y_direct(const MicroscaleEnv& env, const bm_paths::BrownianPath& path,
                const SolverConfig& cfg) {
  check_coverage(env, path, cfg.x);
  const auto& a = env.field().values;
  const double lo = env.lo();
  const double inv_dx = 1.0 / (env.epsilon() * env.field().grid.step);
  const std::size_t last_cell = a.size() - 2;
  CompensatedSum acc;
  for (std::size_t i = 0; i < path.n; ++i) {
    const double pos = std::max((cfg.x + path.positions[i] - lo) * inv_dx, 0.0);
    const std::size_t k = std::min(static_cast<std::size_t>(pos), last_cell);
    const double tau = pos - static_cast<double>(k);
    acc.add(a[k] + tau * (a[k + 1] - a[k]));
  }
  return std::pow(env.epsilon(), -env.alpha() / 2.0) * acc.value() * path.dt();
}

double y_occupation(const MicroscaleEnv& env,
                    const bm_paths::LocalTimeProfile& profile,
                    const SolverConfig& cfg) {
  const auto shifted = profile.shifted(cfg.x);
  const auto& e = shifted.edges;
  // Outer edges pad the path range by one empty bin; only inner edges need
  // to be covered.
  if (!env.covers(e.at(1), e.at(e.count - 2)))
    fail(ErrorCode::kCoverageError, "local-time support leaves the window");
  young::SampledFunction w{e, std::vector<double>(e.count)};
  for (std::size_t k = 0; k < e.count; ++k)
    w.values[k] = env.w(std::clamp(e.at(k), env.lo(), env.hi()));
  return young::young_integral(masses_as_function(shifted), w);
}

double y_occupation(const MicroscaleEnv& env, const bm_paths::BrownianPath& path,
                    const SolverConfig& cfg) {
  return y_occupation(env, bm_paths::local_time(path, cfg.bins), cfg);
}

double y_ito(const MicroscaleEnv& env, const bm_paths::BrownianPath& path,
             const SolverConfig& cfg) {
  check_coverage(env, path, cfg.x);
  std::vector<double> h(path.n);
  for (std::size_t i = 0; i < path.n; ++i) h[i] = env.w(cfg.x + path.positions[i]);
  const double boundary = env.big_phi(cfg.x + path.end()) - env.big_phi(cfg.x);
  return 2.0 * boundary - 2.0 * bm_paths::ito_integral(h, path);
}

double y_limit(const LimitEnv& env, const bm_paths::LocalTimeProfile& profile,
               const SolverConfig& cfg) {
  const auto shifted = profile.shifted(cfg.x);
  const auto& e = shifted.edges;
  const double lo = env.w.grid.start;
  const double hi = env.w.grid.end();
  if (e.at(1) < lo || e.at(e.count - 2) > hi)
    fail(ErrorCode::kCoverageError, "local-time support leaves the fBm window");
  young::SampledFunction w{e, std::vector<double>(e.count)};
  for (std::size_t k = 0; k < e.count; ++k)
    w.values[k] = fbm::interpolate(env.w, std::clamp(e.at(k), lo, hi));
  return env.beta * young::young_integral(masses_as_function(shifted), w);
}

double y_limit(const LimitEnv& env, const bm_paths::BrownianPath& path,
               const SolverConfig& cfg) {
  return y_limit(env, bm_paths::local_time(path, cfg.bins), cfg);
}

// ---------------------------------------------------------------------------
// Solution

std::vector<bm_paths::BrownianPath> inner_paths(const SolverConfig& cfg,
                                                std::uint64_t env_seed) {
  std::vector<bm_paths::BrownianPath> paths;
  paths.reserve(cfg.n_paths);
  for (std::size_t j = 0; j < cfg.n_paths; ++j) {
    const std::uint64_t seed = cfg.common_paths
                                   ? derive_seed(cfg.seed, {0xB0, j})
                                   : derive_seed(cfg.seed, {0xB1, env_seed, j});
    paths.push_back(bm_paths::sample_brownian(cfg.t, cfg.n_steps, seed));
  }
  return paths;
}

std::vector<double> path_functionals(
    const Environment& env, const SolverConfig& cfg,
    std::span<const bm_paths::BrownianPath> paths,
    std::span<const bm_paths::LocalTimeProfile> profiles) {
  require(profiles.empty() || profiles.size() == paths.size(),
          "one profile per path expected");
  std::vector<double> ys(paths.size(), kNaN);
  for (std::size_t j = 0; j < paths.size(); ++j) {
    try {
      if (const auto* micro = std::get_if<MicroscaleEnv>(&env)) {
        ys[j] = y_direct(*micro, paths[j], cfg);
      } else {
        const auto& lim = std::get<LimitEnv>(env);
        ys[j] = profiles.empty() ? y_limit(lim, paths[j], cfg)
                                 : y_limit(lim, profiles[j], cfg);
      }
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kCoverageError) throw;
    }
  }
  return ys;
}

SolutionSample solve_u(const Environment& env, const SolverConfig& cfg,
                       std::span<const bm_paths::BrownianPath> paths,
                       std::span<const bm_paths::LocalTimeProfile> profiles) {
  validate(cfg);
  const auto ys = path_functionals(env, cfg, paths, profiles);
  SolutionSample out;
  out.env_seed = std::visit(
      [](const auto& e) -> std::uint64_t {
        if constexpr (std::is_same_v<std::decay_t<decltype(e)>, MicroscaleEnv>)
          return e.seed();
        else
          return e.w.seed;
      },
      env);
  std::vector<double> terms;
  terms.reserve(ys.size());
  for (std::size_t j = 0; j < ys.size(); ++j) {
    if (std::isnan(ys[j])) {
      ++out.exits;
      continue;
    }
    if (ys[j] > kExpGuard)
      fail(ErrorCode::kOverflowGuard, "exp argument exceeds 700");
    terms.push_back(cfg.phi.phi(cfg.x + paths[j].end()) * std::exp(ys[j]));
  }
  if (terms.empty()) fail(ErrorCode::kCoverageError, "every path left the window");
  const auto ms = mean_se(terms);
  out.value = ms.mean;
  out.inner_se = ms.se;
  return out;
}

SolutionSample solve_u(const Environment& env, const SolverConfig& cfg) {
  const std::uint64_t env_seed = std::visit(
      [](const auto& e) -> std::uint64_t {
        if constexpr (std::is_same_v<std::decay_t<decltype(e)>, MicroscaleEnv>)
          return e.seed();
        else
          return e.w.seed;
      },
      env);
  const auto paths = inner_paths(cfg, env_seed);
  return solve_u(env, cfg, paths);
}

std::vector<double> exponential_moment_probe(const Potential& potential,
                                             SolverConfig cfg, double p,
                                             std::span<const double> eps_list,
                                             std::size_t n_env, int threads) {
  require(std::abs(p) <= 4.0, "|p| must be <= 4");
  require(n_env >= 1, "need at least one environment");
  cfg.beta = potential.beta();
  const auto paths = inner_paths(cfg);
  std::vector<double> out;
  for (std::size_t ie = 0; ie < eps_list.size(); ++ie) {
    SolverConfig c = cfg;
    c.epsilon = eps_list[ie];
    validate(c);
    std::vector<double> env_sums(n_env, 0.0);
    std::vector<std::size_t> env_counts(n_env, 0);
    parallel_for(n_env, threads, [&](std::size_t e) {
      const auto env = make_microscale_env(potential, c, derive_seed(cfg.seed, {0xE0, e}));
      CompensatedSum acc;
      for (const auto& path : paths) {
        double y;
        try {
          y = y_direct(env, path, c);
        } catch (const Error& err) {
          if (err.code() != ErrorCode::kCoverageError) throw;
          continue;
        }
        if (p * y > kExpGuard) fail(ErrorCode::kOverflowGuard, "exp argument exceeds 700");
        acc.add(std::exp(p * y));
        ++env_counts[e];
      }
      env_sums[e] = acc.value();
    });
    CompensatedSum total;
    std::size_t count = 0;
    for (std::size_t e = 0; e < n_env; ++e) {
      total.add(env_sums[e]);
      count += env_counts[e];
    }
    require(count > 0, "every path left the window");
    out.push_back(total.value() / static_cast<double>(count));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Oracles

double conditional_variance_microscale(const Potential& potential,
                                       const bm_paths::BrownianPath& path,
                                       double epsilon) {
  const double alpha = potential.cov.alpha;
  const double dt = path.dt();
  CompensatedSum acc;
  for (std::size_t s = 0; s < path.n; ++s)
    for (std::size_t r = 0; r < path.n; ++r)
      acc.add(potential.covariance((path.positions[s] - path.positions[r]) / epsilon));
  return std::pow(epsilon, -alpha) * acc.value() * dt * dt;
}

double conditional_variance_limit(const bm_paths::BrownianPath& path,
                                  double hurst, double beta, double diag_width) {
  require(diag_width > 0.0, "diagonal width must be > 0");
  const double p = 2.0 * hurst - 2.0;
  // Cell average of |d|^p over |d| < diag_width.
  const double diag_value = std::pow(diag_width, p) / (p + 1.0);
  const double dt = path.dt();
  CompensatedSum acc;
  for (std::size_t s = 0; s < path.n; ++s)
    for (std::size_t r = 0; r < path.n; ++r) {
      const double d = std::abs(path.positions[s] - path.positions[r]);
      acc.add(d < diag_width ? diag_value : std::pow(d, p));
    }
  return beta * beta * hurst * (2.0 * hurst - 1.0) * acc.value() * dt * dt;
}

double abs_normal_moment(double p) {
  require(p > -1.0, "E|Z|^p needs p > -1");
  return std::pow(2.0, p / 2.0) * std::tgamma((p + 1.0) / 2.0) / std::sqrt(M_PI);
}

double self_interaction_constant(double hurst) {
  require(hurst > 0.5 && hurst < 1.0, "H must lie in (1/2,1)");
  return abs_normal_moment(2.0 * hurst - 2.0) * 2.0 / (hurst * (hurst + 1.0));
}

}  // namespace lrdh::fk
