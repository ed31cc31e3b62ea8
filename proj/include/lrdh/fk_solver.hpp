#pragma once

// Feynman-Kac solution of the rescaled parabolic problem: the potential
// functional Y along Brownian paths by three representations, the solution
// u_eps per microscale environment, and the limit u per fBm environment.

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "lrdh/bm_paths.hpp"
#include "lrdh/fbm.hpp"
#include "lrdh/hermite.hpp"
#include "lrdh/randfield.hpp"

namespace lrdh::fk {

/// Initial condition phi: "gaussian-bump[:amp,width]", "cosine",
/// "indicator-with-smoothing[:half_width,smoothing]", "constant-one".
struct InitialCondition {
  std::string id = "constant-one";
  std::function<double(double)> phi;
};
InitialCondition parse_initial_condition(const std::string& id);

/// Random potential a = Phi(g) - V_0 together with its expansion data.
struct Potential {
  randfield::CovarianceSpec cov;
  hermite::Transform transform;
  std::vector<double> coeffs;  // V_0..V_8
  int rank = 1;
  bool zero = false;  // a == 0 control

  double kappa() const;  // V_1^2 kappa_g
  double beta() const;   // sqrt(kappa / (H(2H-1)))
  /// R_a(x) by the truncated Hermite series.
  double covariance(double x) const;
};

Potential make_potential(const randfield::CovarianceSpec& cov,
                         const std::string& transform_id);
Potential zero_potential(const randfield::CovarianceSpec& cov);

struct SolverConfig {
  double alpha = 0.5;
  double epsilon = 0.1;
  double t = 1.0;
  double x = 0.0;
  InitialCondition phi = parse_initial_condition("constant-one");
  std::size_t n_paths = 100;
  std::size_t n_steps = 1000;
  int bins = 256;
  std::uint64_t seed = 0;
  double beta = 1.0;
  bool common_paths = true;

  double hurst() const { return 1.0 - alpha / 2.0; }
  /// Half-width of the environment window around x.
  double span() const;
};

void validate(const SolverConfig& cfg);

/// Centered potential on the eps-microgrid, stored in field units z = y/eps
/// (step 1/8), with exact antiderivatives of its piecewise-linear interpolant.
class MicroscaleEnv {
 public:
  MicroscaleEnv(randfield::FieldSample a_field, double epsilon, double alpha);

  const randfield::FieldSample& field() const { return field_; }
  double epsilon() const { return epsilon_; }
  double alpha() const { return alpha_; }
  std::uint64_t seed() const { return field_.seed; }

  /// Covered level interval in x units.
  double lo() const { return lo_; }
  double hi() const { return hi_; }
  bool covers(double y0, double y1) const;

  /// a(y / eps) by linear interpolation; throws CoverageError off the grid.
  double a_at(double y) const;
  /// W_eps(y) anchored at 0 when 0 is covered, else at the window start.
  double w(double y) const;
  /// int_0^y W_eps, same anchor.
  double big_phi(double y) const;

 private:
  std::size_t cell(double y, double& tau) const;

  randfield::FieldSample field_;
  double epsilon_;
  double alpha_;
  double scale_;  // eps^(-alpha/2)
  double dx_;     // grid step in x units
  double lo_, hi_;
  std::vector<double> w_nodes_;
  std::vector<double> phi_nodes_;
  double w_anchor_ = 0.0;
  double phi_anchor_ = 0.0;
  double anchor_ = 0.0;
};

/// fBm environment in x units with its Young-integral prefactor beta.
struct LimitEnv {
  fbm::FbmPath w;
  double beta = 1.0;
};

using Environment = std::variant<MicroscaleEnv, LimitEnv>;

MicroscaleEnv make_microscale_env(const Potential& potential,
                                  const SolverConfig& cfg,
                                  std::uint64_t env_seed);
/// Two-sided fBm window [x - span, x + span] joined with the origin.
LimitEnv make_limit_env(const SolverConfig& cfg, std::uint64_t env_seed,
                        double span_override = 0.0);

/// eps^(-alpha/2) int_0^x a(y/eps) dy for a field given in field units.
double w_eps(const randfield::FieldSample& a_field, double epsilon, double alpha,
             double x);

double y_direct(const MicroscaleEnv& env, const bm_paths::BrownianPath& path,
                const SolverConfig& cfg);
double y_occupation(const MicroscaleEnv& env,
                    const bm_paths::BrownianPath& path,
                    const SolverConfig& cfg);
/// Occupation form for a precomputed profile of B (not yet shifted by x).
double y_occupation(const MicroscaleEnv& env,
                    const bm_paths::LocalTimeProfile& profile,
                    const SolverConfig& cfg);
double y_ito(const MicroscaleEnv& env, const bm_paths::BrownianPath& path,
             const SolverConfig& cfg);
double y_limit(const LimitEnv& env, const bm_paths::BrownianPath& path,
               const SolverConfig& cfg);
double y_limit(const LimitEnv& env, const bm_paths::LocalTimeProfile& profile,
               const SolverConfig& cfg);

struct SolutionSample {
  double value = 0.0;
  double inner_se = 0.0;
  std::uint64_t env_seed = 0;
  std::size_t exits = 0;  // paths that left the environment window
};

/// Inner driving paths for a config: seeds depend on (cfg.seed, j) when
/// cfg.common_paths, else on (cfg.seed, env_seed, j).
std::vector<bm_paths::BrownianPath> inner_paths(const SolverConfig& cfg,
                                                std::uint64_t env_seed = 0);

/// Y along each path (y_direct for Microscale, y_limit for Limit); NaN marks
/// a path that left the window.
std::vector<double> path_functionals(
    const Environment& env, const SolverConfig& cfg,
    std::span<const bm_paths::BrownianPath> paths,
    std::span<const bm_paths::LocalTimeProfile> profiles = {});

/// Mean of phi(x + B_t) exp(Y) over the paths; throws OverflowGuard when any
/// exponent exceeds 700.
SolutionSample solve_u(const Environment& env, const SolverConfig& cfg,
                       std::span<const bm_paths::BrownianPath> paths,
                       std::span<const bm_paths::LocalTimeProfile> profiles = {});
SolutionSample solve_u(const Environment& env, const SolverConfig& cfg);

inline constexpr double kExpGuard = 700.0;

/// E[exp(p Y)] over (environment x path) pairs for each eps.
std::vector<double> exponential_moment_probe(const Potential& potential,
                                             SolverConfig cfg, double p,
                                             std::span<const double> eps_list,
                                             std::size_t n_env, int threads = 1);

// Oracles for conditional variances given a path.

/// eps^(-alpha) sum_s sum_r R_a((B_s - B_r)/eps) ds dr over left points.
double conditional_variance_microscale(const Potential& potential,
                                       const bm_paths::BrownianPath& path,
                                       double epsilon);

/// beta^2 H(2H-1) sum_s sum_r |B_s - B_r|^(2H-2) ds dr, the variance of
/// beta int L dW^H given B. Pairs closer than `diag_width` use the cell
/// average of the kernel, diag_width^(2H-2) / (2H-1).
double conditional_variance_limit(const bm_paths::BrownianPath& path,
                                  double hurst, double beta, double diag_width);

/// E int_0^1 int_0^1 |B_u - B_v|^(2H-2) du dv = E|Z|^(2H-2) * 2/(H(H+1)).
double self_interaction_constant(double hurst);

/// E|Z|^p for Z ~ N(0,1), p > -1.
double abs_normal_moment(double p);

}  // namespace lrdh::fk
