#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "simlab/constants.hpp"
#include "simlab/drift.hpp"
#include "simlab/report.hpp"
#include "simlab/semigroup.hpp"
#include "simlab/spectral.hpp"
#include "simlab/stats.hpp"
#include "simlab/test_function.hpp"

namespace simlab {

/// Ent(|phi|^p) = E[u ln u] - E[u] ln E[u], u = |phi|^p, with 0 ln 0 = 0.
/// Averages the nonnegative terms u ln(u/B) - u + B, B = E[u], whose standard error is the delta-method one.
MeanEstimate entropy(const MeasureEnsemble& ensemble, const SpectralModel& model, const TestFunction& phi, double p);

/// Ent(|phi|^p) <= p^2 C E[|phi|^{p-2} ||grad_R phi||_R^2 1_{phi != 0}].
InequalityReport check_log_sobolev(const MeasureEnsemble& ensemble, const SpectralModel& model,
                                   const TestFunction& phi, double p, const ConstantsPack& constants,
                                   const ReportOptions& opts = {});

/// Var(phi) <= C E||grad_R phi||_R^2.
InequalityReport check_poincare(const MeasureEnsemble& ensemble, const SpectralModel& model, const TestFunction& phi,
                                const ConstantsPack& constants, const ReportOptions& opts = {});

/// ||P(t) phi||_{p_max} <= ||phi||_q for phi = exp(theta s + kappa s^2), s = <a, x>, F = 0,
/// evaluated by Gaussian integrals on both sides (no sampling).
InequalityReport check_hypercontractivity_gaussian(const SpectralModel& model, double t, double q,
                                                   const TestFunction& phi, const ConstantsPack& constants,
                                                   const ReportOptions& opts = {.k_sigma = 3.0, .abs_tol = 1e-8});

struct NestedBudget {
  std::size_t outer = 1000;
  std::size_t inner = 1000;
  std::uint64_t seed = 21;
  SimulationSettings sim;
};

/// Nested Monte Carlo version: outer points from the ensemble, inner trajectories for P(t) phi.
InequalityReport check_hypercontractivity(const SpectralModel& model, const DriftSpec& spec,
                                          const MeasureEnsemble& ensemble, double t, double q,
                                          const TestFunction& phi, const ConstantsPack& constants,
                                          const NestedBudget& budget = {}, const ReportOptions& opts = {});

/// Largest t on a grid below t0 at which the inequality with p fixed to p_max(t0) fails, if any.
std::optional<double> hypercontractivity_onset(const SpectralModel& model, double t0, double q,
                                               const TestFunction& phi, const ConstantsPack& constants,
                                               std::size_t grid = 50);

enum class EvalMode { oracle, monte_carlo };

/// |P(t)phi(x+h)|^p <= P(t)|phi|^p(x) exp(harnack_exponent(p, t) ||h||_R^2).
InequalityReport check_harnack(const SpectralModel& model, const DriftSpec& spec, double t,
                               std::span<const double> x, std::span<const double> h, double p,
                               const TestFunction& phi, const ConstantsPack& constants, EvalMode mode,
                               std::size_t samples = 20000, std::uint64_t seed = 31,
                               const SimulationSettings& sim = {}, const ReportOptions& opts = {});

/// nu(g >= m(g) + s) <= exp(-s^2 / (16 sqrt 2 C)) on a grid of s, with Wilson intervals.
/// data carries the tail curve as rows (s, empirical, wilson_hi, bound).
InequalityReport check_concentration(const MeasureEnsemble& ensemble, const SpectralModel& model,
                                     const TestFunction& g, const ConstantsPack& constants, bool r_variant = true,
                                     std::size_t grid = 60, const ReportOptions& opts = {});

struct ExpMoment {
  double log_mean = 0.0;
  /// Standard error of the mean on the natural scale, relative to the mean.
  double rel_se = 0.0;
  double mean() const;
};

/// E exp(lambda ||x||^2) over the ensemble in the log domain.
ExpMoment exp_moment(const MeasureEnsemble& ensemble, const SpectralModel& model, double lambda, bool r_norm = true);

/// prod_k (1 - 2 lambda q_k)^{-1/2} with q_k the variance of x_k / r_k (or x_k), +inf beyond the threshold.
double gaussian_exp_moment(const SpectralModel& model, double lambda, bool r_norm = true);

/// Finiteness of E exp(lambda ||x||^2) below the Fernique threshold, with halving stability and,
/// for a Gaussian ensemble, the product-formula oracle.
std::vector<InequalityReport> check_fernique(const MeasureEnsemble& ensemble, const SpectralModel& model,
                                             const std::vector<double>& lambda_grid,
                                             const ConstantsPack& constants, bool r_variant = true,
                                             bool gaussian_oracle = false, const ReportOptions& opts = {});

/// P(t)(f^2 ln f^2)(x) <= P(t)f^2 ln P(t)f^2 + C(t) P(t)||grad_R f||^2 with f = sqrt(phi^2 + floor),
/// all three expectations from one set of trajectories.
InequalityReport check_semigroup_log_sobolev(const SpectralModel& model, const DriftSpec& spec, double t,
                                             std::span<const double> x, const TestFunction& phi,
                                             const ConstantsPack& constants, std::size_t samples,
                                             std::uint64_t seed, double floor = 0.0,
                                             const SimulationSettings& sim = {}, const ReportOptions& opts = {});

struct EpsLogSobolevTerm {
  double eps = 0.0;
  double eps_used = 0.0;
  double t = 0.0;
  double beta = 0.0;
  double beta_se = 0.0;
  double r_bar = 0.0;
};

/// beta(eps) from the constructive M_{p,q}(t) bound with (p, q) = (2, 4).
EpsLogSobolevTerm eps_log_sobolev_beta(const MeasureEnsemble& ensemble, const SpectralModel& model, double eps,
                                       const ConstantsPack& constants, double p = 2.0, double q = 4.0);

/// int f^2 ln|f| - ||f||^2 ln ||f|| <= eps int ||grad_R f||^2 + beta(eps) ||f||^2 for each eps.
std::vector<InequalityReport> check_eps_log_sobolev(const MeasureEnsemble& ensemble, const SpectralModel& model,
                                                    const TestFunction& phi, const std::vector<double>& eps_grid,
                                                    const ConstantsPack& constants, const ReportOptions& opts = {});

/// ||grad_R P(t)phi(x)||_R^2 <= psi(t) P(t)||grad_R phi||_R^2 (x).
InequalityReport check_gradient_estimate(const SpectralModel& model, const DriftSpec& spec, double t,
                                         std::span<const double> x, const TestFunction& phi,
                                         const ConstantsPack& constants, std::size_t samples, std::uint64_t seed,
                                         const SimulationSettings& sim = {}, const ReportOptions& opts = {});

struct UltraboundedConfig {
  double t = 1.0;
  double lambda = 1.0;
  std::size_t points = 100;
  std::size_t samples = 2000;
  std::uint64_t seed = 41;
  std::vector<double> radii{1.0, 2.0, 4.0, 8.0};
  /// Largest log-increment of P(t)phi_lambda between the two outermost radii still counted as saturated.
  double saturation_tol = 0.1;
  /// Separations ||x - y||_R for the coupled-pair sub-check.
  std::vector<double> separations{0.0, 1.0, 10.0, 30.0, 100.0};
  std::size_t pairs_per_separation = 4;
  SimulationSettings sim;
  SimulationSettings pair_sim{.dt = 1e-3, .scheme = Scheme::split_implicit, .exact_linear_shortcut = true};
};

/// log E exp(lambda ||X(t, x)||_R^2) with its standard error (Mehler closed form when F = 0).
MeanEstimate log_exp_semigroup(const SpectralModel& model, const DriftSpec& spec, double t,
                               std::span<const double> x, double lambda, std::size_t samples, std::uint64_t seed,
                               const SimulationSettings& sim);

/// Sub-check (a): bounded, doubling-stable sup of P(t)phi_lambda over ensemble points and saturation over
/// widening balls. Sub-check (b): coupled pairs obey ||X(t,x) - X(t,y)||_R^2 <= 2 phi^{-1}(2a) + psi^{-1}(t/4).
std::vector<InequalityReport> check_ultrabounded(const SpectralModel& model, const DriftSpec& spec,
                                                 const MeasureEnsemble& ensemble, const UltraboundedConfig& cfg,
                                                 const ReportOptions& opts = {});

/// Integral generator identity: E[psi N psi] = -1/2 E||grad_R psi||_R^2 under nu.
InequalityReport check_generator_identity(const MeasureEnsemble& ensemble, const SpectralModel& model,
                                          const DriftSpec& spec, const TestFunction& psi,
                                          const ReportOptions& opts = {});

/// Per-mode endpoint mean and variance against the exact Gaussian law for F = 0 (relation eq).
std::vector<InequalityReport> check_ou_exactness(const SpectralModel& model, double t, std::span<const double> x,
                                                 std::size_t samples, std::uint64_t seed,
                                                 const ReportOptions& opts = {4.0, 0.0});

struct VariationalCheckConfig {
  std::size_t trajectories = 100;
  double horizon = 1.0;
  double dt = 1e-3;
  std::uint64_t seed = 51;
  /// Spread of the random initial states, per mode.
  double start_scale = 0.5;
};

/// E-norm bound ||DX(t,x)h||_E <= e^{zeta t}||h||_E with h = e_1 and the H_R bound
/// ||DX(t,x)h||_R <= e^{zeta_R t}||h||_R with random h, both up to the factor 1 + 10 dt.
/// For F = 0 the variational solution is compared with e^{tA}h instead, to 1e-10.
std::vector<InequalityReport> check_variational_estimates(const SpectralModel& model, const DriftSpec& spec,
                                                          const VariationalCheckConfig& cfg = {});

/// Per-mode variances of two invariant ensembles agree (relation eq).
std::vector<InequalityReport> check_invariant_cross_validation(const MeasureEnsemble& a, const MeasureEnsemble& b,
                                                               std::size_t modes = 4,
                                                               const ReportOptions& opts = {4.0, 0.0});

}  // namespace simlab
