#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "simlab/drift.hpp"
#include "simlab/integrator.hpp"
#include "simlab/stats.hpp"
#include "simlab/spectral.hpp"
#include "simlab/test_function.hpp"

namespace simlab {

/// Time discretization used by Monte Carlo estimators.
struct SimulationSettings {
  double dt = 1e-3;
  Scheme scheme = Scheme::exp_euler;
  /// For F = 0 the scheme is exact for any step, so a single step of length t is taken.
  bool exact_linear_shortcut = true;
};

struct SemigroupEstimate {
  double value = 0.0;
  double stderr_ = 0.0;
  std::size_t samples = 0;
  std::size_t diverged = 0;
  double t = 0.0;
  StateVector x;
};

/// Endpoints X(t, x) of independent trajectories, row-major (samples x n).
struct EndpointCloud {
  std::size_t n = 0;
  std::vector<double> data;
  std::vector<char> diverged;
  std::size_t diverged_count = 0;

  std::size_t size() const { return diverged.size(); }
  std::span<const double> point(std::size_t i) const { return {data.data() + i * n, n}; }
};

EndpointCloud simulate_endpoints(const SpectralModel& model, const DriftSpec& spec, double t,
                                 std::span<const double> x, std::size_t samples, std::uint64_t seed,
                                 const SimulationSettings& settings = {});

enum class Provenance { ergodic, ensemble_of_endpoints, gaussian_oracle, gibbs_ula };

const char* to_string(Provenance p);

struct StationarityDiagnostic {
  bool ok = true;
  double worst_z = 0.0;
  std::string detail;
};

/// Uniformly weighted sample cloud approximating an invariant law.
class MeasureEnsemble {
 public:
  MeasureEnsemble() = default;
  MeasureEnsemble(std::size_t n, std::vector<double> data, Provenance provenance);

  std::size_t size() const { return n_ == 0 ? 0 : data_.size() / n_; }
  std::size_t dim() const { return n_; }
  std::span<const double> point(std::size_t i) const { return {data_.data() + i * n_, n_}; }
  const std::vector<double>& data() const { return data_; }
  /// Serially correlated samples (chains) need autocorrelation-aware errors.
  bool is_chain() const { return provenance == Provenance::ergodic || provenance == Provenance::gibbs_ula; }
  MeasureEnsemble head(std::size_t count) const;

  Provenance provenance = Provenance::ergodic;
  double burn_in = 0.0;
  double thinning = 0.0;
  std::uint64_t seed = 0;
  StationarityDiagnostic stationarity;

 private:
  std::size_t n_ = 0;
  std::vector<double> data_;
};

/// Mean of per-sample values with an AR(1)-inflated standard error for chains.
MeanEstimate ensemble_mean(const MeasureEnsemble& ensemble, std::span<const double> values);

StationarityDiagnostic stationarity_diagnostic(const MeasureEnsemble& ensemble);

struct SamplerConfig {
  /// Burn-in and thinning in time units; non-positive values select 20/|zeta| and 1/|zeta|.
  double burn_in = 0.0;
  double thinning = 0.0;
  std::size_t count = 10000;
  std::uint64_t seed = 1;
  SimulationSettings sim;
  bool strict = false;
};

/// Single long trajectory from x = 0, thinned.
MeasureEnsemble sample_invariant(const SpectralModel& model, const DriftSpec& spec, const SamplerConfig& config);

/// Independent draws from the Gaussian invariant law of the linear part.
MeasureEnsemble sample_gaussian_invariant(const SpectralModel& model, std::size_t count, std::uint64_t seed);

struct GibbsConfig {
  std::size_t count = 10000;
  /// pCN-Langevin step delta in (0, 2).
  double step = 0.05;
  std::uint64_t seed = 7;
  std::size_t burn_in_steps = 2000;
  std::size_t thinning_steps = 20;
  /// Targets exp(tilt ||x||_R^2) nu / Z instead of nu when nonzero.
  double tilt = 0.0;
  bool strict = false;
};

struct GibbsResult {
  MeasureEnsemble ensemble;
  bool diverged = false;
};

/// Unadjusted preconditioned Crank-Nicolson Langevin chain for the Gibbs law
/// nu(dx) ~ exp(-2 V(x)) mu(dx), where F = -grad V and mu = N(0, diag(r_k^2 / (2|lambda_k|))).
/// The factor 2 is the normalization that makes nu invariant for dX = (AX + F) dt + dW.
GibbsResult gibbs_sample(const SpectralModel& model, const DriftSpec& spec, const GibbsConfig& config);

/// Nemytskii convenience entry point with b given by its coefficients.
MeasureEnsemble gibbs_oracle_sample(const SpectralModel& model, std::vector<double> b_coeffs, std::size_t count,
                                    double step, std::uint64_t seed);

SemigroupEstimate estimate_semigroup(const SpectralModel& model, const DriftSpec& spec, double t,
                                     std::span<const double> x, const TestFunction& phi, std::size_t samples,
                                     std::uint64_t seed, const SimulationSettings& settings = {});

/// Exact Gaussian law of X(t, x) for F = 0.
struct GaussianLaw {
  StateVector mean;
  std::vector<double> variance;
};

GaussianLaw ou_law(const SpectralModel& model, double t, std::span<const double> x);

/// E phi(X(t, x)) for F = 0, by closed forms or 64-point Gauss-Hermite quadrature.
double mehler_oracle(const SpectralModel& model, double t, std::span<const double> x, const TestFunction& phi);

/// E psi(phi(X(t, x))) for F = 0 and phi depending on a single direction.
double mehler_oracle_transformed(const SpectralModel& model, double t, std::span<const double> x,
                                 const TestFunction& phi, const std::function<double(double)>& psi);

struct GradientEstimate {
  /// Coordinates of grad_R P(t)phi(x) in the orthonormal basis h_i = r_i e_i of H_R.
  std::vector<double> components;
  std::vector<double> stderr_;
  /// ||grad_R P(t)phi(x)||_R^2 and its delta-method error.
  double r_norm_sq = 0.0;
  double r_norm_sq_se = 0.0;
  std::size_t samples = 0;
  std::size_t diverged = 0;
};

GradientEstimate estimate_gradient_semigroup(const SpectralModel& model, const DriftSpec& spec, double t,
                                             std::span<const double> x, const TestFunction& phi,
                                             std::size_t samples, std::uint64_t seed,
                                             const SimulationSettings& settings = {});

/// (1/2) sum_k r_k^2 d_kk phi + <Ax + F(x), grad phi>.
double apply_generator(const SpectralModel& model, const DriftSpec& spec, const TestFunction& phi,
                       std::span<const double> x);

}  // namespace simlab
