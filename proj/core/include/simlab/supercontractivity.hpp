#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "simlab/drift.hpp"
#include "simlab/report.hpp"
#include "simlab/semigroup.hpp"
#include "simlab/spectral.hpp"

namespace simlab {

enum class TailStatus { finite, exploding, ambiguous };

const char* to_string(TailStatus s);

struct ExpIntegralEstimate {
  double lambda = 0.0;
  /// log E_nu exp(lambda ||x||_R^2); +inf when the integral diverges.
  double log_value = 0.0;
  double log_se = 0.0;
  /// Hill tail index of exp(lambda ||x||_R^2) over the ensemble; the mean is finite iff alpha > 1.
  double alpha = 0.0;
  double alpha_se = 0.0;
  TailStatus status = TailStatus::ambiguous;
  /// gaussian_oracle, hill, or tilted_chain.
  std::string method;
};

struct SupercontractivityConfig {
  /// Use the closed-form Gaussian integral when F = 0.
  bool gaussian_oracle = true;
  /// Tilted-chain fallback for ambiguous tail estimates (requires R = Id).
  bool tilted_fallback = true;
  GibbsConfig tilted;
  double k_sigma = 3.0;
  /// Relative agreement required between the tilted estimates at step and step/2.
  double halving_tol = 0.1;
};

/// Tail-index classification of exp(lambda ||x||_R^2) under the ensemble.
ExpIntegralEstimate classify_exp_integral(const MeasureEnsemble& ensemble, const SpectralModel& model,
                                          double lambda, double k_sigma = 3.0);

/// E_nu exp(lambda ||x||^2) = 1 / E_pi exp(-lambda ||x||^2), pi the tilted law; a diverging chain marks
/// the tilted law improper.
ExpIntegralEstimate tilted_exp_integral(const SpectralModel& model, const DriftSpec& spec, double lambda,
                                        const GibbsConfig& config, double halving_tol = 0.1);

/// Qualitative verdict over the lambda grid: every integral finite, or the first explosion. lhs is the
/// largest validated lambda, rhs the largest lambda tested.
InequalityReport check_supercontractivity_integrals(const MeasureEnsemble& ensemble, const SpectralModel& model,
                                                   const DriftSpec& spec, const std::vector<double>& lambda_grid,
                                                   const SupercontractivityConfig& config = {});

}  // namespace simlab
