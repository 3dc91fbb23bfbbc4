#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace simlab {

struct MeanEstimate {
  double mean = 0.0;
  double se = 0.0;
  std::size_t count = 0;
};

/// Sample mean with standard error, the variance scaled by `inflation`.
MeanEstimate mean_estimate(std::span<const double> values, double inflation = 1.0);

double sample_variance(std::span<const double> values);
double lag1_autocorrelation(std::span<const double> values);

/// Integrated-autocorrelation factor (1+rho)/(1-rho) of an AR(1) fit, rho clamped to [0, 0.99].
double ar1_inflation(std::span<const double> values);

/// Log of the sample mean of exp(values), computed stably.
double log_mean_exp(std::span<const double> values);

/// Type-7 empirical quantile.
double quantile(std::vector<double> values, double level);

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

Interval wilson_interval(std::size_t successes, std::size_t trials, double z = 3.0);

struct TailIndex {
  double alpha = 0.0;
  double se = 0.0;
  std::size_t k = 0;
};

/// Hill estimator on the top-k order statistics of log-values (log_w); the
/// returned index describes the power tail of w = exp(log_w).
TailIndex hill_tail_index(std::vector<double> log_w, std::size_t k = 0);

struct LinearFit {
  double intercept = 0.0;
  double slope = 0.0;
  double slope_se = 0.0;
};

LinearFit least_squares(std::span<const double> x, std::span<const double> y);

}  // namespace simlab
