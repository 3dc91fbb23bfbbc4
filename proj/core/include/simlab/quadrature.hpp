#pragma once

#include <cstddef>
#include <functional>
#include <span>

namespace simlab {

/// Gauss-Hermite rule for the standard normal law: E g(Z) ~ sum_i w_i g(z_i).
struct GaussHermiteRule {
  std::span<const double> nodes;
  std::span<const double> weights;
};

/// Cached 64-point rule.
const GaussHermiteRule& gauss_hermite64();

/// E g(m + s Z) for Z standard normal.
double gaussian_expectation(double mean, double variance, const std::function<double(double)>& g);

/// log E exp(theta S + kappa S^2) for S ~ N(mean, variance); +inf when 2 kappa variance >= 1.
double log_gaussian_exp_quadratic(double theta, double kappa, double mean, double variance);

}  // namespace simlab
