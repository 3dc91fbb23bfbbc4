#pragma once

#include <cstddef>
#include <cstdint>
#include <string>

#include "simlab/drift.hpp"
#include "simlab/semigroup.hpp"
#include "simlab/spectral.hpp"

namespace simlab {

/// Constants entering the functional inequalities.
struct ConstantsPack {
  enum class Branch { dissipative_R, smoothing };

  Branch branch = Branch::dissipative_R;
  /// Log-Sobolev constant, the L1 norm of psi.
  double C = 0.0;
  /// ||R|| C, used for H-Lipschitz functions.
  double C_prime = 0.0;
  double zeta_R = 0.0;
  double r_max = 1.0;
  /// Smoothing branch data: theta(t) = K e^{-m0 t} max(t^{-gamma}, t^{1-gamma}).
  double K = 0.0;
  double gamma = 0.0;
  double m0 = 0.0;
  /// The closed form as printed for the smoothing branch; NaN on the dissipative branch.
  double C_printed = 0.0;

  /// 3 |zeta_R|^{-1} (1 - e^{2 zeta_R t}).
  double C_of_t(double t) const;
  /// p (e^{2 zeta_R t} - 1) / (2 zeta_R (p - 1) t^2), the Harnack factor per unit ||h||_R^2.
  double harnack_exponent(double p, double t) const;
  /// e^{2 zeta_R t} on the dissipative branch, theta(t) on the smoothing branch.
  double psi_decay(double t) const;
  /// (q - 1) e^{t / (2C)} + 1.
  double p_max(double q, double t) const;
  /// 1 / (16 sqrt(2) C), or with C' for the H variant.
  double concentration_rate(bool r_variant = true) const;
  double fernique_threshold(bool r_variant = true) const { return concentration_rate(r_variant); }
};

/// Dissipative-in-H_R branch: C = 1 / (2 |zeta_R|).
ConstantsPack constants_dissipative(double zeta_R, double r_max);

/// Smoothing branch with the exact L1 norm of theta.
ConstantsPack constants_smoothing(double K, double gamma, double m0, double zeta_R, double r_max);

/// K e^{-m0 t} max(t^{-gamma}, t^{1-gamma}).
double theta_envelope(double K, double gamma, double m0, double t);

/// ||theta||_{L1(0, inf)} = K [lowergamma(1-g, m0) / m0^{1-g} + uppergamma(2-g, m0) / m0^{2-g}].
double theta_l1_norm(double K, double gamma, double m0);

/// The same expression with the second term as printed, K e^{m0} / m0.
double theta_printed_constant(double K, double gamma, double m0);

struct KFit {
  double K = 0.0;
  double K_max = 0.0;
  double m0 = 0.0;
  double gamma = 0.0;
  std::size_t trajectories = 0;
};

/// Realizes the random constant K as the 99th percentile over trajectories of
/// sup_t ||D X(t, x) h||_R / (e^{-m0 t} max(t^{-gamma}, t^{1-gamma}) ||h||_H), h = e_1..e_n.
KFit fit_theta_constant(const SpectralModel& model, const DriftSpec& spec, double horizon, std::size_t trajectories,
                        std::uint64_t seed, const SimulationSettings& settings = {}, double quantile_level = 0.99);

/// Picks the dissipative branch when zeta_R < 0, otherwise the smoothing branch fitted from trajectories.
ConstantsPack make_constants(const SpectralModel& model, const DriftSpec& spec, std::uint64_t seed = 11);

}  // namespace simlab
