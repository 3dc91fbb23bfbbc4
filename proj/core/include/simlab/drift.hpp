#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "simlab/spectral.hpp"

namespace simlab {

enum class DriftKind { zero, nemytskii, radial, kernel };

const char* to_string(DriftKind k);
DriftKind drift_kind_from_string(const std::string& s);

/// s -> c s^p.
struct PowerProfile {
  double c = 0.0;
  double p = 1.0;

  double value(double s) const;
  double derivative(double s) const;
  double second_derivative(double s) const;
  double inverse(double v) const;

  /// Parses "power:<c>:<p>".
  static PowerProfile parse(const std::string& text);
  std::string to_string() const;
};

/// Pair (a, phi) of <F(x)-F(y), x-y>_R <= a - phi(||x-y||_R^2), with phi(s) = c s^p, p > 1.
struct SuperDissipativity {
  double a = 0.0;
  PowerProfile phi;
  bool fitted = false;

  double phi_inverse(double v) const { return phi.inverse(v); }
  /// psi(s) = int_s^inf dr / phi(r).
  double psi(double s) const;
  double psi_inverse(double u) const;
  /// Bound 2 phi^{-1}(2a) + psi^{-1}(t/4) on ||X(t,x) - X(t,y)||_R^2.
  double pair_bound(double t) const;
  void validate() const;
};

/// Rank-one terms <a_r, x>^3 c_r of the separable cubic kernel.
struct KernelFactors {
  std::vector<StateVector> a;
  std::vector<StateVector> c;
};

struct DriftSpec {
  DriftKind kind = DriftKind::zero;
  /// Coefficients C_0..C_{2m+1} of b(z) = sum_i C_i z^i.
  std::vector<double> b_coeffs;
  PowerProfile radial_f;
  KernelFactors kernel;
  double zeta_F = 0.0;
  double zeta_R = 0.0;
  std::optional<SuperDissipativity> super;

  static DriftSpec zero();
  static DriftSpec nemytskii(std::vector<double> b_coeffs, double zeta_F, double zeta_R);
  static DriftSpec radial(PowerProfile f, double zeta_F, double zeta_R);
  /// a_r = e_r and c_r = -strength e_r for r < rank, plus the linear part zeta_F x.
  static DriftSpec kernel_diagonal(std::size_t n, std::size_t rank, double strength, double zeta_F, double zeta_R);

  /// Throws std::invalid_argument when the invariants of the chosen kind fail.
  void validate(std::size_t n) const;
};

double polynomial_value(std::span<const double> coeffs, double z);
double polynomial_derivative(std::span<const double> coeffs, double z);
/// Primitive with value 0 at 0.
double polynomial_primitive(std::span<const double> coeffs, double z);

/// Evaluates F and its derivative. Holds scratch buffers, so use one instance per thread.
class DriftEvaluator {
 public:
  DriftEvaluator(const DriftSpec& spec, const SpectralModel& model);

  /// out = F(x). Throws DivergedStateError on overflow.
  void apply(std::span<const double> x, std::span<double> out);
  /// out = DF(x) h, analytic.
  void jacobian_apply(std::span<const double> x, std::span<const double> h, std::span<double> out);
  /// Row-major n x n matrix of DF(x).
  std::vector<double> jacobian_matrix(std::span<const double> x);
  /// Potential V with F = -grad V in H.
  double potential(std::span<const double> x);

  const DriftSpec& spec() const { return spec_; }
  const SpectralModel& model() const { return model_; }

 private:
  const DriftSpec& spec_;
  const SpectralModel& model_;
  std::vector<double> grid_;
  std::vector<double> grid2_;
};

StateVector apply_drift(const DriftSpec& spec, const SpectralModel& model, std::span<const double> x);
StateVector drift_jacobian_apply(const DriftSpec& spec, const SpectralModel& model, std::span<const double> x,
                                 std::span<const double> h);
/// Forward-difference DF(x)h with step 1e-6 max(1, ||x||) / ||h||.
StateVector drift_directional_fd(const DriftSpec& spec, const SpectralModel& model, std::span<const double> x,
                                 std::span<const double> h);

/// J_delta(x): solves y - delta (F(y) - zeta_F y) = x to residual 1e-10.
StateVector yosida_resolvent(const DriftSpec& spec, const SpectralModel& model, double delta,
                             std::span<const double> x);
/// Solves y - delta (F(y) - shift y) = x; shift = zeta_F gives J_delta, shift = 0 the implicit drift step.
StateVector solve_resolvent(const DriftSpec& spec, const SpectralModel& model, double delta, double shift,
                            std::span<const double> x);
/// F_delta(x) = F(J_delta(x)).
StateVector yosida_drift(const DriftSpec& spec, const SpectralModel& model, double delta, std::span<const double> x);

struct DissipativityProbe {
  double zeta_F_hat = 0.0;
  double zeta_R_hat = 0.0;
  std::size_t pairs = 0;
  /// The probe maximizes over samples, so both values are lower bounds on the true suprema.
  bool lower_bound = true;
};

DissipativityProbe probe_dissipativity(const DriftSpec& spec, const SpectralModel& model, std::size_t sample_count,
                                       double radius, std::uint64_t seed);

struct SuperDissipativityReport {
  bool present = false;
  bool ok = false;
  double worst_margin = 0.0;
  double worst_separation = 0.0;
  std::size_t pairs = 0;
  std::string note;
};

SuperDissipativityReport probe_super_dissipativity(const DriftSpec& spec, const SpectralModel& model,
                                                   std::size_t sample_count, std::uint64_t seed);

/// Fits (a, phi) by a scalar scan of the pointwise nonlinearity. Supports nemytskii and
/// radial drifts with R = Id; throws UnsupportedError otherwise.
SuperDissipativity fit_super_dissipativity(const DriftSpec& spec, const SpectralModel& model);

}  // namespace simlab
