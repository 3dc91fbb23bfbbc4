#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "simlab/spectral.hpp"

namespace simlab {

/// Observable phi: H -> R with value, H-gradient and the diagonal of its Hessian.
class TestFunction {
 public:
  enum class Kind {
    constant,
    linear_functional,
    cylindrical_tanh,
    exp_quadratic,
    r_norm_squared,
    exp_r_norm,
    custom_grid,
    custom
  };
  using ValueFn = std::function<double(const SpectralModel&, std::span<const double>)>;
  using GradFn = std::function<void(const SpectralModel&, std::span<const double>, std::span<double>)>;

  struct Profile1D {
    StateVector direction;
    std::function<double(double)> g;
  };

  static TestFunction constant(double c);
  /// <a, x> + offset.
  static TestFunction linear(StateVector a, double offset = 0.0);
  /// offset + sum_i weights_i tanh(<a_i, x>).
  static TestFunction tanh_cylinder(std::vector<StateVector> directions, std::vector<double> weights,
                                    double offset = 0.0);
  /// exp(theta s + kappa s^2), s = <a, x>.
  static TestFunction exp_quadratic(StateVector a, double theta, double kappa = 0.0);
  /// q = ||x - shift||_R^2, or cap tanh(q / cap) when cap > 0.
  static TestFunction r_norm_squared(StateVector shift, double cap = 0.0);
  /// exp(lambda ||x||_R^2).
  static TestFunction exp_r_norm(double lambda);
  /// Grid average of tanh(scale g_j), g the collocation values.
  static TestFunction grid_mean_tanh(double scale);
  static TestFunction custom(std::string name, ValueFn value, std::optional<GradFn> gradient = std::nullopt,
                             std::optional<double> sup = std::nullopt, std::optional<double> lip_r = std::nullopt);

  /// sqrt(phi^2 + m), bounded away from zero by sqrt(m).
  TestFunction floored(double m) const;
  TestFunction named(std::string name) const;

  double value(const SpectralModel& model, std::span<const double> x) const;
  void gradient(const SpectralModel& model, std::span<const double> x, std::span<double> out) const;
  StateVector gradient(const SpectralModel& model, std::span<const double> x) const;
  /// ||grad_R phi||_R^2 = sum_k r_k^2 (d_k phi)^2, using grad_R = R^2 grad.
  double r_gradient_norm_sq(const SpectralModel& model, std::span<const double> x) const;
  void hessian_diagonal(const SpectralModel& model, std::span<const double> x, std::span<double> out) const;
  /// sum_k r_k^2 d_kk phi.
  double r2_hessian_trace(const SpectralModel& model, std::span<const double> x) const;

  bool analytic_gradient() const { return kind_ != Kind::custom || custom_grad_.has_value(); }
  bool analytic_hessian() const { return kind_ != Kind::custom; }
  std::optional<double> sup_bound() const;
  /// Lipschitz constant along H_R when known analytically.
  std::optional<double> lip_r(const SpectralModel& model) const;

  Kind kind() const { return kind_; }
  const std::string& name() const { return name_; }
  double floor() const { return floor_; }
  std::optional<Profile1D> single_direction() const;

  const std::vector<StateVector>& directions() const { return dirs_; }
  const std::vector<double>& weights() const { return weights_; }
  double offset() const { return offset_; }
  double theta() const { return theta_; }
  double kappa() const { return kappa_; }
  double cap() const { return cap_; }
  double lambda() const { return lambda_; }
  const StateVector& shift() const { return shift_; }

 private:
  double base_value(const SpectralModel& model, std::span<const double> x) const;
  void base_gradient(const SpectralModel& model, std::span<const double> x, std::span<double> out) const;
  void base_hessian_diagonal(const SpectralModel& model, std::span<const double> x, std::span<double> out) const;

  Kind kind_ = Kind::constant;
  std::string name_;
  std::vector<StateVector> dirs_;
  std::vector<double> weights_;
  double offset_ = 0.0;
  double theta_ = 0.0;
  double kappa_ = 0.0;
  double cap_ = 0.0;
  double lambda_ = 0.0;
  double scale_ = 1.0;
  StateVector shift_;
  double floor_ = 0.0;
  ValueFn custom_value_;
  std::optional<GradFn> custom_grad_;
  std::optional<double> custom_sup_;
  std::optional<double> custom_lip_;
};

/// Unit vector e_k (0-based index) of length n.
StateVector unit_vector(std::size_t n, std::size_t k);

}  // namespace simlab
