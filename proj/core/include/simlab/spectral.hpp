#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace simlab {

/// Coefficients in the eigenbasis of A.
using StateVector = std::vector<double>;

enum class Basis { dirichlet, periodic };

const char* to_string(Basis b);
Basis basis_from_string(const std::string& s);

/// Constants of the bound ||e^{tA}x||_R <= M e^{-wt} t^{-gamma} ||x||_H.
struct SmoothingConstants {
  double M = 1.0;
  double w = 0.0;
  double gamma = 0.0;
  /// Envelope constant with w = 0, i.e. sup_t t^gamma LHS(t).
  double M_at_w0 = 1.0;
};

struct SmoothingReport {
  SmoothingConstants constants;
  bool ok = false;
  double worst_margin = 0.0;
  double fitted_slope = 0.0;
  std::string message;
};

class SpectralModel {
 public:
  static SpectralModel dirichlet_laplacian(std::size_t n, double beta, std::size_t grid_factor = 2);
  static SpectralModel periodic_laplacian(std::size_t n, double beta, std::size_t grid_factor = 2);
  /// Arbitrary diagonal model; eigenvalues strictly negative and nonincreasing, r positive.
  /// Entries of r may be zero only for deterministic (noise-free) runs.
  static SpectralModel diagonal(std::vector<double> eigenvalues, std::vector<double> r,
                                Basis basis = Basis::dirichlet, std::size_t grid_factor = 2);

  std::size_t n() const { return eigenvalues_.size(); }
  std::span<const double> eigenvalues() const { return eigenvalues_; }
  std::span<const double> r() const { return r_; }
  std::optional<double> beta() const { return beta_; }
  double zeta_A() const { return zeta_A_; }
  /// Operator norm of R, i.e. max_k r_k.
  double r_max() const;
  Basis basis() const { return basis_; }
  std::size_t grid_factor() const { return grid_factor_; }

  const SmoothingConstants& smoothing() const { return smoothing_.constants; }
  const SmoothingReport& smoothing_report() const { return smoothing_; }

  std::size_t grid_size() const { return grid_points_.size(); }
  std::span<const double> grid_points() const { return grid_points_; }
  /// Weight of the discrete inner product: ||x||_H^2 = weight * sum_j g_j^2.
  double quadrature_weight() const { return weight_; }

  void to_grid(std::span<const double> x, std::span<double> g) const;
  void from_grid(std::span<const double> g, std::span<double> x) const;
  /// Value of the k-th basis function at grid point j.
  double basis_value(std::size_t j, std::size_t k) const { return table_[j * n() + k]; }

  /// Copy with all r_k set to zero (deterministic flow).
  SpectralModel without_noise() const;

 private:
  SpectralModel() = default;
  void build_grid(std::size_t grid_size);
  void finalize();

  std::vector<double> eigenvalues_;
  std::vector<double> r_;
  std::optional<double> beta_;
  double zeta_A_ = 0.0;
  Basis basis_ = Basis::dirichlet;
  std::size_t grid_factor_ = 2;
  std::vector<double> grid_points_;
  std::vector<double> table_;
  double weight_ = 0.0;
  SmoothingReport smoothing_;
};

StateVector semigroup_flow(const SpectralModel& model, double t, std::span<const double> x);

double h_norm(std::span<const double> x);
double h_inner(std::span<const double> x, std::span<const double> y);
double r_norm(const SpectralModel& model, std::span<const double> x);
double r_inner(const SpectralModel& model, std::span<const double> x, std::span<const double> y);
/// Sup of the collocation-grid values.
double e_norm(const SpectralModel& model, std::span<const double> x);

StateVector grid_transform(const SpectralModel& model, std::span<const double> x);
StateVector inverse_grid_transform(const SpectralModel& model, std::span<const double> g);

/// Stationary variance r_k^2/(2|lambda_k|) scaled by (1 - e^{2 lambda_k t}).
double ou_variance(double lambda, double r, double t);

SmoothingReport verify_smoothing(const SpectralModel& model);

}  // namespace simlab
