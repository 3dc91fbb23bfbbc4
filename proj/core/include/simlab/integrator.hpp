#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "simlab/drift.hpp"
#include "simlab/spectral.hpp"

namespace simlab {

using Rng = std::mt19937_64;

/// exp_euler: X' = e^{dtA}X + Phi(dt)F(X) + eta.
/// split_implicit: X' = e^{dtA}Y + eta with Y - dt F(Y) = X; stable for far-out starts.
enum class Scheme { exp_euler, split_implicit };

const char* to_string(Scheme s);
Scheme scheme_from_string(const std::string& s);

struct IntegratorConfig {
  double dt = 1e-3;
  double horizon = 1.0;
  Scheme scheme = Scheme::exp_euler;
  std::uint64_t seed = 0;
  std::size_t record_stride = 1;

  std::size_t steps() const;
  /// horizon / steps(), so that steps() * step_size() == horizon.
  double step_size() const;
  void validate() const;
};

struct Trajectory {
  std::vector<double> times;
  std::vector<StateVector> states;
  std::uint64_t seed = 0;
  IntegratorConfig config;
  bool diverged = false;
  /// Step index at which divergence was detected.
  std::optional<std::size_t> first_bad_index;
};

struct VariationalTrajectory {
  std::vector<double> times;
  std::vector<StateVector> states;
  StateVector direction;
};

constexpr double kDivergenceThreshold = 1e12;

/// One-step scheme with precomputed per-mode factors. Not thread-safe; one per worker.
class Stepper {
 public:
  Stepper(const SpectralModel& model, const DriftSpec& spec, double dt, Scheme scheme = Scheme::exp_euler);

  double dt() const { return dt_; }
  void draw_noise(Rng& rng, std::span<double> eta);
  /// Advances x in place. Returns false when the new state diverged.
  bool step(std::span<double> x, std::span<const double> eta);
  bool step(std::span<double> x, Rng& rng);
  /// Advances `steps` times; returns the index of the diverging step, if any.
  std::optional<std::size_t> run(std::span<double> x, std::size_t steps, Rng& rng);
  /// y <- e^{dtA} y + Phi(dt) DF(x) y, x the state at the start of the step.
  void variational_step(std::span<const double> x, std::span<double> y);

 private:
  const SpectralModel& model_;
  const DriftSpec& spec_;
  double dt_;
  Scheme scheme_;
  std::vector<double> decay_;
  std::vector<double> phi_;
  std::vector<double> noise_sd_;
  DriftEvaluator drift_;
  std::vector<double> f_;
  std::vector<double> eta_;
  std::normal_distribution<double> normal_;
};

StateVector sample_noise_increment(const SpectralModel& model, double dt, Rng& rng);

Trajectory integrate(const SpectralModel& model, const DriftSpec& spec, const IntegratorConfig& config,
                     std::span<const double> x0);

/// Both trajectories are driven by the same noise sequence.
std::pair<Trajectory, Trajectory> integrate_coupled_pair(const SpectralModel& model, const DriftSpec& spec,
                                                         const IntegratorConfig& config,
                                                         std::span<const double> x0, std::span<const double> y0);

VariationalTrajectory integrate_variational(const SpectralModel& model, const DriftSpec& spec,
                                            const Trajectory& trajectory, std::span<const double> h);

struct MomentReport {
  double p = 2.0;
  /// sup over recorded times of E||X(t)||_H^p / (1 + ||x0||_H^p).
  double sup_ratio = 0.0;
  /// Running max over recorded times of E||W_A(t)||_E^p from a F = 0 run.
  double stochastic_convolution_sup = 0.0;
  /// sum_k r_k^2 / (2|lambda_k|).
  double stochastic_convolution_h2_limit = 0.0;
  double plateau_slope = 0.0;
  double plateau_slope_se = 0.0;
  bool plateau_stable = false;
  std::size_t samples = 0;
  std::size_t diverged = 0;
  std::vector<double> times;
  std::vector<double> moments;
};

MomentReport check_moment_bound(const SpectralModel& model, const DriftSpec& spec, const IntegratorConfig& config,
                                std::span<const double> x0, double p, std::size_t samples);

}  // namespace simlab
