#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "simlab/report.hpp"
#include "simlab/spectral.hpp"
#include "simlab/test_function.hpp"

namespace simlab {

enum class LipFamily { piecewise_linear, norm_based, smooth };

const char* to_string(LipFamily f);

/// g with |g(x+h) - g(x)| <= lip_r ||h||_R.
struct LipschitzFunction {
  std::string name;
  std::function<double(std::span<const double>)> eval;
  double lip_r = 0.0;
  /// sup |g|, when bounded.
  std::optional<double> sup;
  LipFamily family = LipFamily::smooth;

  double operator()(std::span<const double> x) const { return eval(x); }
};

struct LipschitzSpotCheck {
  bool ok = true;
  double worst_ratio = 0.0;
  double worst_sup = 0.0;
  std::size_t samples = 0;
};

/// Random (x, h) pairs with x ~ N(0, 4 Id) and ||h||_R log-uniform in [1e-3, 10].
LipschitzSpotCheck spot_check_lipschitz(const LipschitzFunction& f, const SpectralModel& model,
                                        std::size_t samples = 1000, std::uint64_t seed = 5);

enum class EnvelopeMode { grid, descent };

EnvelopeMode envelope_mode_from_string(const std::string& s);

struct EnvelopeSettings {
  EnvelopeMode mode = EnvelopeMode::descent;
  /// Grid mode: points per axis of the coarse level and of each zoom level.
  std::size_t grid_points = 31;
  std::size_t zoom_points = 11;
  std::size_t zoom_levels = 5;
  /// Coarse nodes refined independently, among those the Lipschitz bound cannot exclude.
  std::size_t inner_beam = 4;
  std::size_t outer_beam = 2;
  /// Descent mode: random candidates screened per coordinate for the inner inf, and the
  /// number of pattern searches started from the best screened points.
  std::size_t screen_points = 16;
  std::size_t inner_starts = 2;
  std::size_t outer_starts = 12;
  std::size_t outer_searches = 3;
  double step_tol = 1e-8;
  std::size_t max_evals = 4000;
  /// Search radii are the proof bounds scaled by this factor.
  double radius_inflation = 1.25;
  std::uint64_t seed = 3;
};

struct EnvelopeResult {
  double value = 0.0;
  /// Outer argmax h and inner argmin k at that h, both in H coordinates.
  StateVector h;
  StateVector k;
  std::size_t iterations = 0;
  double final_step = 0.0;
  bool stalled = false;
};

/// Search radius for the inner inf, ||k||_R <= 2 eps lip_r, inflated.
double inner_radius(double eps, double lip_r, double inflation = 1.25);
/// Search radius for the outer sup, ||h||_R <= 2 sqrt(2) eps lip_r, inflated.
double outer_radius(double eps, double lip_r, double inflation = 1.25);

/// f_eps(x) = sup_h { inf_k { f(x + k - h) + ||k||_R^2 / (2 eps) } - ||h||_R^2 / eps }.
EnvelopeResult envelope(const LipschitzFunction& f, double eps, std::span<const double> x,
                        const SpectralModel& model, const EnvelopeSettings& settings = {});

/// Closed form of the envelope of min(|x|, cap) in one dimension with r = 1; cap = inf gives |x|.
double abs_clamped_envelope(double x, double eps, double cap);

struct PropertySuiteConfig {
  std::vector<double> eps_grid{0.01, 0.1, 1.0};
  std::size_t points = 8;
  /// Pairs (x, x + h) for the difference-quotient bound, per eps.
  std::size_t quotient_pairs = 8;
  /// Compare descent against the grid oracle at this many points (n <= 2 only).
  std::size_t oracle_points = 3;
  double oracle_tol = 1e-3;
  std::uint64_t seed = 9;
  EnvelopeSettings settings;
};

/// Boundedness, two-sided approximation, difference-quotient gradient bound, and the grid-oracle comparison.
std::vector<InequalityReport> property_suite(const LipschitzFunction& f, const SpectralModel& model,
                                             const PropertySuiteConfig& config = {});

/// Envelope wrapped as a test function with certified Lip_R <= 4 sqrt(2) Lip_R(g) and a
/// central-difference gradient.
TestFunction regularize_for_concentration(const LipschitzFunction& g, double eps, const SpectralModel& model,
                                          const EnvelopeSettings& settings = {});

/// Twenty functions mixing piecewise-linear, norm-based and smooth members, with Lip_R computed for `model`.
std::vector<LipschitzFunction> lasry_lions_corpus(const SpectralModel& model);

}  // namespace simlab
