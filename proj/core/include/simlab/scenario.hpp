#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <nlohmann/json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "simlab/drift.hpp"
#include "simlab/integrator.hpp"
#include "simlab/spectral.hpp"

namespace simlab {

struct CheckSpec {
  std::string name;
  nlohmann::json params = nlohmann::json::object();
  /// Reports from this check are negative controls.
  bool expected_failure = false;
};

/// Names accepted in a scenario's check list.
const std::vector<std::string>& known_checks();

struct Scenario {
  std::string name = "unnamed";
  std::string description;
  std::string profile = "smoke";

  // model.*
  std::size_t n = 8;
  double beta = 0.0;
  Basis basis = Basis::dirichlet;
  std::size_t grid_factor = 2;
  /// Explicit diagonal model; overrides the Laplacian when set.
  std::vector<double> eigenvalues;
  std::vector<double> r;

  // drift.*
  DriftKind drift = DriftKind::zero;
  std::vector<double> b;
  std::string radial_f = "power:1:2";
  std::size_t kernel_rank = 2;
  double kernel_strength = 1.0;
  double zeta_F = 0.0;
  /// NaN selects zeta_A + zeta_F.
  double zeta_R = std::numeric_limits<double>::quiet_NaN();
  /// none, fit, or "a:<a>;phi:power:<c>:<p>".
  std::string super = "none";

  // sim.*
  double dt = 1e-3;
  double horizon = 1.0;
  Scheme scheme = Scheme::exp_euler;
  std::uint64_t seed = 1;
  std::size_t record_stride = 1;

  // sampler.*
  /// auto, gaussian, ergodic, or gibbs.
  std::string invariant = "auto";
  std::size_t samples = 10000;
  double burn_in = 0.0;
  double thinning = 0.0;
  double gibbs_step = 0.05;
  std::size_t gibbs_thinning = 20;
  std::size_t gibbs_burn_in = 2000;

  std::vector<CheckSpec> checks;
  std::string output_dir = "out";

  SpectralModel build_model() const;
  DriftSpec build_drift(const SpectralModel& model) const;
  /// Structural checks plus zeta = zeta_A + zeta_F < 0; throws ConfigError.
  void validate() const;
};

/// Parses YAML text; nested maps and dotted keys ("model.n: 8") are equivalent. Throws ConfigError.
Scenario parse_scenario(const std::string& text);
Scenario load_scenario(const std::string& path);
/// Applies "dotted.key=value", value in YAML syntax.
void apply_override(Scenario& scenario, const std::string& assignment);

std::vector<std::string> preset_names();
/// YAML source of a shipped preset.
std::string preset_yaml(const std::string& name);
Scenario preset(const std::string& name);

}  // namespace simlab
