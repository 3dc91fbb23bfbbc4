#include "simlab/scenario.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "simlab/errors.hpp"

namespace simlab {

const std::vector<std::string>& known_checks() {
  static const std::vector<std::string> names{
      "ou_exactness",       "moment_bound",       "log_sobolev",           "poincare",
      "hypercontractivity_exact", "hypercontractivity_mc", "harnack",     "concentration",
      "fernique",           "supercontractivity", "semigroup_log_sobolev", "eps_log_sobolev",
      "gradient_estimate",  "ultrabounded",       "generator_identity",    "variational",
      "invariant_cross_validation"};
  return names;
}

namespace {

nlohmann::json yaml_to_json(const YAML::Node& node) {
  switch (node.Type()) {
    case YAML::NodeType::Null:
    case YAML::NodeType::Undefined:
      return nullptr;
    case YAML::NodeType::Sequence: {
      auto arr = nlohmann::json::array();
      for (const auto& item : node) arr.push_back(yaml_to_json(item));
      return arr;
    }
    case YAML::NodeType::Map: {
      auto obj = nlohmann::json::object();
      for (const auto& kv : node) obj[kv.first.as<std::string>()] = yaml_to_json(kv.second);
      return obj;
    }
    case YAML::NodeType::Scalar:
      break;
  }
  const std::string& text = node.Scalar();
  if (node.Tag() == "!") return text;
  long long i = 0;
  if (YAML::convert<long long>::decode(node, i)) return i;
  double d = 0.0;
  if (YAML::convert<double>::decode(node, d)) return d;
  bool b = false;
  if (YAML::convert<bool>::decode(node, b)) return b;
  return text;
}

template <class T>
T scalar(const YAML::Node& node, const std::string& key) {
  try {
    return node.as<T>();
  } catch (const YAML::Exception&) {
    throw ConfigError("bad value for '" + key + "'");
  }
}

std::vector<double> number_list(const YAML::Node& node, const std::string& key) {
  if (!node.IsSequence()) throw ConfigError("'" + key + "' must be a list");
  std::vector<double> out;
  for (const auto& v : node) out.push_back(scalar<double>(v, key));
  return out;
}

CheckSpec parse_check(const YAML::Node& node) {
  CheckSpec c;
  if (node.IsScalar()) {
    c.name = node.as<std::string>();
  } else if (node.IsMap()) {
    for (const auto& kv : node) {
      auto key = kv.first.as<std::string>();
      if (key == "name") {
        c.name = scalar<std::string>(kv.second, "checks.name");
      } else if (key == "expected_failure") {
        c.expected_failure = scalar<bool>(kv.second, "checks.expected_failure");
      } else {
        c.params[key] = yaml_to_json(kv.second);
      }
    }
  } else {
    throw ConfigError("each check must be a name or a map");
  }
  const auto& names = known_checks();
  if (std::find(names.begin(), names.end(), c.name) == names.end())
    throw ConfigError("unknown check '" + c.name + "'");
  return c;
}

void set_key(Scenario& s, const std::string& key, const YAML::Node& v) {
  if (key == "name") s.name = scalar<std::string>(v, key);
  else if (key == "description") s.description = scalar<std::string>(v, key);
  else if (key == "profile") {
    s.profile = scalar<std::string>(v, key);
    if (s.profile != "smoke" && s.profile != "full") throw ConfigError("profile must be smoke or full");
  } else if (key == "output_dir") s.output_dir = scalar<std::string>(v, key);
  else if (key == "model.n") s.n = scalar<std::size_t>(v, key);
  else if (key == "model.beta") s.beta = scalar<double>(v, key);
  else if (key == "model.basis") {
    try {
      s.basis = basis_from_string(scalar<std::string>(v, key));
    } catch (const std::exception& e) {
      throw ConfigError(e.what());
    }
  } else if (key == "model.grid_factor") s.grid_factor = scalar<std::size_t>(v, key);
  else if (key == "model.eigenvalues") s.eigenvalues = number_list(v, key);
  else if (key == "model.r") s.r = number_list(v, key);
  else if (key == "drift.kind") {
    try {
      s.drift = drift_kind_from_string(scalar<std::string>(v, key));
    } catch (const std::exception& e) {
      throw ConfigError(e.what());
    }
  } else if (key == "drift.b") s.b = number_list(v, key);
  else if (key == "drift.f") s.radial_f = scalar<std::string>(v, key);
  else if (key == "drift.kernel_rank") s.kernel_rank = scalar<std::size_t>(v, key);
  else if (key == "drift.kernel_strength") s.kernel_strength = scalar<double>(v, key);
  else if (key == "drift.zeta_F") s.zeta_F = scalar<double>(v, key);
  else if (key == "drift.zeta_R") s.zeta_R = scalar<double>(v, key);
  else if (key == "drift.super") s.super = scalar<std::string>(v, key);
  else if (key == "sim.dt") s.dt = scalar<double>(v, key);
  else if (key == "sim.horizon") s.horizon = scalar<double>(v, key);
  else if (key == "sim.scheme") {
    try {
      s.scheme = scheme_from_string(scalar<std::string>(v, key));
    } catch (const std::exception& e) {
      throw ConfigError(e.what());
    }
  } else if (key == "sim.seed") s.seed = scalar<std::uint64_t>(v, key);
  else if (key == "sim.record_stride") s.record_stride = scalar<std::size_t>(v, key);
  else if (key == "sampler.invariant") s.invariant = scalar<std::string>(v, key);
  else if (key == "sampler.samples") s.samples = static_cast<std::size_t>(scalar<double>(v, key));
  else if (key == "sampler.burn_in") s.burn_in = scalar<double>(v, key);
  else if (key == "sampler.thinning") s.thinning = scalar<double>(v, key);
  else if (key == "sampler.gibbs_step") s.gibbs_step = scalar<double>(v, key);
  else if (key == "sampler.gibbs_thinning") s.gibbs_thinning = scalar<std::size_t>(v, key);
  else if (key == "sampler.gibbs_burn_in") s.gibbs_burn_in = scalar<std::size_t>(v, key);
  else if (key == "checks") {
    if (v.IsNull()) {
      s.checks.clear();
      return;
    }
    if (!v.IsSequence()) throw ConfigError("'checks' must be a list");
    s.checks.clear();
    for (const auto& c : v) s.checks.push_back(parse_check(c));
  } else {
    throw ConfigError("unknown config key '" + key + "'");
  }
}

void walk(Scenario& s, const YAML::Node& node, const std::string& prefix) {
  for (const auto& kv : node) {
    std::string key = prefix.empty() ? kv.first.as<std::string>() : prefix + "." + kv.first.as<std::string>();
    if (kv.second.IsMap() && key != "checks") {
      walk(s, kv.second, key);
    } else {
      set_key(s, key, kv.second);
    }
  }
}

const std::map<std::string, std::string>& presets() {
  static const std::map<std::string, std::string> table{
      {"ou", R"(name: ou
description: One-mode Ornstein-Uhlenbeck process, A = -1, R = 1, F = 0. Log-Sobolev constant C = 1/2.
model:
  eigenvalues: [-1]
  r: [1]
drift:
  kind: zero
sim:
  dt: 0.001
  seed: 20201
sampler:
  invariant: gaussian
  samples: 1000000
checks:
  - name: ou_exactness
    t: 1
    x0: [1]
    samples: 100000
  - name: log_sobolev
    p: [1, 2]
  - poincare
  - name: hypercontractivity_exact
    t: 1.0986122886681098
    q: 2
  - name: hypercontractivity_mc
    t: 0.5
    q: 2
    outer: 300
    inner: 1000
  - name: harnack
    mode: oracle
  - name: harnack
    mode: monte_carlo
    samples: 20000
  - concentration
  - name: fernique
    lambdas: [0.05, 0.0884]
  - name: gradient_estimate
    t: [0, 0.5, 1]
    samples: 4000
  - name: semigroup_log_sobolev
    t: [0.1, 0.5, 1]
    samples: 20000
  - generator_identity
  - variational
  - name: supercontractivity
    lambdas: [0.25, 0.5, 0.9, 1.5]
    expected_failure: true
  - name: ultrabounded
    t: 1
    lambda: 1
    expected_failure: true
)"},
      {"reaction_diffusion_cubic", R"(name: reaction_diffusion_cubic
description: Stochastic reaction-diffusion equation on [0,1] with Dirichlet conditions, b(z) = z^3, white noise.
model:
  n: 8
  beta: 0
drift:
  kind: nemytskii
  b: [0, 0, 0, 1]
  zeta_F: 0
  super: fit
sim:
  dt: 0.001
  seed: 7301
sampler:
  invariant: ergodic
  samples: 10000
  gibbs_step: 0.02
  gibbs_thinning: 50
  gibbs_burn_in: 5000
checks:
  - name: invariant_cross_validation
    modes: 4
  - name: log_sobolev
    p: [2]
  - poincare
  - concentration
  - name: fernique
    lambdas: [0.5, 1, 2]
  - name: supercontractivity
    lambdas: [0.5, 1, 2, 5, 10]
  - name: semigroup_log_sobolev
    t: [0.1, 0.5, 1]
    samples: 2000
  - name: eps_log_sobolev
    eps: [0.1, 0.5, 1]
    ensemble: gibbs
  - name: gradient_estimate
    t: [0, 0.5]
    samples: 500
  - name: harnack
    mode: monte_carlo
    samples: 4000
    p: [2]
    t: [0.5]
    h: [0, 0.5]
  - generator_identity
  - variational
  - name: moment_bound
    p: 4
    horizon: 4
    samples: 200
  - name: ultrabounded
    t: 1
    lambda: 1
    points: 100
    samples: 200
    dt: 0.005
    scheme: split_implicit
)"},
      {"radial", R"(name: radial
description: Radial potential U(x) = -f(|x|^2) with f(s) = s^2 on eight Dirichlet modes.
model:
  n: 8
  beta: 0
drift:
  kind: radial
  f: power:1:2
  zeta_F: 0
  super: fit
sim:
  dt: 0.001
  seed: 7201
sampler:
  invariant: ergodic
  samples: 5000
checks:
  - name: log_sobolev
    p: [2]
  - poincare
  - concentration
  - name: fernique
    lambdas: [0.5, 1]
  - name: supercontractivity
    lambdas: [0.5, 1, 2]
  - name: gradient_estimate
    t: [0, 0.5]
    samples: 500
  - variational
  - name: ultrabounded
    t: 1
    lambda: 1
    points: 30
    samples: 200
    dt: 0.005
    scheme: split_implicit
)"},
      {"kernel_poly", R"(name: kernel_poly
description: Polynomial integral-kernel drift of rank two, R = (-A)^(-1/2), eight Dirichlet modes.
model:
  n: 8
  beta: 0.5
drift:
  kind: kernel
  kernel_rank: 2
  kernel_strength: 1
  zeta_F: 0
sim:
  dt: 0.001
  seed: 7101
sampler:
  invariant: ergodic
  samples: 5000
checks:
  - name: log_sobolev
    p: [2]
  - poincare
  - concentration
  - name: fernique
    lambdas: [0.01, 0.03]
  - name: gradient_estimate
    t: [0, 0.5]
    samples: 500
  - variational
)"}};
  return table;
}

}  // namespace

SpectralModel Scenario::build_model() const {
  if (!eigenvalues.empty()) {
    std::vector<double> rr = r.empty() ? std::vector<double>(eigenvalues.size(), 1.0) : r;
    if (rr.size() != eigenvalues.size()) throw ConfigError("model.r and model.eigenvalues differ in length");
    return SpectralModel::diagonal(eigenvalues, rr, basis, grid_factor);
  }
  if (basis == Basis::periodic) return SpectralModel::periodic_laplacian(n, beta, grid_factor);
  return SpectralModel::dirichlet_laplacian(n, beta, grid_factor);
}

DriftSpec Scenario::build_drift(const SpectralModel& model) const {
  double zr = std::isnan(zeta_R) ? model.zeta_A() + zeta_F : zeta_R;
  DriftSpec spec;
  switch (drift) {
    case DriftKind::zero:
      spec = DriftSpec::zero();
      spec.zeta_R = zr;
      break;
    case DriftKind::nemytskii:
      spec = DriftSpec::nemytskii(b, zeta_F, zr);
      break;
    case DriftKind::radial:
      spec = DriftSpec::radial(PowerProfile::parse(radial_f), zeta_F, zr);
      break;
    case DriftKind::kernel:
      spec = DriftSpec::kernel_diagonal(model.n(), kernel_rank, kernel_strength, zeta_F, zr);
      break;
  }
  if (super == "fit") {
    spec.super = fit_super_dissipativity(spec, model);
  } else if (super != "none") {
    auto sep = super.find(';');
    if (super.rfind("a:", 0) != 0 || sep == std::string::npos || super.compare(sep + 1, 4, "phi:") != 0)
      throw ConfigError("drift.super must be none, fit, or a:<a>;phi:power:<c>:<p>");
    SuperDissipativity sd;
    sd.a = std::stod(super.substr(2, sep - 2));
    sd.phi = PowerProfile::parse(super.substr(sep + 5));
    sd.validate();
    spec.super = sd;
  }
  try {
    spec.validate(model.n());
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return spec;
}

void Scenario::validate() const {
  if (eigenvalues.empty() && n == 0) throw ConfigError("model.n must be positive");
  if (!(dt > 0.0) || !(horizon > 0.0)) throw ConfigError("sim.dt and sim.horizon must be positive");
  if (samples == 0) throw ConfigError("sampler.samples must be positive");
  static const std::vector<std::string> samplers{"auto", "gaussian", "ergodic", "gibbs"};
  if (std::find(samplers.begin(), samplers.end(), invariant) == samplers.end())
    throw ConfigError("sampler.invariant must be auto, gaussian, ergodic or gibbs");
  SpectralModel model = [&] {
    try {
      return build_model();
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception& e) {
      throw ConfigError(e.what());
    }
  }();
  double zeta = model.zeta_A() + zeta_F;
  if (!(zeta < 0.0))
    throw ConfigError("zeta = zeta_A + zeta_F must be negative, got " + std::to_string(zeta));
  build_drift(model);
}

Scenario parse_scenario(const std::string& text) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::Exception& e) {
    throw ConfigError(std::string("invalid YAML: ") + e.what());
  }
  Scenario s;
  if (root.IsNull()) return s;
  if (!root.IsMap()) throw ConfigError("scenario must be a map");
  walk(s, root, "");
  s.validate();
  return s;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_scenario(ss.str());
}

void apply_override(Scenario& scenario, const std::string& assignment) {
  auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) throw ConfigError("override must be key=value: " + assignment);
  std::string key = assignment.substr(0, eq);
  YAML::Node value;
  try {
    value = YAML::Load(assignment.substr(eq + 1));
  } catch (const YAML::Exception& e) {
    throw ConfigError("bad override value for '" + key + "'");
  }
  set_key(scenario, key, value);
  scenario.validate();
}

std::vector<std::string> preset_names() {
  std::vector<std::string> out;
  for (const auto& kv : presets()) out.push_back(kv.first);
  return out;
}

std::string preset_yaml(const std::string& name) {
  auto it = presets().find(name);
  if (it == presets().end()) throw ConfigError("unknown preset '" + name + "'");
  return it->second;
}

Scenario preset(const std::string& name) { return parse_scenario(preset_yaml(name)); }

}  // namespace simlab
