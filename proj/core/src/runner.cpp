#include "simlab/runner.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <sstream>

#include "simlab/constants.hpp"
#include "simlab/errors.hpp"
#include "simlab/harness.hpp"
#include "simlab/integrator.hpp"
#include "simlab/parallel.hpp"
#include "simlab/semigroup.hpp"
#include "simlab/supercontractivity.hpp"

namespace simlab {
namespace {

using json = nlohmann::json;

double num(const json& p, const char* key, double fallback) {
  if (!p.contains(key)) return fallback;
  if (!p[key].is_number()) throw ConfigError(std::string("parameter '") + key + "' must be a number");
  return p[key].get<double>();
}

std::size_t count(const json& p, const char* key, std::size_t fallback) {
  double v = num(p, key, static_cast<double>(fallback));
  if (!(v >= 0.0) || v != std::floor(v)) throw ConfigError(std::string("parameter '") + key + "' must be a count");
  return static_cast<std::size_t>(v);
}

std::vector<double> list(const json& p, const char* key, std::vector<double> fallback) {
  if (!p.contains(key)) return fallback;
  const auto& v = p[key];
  if (v.is_number()) return {v.get<double>()};
  if (!v.is_array()) throw ConfigError(std::string("parameter '") + key + "' must be a list");
  std::vector<double> out;
  for (const auto& e : v) {
    if (!e.is_number()) throw ConfigError(std::string("parameter '") + key + "' must hold numbers");
    out.push_back(e.get<double>());
  }
  return out;
}

std::string text(const json& p, const char* key, const std::string& fallback) {
  if (!p.contains(key)) return fallback;
  if (!p[key].is_string()) throw ConfigError(std::string("parameter '") + key + "' must be a string");
  return p[key].get<std::string>();
}

bool flag(const json& p, const char* key, bool fallback) {
  if (!p.contains(key)) return fallback;
  if (!p[key].is_boolean()) throw ConfigError(std::string("parameter '") + key + "' must be true or false");
  return p[key].get<bool>();
}

StateVector scaled_unit(const SpectralModel& model, double scale) {
  auto v = unit_vector(model.n(), 0);
  v[0] = scale;
  return v;
}

/// Observables used across checks, built for a given model.
struct Battery {
  TestFunction x1, tanh1, tanh_multi, exp_quad, r_cap, constant;
  TestFunction shifted_tanh, exp_half, floored_tanh, r_cap_shift, one;

  explicit Battery(const SpectralModel& model)
      : x1(TestFunction::linear(unit_vector(model.n(), 0)).named("x1")),
        tanh1(TestFunction::tanh_cylinder({unit_vector(model.n(), 0)}, {1.0}).named("tanh_x1")),
        tanh_multi(make_multi(model)),
        exp_quad(TestFunction::exp_quadratic(unit_vector(model.n(), 0), 0.5).named("exp_half_x1")),
        r_cap(TestFunction::r_norm_squared(shift(model), 1.0).named("r_norm_sq_capped")),
        constant(TestFunction::constant(1.0).named("constant")),
        shifted_tanh(
            TestFunction::tanh_cylinder({unit_vector(model.n(), 0)}, {1.0}, 2.0).named("two_plus_tanh_x1")),
        exp_half(exp_quad),
        floored_tanh(tanh1.floored(0.25).named("floored_tanh_x1")),
        r_cap_shift(r_cap),
        one(constant) {}

  static StateVector shift(const SpectralModel& model) {
    StateVector s(model.n(), 0.0);
    s[0] = 0.5 * model.r()[0];
    return s;
  }
  static TestFunction make_multi(const SpectralModel& model) {
    std::size_t d = std::min<std::size_t>(3, model.n());
    std::vector<StateVector> dirs;
    std::vector<double> w;
    for (std::size_t k = 0; k < d; ++k) {
      dirs.push_back(unit_vector(model.n(), k));
      w.push_back(1.0 / static_cast<double>(d));
    }
    return TestFunction::tanh_cylinder(dirs, w).named("tanh_cylinder_" + std::to_string(d));
  }

  std::vector<TestFunction> p2() const { return {tanh1, x1, tanh_multi, exp_quad, r_cap}; }
  /// Strictly positive members for p = 1.
  std::vector<TestFunction> p1() const { return {shifted_tanh, exp_half, floored_tanh, r_cap_shift, one}; }
};

class Context {
 public:
  explicit Context(const Scenario& sc)
      : sc_(sc), model_(sc.build_model()), spec_(sc.build_drift(model_)), battery_(model_) {
    sim_.dt = sc.dt;
    sim_.scheme = sc.scheme;
    constants_ = make_constants(model_, spec_, derive_seed(sc.seed, 11));
  }

  const Scenario& scenario() const { return sc_; }
  const SpectralModel& model() const { return model_; }
  const DriftSpec& spec() const { return spec_; }
  const ConstantsPack& constants() const { return constants_; }
  const SimulationSettings& sim() const { return sim_; }
  const Battery& battery() const { return battery_; }
  std::size_t scale(std::size_t samples) const { return sc_.profile == "full" ? 10 * samples : samples; }

  SimulationSettings sim_from(const json& p) const {
    SimulationSettings s = sim_;
    s.dt = num(p, "dt", s.dt);
    if (p.contains("scheme")) {
      try {
        s.scheme = scheme_from_string(text(p, "scheme", "exp_euler"));
      } catch (const ConfigError&) {
        throw;
      }
    }
    return s;
  }

  std::string resolve(const std::string& kind) const {
    std::string k = kind == "auto" ? sc_.invariant : kind;
    if (k == "auto") k = spec_.kind == DriftKind::zero ? "gaussian" : "ergodic";
    return k;
  }

  const MeasureEnsemble& ensemble(const std::string& kind) {
    std::string k = resolve(kind);
    auto it = cache_.find(k);
    if (it != cache_.end()) return it->second;
    std::size_t count = scale(sc_.samples);
    MeasureEnsemble ens;
    if (k == "gaussian") {
      if (spec_.kind != DriftKind::zero) throw ConfigError("the gaussian invariant law needs F = 0");
      ens = sample_gaussian_invariant(model_, count, derive_seed(sc_.seed, 1));
    } else if (k == "ergodic") {
      SamplerConfig c;
      c.burn_in = sc_.burn_in;
      c.thinning = sc_.thinning;
      c.count = count;
      c.seed = derive_seed(sc_.seed, 2);
      c.sim = sim_;
      ens = sample_invariant(model_, spec_, c);
    } else if (k == "gibbs") {
      auto res = gibbs_sample(model_, spec_, gibbs_config(count, derive_seed(sc_.seed, 3)));
      if (res.diverged) throw DivergedStateError("Gibbs chain diverged", 0);
      ens = std::move(res.ensemble);
    } else {
      throw ConfigError("unknown ensemble '" + kind + "'");
    }
    return cache_.emplace(k, std::move(ens)).first->second;
  }

  GibbsConfig gibbs_config(std::size_t count, std::uint64_t seed) const {
    GibbsConfig g;
    g.count = count;
    g.step = sc_.gibbs_step;
    g.seed = seed;
    g.burn_in_steps = sc_.gibbs_burn_in;
    g.thinning_steps = sc_.gibbs_thinning;
    return g;
  }

 private:
  const Scenario& sc_;
  SpectralModel model_;
  DriftSpec spec_;
  ConstantsPack constants_;
  SimulationSettings sim_;
  Battery battery_;
  std::map<std::string, MeasureEnsemble> cache_;
};

void append(std::vector<InequalityReport>& out, std::vector<InequalityReport> more) {
  for (auto& r : more) out.push_back(std::move(r));
}

std::vector<InequalityReport> run_check(Context& ctx, const CheckSpec& check, std::uint64_t seed) {
  const auto& p = check.params;
  const auto& model = ctx.model();
  const auto& spec = ctx.spec();
  const auto& C = ctx.constants();
  const auto& bat = ctx.battery();
  bool linear = spec.kind == DriftKind::zero;
  double r1 = model.r()[0];
  ReportOptions opts{num(p, "k_sigma", 3.0), num(p, "abs_tol", 0.0)};
  std::vector<InequalityReport> out;
  const std::string& name = check.name;

  if (name == "ou_exactness") {
    if (!linear) throw ConfigError("ou_exactness needs drift.kind = zero");
    auto x0 = list(p, "x0", scaled_unit(model, 1.0));
    if (x0.size() != model.n()) throw ConfigError("ou_exactness.x0 has the wrong length");
    append(out, check_ou_exactness(model, num(p, "t", 1.0), x0, ctx.scale(count(p, "samples", 100000)), seed,
                                   {num(p, "k_sigma", 4.0), 0.0}));
  } else if (name == "moment_bound") {
    IntegratorConfig ic;
    ic.dt = num(p, "dt", ctx.sim().dt);
    ic.horizon = num(p, "horizon", 4.0);
    ic.seed = seed;
    ic.record_stride = count(p, "record_stride", 100);
    ic.scheme = ctx.sim().scheme;
    double order = num(p, "p", 2.0);
    StateVector x0(model.n(), 0.0);
    auto m = check_moment_bound(model, spec, ic, x0, order, ctx.scale(count(p, "samples", 200)));
    bool ok = m.plateau_stable && m.diverged == 0 && std::isfinite(m.sup_ratio);
    std::ostringstream note;
    note << "sup_t E||X||^p / (1 + ||x0||^p) = " << format_number(m.sup_ratio) << "; plateau slope "
         << format_number(m.plateau_slope) << " +- " << format_number(m.plateau_slope_se);
    auto rep = make_qualitative("moment_bound[p=" + format_number(order) + "]", PaperEq::moment_bound, ok,
                                std::abs(m.plateau_slope), 2.0 * m.plateau_slope_se, note.str());
    rep.params = {{"p", order},
                  {"sup_ratio", m.sup_ratio},
                  {"stochastic_convolution_sup", m.stochastic_convolution_sup},
                  {"stochastic_convolution_h2_limit", m.stochastic_convolution_h2_limit},
                  {"diverged", m.diverged}};
    out.push_back(std::move(rep));
  } else if (name == "log_sobolev") {
    const auto& ens = ctx.ensemble(text(p, "ensemble", "auto"));
    for (double order : list(p, "p", {1.0, 2.0}))
      for (const auto& f : order == 1.0 ? bat.p1() : bat.p2())
        out.push_back(check_log_sobolev(ens, model, f, order, C, opts));
  } else if (name == "poincare") {
    const auto& ens = ctx.ensemble(text(p, "ensemble", "auto"));
    for (const auto& f : bat.p2()) out.push_back(check_poincare(ens, model, f, C, opts));
  } else if (name == "hypercontractivity_exact") {
    if (!linear) throw ConfigError("hypercontractivity_exact needs drift.kind = zero");
    double t = num(p, "t", std::log(3.0)), q = num(p, "q", 2.0);
    ReportOptions exact{3.0, num(p, "abs_tol", 1e-8)};
    for (double kappa : list(p, "kappas", {0.0, -0.1})) {
      for (double theta : list(p, "thetas", {0.25, 0.5, 1.0})) {
        auto f = TestFunction::exp_quadratic(unit_vector(model.n(), 0), theta, kappa)
                     .named("exp_quadratic[theta=" + format_number(theta) + ",kappa=" + format_number(kappa) + "]");
        auto rep = check_hypercontractivity_gaussian(model, t, q, f, C, exact);
        auto onset = hypercontractivity_onset(model, t, q, f, C);
        rep.params["onset_t"] = onset ? json(*onset) : json(nullptr);
        out.push_back(std::move(rep));
      }
    }
  } else if (name == "hypercontractivity_mc") {
    const auto& ens = ctx.ensemble(text(p, "ensemble", "auto"));
    NestedBudget b;
    b.outer = count(p, "outer", 1000);
    b.inner = ctx.scale(count(p, "inner", 1000));
    b.seed = seed;
    b.sim = ctx.sim_from(p);
    out.push_back(check_hypercontractivity(model, spec, ens, num(p, "t", 0.5), num(p, "q", 2.0), bat.tanh1, C, b,
                                           opts));
  } else if (name == "harnack") {
    std::string mode = text(p, "mode", "oracle");
    if (mode != "oracle" && mode != "monte_carlo") throw ConfigError("harnack.mode must be oracle or monte_carlo");
    EvalMode em = mode == "oracle" ? EvalMode::oracle : EvalMode::monte_carlo;
    if (em == EvalMode::oracle && !linear) throw ConfigError("oracle Harnack needs drift.kind = zero");
    ReportOptions o = em == EvalMode::oracle ? ReportOptions{3.0, num(p, "abs_tol", 1e-8)} : opts;
    auto x = scaled_unit(model, num(p, "x", 0.3) * r1);
    std::size_t samples = ctx.scale(count(p, "samples", 20000));
    std::size_t j = 0;
    for (double order : list(p, "p", {1.5, 2.0, 4.0}))
      for (double t : list(p, "t", {0.1, 1.0, 3.0}))
        for (double hn : list(p, "h", {0.0, 0.5, 2.0})) {
          auto h = scaled_unit(model, hn * r1);
          out.push_back(check_harnack(model, spec, t, x, h, order, bat.tanh1, C, em, samples,
                                      derive_seed(seed, j++), ctx.sim_from(p), o));
        }
  } else if (name == "concentration") {
    const auto& ens = ctx.ensemble(text(p, "ensemble", "auto"));
    std::string variant = text(p, "variant", "r");
    if (variant != "r" && variant != "h" && variant != "both") throw ConfigError("concentration.variant: r, h or both");
    std::size_t grid = count(p, "grid", 60);
    if (variant != "h") {
      auto g = TestFunction::linear(scaled_unit(model, 1.0 / r1)).named("x1_over_r1");
      out.push_back(check_concentration(ens, model, g, C, true, grid, opts));
    }
    if (variant != "r") out.push_back(check_concentration(ens, model, bat.x1, C, false, grid, opts));
  } else if (name == "fernique") {
    const auto& ens = ctx.ensemble(text(p, "ensemble", "auto"));
    bool oracle = flag(p, "oracle", linear && ens.provenance == Provenance::gaussian_oracle);
    append(out, check_fernique(ens, model, list(p, "lambdas", {0.05}), C, flag(p, "r_variant", true), oracle, opts));
  } else if (name == "supercontractivity") {
    const auto& ens = ctx.ensemble(text(p, "ensemble", "auto"));
    SupercontractivityConfig sc;
    sc.tilted = ctx.gibbs_config(count(p, "tilted_samples", 5000), derive_seed(seed, 1));
    sc.k_sigma = opts.k_sigma;
    auto rep = check_supercontractivity_integrals(ens, model, spec, list(p, "lambdas", {0.5, 1.0, 2.0}), sc);
    out.push_back(std::move(rep));
  } else if (name == "semigroup_log_sobolev") {
    auto x = scaled_unit(model, num(p, "x", 0.5) * r1);
    std::size_t j = 0;
    for (double t : list(p, "t", {0.1, 0.5, 1.0}))
      out.push_back(check_semigroup_log_sobolev(model, spec, t, x, bat.tanh1, C,
                                                ctx.scale(count(p, "samples", 20000)), derive_seed(seed, j++),
                                                num(p, "floor", 1.0), ctx.sim_from(p), opts));
  } else if (name == "eps_log_sobolev") {
    const auto& ens = ctx.ensemble(text(p, "ensemble", "auto"));
    append(out, check_eps_log_sobolev(ens, model, bat.tanh_multi, list(p, "eps", {0.1, 0.5, 1.0}), C, opts));
  } else if (name == "gradient_estimate") {
    auto x = scaled_unit(model, num(p, "x", 0.3) * r1);
    std::size_t j = 0;
    std::vector<TestFunction> fs{bat.tanh1};
    if (linear) fs.push_back(bat.x1);
    for (const auto& f : fs)
      for (double t : list(p, "t", {0.0, 0.5, 1.0}))
        out.push_back(check_gradient_estimate(model, spec, t, x, f, C, ctx.scale(count(p, "samples", 2000)),
                                              derive_seed(seed, j++), ctx.sim_from(p), opts));
  } else if (name == "ultrabounded") {
    const auto& ens = ctx.ensemble(text(p, "ensemble", "auto"));
    UltraboundedConfig u;
    u.t = num(p, "t", 1.0);
    u.lambda = num(p, "lambda", 1.0);
    u.points = count(p, "points", 100);
    u.samples = ctx.scale(count(p, "samples", 2000));
    u.seed = seed;
    u.radii = list(p, "radii", u.radii);
    u.saturation_tol = num(p, "saturation_tol", u.saturation_tol);
    u.separations = list(p, "separations", u.separations);
    u.pairs_per_separation = count(p, "pairs_per_separation", u.pairs_per_separation);
    u.sim = ctx.sim_from(p);
    u.pair_sim.dt = num(p, "pair_dt", u.pair_sim.dt);
    append(out, check_ultrabounded(model, spec, ens, u, opts));
  } else if (name == "generator_identity") {
    const auto& ens = ctx.ensemble(text(p, "ensemble", "auto"));
    for (const auto& f : {bat.tanh1, bat.tanh_multi}) out.push_back(check_generator_identity(ens, model, spec, f, opts));
  } else if (name == "variational") {
    VariationalCheckConfig v;
    v.trajectories = count(p, "trajectories", 100);
    v.horizon = num(p, "horizon", 1.0);
    v.dt = num(p, "dt", ctx.sim().dt);
    v.seed = seed;
    append(out, check_variational_estimates(model, spec, v));
  } else if (name == "invariant_cross_validation") {
    const auto& a = ctx.ensemble(text(p, "a", "ergodic"));
    const auto& b = ctx.ensemble(text(p, "b", "gibbs"));
    append(out, check_invariant_cross_validation(a, b, count(p, "modes", 4), {num(p, "k_sigma", 4.0), 0.0}));
  } else {
    throw ConfigError("unknown check '" + name + "'");
  }
  return out;
}

std::string check_key(const InequalityReport& r) { return r.scenario + "/" + r.name; }

}  // namespace

RunResult run_scenario(const Scenario& scenario) {
  scenario.validate();
  Context ctx(scenario);
  RunResult result;
  for (std::size_t i = 0; i < scenario.checks.size(); ++i) {
    const auto& check = scenario.checks[i];
    std::uint64_t seed = derive_seed(scenario.seed, 1000 + i);
    auto start = std::chrono::steady_clock::now();
    std::vector<InequalityReport> reps;
    try {
      reps = run_check(ctx, check, seed);
    } catch (const ConfigError&) {
      throw;
    } catch (const std::invalid_argument& e) {
      throw ConfigError(check.name + ": " + e.what());
    } catch (const std::exception& e) {
      auto rep = make_qualitative(check.name + "[error]", PaperEq::timing, false, 0.0, 0.0, e.what());
      rep.params = check.params;
      reps.push_back(std::move(rep));
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    result.timings.emplace_back(check.name + "#" + std::to_string(i), secs);
    for (auto& r : reps) {
      r.scenario = scenario.name;
      if (r.seed == 0) r.seed = seed;
      r.expected_failure = check.expected_failure;
      result.reports.push_back(std::move(r));
    }
  }
  result.exit_code = suite_exit_code(result.reports);
  return result;
}

json reports_to_json(const std::vector<InequalityReport>& reports) {
  json arr = json::array();
  for (const auto& r : reports) arr.push_back(r);
  return arr;
}

void write_artifacts(const RunResult& result, const std::string& directory) {
  namespace fs = std::filesystem;
  fs::create_directories(directory);
  fs::path dir(directory);
  {
    std::ofstream os(dir / "report.json");
    os << reports_to_json(result.reports).dump(2) << '\n';
  }
  {
    std::ofstream os(dir / "summary.csv");
    write_summary_csv(os, result.reports);
  }
  {
    json t = json::object();
    for (const auto& [k, v] : result.timings) t[k] = v;
    std::ofstream os(dir / "timings.json");
    os << t.dump(2) << '\n';
  }
  for (std::size_t i = 0; i < result.reports.size(); ++i) {
    const auto& r = result.reports[i];
    if (!r.data.contains("tail")) continue;
    std::ofstream os(dir / ("tail_" + std::to_string(i) + ".csv"));
    os << "t,empirical,wilson_hi,bound\n";
    for (const auto& row : r.data["tail"]) {
      for (std::size_t c = 0; c < row.size(); ++c)
        os << (c ? "," : "") << format_number(row[c].get<double>());
      os << '\n';
    }
  }
}

std::vector<InequalityReport> run_ll_test(const LlTestConfig& config) {
  std::vector<InequalityReport> out;
  for (std::size_t n : config.dims) {
    if (n == 0) throw ConfigError("ll-test dimensions must be positive");
    auto model = SpectralModel::dirichlet_laplacian(n, config.beta);
    for (const auto& f : lasry_lions_corpus(model)) {
      auto reps = property_suite(f, model, config.suite);
      for (auto& r : reps) {
        r.scenario = "ll_n" + std::to_string(n);
        r.seed = config.suite.seed;
        out.push_back(std::move(r));
      }
    }
  }
  if (!config.closed_form) return out;
  auto model = SpectralModel::diagonal({-1.0}, {1.0});
  auto corpus = lasry_lions_corpus(model);
  for (const auto& f : corpus) {
    double cap;
    if (f.name == "abs_x1") cap = std::numeric_limits<double>::infinity();
    else if (f.name == "abs_x1_clamped") cap = 1.0;
    else continue;
    for (double eps : config.suite.eps_grid) {
      if (!(cap >= eps / 2.0)) continue;
      double worst = 0.0;
      for (int i = 0; i <= 20; ++i) {
        double x = -2.5 + 0.25 * i;
        StateVector xs{x};
        double got = envelope(f, eps, xs, model, config.suite.settings).value;
        worst = std::max(worst, std::abs(got - abs_clamped_envelope(x, eps, cap)));
      }
      auto rep = make_report("ll_closed_form[" + f.name + ",eps=" + format_number(eps) + "]",
                             PaperEq::lasry_lions_oracle, worst, 0.0, 1e-6, 0.0);
      rep.scenario = "ll_closed_form";
      rep.seed = config.suite.seed;
      out.push_back(std::move(rep));
    }
  }
  return out;
}

CompareResult compare_reports(const json& a, const json& b) {
  if (!a.is_array() || !b.is_array()) throw ConfigError("report documents must be JSON arrays");
  auto index = [](const json& doc) {
    std::map<std::string, InequalityReport> out;
    for (const auto& item : doc) {
      auto r = item.get<InequalityReport>();
      std::string key = check_key(r);
      std::string unique = key;
      for (int k = 2; out.count(unique); ++k) unique = key + "#" + std::to_string(k);
      out.emplace(unique, std::move(r));
    }
    return out;
  };
  auto ia = index(a), ib = index(b);
  for (const auto& [k, v] : ia)
    if (!ib.count(k)) throw ConfigError("check '" + k + "' missing from the second report");
  for (const auto& [k, v] : ib)
    if (!ia.count(k)) throw ConfigError("check '" + k + "' missing from the first report");
  CompareResult res;
  for (const auto& [k, ra] : ia) {
    const auto& rb = ib.at(k);
    bool flip = ra.verdict != rb.verdict;
    bool same_margin = ra.margin == rb.margin || (std::isnan(ra.margin) && std::isnan(rb.margin));
    if (!flip && same_margin) continue;
    auto num = [](double v) { return std::isfinite(v) ? json(v) : json(format_number(v)); };
    json entry = {{"check", k},
                  {"margin_a", num(ra.margin)},
                  {"margin_b", num(rb.margin)},
                  {"delta", num(rb.margin - ra.margin)},
                  {"joint_se_a", num(ra.joint_se)},
                  {"verdict_a", to_string(ra.verdict)},
                  {"verdict_b", to_string(rb.verdict)},
                  {"verdict_flip", flip}};
    res.diff.push_back(entry);
    if (flip) ++res.verdict_flips;
  }
  return res;
}

}  // namespace simlab
