#include "simlab/semigroup.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "simlab/errors.hpp"
#include "simlab/parallel.hpp"
#include "simlab/quadrature.hpp"
#include "simlab/stats.hpp"

namespace simlab {

const char* to_string(Provenance p) {
  switch (p) {
    case Provenance::ergodic: return "ergodic";
    case Provenance::ensemble_of_endpoints: return "ensemble_of_endpoints";
    case Provenance::gaussian_oracle: return "gaussian_oracle";
    case Provenance::gibbs_ula: return "gibbs_ula";
  }
  return "unknown";
}

namespace {

bool linear_shortcut(const DriftSpec& spec, const SimulationSettings& settings) {
  return spec.kind == DriftKind::zero && settings.exact_linear_shortcut;
}

std::size_t step_count(double t, double dt) {
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(t / dt)));
}

}  // namespace

EndpointCloud simulate_endpoints(const SpectralModel& model, const DriftSpec& spec, double t,
                                 std::span<const double> x, std::size_t samples, std::uint64_t seed,
                                 const SimulationSettings& settings) {
  if (t < 0.0) throw std::invalid_argument("t must be nonnegative");
  if (x.size() != model.n()) throw std::invalid_argument("state dimension mismatch");
  std::size_t n = model.n();
  EndpointCloud cloud;
  cloud.n = n;
  cloud.data.resize(samples * n);
  cloud.diverged.assign(samples, 0);
  if (t == 0.0) {
    for (std::size_t i = 0; i < samples; ++i) std::copy(x.begin(), x.end(), cloud.data.begin() + i * n);
    return cloud;
  }
  std::size_t steps = linear_shortcut(spec, settings) ? 1 : step_count(t, settings.dt);
  double dt = t / static_cast<double>(steps);
  parallel_for(samples, [&](std::size_t i) {
    Stepper st(model, spec, dt, settings.scheme);
    Rng rng(derive_seed(seed, i));
    std::span<double> xi(cloud.data.data() + i * n, n);
    std::copy(x.begin(), x.end(), xi.begin());
    if (st.run(xi, steps, rng)) cloud.diverged[i] = 1;
  });
  for (char d : cloud.diverged) cloud.diverged_count += d ? 1 : 0;
  return cloud;
}

MeasureEnsemble::MeasureEnsemble(std::size_t n, std::vector<double> data, Provenance p)
    : provenance(p), n_(n), data_(std::move(data)) {
  if (n == 0 || data_.size() % n != 0) throw std::invalid_argument("ensemble data does not match dimension");
}

MeasureEnsemble MeasureEnsemble::head(std::size_t count) const {
  count = std::min(count, size());
  MeasureEnsemble e(n_, std::vector<double>(data_.begin(), data_.begin() + static_cast<std::ptrdiff_t>(count * n_)),
                    provenance);
  e.burn_in = burn_in;
  e.thinning = thinning;
  e.seed = seed;
  return e;
}

MeanEstimate ensemble_mean(const MeasureEnsemble& ensemble, std::span<const double> values) {
  double inflation = ensemble.is_chain() ? ar1_inflation(values) : 1.0;
  return mean_estimate(values, inflation);
}

StationarityDiagnostic stationarity_diagnostic(const MeasureEnsemble& ensemble) {
  StationarityDiagnostic d;
  std::size_t N = ensemble.size();
  if (N < 20) {
    d.ok = false;
    d.detail = "too few samples for a stationarity diagnostic";
    return d;
  }
  std::size_t half = N / 2;
  std::size_t modes = std::min<std::size_t>(4, ensemble.dim());
  std::vector<double> a(half), b(N - half);
  std::ostringstream os;
  for (std::size_t k = 0; k < modes; ++k) {
    for (int power = 1; power <= 2; ++power) {
      for (std::size_t i = 0; i < N; ++i) {
        double v = ensemble.point(i)[k];
        v = power == 1 ? v : v * v;
        if (i < half) a[i] = v; else b[i - half] = v;
      }
      MeanEstimate ea = ensemble.is_chain() ? mean_estimate(a, ar1_inflation(a)) : mean_estimate(a);
      MeanEstimate eb = ensemble.is_chain() ? mean_estimate(b, ar1_inflation(b)) : mean_estimate(b);
      double se = std::sqrt(ea.se * ea.se + eb.se * eb.se);
      double z = se > 0.0 ? std::abs(ea.mean - eb.mean) / se : 0.0;
      if (z > d.worst_z) {
        d.worst_z = z;
        os.str("");
        os << "mode " << (k + 1) << " moment " << power << ": halves differ by " << z << " stderr";
        d.detail = os.str();
      }
    }
  }
  d.ok = d.worst_z <= 3.0;
  return d;
}

MeasureEnsemble sample_invariant(const SpectralModel& model, const DriftSpec& spec, const SamplerConfig& config) {
  double zeta = model.zeta_A() + spec.zeta_F;
  if (!(zeta < 0.0)) throw std::invalid_argument("sample_invariant needs zeta = zeta_A + zeta_F < 0");
  if (config.count == 0) throw std::invalid_argument("sample count must be positive");
  double burn = config.burn_in > 0.0 ? config.burn_in : 20.0 / std::abs(zeta);
  double thin = config.thinning > 0.0 ? config.thinning : 1.0 / std::abs(zeta);
  std::size_t n = model.n();
  bool exact = linear_shortcut(spec, config.sim);
  std::size_t burn_steps = exact ? 1 : step_count(burn, config.sim.dt);
  std::size_t thin_steps = exact ? 1 : step_count(thin, config.sim.dt);
  Stepper burn_stepper(model, spec, burn / static_cast<double>(burn_steps), config.sim.scheme);
  Stepper thin_stepper(model, spec, thin / static_cast<double>(thin_steps), config.sim.scheme);
  Rng rng(config.seed);
  StateVector x(n, 0.0);
  if (burn_stepper.run(x, burn_steps, rng)) throw DivergedStateError("invariant sampler diverged during burn-in", 0);
  std::vector<double> data(config.count * n);
  for (std::size_t i = 0; i < config.count; ++i) {
    if (thin_stepper.run(x, thin_steps, rng)) throw DivergedStateError("invariant sampler diverged", i);
    std::copy(x.begin(), x.end(), data.begin() + static_cast<std::ptrdiff_t>(i * n));
  }
  MeasureEnsemble e(n, std::move(data), Provenance::ergodic);
  e.burn_in = burn;
  e.thinning = thin;
  e.seed = config.seed;
  e.stationarity = stationarity_diagnostic(e);
  if (config.strict && !e.stationarity.ok) throw Error("stationarity diagnostic failed: " + e.stationarity.detail);
  return e;
}

MeasureEnsemble sample_gaussian_invariant(const SpectralModel& model, std::size_t count, std::uint64_t seed) {
  std::size_t n = model.n();
  std::vector<double> sd(n);
  for (std::size_t k = 0; k < n; ++k)
    sd[k] = std::sqrt(ou_variance(model.eigenvalues()[k], model.r()[k], std::numeric_limits<double>::infinity()));
  std::vector<double> data(count * n);
  parallel_for(count, [&](std::size_t i) {
    Rng rng(derive_seed(seed, i));
    std::normal_distribution<double> normal;
    for (std::size_t k = 0; k < n; ++k) data[i * n + k] = sd[k] * normal(rng);
  });
  MeasureEnsemble e(n, std::move(data), Provenance::gaussian_oracle);
  e.seed = seed;
  e.stationarity = stationarity_diagnostic(e);
  return e;
}

GibbsResult gibbs_sample(const SpectralModel& model, const DriftSpec& spec, const GibbsConfig& config) {
  if (!(config.step > 0.0 && config.step < 2.0)) throw std::invalid_argument("pCN step must lie in (0, 2)");
  if (config.count == 0 || config.thinning_steps == 0) throw std::invalid_argument("count and thinning must be positive");
  std::size_t n = model.n();
  auto lam = model.eigenvalues();
  auto r = model.r();
  if (spec.kind != DriftKind::zero) {
    for (double rk : r)
      if (rk != 1.0) throw UnsupportedError("Gibbs representation of the invariant law needs R = Id");
  }
  std::vector<double> C(n), sqrtC(n);
  for (std::size_t k = 0; k < n; ++k) {
    C[k] = r[k] * r[k] / (2.0 * std::abs(lam[k]));
    sqrtC[k] = std::sqrt(C[k]);
  }
  double d = config.step;
  double a = (2.0 - d) / (2.0 + d);
  double g = 2.0 * d / (2.0 + d);
  double s = std::sqrt(8.0 * d) / (2.0 + d);
  DriftEvaluator ev(spec, model);
  Rng rng(config.seed);
  std::normal_distribution<double> normal;
  StateVector x(n, 0.0), f(n);
  GibbsResult out;
  auto advance = [&]() {
    ev.apply(x, f);
    for (std::size_t k = 0; k < n; ++k) {
      // grad Phi = -2 F - 2 tilt x / r^2
      double grad = -2.0 * f[k] - 2.0 * config.tilt * x[k] / (r[k] * r[k]);
      x[k] = a * x[k] - g * C[k] * grad + s * sqrtC[k] * normal(rng);
    }
    for (double v : x)
      if (!(std::abs(v) <= kDivergenceThreshold)) return false;
    return true;
  };
  std::vector<double> data;
  data.reserve(config.count * n);
  try {
    for (std::size_t i = 0; i < config.burn_in_steps; ++i)
      if (!advance()) throw DivergedStateError("Gibbs chain diverged", i);
    for (std::size_t i = 0; i < config.count; ++i) {
      for (std::size_t j = 0; j < config.thinning_steps; ++j)
        if (!advance()) throw DivergedStateError("Gibbs chain diverged", i);
      data.insert(data.end(), x.begin(), x.end());
    }
  } catch (const DivergedStateError&) {
    out.diverged = true;
  }
  if (data.empty()) data.assign(n, 0.0), out.diverged = true;
  out.ensemble = MeasureEnsemble(n, std::move(data), Provenance::gibbs_ula);
  out.ensemble.seed = config.seed;
  out.ensemble.burn_in = static_cast<double>(config.burn_in_steps) * d;
  out.ensemble.thinning = static_cast<double>(config.thinning_steps) * d;
  if (!out.diverged) {
    out.ensemble.stationarity = stationarity_diagnostic(out.ensemble);
    if (config.strict && !out.ensemble.stationarity.ok)
      throw Error("stationarity diagnostic failed: " + out.ensemble.stationarity.detail);
  } else {
    out.ensemble.stationarity.ok = false;
    out.ensemble.stationarity.detail = "chain diverged";
  }
  return out;
}

MeasureEnsemble gibbs_oracle_sample(const SpectralModel& model, std::vector<double> b_coeffs, std::size_t count,
                                    double step, std::uint64_t seed) {
  DriftSpec spec;
  bool zero = std::all_of(b_coeffs.begin(), b_coeffs.end(), [](double v) { return v == 0.0; });
  if (!zero) spec = DriftSpec::nemytskii(std::move(b_coeffs), 0.0, 0.0);
  GibbsConfig cfg;
  cfg.count = count;
  cfg.step = step;
  cfg.seed = seed;
  auto res = gibbs_sample(model, spec, cfg);
  if (res.diverged) throw DivergedStateError("Gibbs chain diverged", 0);
  return res.ensemble;
}

SemigroupEstimate estimate_semigroup(const SpectralModel& model, const DriftSpec& spec, double t,
                                     std::span<const double> x, const TestFunction& phi, std::size_t samples,
                                     std::uint64_t seed, const SimulationSettings& settings) {
  if (samples == 0) throw std::invalid_argument("samples must be positive");
  SemigroupEstimate est;
  est.t = t;
  est.x.assign(x.begin(), x.end());
  auto cloud = simulate_endpoints(model, spec, t, x, samples, seed, settings);
  est.diverged = cloud.diverged_count;
  if (static_cast<double>(cloud.diverged_count) > 0.01 * static_cast<double>(samples))
    throw DivergedStateError("more than 1% of trajectories diverged", cloud.diverged_count);
  std::vector<double> values;
  values.reserve(samples);
  for (std::size_t i = 0; i < samples; ++i)
    if (!cloud.diverged[i]) values.push_back(phi.value(model, cloud.point(i)));
  auto m = mean_estimate(values);
  est.value = m.mean;
  est.stderr_ = m.se;
  est.samples = values.size();
  return est;
}

GaussianLaw ou_law(const SpectralModel& model, double t, std::span<const double> x) {
  GaussianLaw law;
  law.mean = semigroup_flow(model, t, x);
  law.variance.resize(model.n());
  for (std::size_t k = 0; k < model.n(); ++k) law.variance[k] = ou_variance(model.eigenvalues()[k], model.r()[k], t);
  return law;
}

namespace {

void projected(const GaussianLaw& law, const StateVector& a, double& mean, double& var) {
  mean = 0.0;
  var = 0.0;
  for (std::size_t k = 0; k < std::min(a.size(), law.mean.size()); ++k) {
    mean += a[k] * law.mean[k];
    var += a[k] * a[k] * law.variance[k];
  }
}

}  // namespace

double mehler_oracle(const SpectralModel& model, double t, std::span<const double> x, const TestFunction& phi) {
  if (t == 0.0) return phi.value(model, x);
  auto law = ou_law(model, t, x);
  using K = TestFunction::Kind;
  if (phi.floor() > 0.0) {
    auto prof = phi.single_direction();
    if (!prof) throw UnsupportedError("Mehler oracle needs a single-direction profile for floored functions");
    double m, v;
    projected(law, prof->direction, m, v);
    return gaussian_expectation(m, v, prof->g);
  }
  switch (phi.kind()) {
    case K::constant:
      return phi.offset();
    case K::linear_functional: {
      double m, v;
      projected(law, phi.directions()[0], m, v);
      return m + phi.offset();
    }
    case K::exp_quadratic: {
      double m, v;
      projected(law, phi.directions()[0], m, v);
      return std::exp(log_gaussian_exp_quadratic(phi.theta(), phi.kappa(), m, v));
    }
    case K::cylindrical_tanh: {
      double total = phi.offset();
      for (std::size_t i = 0; i < phi.directions().size(); ++i) {
        double m, v;
        projected(law, phi.directions()[i], m, v);
        double w = phi.weights()[i];
        total += w * gaussian_expectation(m, v, [](double s) { return std::tanh(s); });
      }
      return total;
    }
    case K::r_norm_squared: {
      if (phi.cap() > 0.0) break;
      auto r = model.r();
      double s = 0.0;
      for (std::size_t k = 0; k < model.n(); ++k) {
        double shift = k < phi.shift().size() ? phi.shift()[k] : 0.0;
        double d = law.mean[k] - shift;
        s += (d * d + law.variance[k]) / (r[k] * r[k]);
      }
      return s;
    }
    case K::exp_r_norm: {
      auto r = model.r();
      double lg = 0.0;
      for (std::size_t k = 0; k < model.n(); ++k)
        lg += log_gaussian_exp_quadratic(0.0, phi.lambda() / (r[k] * r[k]), law.mean[k], law.variance[k]);
      return std::exp(lg);
    }
    default:
      break;
  }
  throw UnsupportedError("Mehler oracle does not support test function " + phi.name());
}

double mehler_oracle_transformed(const SpectralModel& model, double t, std::span<const double> x,
                                 const TestFunction& phi, const std::function<double(double)>& psi) {
  auto prof = phi.single_direction();
  if (!prof) throw UnsupportedError("transformed Mehler oracle needs a single-direction test function");
  if (t == 0.0) return psi(phi.value(model, x));
  auto law = ou_law(model, t, x);
  double m, v;
  projected(law, prof->direction, m, v);
  auto g = prof->g;
  return gaussian_expectation(m, v, [&](double s) { return psi(g(s)); });
}

GradientEstimate estimate_gradient_semigroup(const SpectralModel& model, const DriftSpec& spec, double t,
                                             std::span<const double> x, const TestFunction& phi,
                                             std::size_t samples, std::uint64_t seed,
                                             const SimulationSettings& settings) {
  if (samples == 0) throw std::invalid_argument("samples must be positive");
  if (!phi.analytic_gradient()) throw UnsupportedError("gradient of the test function is unavailable");
  std::size_t n = model.n();
  auto r = model.r();
  GradientEstimate est;
  est.components.assign(n, 0.0);
  est.stderr_.assign(n, 0.0);
  std::vector<double> contrib(samples * n, 0.0);
  std::vector<char> bad(samples, 0);
  std::size_t steps = t == 0.0 ? 0 : (linear_shortcut(spec, settings) ? 1 : step_count(t, settings.dt));
  double dt = steps == 0 ? 1.0 : t / static_cast<double>(steps);
  parallel_for(samples, [&](std::size_t s) {
    Stepper st(model, spec, dt, Scheme::exp_euler);
    Rng rng(derive_seed(seed, s));
    StateVector xs(x.begin(), x.end()), eta(n), g(n);
    std::vector<StateVector> ys(n, StateVector(n, 0.0));
    for (std::size_t i = 0; i < n; ++i) ys[i][i] = r[i];
    for (std::size_t j = 0; j < steps; ++j) {
      for (std::size_t i = 0; i < n; ++i)
        if (r[i] > 0.0) st.variational_step(xs, ys[i]);
      st.draw_noise(rng, eta);
      if (!st.step(xs, eta)) {
        bad[s] = 1;
        return;
      }
    }
    phi.gradient(model, xs, g);
    for (std::size_t i = 0; i < n; ++i) contrib[s * n + i] = h_inner(g, ys[i]);
  });
  std::vector<double> col;
  col.reserve(samples);
  for (char b : bad) est.diverged += b ? 1 : 0;
  if (static_cast<double>(est.diverged) > 0.01 * static_cast<double>(samples))
    throw DivergedStateError("more than 1% of trajectories diverged", est.diverged);
  for (std::size_t i = 0; i < n; ++i) {
    col.clear();
    for (std::size_t s = 0; s < samples; ++s)
      if (!bad[s]) col.push_back(contrib[s * n + i]);
    auto m = mean_estimate(col);
    est.components[i] = m.mean;
    est.stderr_[i] = m.se;
  }
  col.clear();
  for (std::size_t s = 0; s < samples; ++s) {
    if (bad[s]) continue;
    double z = 0.0;
    for (std::size_t i = 0; i < n; ++i) z += 2.0 * est.components[i] * contrib[s * n + i];
    col.push_back(z);
  }
  for (double c : est.components) est.r_norm_sq += c * c;
  est.r_norm_sq_se = mean_estimate(col).se;
  est.samples = samples - est.diverged;
  return est;
}

double apply_generator(const SpectralModel& model, const DriftSpec& spec, const TestFunction& phi,
                       std::span<const double> x) {
  if (!phi.analytic_hessian()) throw UnsupportedError("generator needs analytic second derivatives");
  std::size_t n = model.n();
  auto lam = model.eigenvalues();
  StateVector f(n), g(n);
  DriftEvaluator ev(spec, model);
  ev.apply(x, f);
  phi.gradient(model, x, g);
  double drift = 0.0;
  for (std::size_t k = 0; k < n; ++k) drift += (lam[k] * x[k] + f[k]) * g[k];
  return 0.5 * phi.r2_hessian_trace(model, x) + drift;
}

}  // namespace simlab
