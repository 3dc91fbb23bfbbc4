#include "simlab/harness.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "simlab/errors.hpp"
#include "simlab/integrator.hpp"
#include "simlab/parallel.hpp"
#include "simlab/quadrature.hpp"

namespace simlab {
namespace {

std::vector<double> evaluate(const MeasureEnsemble& ens, const SpectralModel& model, const TestFunction& phi) {
  std::vector<double> v(ens.size());
  parallel_for(ens.size(), [&](std::size_t i) { v[i] = phi.value(model, ens.point(i)); });
  return v;
}

std::vector<double> evaluate_grad_sq(const MeasureEnsemble& ens, const SpectralModel& model,
                                     const TestFunction& phi) {
  std::vector<double> v(ens.size());
  parallel_for(ens.size(), [&](std::size_t i) { v[i] = phi.r_gradient_norm_sq(model, ens.point(i)); });
  return v;
}

double mean_of(std::span<const double> v) { return v.empty() ? 0.0 : compensated_sum(v) / static_cast<double>(v.size()); }

/// u ln(u/B) - u + B >= 0, the pointwise entropy integrand.
double entropy_term(double u, double B) {
  if (B <= 0.0) return 0.0;
  if (u <= 0.0) return B;
  return std::max(0.0, u * std::log(u / B) - u + B);
}

void require_size(const MeasureEnsemble& ens) {
  if (ens.size() == 0) throw std::invalid_argument("empty ensemble");
}

std::string fmt(double v) { return format_number(v); }

}  // namespace

MeanEstimate entropy(const MeasureEnsemble& ensemble, const SpectralModel& model, const TestFunction& phi, double p) {
  if (!(p >= 1.0)) throw std::invalid_argument("entropy needs p >= 1");
  require_size(ensemble);
  auto vals = evaluate(ensemble, model, phi);
  std::vector<double> u(vals.size());
  for (std::size_t i = 0; i < u.size(); ++i) u[i] = std::pow(std::abs(vals[i]), p);
  double B = mean_of(u);
  std::vector<double> terms(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) terms[i] = entropy_term(u[i], B);
  return ensemble_mean(ensemble, terms);
}

InequalityReport check_log_sobolev(const MeasureEnsemble& ensemble, const SpectralModel& model,
                                   const TestFunction& phi, double p, const ConstantsPack& constants,
                                   const ReportOptions& opts) {
  if (!(p >= 1.0)) throw std::invalid_argument("log-Sobolev needs p >= 1");
  if (!phi.analytic_gradient()) throw UnsupportedError("log-Sobolev check needs a gradient");
  require_size(ensemble);
  auto vals = evaluate(ensemble, model, phi);
  auto g2 = evaluate_grad_sq(ensemble, model, phi);
  std::size_t N = vals.size();
  std::vector<double> u(N), lhs(N), rhs(N), diff(N);
  for (std::size_t i = 0; i < N; ++i) u[i] = std::pow(std::abs(vals[i]), p);
  double B = mean_of(u);
  double k = p * p * constants.C;
  for (std::size_t i = 0; i < N; ++i) {
    lhs[i] = entropy_term(u[i], B);
    rhs[i] = vals[i] != 0.0 ? k * std::pow(std::abs(vals[i]), p - 2.0) * g2[i] : 0.0;
    diff[i] = rhs[i] - lhs[i];
  }
  auto L = ensemble_mean(ensemble, lhs);
  auto R = ensemble_mean(ensemble, rhs);
  auto D = ensemble_mean(ensemble, diff);
  auto rep = make_report("log_sobolev[" + phi.name() + ",p=" + fmt(p) + "]", PaperEq::log_sobolev, L.mean, L.se,
                         R.mean, R.se, opts, D.se);
  rep.params = {{"p", p}, {"C", constants.C}, {"phi", phi.name()}, {"samples", N}};
  return rep;
}

InequalityReport check_poincare(const MeasureEnsemble& ensemble, const SpectralModel& model, const TestFunction& phi,
                                const ConstantsPack& constants, const ReportOptions& opts) {
  if (!phi.analytic_gradient()) throw UnsupportedError("Poincare check needs a gradient");
  require_size(ensemble);
  auto vals = evaluate(ensemble, model, phi);
  auto g2 = evaluate_grad_sq(ensemble, model, phi);
  std::size_t N = vals.size();
  double m = mean_of(vals);
  std::vector<double> lhs(N), rhs(N), diff(N);
  for (std::size_t i = 0; i < N; ++i) {
    lhs[i] = (vals[i] - m) * (vals[i] - m);
    rhs[i] = constants.C * g2[i];
    diff[i] = rhs[i] - lhs[i];
  }
  auto L = ensemble_mean(ensemble, lhs);
  auto R = ensemble_mean(ensemble, rhs);
  auto D = ensemble_mean(ensemble, diff);
  auto rep = make_report("poincare[" + phi.name() + "]", PaperEq::poincare, L.mean, L.se, R.mean, R.se, opts, D.se);
  rep.params = {{"C", constants.C}, {"phi", phi.name()}, {"samples", N}};
  return rep;
}

namespace {

struct HyperLogs {
  double lhs = 0.0;
  double rhs = 0.0;
};

/// log ||P(t)phi||_p and log ||phi||_q for phi = exp(theta s + kappa s^2) under the Gaussian invariant law.
HyperLogs gaussian_hyper_logs(const SpectralModel& model, double t, double p, double q, const TestFunction& phi) {
  if (phi.kind() != TestFunction::Kind::exp_quadratic || phi.floor() > 0.0)
    throw UnsupportedError("closed-form hypercontractivity needs an exp_quadratic test function");
  const auto& a = phi.directions()[0];
  auto lam = model.eigenvalues();
  auto r = model.r();
  double inf = std::numeric_limits<double>::infinity();
  double v_nu = 0.0, v_t = 0.0, w = 0.0;
  for (std::size_t k = 0; k < model.n() && k < a.size(); ++k) {
    double s2 = ou_variance(lam[k], r[k], inf);
    v_nu += a[k] * a[k] * s2;
    v_t += a[k] * a[k] * ou_variance(lam[k], r[k], t);
    w += a[k] * a[k] * std::exp(2.0 * lam[k] * t) * s2;
  }
  double theta = phi.theta(), kappa = phi.kappa();
  HyperLogs out;
  out.rhs = log_gaussian_exp_quadratic(q * theta, q * kappa, 0.0, v_nu) / q;
  double den = 1.0 - 2.0 * kappa * v_t;
  if (!(den > 0.0)) {
    out.lhs = inf;
    return out;
  }
  double c0 = -0.5 * std::log(den) + theta * theta * v_t / (2.0 * den);
  double c1 = theta / den;
  double c2 = kappa / den;
  out.lhs = c0 + log_gaussian_exp_quadratic(p * c1, p * c2, 0.0, w) / p;
  return out;
}

}  // namespace

InequalityReport check_hypercontractivity_gaussian(const SpectralModel& model, double t, double q,
                                                   const TestFunction& phi, const ConstantsPack& constants,
                                                   const ReportOptions& opts) {
  if (!(t > 0.0) || !(q > 1.0)) throw std::invalid_argument("hypercontractivity needs t > 0 and q > 1");
  double p = constants.p_max(q, t);
  auto logs = gaussian_hyper_logs(model, t, p, q, phi);
  auto rep = make_report("hypercontractivity_exact[" + phi.name() + ",t=" + fmt(t) + ",q=" + fmt(q) + "]",
                         PaperEq::hypercontractivity, std::exp(logs.lhs), 0.0, std::exp(logs.rhs), 0.0, opts);
  rep.params = {{"t", t}, {"q", q}, {"p_max", p}, {"C", constants.C}, {"phi", phi.name()}, {"mode", "gaussian"}};
  return rep;
}

std::optional<double> hypercontractivity_onset(const SpectralModel& model, double t0, double q,
                                               const TestFunction& phi, const ConstantsPack& constants,
                                               std::size_t grid) {
  double p = constants.p_max(q, t0);
  for (std::size_t i = grid; i >= 1; --i) {
    double t = t0 * static_cast<double>(i) / static_cast<double>(grid + 1);
    auto logs = gaussian_hyper_logs(model, t, p, q, phi);
    if (logs.lhs > logs.rhs + 1e-12 * std::max(1.0, std::abs(logs.rhs))) return t;
  }
  return std::nullopt;
}

InequalityReport check_hypercontractivity(const SpectralModel& model, const DriftSpec& spec,
                                          const MeasureEnsemble& ensemble, double t, double q,
                                          const TestFunction& phi, const ConstantsPack& constants,
                                          const NestedBudget& budget, const ReportOptions& opts) {
  if (!(t > 0.0) || !(q > 1.0)) throw std::invalid_argument("hypercontractivity needs t > 0 and q > 1");
  require_size(ensemble);
  if (budget.outer == 0 || budget.inner == 0) throw std::invalid_argument("nested budget must be positive");
  if (budget.outer * budget.inner > 100'000'000) throw Error("nested Monte Carlo budget exceeded");
  double p = constants.p_max(q, t);
  std::size_t outer = std::min(budget.outer, ensemble.size());
  std::size_t stride = ensemble.size() / outer;
  std::vector<double> inner(outer);
  for (std::size_t i = 0; i < outer; ++i) {
    auto est = estimate_semigroup(model, spec, t, ensemble.point(i * stride), phi, budget.inner,
                                  derive_seed(budget.seed, i), budget.sim);
    inner[i] = std::pow(std::abs(est.value), p);
  }
  auto M = mean_estimate(inner);
  auto vals = evaluate(ensemble, model, phi);
  for (auto& v : vals) v = std::pow(std::abs(v), q);
  auto Q = ensemble_mean(ensemble, vals);
  double lhs = std::pow(M.mean, 1.0 / p);
  double rhs = std::pow(Q.mean, 1.0 / q);
  double lhs_se = M.mean > 0.0 ? lhs * M.se / (p * M.mean) : 0.0;
  double rhs_se = Q.mean > 0.0 ? rhs * Q.se / (q * Q.mean) : 0.0;
  auto rep = make_report("hypercontractivity_mc[" + phi.name() + ",t=" + fmt(t) + ",q=" + fmt(q) + "]",
                         PaperEq::hypercontractivity, lhs, lhs_se, rhs, rhs_se, opts);
  rep.params = {{"t", t}, {"q", q}, {"p_max", p}, {"C", constants.C}, {"phi", phi.name()},
                {"outer", outer}, {"inner", budget.inner}, {"mode", "nested_mc"}};
  rep.note = "inner-sample noise biases the L^p norm of P(t)phi upward";
  return rep;
}

InequalityReport check_harnack(const SpectralModel& model, const DriftSpec& spec, double t,
                               std::span<const double> x, std::span<const double> h, double p,
                               const TestFunction& phi, const ConstantsPack& constants, EvalMode mode,
                               std::size_t samples, std::uint64_t seed, const SimulationSettings& sim,
                               const ReportOptions& opts) {
  if (!(p > 1.0) || !(t > 0.0)) throw std::invalid_argument("Harnack needs p > 1 and t > 0");
  std::size_t n = model.n();
  if (x.size() != n || h.size() != n) throw std::invalid_argument("state dimension mismatch");
  StateVector xh(n);
  for (std::size_t k = 0; k < n; ++k) xh[k] = x[k] + h[k];
  double hn = r_norm(model, h);
  double factor = std::exp(constants.harnack_exponent(p, t) * hn * hn);
  InequalityReport rep;
  std::string name = std::string(mode == EvalMode::oracle ? "harnack" : "harnack_mc") + "[" + phi.name() +
                     ",p=" + fmt(p) + ",t=" + fmt(t) + ",h=" + fmt(hn) + "]";
  if (mode == EvalMode::oracle) {
    if (spec.kind != DriftKind::zero) throw UnsupportedError("oracle Harnack needs F = 0");
    double lhs = std::pow(std::abs(mehler_oracle(model, t, xh, phi)), p);
    double rhs = mehler_oracle_transformed(model, t, x, phi, [p](double v) { return std::pow(std::abs(v), p); });
    rep = make_report(name, PaperEq::harnack, lhs, 0.0, rhs * factor, 0.0, opts);
  } else {
    // Common random numbers: the same noise drives the runs from x + h and from x.
    auto from_xh = simulate_endpoints(model, spec, t, xh, samples, seed, sim);
    auto from_x = simulate_endpoints(model, spec, t, x, samples, seed, sim);
    if (from_xh.diverged_count + from_x.diverged_count > samples / 100)
      throw DivergedStateError("more than 1% of trajectories diverged", from_xh.diverged_count);
    std::vector<double> a, b;
    for (std::size_t i = 0; i < samples; ++i) {
      if (from_xh.diverged[i] || from_x.diverged[i]) continue;
      a.push_back(phi.value(model, from_xh.point(i)));
      b.push_back(std::pow(std::abs(phi.value(model, from_x.point(i))), p) * factor);
    }
    auto A = mean_estimate(a);
    auto B = mean_estimate(b);
    double lhs = std::pow(std::abs(A.mean), p);
    double slope = p * std::pow(std::abs(A.mean), p - 1.0) * (A.mean < 0 ? -1.0 : 1.0);
    std::vector<double> infl(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) infl[i] = b[i] - slope * a[i];
    auto D = mean_estimate(infl);
    rep = make_report(name, PaperEq::harnack, lhs, std::abs(slope) * A.se, B.mean, B.se, opts, D.se);
    rep.params["samples"] = a.size();
  }
  rep.params["p"] = p;
  rep.params["t"] = t;
  rep.params["h_norm_R"] = hn;
  rep.params["exponent"] = constants.harnack_exponent(p, t);
  rep.params["mode"] = mode == EvalMode::oracle ? "oracle" : "monte_carlo";
  return rep;
}

InequalityReport check_concentration(const MeasureEnsemble& ensemble, const SpectralModel& model,
                                     const TestFunction& g, const ConstantsPack& constants, bool r_variant,
                                     std::size_t grid, const ReportOptions& opts) {
  require_size(ensemble);
  std::optional<double> lip;
  if (r_variant) {
    lip = g.lip_r(model);
  } else {
    std::vector<double> ones(model.n(), 1.0);
    auto plain = SpectralModel::diagonal(std::vector<double>(model.eigenvalues().begin(), model.eigenvalues().end()),
                                         ones, model.basis(), model.grid_factor());
    lip = g.lip_r(plain);
  }
  if (!lip) throw UnsupportedError("concentration check needs a certified Lipschitz constant");
  if (*lip > 1.0 + 1e-12) throw std::invalid_argument("concentration check needs Lip(g) <= 1");
  auto vals = evaluate(ensemble, model, g);
  std::size_t N = vals.size();
  double m = mean_of(vals);
  double rate = constants.concentration_rate(r_variant);
  double inflation = ensemble.is_chain() ? ar1_inflation(vals) : 1.0;
  auto n_eff = static_cast<std::size_t>(std::max(1.0, std::floor(static_cast<double>(N) / inflation)));
  std::vector<double> sorted = vals;
  std::sort(sorted.begin(), sorted.end());
  double s_max = sorted.back() - m;
  double resolution = wilson_interval(0, n_eff, opts.k_sigma).hi;
  nlohmann::json tail = nlohmann::json::array();
  bool ok = true;
  std::size_t resolvable = 0;
  double validated = 0.0;
  double worst_gap = -std::numeric_limits<double>::infinity();
  double worst_emp = 0.0, worst_bound = 1.0, worst_se = 0.0;
  for (std::size_t j = 1; j <= grid && s_max > 0.0; ++j) {
    double s = s_max * static_cast<double>(j) / static_cast<double>(grid);
    auto it = std::lower_bound(sorted.begin(), sorted.end(), m + s);
    auto count = static_cast<std::size_t>(sorted.end() - it);
    double emp = static_cast<double>(count) / static_cast<double>(N);
    double scaled = emp * static_cast<double>(n_eff);
    auto w = wilson_interval(static_cast<std::size_t>(std::llround(scaled)), n_eff, opts.k_sigma);
    double bound = std::exp(-s * s * rate);
    tail.push_back({s, emp, w.hi, bound});
    if (bound < resolution) continue;
    ++resolvable;
    validated = s;
    if (w.lo > bound) ok = false;
    double gap = emp - bound;
    if (gap > worst_gap) {
      worst_gap = gap;
      worst_emp = emp;
      worst_bound = bound;
      worst_se = (w.hi - w.lo) / (2.0 * opts.k_sigma);
    }
  }
  InequalityReport rep;
  std::string name = std::string(r_variant ? "concentration" : "concentration_h") + "[" + g.name() + "]";
  auto eq = r_variant ? PaperEq::concentration : PaperEq::concentration_h;
  if (resolvable == 0) {
    rep = make_qualitative(name, eq, true, 0.0, 1.0, "no resolvable tail point");
    rep.degraded = true;
  } else {
    rep = make_report(name, eq, worst_emp, worst_se, worst_bound, 0.0, opts);
    rep.verdict = ok ? (worst_gap <= 0.0 ? Verdict::pass : Verdict::pass_within_noise) : Verdict::fail;
    rep.degraded = resolvable < 3;
  }
  std::ostringstream note;
  note << "validated range s <= " << fmt(validated) << " (" << resolvable << " resolvable grid points)";
  rep.note = note.str();
  rep.params = {{"rate", rate}, {"mean", m}, {"n_eff", n_eff}, {"validated_s", validated}, {"lip", *lip}};
  rep.data["tail"] = tail;
  return rep;
}

double ExpMoment::mean() const { return std::exp(log_mean); }

ExpMoment exp_moment(const MeasureEnsemble& ensemble, const SpectralModel& model, double lambda, bool use_r_norm) {
  require_size(ensemble);
  std::size_t N = ensemble.size();
  std::vector<double> logw(N);
  for (std::size_t i = 0; i < N; ++i) {
    double s = use_r_norm ? r_norm(model, ensemble.point(i)) : h_norm(ensemble.point(i));
    logw[i] = lambda * s * s;
  }
  ExpMoment out;
  out.log_mean = log_mean_exp(logw);
  std::vector<double> w(N);
  for (std::size_t i = 0; i < N; ++i) w[i] = std::exp(logw[i] - out.log_mean);
  out.rel_se = ensemble_mean(ensemble, w).se;
  return out;
}

double gaussian_exp_moment(const SpectralModel& model, double lambda, bool use_r_norm) {
  auto lam = model.eigenvalues();
  auto r = model.r();
  double log_total = 0.0;
  for (std::size_t k = 0; k < model.n(); ++k) {
    double q = ou_variance(lam[k], r[k], std::numeric_limits<double>::infinity());
    if (use_r_norm) q /= r[k] * r[k];
    double d = 1.0 - 2.0 * lambda * q;
    if (!(d > 0.0)) return std::numeric_limits<double>::infinity();
    log_total += -0.5 * std::log(d);
  }
  return std::exp(log_total);
}

std::vector<InequalityReport> check_fernique(const MeasureEnsemble& ensemble, const SpectralModel& model,
                                             const std::vector<double>& lambda_grid,
                                             const ConstantsPack& constants, bool r_variant, bool gaussian_oracle,
                                             const ReportOptions& opts) {
  require_size(ensemble);
  std::vector<InequalityReport> out;
  double threshold = constants.fernique_threshold(r_variant);
  auto half_a = ensemble.head(ensemble.size() / 2);
  MeasureEnsemble half_b(ensemble.dim(),
                         std::vector<double>(ensemble.data().begin() +
                                                 static_cast<std::ptrdiff_t>(half_a.size() * ensemble.dim()),
                                             ensemble.data().end()),
                         ensemble.provenance);
  for (double lambda : lambda_grid) {
    auto full = exp_moment(ensemble, model, lambda, r_variant);
    std::string name = std::string(r_variant ? "fernique" : "fernique_h") + "[lambda=" + fmt(lambda) + "]";
    auto eq = r_variant ? PaperEq::fernique : PaperEq::fernique_h;
    InequalityReport rep;
    double value = full.mean();
    double se = value * full.rel_se;
    if (gaussian_oracle) {
      double exact = gaussian_exp_moment(model, lambda, r_variant);
      rep = make_report(name, eq, value, se, exact, 0.0, opts, -1.0, Relation::eq);
      rep.params["oracle"] = exact;
    } else {
      auto a = exp_moment(half_a, model, lambda, r_variant);
      auto b = exp_moment(half_b, model, lambda, r_variant);
      double va = a.mean(), vb = b.mean();
      rep = make_report(name, eq, va, va * a.rel_se, vb, vb * b.rel_se, opts, -1.0, Relation::eq);
      rep.note = "halving stability: first half vs second half of the ensemble";
    }
    rep.params["lambda"] = lambda;
    rep.params["threshold"] = threshold;
    rep.params["estimate"] = value;
    rep.params["estimate_se"] = se;
    rep.params["below_threshold"] = lambda < threshold;
    if (!std::isfinite(value)) rep.verdict = Verdict::fail;
    if (lambda >= threshold) {
      if (!rep.note.empty()) rep.note += "; ";
      rep.note += "lambda at or beyond the certified threshold " + fmt(threshold);
    }
    out.push_back(std::move(rep));
  }
  return out;
}

InequalityReport check_semigroup_log_sobolev(const SpectralModel& model, const DriftSpec& spec, double t,
                                             std::span<const double> x, const TestFunction& phi,
                                             const ConstantsPack& constants, std::size_t samples,
                                             std::uint64_t seed, double floor, const SimulationSettings& sim,
                                             const ReportOptions& opts) {
  if (!(t > 0.0)) throw std::invalid_argument("semigroup log-Sobolev needs t > 0");
  if (!phi.analytic_gradient()) throw UnsupportedError("semigroup log-Sobolev needs a gradient");
  TestFunction f = floor > 0.0 ? phi.floored(floor) : phi;
  auto cloud = simulate_endpoints(model, spec, t, x, samples, seed, sim);
  if (cloud.diverged_count > samples / 100) throw DivergedStateError("more than 1% of trajectories diverged", 0);
  std::vector<double> u, a, g;
  for (std::size_t i = 0; i < samples; ++i) {
    if (cloud.diverged[i]) continue;
    double v = f.value(model, cloud.point(i));
    double uu = v * v;
    u.push_back(uu);
    a.push_back(uu > 0.0 ? uu * std::log(uu) : 0.0);
    g.push_back(f.r_gradient_norm_sq(model, cloud.point(i)));
  }
  double Ct = constants.C_of_t(t);
  auto U = mean_estimate(u);
  auto A = mean_estimate(a);
  auto G = mean_estimate(g);
  double B = U.mean;
  double lnB = B > 0.0 ? std::log(B) : 0.0;
  std::vector<double> infl(u.size()), rhs_infl(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) {
    rhs_infl[i] = (lnB + 1.0) * u[i] + Ct * g[i];
    infl[i] = rhs_infl[i] - a[i];
  }
  double rhs = B * lnB + Ct * G.mean;
  auto D = mean_estimate(infl);
  auto Rse = mean_estimate(rhs_infl).se;
  auto rep = make_report("semigroup_log_sobolev[" + f.name() + ",t=" + fmt(t) + "]", PaperEq::semigroup_log_sobolev,
                         A.mean, A.se, rhs, Rse, opts, D.se);
  rep.params = {{"t", t}, {"C_t", Ct}, {"floor", floor}, {"samples", u.size()}};
  return rep;
}

EpsLogSobolevTerm eps_log_sobolev_beta(const MeasureEnsemble& ensemble, const SpectralModel& model, double eps,
                                       const ConstantsPack& constants, double p, double q) {
  if (!(eps > 0.0)) throw std::invalid_argument("eps must be positive");
  if (!(1.0 < p && p < q)) throw std::invalid_argument("need 1 < p < q");
  require_size(ensemble);
  double zeta = std::abs(constants.zeta_R);
  double a_coef = 0.5 * p * (q - 1.0) / (q - p);
  double eps_sup = a_coef * 3.0 / zeta;
  EpsLogSobolevTerm out;
  out.eps = eps;
  out.eps_used = std::min(eps, 0.999 * eps_sup);
  double Ct = out.eps_used / a_coef;
  out.t = -std::log1p(-Ct * zeta / 3.0) / (2.0 * zeta);
  std::vector<double> norms(ensemble.size());
  for (std::size_t i = 0; i < norms.size(); ++i) norms[i] = r_norm(model, ensemble.point(i));
  out.r_bar = quantile(norms, std::pow(2.0, -p));
  double kappa = q * (-std::expm1(-2.0 * zeta * out.t)) / (2.0 * zeta * (p - 1.0) * out.t * out.t);
  std::vector<double> logw(norms.size());
  for (std::size_t i = 0; i < norms.size(); ++i) logw[i] = kappa * (out.r_bar * out.r_bar + norms[i] * norms[i]);
  double log_e = log_mean_exp(logw);
  std::vector<double> w(logw.size());
  for (std::size_t i = 0; i < w.size(); ++i) w[i] = std::exp(logw[i] - log_e);
  double rel_se = ensemble_mean(ensemble, w).se;
  double log_c = std::log(2.0) + log_e / q;
  double b_coef = 0.5 * q * p / (q - p);
  out.beta = b_coef * log_c;
  out.beta_se = b_coef * rel_se / q;
  return out;
}

std::vector<InequalityReport> check_eps_log_sobolev(const MeasureEnsemble& ensemble, const SpectralModel& model,
                                                    const TestFunction& phi, const std::vector<double>& eps_grid,
                                                    const ConstantsPack& constants, const ReportOptions& opts) {
  if (!phi.analytic_gradient()) throw UnsupportedError("eps-log-Sobolev needs a gradient");
  require_size(ensemble);
  auto vals = evaluate(ensemble, model, phi);
  auto g2 = evaluate_grad_sq(ensemble, model, phi);
  std::size_t N = vals.size();
  std::vector<double> u(N);
  for (std::size_t i = 0; i < N; ++i) u[i] = vals[i] * vals[i];
  double B = mean_of(u);
  std::vector<double> lhs(N);
  for (std::size_t i = 0; i < N; ++i) lhs[i] = 0.5 * entropy_term(u[i], B);
  auto L = ensemble_mean(ensemble, lhs);
  auto G = ensemble_mean(ensemble, g2);
  std::vector<InequalityReport> out;
  for (double eps : eps_grid) {
    auto term = eps_log_sobolev_beta(ensemble, model, eps, constants);
    std::vector<double> rhs(N), diff(N);
    for (std::size_t i = 0; i < N; ++i) {
      rhs[i] = term.eps_used * g2[i] + term.beta * u[i];
      diff[i] = rhs[i] - lhs[i];
    }
    auto R = ensemble_mean(ensemble, rhs);
    auto D = ensemble_mean(ensemble, diff);
    double beta_part = term.beta_se * B;
    auto rep = make_report("eps_log_sobolev[" + phi.name() + ",eps=" + fmt(eps) + "]", PaperEq::eps_log_sobolev,
                           L.mean, L.se, R.mean, std::hypot(R.se, beta_part), opts, std::hypot(D.se, beta_part));
    rep.params = {{"eps", eps}, {"eps_used", term.eps_used}, {"t", term.t}, {"beta", term.beta},
                  {"beta_se", term.beta_se}, {"r_bar", term.r_bar}, {"dirichlet", G.mean}, {"l2_sq", B}};
    if (term.eps_used < eps) rep.note = "eps beyond the attainable range; used " + fmt(term.eps_used);
    out.push_back(std::move(rep));
  }
  return out;
}

InequalityReport check_gradient_estimate(const SpectralModel& model, const DriftSpec& spec, double t,
                                         std::span<const double> x, const TestFunction& phi,
                                         const ConstantsPack& constants, std::size_t samples, std::uint64_t seed,
                                         const SimulationSettings& sim, const ReportOptions& opts) {
  if (t < 0.0) throw std::invalid_argument("gradient estimate needs t >= 0");
  auto grad = estimate_gradient_semigroup(model, spec, t, x, phi, samples, seed, sim);
  SimulationSettings same = sim;
  same.scheme = Scheme::exp_euler;
  auto cloud = simulate_endpoints(model, spec, t, x, samples, seed, same);
  std::vector<double> g;
  for (std::size_t i = 0; i < samples; ++i)
    if (!cloud.diverged[i]) g.push_back(phi.r_gradient_norm_sq(model, cloud.point(i)));
  auto G = mean_estimate(g);
  double psi = t == 0.0 ? 1.0 : constants.psi_decay(t);
  auto rep = make_report("gradient_estimate[" + phi.name() + ",t=" + fmt(t) + "]", PaperEq::gradient_estimate,
                         grad.r_norm_sq, grad.r_norm_sq_se, psi * G.mean, psi * G.se, opts);
  rep.params = {{"t", t}, {"psi", psi}, {"samples", grad.samples}};
  return rep;
}

MeanEstimate log_exp_semigroup(const SpectralModel& model, const DriftSpec& spec, double t,
                               std::span<const double> x, double lambda, std::size_t samples, std::uint64_t seed,
                               const SimulationSettings& sim) {
  MeanEstimate out;
  if (spec.kind == DriftKind::zero) {
    auto law = ou_law(model, t, x);
    auto r = model.r();
    for (std::size_t k = 0; k < model.n(); ++k)
      out.mean += log_gaussian_exp_quadratic(0.0, lambda / (r[k] * r[k]), law.mean[k], law.variance[k]);
    out.count = 0;
    return out;
  }
  auto cloud = simulate_endpoints(model, spec, t, x, samples, seed, sim);
  if (cloud.diverged_count > samples / 100) throw DivergedStateError("more than 1% of trajectories diverged", 0);
  std::vector<double> logw;
  for (std::size_t i = 0; i < samples; ++i) {
    if (cloud.diverged[i]) continue;
    double s = r_norm(model, cloud.point(i));
    logw.push_back(lambda * s * s);
  }
  out.mean = log_mean_exp(logw);
  std::vector<double> w(logw.size());
  for (std::size_t i = 0; i < w.size(); ++i) w[i] = std::exp(logw[i] - out.mean);
  out.se = mean_estimate(w).se;
  out.count = logw.size();
  return out;
}

std::vector<InequalityReport> check_ultrabounded(const SpectralModel& model, const DriftSpec& spec,
                                                 const MeasureEnsemble& ensemble, const UltraboundedConfig& cfg,
                                                 const ReportOptions& opts) {
  require_size(ensemble);
  if (cfg.radii.size() < 2) throw std::invalid_argument("ultrabounded check needs at least two radii");
  std::size_t n = model.n();
  std::vector<InequalityReport> out;
  std::string tag = "[lambda=" + fmt(cfg.lambda) + ",t=" + fmt(cfg.t) + "]";

  // (a) sup over ensemble points, stability under doubling, saturation over widening balls.
  std::size_t points = std::min(cfg.points, ensemble.size());
  std::size_t stride = ensemble.size() / points;
  double sup_n = -std::numeric_limits<double>::infinity(), sup_2n = sup_n, sup_se = 0.0;
  bool finite = true;
  for (std::size_t i = 0; i < points; ++i) {
    auto x = ensemble.point(i * stride);
    auto e1 = log_exp_semigroup(model, spec, cfg.t, x, cfg.lambda, cfg.samples, derive_seed(cfg.seed, i), cfg.sim);
    auto e2 =
        log_exp_semigroup(model, spec, cfg.t, x, cfg.lambda, 2 * cfg.samples, derive_seed(cfg.seed, i), cfg.sim);
    finite = finite && std::isfinite(e1.mean) && std::isfinite(e2.mean);
    if (e1.mean > sup_n) {
      sup_n = e1.mean;
      sup_se = e1.se;
    }
    sup_2n = std::max(sup_2n, e2.mean);
  }
  bool stable = std::abs(sup_2n - sup_n) <= opts.k_sigma * sup_se + cfg.saturation_tol;
  nlohmann::json ball = nlohmann::json::array();
  std::vector<MeanEstimate> ball_vals;
  auto r = model.r();
  for (double rho : cfg.radii) {
    StateVector x(n, 0.0);
    x[0] = rho * r[0];
    auto e = log_exp_semigroup(model, spec, cfg.t, x, cfg.lambda, cfg.samples, cfg.seed, cfg.sim);
    ball_vals.push_back(e);
    ball.push_back({rho, e.mean, e.se});
    finite = finite && std::isfinite(e.mean);
  }
  const auto& last = ball_vals.back();
  const auto& prev = ball_vals[ball_vals.size() - 2];
  double increment = last.mean - prev.mean;
  auto a = make_report("ultrabounded_sup" + tag, PaperEq::ultrabounded, increment, std::hypot(last.se, prev.se),
                       cfg.saturation_tol, 0.0, opts);
  std::ostringstream note;
  note << "log sup over " << points << " ensemble points " << fmt(sup_n) << " (doubled samples " << fmt(sup_2n)
       << "); log-increment between the two outer balls " << fmt(increment);
  if (!finite) {
    a.verdict = Verdict::fail;
    note << "; non-finite estimate";
  }
  if (!stable) {
    a.verdict = Verdict::fail;
    note << "; sup not stable under doubling";
  }
  if (!spec.super) note << "; coupled-pair sub-check skipped (no super-dissipativity pair)";
  a.note = note.str();
  a.params = {{"t", cfg.t}, {"lambda", cfg.lambda}, {"points", points}, {"samples", cfg.samples},
              {"log_sup", sup_n}, {"log_sup_doubled", sup_2n}, {"stable", stable},
              {"oracle", spec.kind == DriftKind::zero}};
  a.data["balls"] = ball;
  a.seed = cfg.seed;
  out.push_back(std::move(a));

  // (b) coupled pairs.
  if (spec.super) {
    const auto& sd = *spec.super;
    Rng rng(derive_seed(cfg.seed, 0xb));
    std::normal_distribution<double> normal;
    double worst = std::numeric_limits<double>::infinity();
    double worst_lhs = 0.0, worst_rhs = 0.0, worst_sep = 0.0, worst_t = 0.0;
    std::size_t pair_index = 0;
    nlohmann::json rows = nlohmann::json::array();
    for (double sep : cfg.separations) {
      for (std::size_t j = 0; j < cfg.pairs_per_separation; ++j, ++pair_index) {
        auto xs = ensemble.point((pair_index * stride) % ensemble.size());
        StateVector x(xs.begin(), xs.end()), y(n), z(n);
        for (auto& v : z) v = normal(rng);
        for (std::size_t k = 0; k < n; ++k) z[k] *= r[k];
        double zn = r_norm(model, z);
        for (std::size_t k = 0; k < n; ++k) y[k] = x[k] + sep * z[k] / zn;
        IntegratorConfig ic;
        ic.dt = cfg.pair_sim.dt;
        ic.horizon = cfg.t;
        ic.scheme = cfg.pair_sim.scheme;
        ic.seed = derive_seed(cfg.seed, 1000 + pair_index);
        auto [tx, ty] = integrate_coupled_pair(model, spec, ic, x, y);
        if (tx.diverged || ty.diverged) {
          worst = -std::numeric_limits<double>::infinity();
          worst_sep = sep;
          continue;
        }
        double pair_worst = std::numeric_limits<double>::infinity();
        for (std::size_t s = 1; s < tx.times.size(); ++s) {
          StateVector d(n);
          for (std::size_t k = 0; k < n; ++k) d[k] = tx.states[s][k] - ty.states[s][k];
          double dn = r_norm(model, d);
          double lhs = dn * dn;
          double rhs = sd.pair_bound(tx.times[s]);
          double m = rhs - lhs;
          pair_worst = std::min(pair_worst, m);
          if (m < worst) {
            worst = m;
            worst_lhs = lhs;
            worst_rhs = rhs;
            worst_sep = sep;
            worst_t = tx.times[s];
          }
        }
        rows.push_back({sep, pair_worst});
      }
    }
    auto b = make_report("ultrabounded_pairs" + tag, PaperEq::ultrabounded_contraction, worst_lhs, 0.0, worst_rhs,
                         0.0, opts);
    if (!std::isfinite(worst)) b.verdict = Verdict::fail;
    b.params = {{"t", cfg.t}, {"a", sd.a}, {"phi", sd.phi.to_string()}, {"worst_separation", worst_sep},
                {"worst_time", worst_t}, {"pairs", pair_index}, {"fitted", sd.fitted}};
    b.data["pairs"] = rows;
    b.note = "pathwise bound checked at every step of synchronously coupled trajectories";
    if (sd.fitted) b.note += "; (a, phi) fitted by scalar scan";
    b.seed = cfg.seed;
    out.push_back(std::move(b));
  }
  return out;
}

InequalityReport check_generator_identity(const MeasureEnsemble& ensemble, const SpectralModel& model,
                                          const DriftSpec& spec, const TestFunction& psi,
                                          const ReportOptions& opts) {
  require_size(ensemble);
  std::size_t N = ensemble.size();
  std::vector<double> lhs(N), rhs(N), diff(N);
  parallel_for(N, [&](std::size_t i) {
    auto x = ensemble.point(i);
    lhs[i] = psi.value(model, x) * apply_generator(model, spec, psi, x);
    rhs[i] = -0.5 * psi.r_gradient_norm_sq(model, x);
    diff[i] = rhs[i] - lhs[i];
  });
  auto L = ensemble_mean(ensemble, lhs);
  auto R = ensemble_mean(ensemble, rhs);
  auto D = ensemble_mean(ensemble, diff);
  auto rep = make_report("generator_identity[" + psi.name() + "]", PaperEq::generator_identity, L.mean, L.se, R.mean,
                         R.se, opts, D.se, Relation::eq);
  rep.params = {{"samples", N}};
  return rep;
}

}  // namespace simlab

namespace simlab {

std::vector<InequalityReport> check_ou_exactness(const SpectralModel& model, double t, std::span<const double> x,
                                                 std::size_t samples, std::uint64_t seed,
                                                 const ReportOptions& opts) {
  if (samples < 2) throw std::invalid_argument("need at least two samples");
  auto cloud = simulate_endpoints(model, DriftSpec::zero(), t, x, samples, seed);
  auto law = ou_law(model, t, x);
  std::vector<InequalityReport> out;
  std::vector<double> col(samples), dev(samples);
  for (std::size_t k = 0; k < model.n(); ++k) {
    for (std::size_t i = 0; i < samples; ++i) col[i] = cloud.point(i)[k];
    auto M = mean_estimate(col);
    for (std::size_t i = 0; i < samples; ++i) dev[i] = (col[i] - M.mean) * (col[i] - M.mean);
    auto V = mean_estimate(dev);
    double var = V.mean * static_cast<double>(samples) / static_cast<double>(samples - 1);
    std::string tag = "[k=" + std::to_string(k + 1) + ",t=" + fmt(t) + "]";
    auto m = make_report("ou_mean" + tag, PaperEq::ou_exactness, M.mean, M.se, law.mean[k], 0.0, opts, -1.0,
                         Relation::eq);
    m.seed = seed;
    m.params = {{"mode", k + 1}, {"samples", samples}};
    out.push_back(std::move(m));
    auto v = make_report("ou_variance" + tag, PaperEq::ou_exactness, var, V.se, law.variance[k], 0.0, opts, -1.0,
                         Relation::eq);
    v.seed = seed;
    v.params = {{"mode", k + 1}, {"samples", samples}};
    out.push_back(std::move(v));
  }
  return out;
}

std::vector<InequalityReport> check_variational_estimates(const SpectralModel& model, const DriftSpec& spec,
                                                          const VariationalCheckConfig& cfg) {
  std::size_t n = model.n();
  std::size_t T = cfg.trajectories;
  bool linear = spec.kind == DriftKind::zero;
  double zeta = model.zeta_A() + spec.zeta_F;
  double factor = 1.0 + 10.0 * cfg.dt;
  std::vector<double> worst_e(T, 0.0), worst_r(T, 0.0), worst_lin(T, 0.0);
  std::vector<char> bad(T, 0);
  auto r = model.r();
  parallel_for(T, [&](std::size_t i) {
    Rng rng(derive_seed(cfg.seed, i));
    std::normal_distribution<double> normal;
    StateVector x0(n), hr(n);
    for (auto& v : x0) v = cfg.start_scale * normal(rng);
    for (std::size_t k = 0; k < n; ++k) hr[k] = r[k] * normal(rng);
    IntegratorConfig ic;
    ic.dt = cfg.dt;
    ic.horizon = cfg.horizon;
    ic.seed = derive_seed(cfg.seed, 10'000 + i);
    auto tr = integrate(model, spec, ic, x0);
    if (tr.diverged) {
      bad[i] = 1;
      return;
    }
    auto he = unit_vector(n, 0);
    auto ye = integrate_variational(model, spec, tr, he);
    auto yr = integrate_variational(model, spec, tr, hr);
    double he_norm = e_norm(model, he), hr_norm = r_norm(model, hr);
    for (std::size_t s = 1; s < tr.times.size(); ++s) {
      double t = tr.times[s];
      if (linear) {
        auto exact_e = semigroup_flow(model, t, he);
        auto exact_r = semigroup_flow(model, t, hr);
        for (std::size_t k = 0; k < n; ++k)
          worst_lin[i] = std::max({worst_lin[i], std::abs(ye.states[s][k] - exact_e[k]),
                                   std::abs(yr.states[s][k] - exact_r[k])});
      }
      worst_e[i] = std::max(worst_e[i], e_norm(model, ye.states[s]) / (std::exp(zeta * t) * he_norm));
      worst_r[i] = std::max(worst_r[i], r_norm(model, yr.states[s]) / (std::exp(spec.zeta_R * t) * hr_norm));
    }
  });
  std::size_t diverged = 0;
  double we = 0.0, wr = 0.0, wl = 0.0;
  for (std::size_t i = 0; i < T; ++i) {
    diverged += bad[i] ? 1 : 0;
    we = std::max(we, worst_e[i]);
    wr = std::max(wr, worst_r[i]);
    wl = std::max(wl, worst_lin[i]);
  }
  std::vector<InequalityReport> out;
  nlohmann::json params = {{"trajectories", T}, {"dt", cfg.dt}, {"horizon", cfg.horizon}, {"zeta", zeta},
                           {"zeta_R", spec.zeta_R}, {"diverged", diverged}};
  auto e = make_report("variational_e_bound", PaperEq::variational_e, we, 0.0, factor, 0.0);
  e.note = "max over trajectories and steps of ||Y(t)||_E / (e^{zeta t} ||h||_E), h = e_1";
  e.params = params;
  e.seed = cfg.seed;
  auto rr = make_report("variational_r_bound", PaperEq::variational_r, wr, 0.0, factor, 0.0);
  rr.note = "max over trajectories and steps of ||Y(t)||_R / (e^{zeta_R t} ||h||_R), random h";
  rr.params = params;
  rr.seed = cfg.seed;
  if (diverged > 0) e.verdict = rr.verdict = Verdict::fail;
  out.push_back(std::move(e));
  out.push_back(std::move(rr));
  if (linear) {
    auto l = make_report("variational_linear_exact", PaperEq::variational_e, wl, 0.0, 1e-10, 0.0);
    l.note = "max coefficient error against e^{tA} h";
    l.params = params;
    l.seed = cfg.seed;
    out.push_back(std::move(l));
  }
  return out;
}

std::vector<InequalityReport> check_invariant_cross_validation(const MeasureEnsemble& a, const MeasureEnsemble& b,
                                                               std::size_t modes, const ReportOptions& opts) {
  require_size(a);
  require_size(b);
  if (a.dim() != b.dim()) throw std::invalid_argument("ensembles have different dimensions");
  std::vector<InequalityReport> out;
  auto second_moment = [](const MeasureEnsemble& e, std::size_t k) {
    std::vector<double> col(e.size());
    for (std::size_t i = 0; i < e.size(); ++i) col[i] = e.point(i)[k];
    double m = mean_of(col);
    for (auto& v : col) v = (v - m) * (v - m);
    return ensemble_mean(e, col);
  };
  for (std::size_t k = 0; k < std::min(modes, a.dim()); ++k) {
    auto va = second_moment(a, k);
    auto vb = second_moment(b, k);
    auto rep = make_report("invariant_variance[k=" + std::to_string(k + 1) + "]",
                           PaperEq::invariant_cross_validation, va.mean, va.se, vb.mean, vb.se, opts, -1.0,
                           Relation::eq);
    rep.params = {{"mode", k + 1}, {"a", to_string(a.provenance)}, {"b", to_string(b.provenance)},
                  {"a_samples", a.size()}, {"b_samples", b.size()}};
    out.push_back(std::move(rep));
  }
  return out;
}

}  // namespace simlab
