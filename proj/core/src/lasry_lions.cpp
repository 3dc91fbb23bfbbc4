#include "simlab/lasry_lions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>

#include "simlab/errors.hpp"
#include "simlab/integrator.hpp"
#include "simlab/parallel.hpp"

namespace simlab {

const char* to_string(LipFamily f) {
  switch (f) {
    case LipFamily::piecewise_linear: return "piecewise_linear";
    case LipFamily::norm_based: return "norm_based";
    case LipFamily::smooth: return "smooth";
  }
  return "smooth";
}

EnvelopeMode envelope_mode_from_string(const std::string& s) {
  if (s == "grid") return EnvelopeMode::grid;
  if (s == "descent") return EnvelopeMode::descent;
  throw ConfigError("unknown envelope mode '" + s + "'");
}

namespace {

using Vec = std::vector<double>;

double norm2(const Vec& v) {
  double s = 0.0;
  for (double a : v) s += a * a;
  return s;
}

Vec random_in_ball(std::size_t n, double radius, Rng& rng) {
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> unif;
  Vec v(n);
  for (auto& a : v) a = normal(rng);
  double s = std::sqrt(norm2(v));
  double scale = s > 0.0 ? radius * std::pow(unif(rng), 1.0 / static_cast<double>(n)) / s : 0.0;
  for (auto& a : v) a *= scale;
  return v;
}

struct SearchResult {
  Vec u;
  double value = 0.0;
  double step = 0.0;
  std::size_t evals = 0;
};

/// Complete-poll pattern search on coordinate and random directions, halving the step after an unsuccessful poll.
template <class Fn>
SearchResult pattern_search(Fn&& fn, Vec u, double fu, double step, double tol, std::size_t max_evals, Rng& rng) {
  std::size_t n = u.size();
  std::normal_distribution<double> normal;
  std::vector<Vec> dirs;
  auto refresh = [&] {
    dirs.clear();
    for (std::size_t i = 0; i < n; ++i) {
      Vec e(n, 0.0);
      e[i] = 1.0;
      dirs.push_back(e);
      e[i] = -1.0;
      dirs.push_back(e);
    }
    if (n > 1) {
      for (std::size_t i = 0; i < 2 * n; ++i) {
        Vec d(n);
        for (auto& a : d) a = normal(rng);
        double s = std::sqrt(norm2(d));
        for (auto& a : d) a /= s;
        dirs.push_back(d);
      }
    }
  };
  refresh();
  SearchResult res;
  Vec trial(n);
  while (step > tol && res.evals < max_evals) {
    double best_f = fu;
    const Vec* best_d = nullptr;
    for (const auto& d : dirs) {
      for (std::size_t i = 0; i < n; ++i) trial[i] = u[i] + step * d[i];
      double ft = fn(trial);
      ++res.evals;
      if (ft < best_f) {
        best_f = ft;
        best_d = &d;
      }
    }
    if (best_d) {
      for (std::size_t i = 0; i < n; ++i) u[i] += step * (*best_d)[i];
      fu = best_f;
    } else {
      step *= 0.5;
      refresh();
    }
  }
  res.u = std::move(u);
  res.value = fu;
  res.step = step;
  return res;
}

/// Minimizes over the cube [-radius, radius]^n. Every coarse node whose value is within the Lipschitz
/// bound lip * spacing * sqrt(n) / 2 of the best may hold the minimum; up to `beam` of them are refined
/// independently by successive zooms.
template <class Fn>
SearchResult zoom_grid(Fn&& fn, std::size_t n, double radius, std::size_t coarse, std::size_t zoom,
                       std::size_t levels, const std::vector<Vec>& candidates, double lip, std::size_t beam) {
  SearchResult best;
  best.value = std::numeric_limits<double>::infinity();
  std::vector<std::pair<double, Vec>> nodes;
  auto scan = [&](const Vec& center, double half, std::size_t pts, SearchResult& local, bool keep) {
    std::size_t total = 1;
    for (std::size_t i = 0; i < n; ++i) total *= pts;
    Vec p(n);
    double spacing = pts > 1 ? 2.0 * half / static_cast<double>(pts - 1) : 0.0;
    for (std::size_t idx = 0; idx < total; ++idx) {
      std::size_t rem = idx;
      for (std::size_t i = 0; i < n; ++i) {
        p[i] = center[i] - half + spacing * static_cast<double>(rem % pts);
        rem /= pts;
      }
      double v = fn(p);
      ++best.evals;
      if (keep) nodes.emplace_back(v, p);
      if (v < local.value) {
        local.value = v;
        local.u = p;
      }
    }
    return spacing;
  };
  double spacing = scan(Vec(n, 0.0), radius, coarse, best, true);
  for (const auto& c : candidates) {
    double v = fn(c);
    ++best.evals;
    if (v < best.value) {
      best.value = v;
      best.u = c;
    }
  }
  double slack = 0.5 * lip * spacing * std::sqrt(static_cast<double>(n));
  std::stable_sort(nodes.begin(), nodes.end(), [](const auto& x, const auto& y) { return x.first < y.first; });
  std::size_t keep = 0;
  while (keep < nodes.size() && keep < beam && nodes[keep].first <= best.value + slack) ++keep;
  std::vector<Vec> seeds{best.u};
  for (std::size_t j = 0; j < keep; ++j)
    if (nodes[j].second != best.u) seeds.push_back(nodes[j].second);
  SearchResult out = best;
  for (const auto& seed : seeds) {
    SearchResult local;
    local.value = std::numeric_limits<double>::infinity();
    local.u = seed;
    double step = spacing;
    for (std::size_t l = 0; l < levels; ++l) {
      double half = step;
      // Slide the window at fixed resolution while its argmin sits on the boundary.
      for (std::size_t slide = 0; slide < 64; ++slide) {
        Vec center = local.u;
        step = scan(center, half, zoom, local, false);
        bool edge = false;
        for (std::size_t i = 0; i < n; ++i) edge = edge || std::abs(local.u[i] - center[i]) >= half * (1.0 - 1e-9);
        if (!edge) break;
      }
    }
    if (local.value < out.value) {
      out.value = local.value;
      out.u = local.u;
      out.step = step;
    }
  }
  out.evals = best.evals;
  return out;
}

}  // namespace

LipschitzSpotCheck spot_check_lipschitz(const LipschitzFunction& f, const SpectralModel& model, std::size_t samples,
                                        std::uint64_t seed) {
  std::size_t n = model.n();
  auto r = model.r();
  Rng rng(seed);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> unif(std::log(1e-3), std::log(10.0));
  LipschitzSpotCheck out;
  out.samples = samples;
  Vec x(n), xh(n), w(n);
  for (std::size_t s = 0; s < samples; ++s) {
    for (auto& a : x) a = 2.0 * normal(rng);
    for (auto& a : w) a = normal(rng);
    double wn = std::sqrt(norm2(w));
    double len = std::exp(unif(rng));
    for (std::size_t k = 0; k < n; ++k) xh[k] = x[k] + r[k] * w[k] / wn * len;
    double fx = f(x), fxh = f(xh);
    double ratio = std::abs(fxh - fx) / len;
    out.worst_ratio = std::max(out.worst_ratio, ratio);
    out.worst_sup = std::max({out.worst_sup, std::abs(fx), std::abs(fxh)});
  }
  double slack = 1e-9 * (1.0 + f.lip_r);
  out.ok = out.worst_ratio <= f.lip_r + slack && (!f.sup || out.worst_sup <= *f.sup + 1e-12);
  return out;
}

double inner_radius(double eps, double lip_r, double inflation) {
  return inflation * 2.0 * eps * std::max(lip_r, 1e-12);
}

double outer_radius(double eps, double lip_r, double inflation) {
  return inflation * 2.0 * std::sqrt(2.0) * eps * std::max(lip_r, 1e-12);
}

EnvelopeResult envelope(const LipschitzFunction& f, double eps, std::span<const double> x,
                        const SpectralModel& model, const EnvelopeSettings& settings) {
  if (!(eps > 0.0)) throw std::invalid_argument("eps must be positive");
  std::size_t n = model.n();
  if (x.size() != n) throw std::invalid_argument("state dimension mismatch");
  auto r = model.r();
  double rk = inner_radius(eps, f.lip_r, settings.radius_inflation);
  double rh = outer_radius(eps, f.lip_r, settings.radius_inflation);
  EnvelopeResult out;
  Vec z(n), arg(n);
  std::size_t evals = 0;

  // Coordinates u, v with k = R u and h = R v, so that ||k||_R = |u| and ||h||_R = |v|.
  auto inner_objective = [&](const Vec& v, const Vec& u) {
    for (std::size_t i = 0; i < n; ++i) arg[i] = x[i] + r[i] * (u[i] - v[i]);
    ++evals;
    return f(arg) + norm2(u) / (2.0 * eps);
  };

  if (settings.mode == EnvelopeMode::grid) {
    if (n > 2) throw UnsupportedError("grid envelope is limited to n <= 2");
    double sqn = std::sqrt(static_cast<double>(n));
    double lip_inner = f.lip_r + sqn * rk / eps;
    double lip_outer = f.lip_r + 2.0 * sqn * rh / eps;
    Vec best_u;
    auto inner = [&](const Vec& v) {
      auto res = zoom_grid([&](const Vec& u) { return inner_objective(v, u); }, n, rk, settings.grid_points,
                           settings.zoom_points, settings.zoom_levels, {v, Vec(n, 0.0)}, lip_inner,
                           settings.inner_beam);
      best_u = res.u;
      return res.value;
    };
    auto outer = zoom_grid(
        [&](const Vec& v) { return -(inner(v) - norm2(v) / eps); }, n, rh, settings.grid_points,
        settings.zoom_points, settings.zoom_levels, {Vec(n, 0.0)}, lip_outer, settings.outer_beam);
    out.value = -outer.value;
    inner(outer.u);
    out.h.resize(n);
    out.k.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      out.h[i] = r[i] * outer.u[i];
      out.k[i] = r[i] * best_u[i];
    }
    out.final_step = outer.step;
    out.iterations = evals;
    return out;
  }

  Rng rng(settings.seed);
  std::size_t screen = std::max<std::size_t>(1, settings.screen_points) * n;
  std::vector<Vec> inner_pool;
  for (std::size_t s = 0; s < screen; ++s) inner_pool.push_back(random_in_ball(n, rk, rng));
  std::vector<Vec> outer_pool{Vec(n, 0.0)};
  while (outer_pool.size() < std::max<std::size_t>(1, settings.outer_starts))
    outer_pool.push_back(random_in_ball(n, rh, rng));
  double coarse_inner = 1e-3 * rk;
  double coarse_outer = 1e-3 * rh;
  double tol = settings.step_tol;
  bool stalled = false;
  Rng search_rng(derive_seed(settings.seed, 1));

  // Evaluates every candidate and returns the `keep` best, ties broken by position.
  auto screen_best = [](const std::vector<Vec>& pool, auto&& obj, std::size_t keep) {
    std::vector<std::pair<double, std::size_t>> vals;
    for (std::size_t i = 0; i < pool.size(); ++i) vals.emplace_back(obj(pool[i]), i);
    std::stable_sort(vals.begin(), vals.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    vals.resize(std::min(keep, vals.size()));
    return vals;
  };

  // Recent inner minimizers as shifts y = u - v, reused as starts so that nearby outer points agree on the basin.
  std::vector<Vec> memory;
  auto inner_solve = [&](const Vec& v, Vec* argmin) {
    auto obj = [&](const Vec& u) { return inner_objective(v, u); };
    Rng local(derive_seed(settings.seed, 2));
    // The start k = h makes the numerical envelope never exceed f(x).
    std::vector<Vec> starts{v, Vec(n, 0.0)};
    for (const auto& y : memory) {
      Vec u(n);
      for (std::size_t i = 0; i < n; ++i) u[i] = y[i] + v[i];
      if (std::sqrt(norm2(u)) <= rk) starts.push_back(u);
    }
    for (const auto& [fv, i] : screen_best(inner_pool, obj, settings.inner_starts)) starts.push_back(inner_pool[i]);
    SearchResult best;
    best.value = std::numeric_limits<double>::infinity();
    for (const auto& st : starts) {
      auto res = pattern_search(obj, st, obj(st), 0.25 * rk, coarse_inner, settings.max_evals, local);
      if (res.value < best.value) best = std::move(res);
    }
    auto polished = pattern_search(obj, best.u, best.value, best.step, tol, settings.max_evals, local);
    if (polished.step > tol) stalled = true;
    Vec y(n);
    for (std::size_t i = 0; i < n; ++i) y[i] = polished.u[i] - v[i];
    bool known = false;
    for (const auto& m : memory) {
      double d = 0.0;
      for (std::size_t i = 0; i < n; ++i) d += (m[i] - y[i]) * (m[i] - y[i]);
      known = known || std::sqrt(d) < 1e-3 * rk;
    }
    if (!known) {
      if (memory.size() == 4) memory.erase(memory.begin());
      memory.push_back(y);
    }
    if (argmin) *argmin = polished.u;
    return polished.value;
  };
  auto outer_obj = [&](const Vec& v) { return -(inner_solve(v, nullptr) - norm2(v) / eps); };

  std::vector<SearchResult> coarse;
  for (const auto& [fv, i] : screen_best(outer_pool, outer_obj, settings.outer_searches))
    coarse.push_back(
        pattern_search(outer_obj, outer_pool[i], fv, 0.25 * rh, coarse_outer, settings.max_evals, search_rng));
  std::vector<std::size_t> order(coarse.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return coarse[a].value < coarse[b].value; });
  SearchResult best;
  best.value = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < std::min<std::size_t>(2, order.size()); ++j) {
    const auto& c = coarse[order[j]];
    auto polished = pattern_search(outer_obj, c.u, c.value, c.step, tol, settings.max_evals, search_rng);
    if (polished.step > tol) stalled = true;
    if (polished.value < best.value) best = polished;
  }
  Vec u;
  double inner_value = inner_solve(best.u, &u);
  out.value = inner_value - norm2(best.u) / eps;
  out.h.resize(n);
  out.k.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    out.h[i] = r[i] * best.u[i];
    out.k[i] = r[i] * u[i];
  }
  out.iterations = evals;
  out.final_step = best.step;
  out.stalled = stalled;
  return out;
}

double abs_clamped_envelope(double x, double eps, double cap) {
  if (!(eps > 0.0)) throw std::invalid_argument("eps must be positive");
  if (!(cap >= 0.5 * eps)) throw std::invalid_argument("closed form needs cap >= eps / 2");
  double a = std::abs(x);
  if (a <= 0.5 * eps) return a * a / eps;
  if (a <= cap) return a - 0.25 * eps;
  if (a < cap + 0.5 * eps) {
    double d = a - cap - 0.5 * eps;
    return cap - d * d / eps;
  }
  return cap;
}

std::vector<InequalityReport> property_suite(const LipschitzFunction& f, const SpectralModel& model,
                                             const PropertySuiteConfig& config) {
  std::size_t n = model.n();
  auto r = model.r();
  std::vector<InequalityReport> out;
  Rng rng(config.seed);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> unif(0.05, 0.5);
  std::vector<Vec> points{Vec(n, 0.0)};
  while (points.size() < std::max<std::size_t>(1, config.points)) {
    Vec p(n);
    for (auto& a : p) a = 1.5 * normal(rng);
    points.push_back(p);
  }
  double fsup = 0.0;
  std::vector<double> fvals(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    fvals[i] = f(points[i]);
    fsup = std::max(fsup, std::abs(fvals[i]));
  }
  if (f.sup) fsup = *f.sup;
  ReportOptions opts{3.0, 1e-6 * (1.0 + fsup)};
  double L = f.lip_r;

  for (std::size_t e = 0; e < config.eps_grid.size(); ++e) {
    double eps = config.eps_grid[e];
    std::string tag = "[" + f.name + ",eps=" + format_number(eps) + ",n=" + std::to_string(n) + "]";
    EnvelopeSettings es = config.settings;
    es.seed = derive_seed(config.seed, 100 + e);

    // Pairs (x, x + h) with ||h||_R in [0.05 eps, 0.5 eps].
    std::vector<Vec> shifted;
    std::vector<double> hnorm;
    for (std::size_t j = 0; j < config.quotient_pairs; ++j) {
      Vec w(n);
      for (auto& a : w) a = normal(rng);
      double wn = std::sqrt(norm2(w));
      double len = unif(rng) * eps;
      const auto& base = points[j % points.size()];
      Vec p(n);
      for (std::size_t k = 0; k < n; ++k) p[k] = base[k] + r[k] * w[k] / wn * len;
      shifted.push_back(p);
      hnorm.push_back(len);
    }
    std::vector<double> env(points.size()), env_shift(shifted.size());
    std::vector<char> stalled(points.size() + shifted.size(), 0);
    parallel_for(points.size() + shifted.size(), [&](std::size_t i) {
      EnvelopeSettings local = es;
      local.seed = derive_seed(es.seed, i);
      if (i < points.size()) {
        auto res = envelope(f, eps, points[i], model, local);
        env[i] = res.value;
        stalled[i] = res.stalled;
      } else {
        auto res = envelope(f, eps, shifted[i - points.size()], model, local);
        env_shift[i - points.size()] = res.value;
        stalled[i] = res.stalled;
      }
    });
    std::size_t stall_count = 0;
    for (char s : stalled) stall_count += s ? 1 : 0;

    double max_abs = 0.0, max_gap = -std::numeric_limits<double>::infinity();
    double max_excess = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < points.size(); ++i) {
      max_abs = std::max(max_abs, std::abs(env[i]));
      max_gap = std::max(max_gap, fvals[i] - env[i]);
      max_excess = std::max(max_excess, env[i] - fvals[i]);
    }
    if (f.sup) {
      auto rep = make_report("ll_boundedness" + tag, PaperEq::lasry_lions_boundedness, max_abs, 0.0, *f.sup, 0.0,
                             opts);
      rep.seed = config.seed;
      out.push_back(std::move(rep));
    }
    auto approx = make_report("ll_approximation" + tag, PaperEq::lasry_lions_approximation, max_gap, 0.0,
                              4.0 * eps * L * L, 0.0, opts);
    approx.params = {{"eps", eps}, {"lip_r", L}, {"points", points.size()}};
    approx.seed = config.seed;
    out.push_back(std::move(approx));
    auto onesided = make_report("ll_one_sided" + tag, PaperEq::lasry_lions_approximation, max_excess, 0.0, 0.0, 0.0,
                                opts);
    onesided.note = "f_eps - f <= 0 at every sampled point";
    onesided.seed = config.seed;
    out.push_back(std::move(onesided));

    double worst = -std::numeric_limits<double>::infinity();
    double worst_lhs = 0.0, worst_rhs = 0.0;
    for (std::size_t j = 0; j < shifted.size(); ++j) {
      double lhs = std::abs(env_shift[j] - env[j % points.size()]);
      double rhs = 4.0 * std::sqrt(2.0) * L * hnorm[j] + hnorm[j] * hnorm[j] / eps;
      if (lhs - rhs > worst) {
        worst = lhs - rhs;
        worst_lhs = lhs;
        worst_rhs = rhs;
      }
    }
    if (!shifted.empty()) {
      auto grad = make_report("ll_gradient" + tag, PaperEq::lasry_lions_gradient, worst_lhs, 0.0, worst_rhs, 0.0,
                              opts);
      grad.note = "difference quotients with the ||h||_R^2 / eps remainder";
      grad.params = {{"eps", eps}, {"lip_r", L}, {"pairs", shifted.size()}, {"stalled", stall_count}};
      grad.seed = config.seed;
      out.push_back(std::move(grad));
    }

    if (n <= 2 && config.oracle_points > 0 && config.settings.mode == EnvelopeMode::descent) {
      std::size_t m = std::min(config.oracle_points, points.size());
      std::vector<double> diffs(m);
      parallel_for(m, [&](std::size_t i) {
        EnvelopeSettings gs = config.settings;
        gs.mode = EnvelopeMode::grid;
        diffs[i] = std::abs(envelope(f, eps, points[i], model, gs).value - env[i]);
      });
      double worst_diff = *std::max_element(diffs.begin(), diffs.end());
      auto orc = make_report("ll_grid_oracle" + tag, PaperEq::lasry_lions_oracle, worst_diff, 0.0, config.oracle_tol,
                             0.0, {3.0, 0.0});
      orc.params = {{"eps", eps}, {"points", m}};
      orc.seed = config.seed;
      out.push_back(std::move(orc));
    }
  }
  return out;
}

TestFunction regularize_for_concentration(const LipschitzFunction& g, double eps, const SpectralModel& model,
                                          const EnvelopeSettings& settings) {
  auto value = [g, eps, settings](const SpectralModel& m, std::span<const double> x) {
    return envelope(g, eps, x, m, settings).value;
  };
  auto gradient = [value](const SpectralModel& m, std::span<const double> x, std::span<double> out) {
    std::vector<double> xp(x.begin(), x.end());
    auto r = m.r();
    for (std::size_t k = 0; k < xp.size(); ++k) {
      double h = 1e-4 * std::max(1e-3, r[k]);
      double keep = xp[k];
      xp[k] = keep + h;
      double fp = value(m, xp);
      xp[k] = keep - h;
      double fm = value(m, xp);
      xp[k] = keep;
      out[k] = (fp - fm) / (2.0 * h);
    }
  };
  (void)model;
  return TestFunction::custom(g.name + "_ll" + format_number(eps), value, gradient, g.sup,
                              4.0 * std::sqrt(2.0) * g.lip_r);
}

std::vector<LipschitzFunction> lasry_lions_corpus(const SpectralModel& model) {
  std::size_t n = model.n();
  Vec r(model.r().begin(), model.r().end());
  std::size_t last = n - 1;
  double r1 = r[0], rl = r[last], rmax = model.r_max();
  auto rnorm = [r](std::span<const double> x) {
    double s = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) s += (x[k] / r[k]) * (x[k] / r[k]);
    return std::sqrt(s);
  };
  auto hnorm = [](std::span<const double> x) {
    double s = 0.0;
    for (double v : x) s += v * v;
    return std::sqrt(s);
  };
  // ||R a||_H is the Lip_R constant of x -> <a, x>.
  auto lip_linear = [r](const Vec& a) {
    double s = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) s += r[k] * r[k] * a[k] * a[k];
    return std::sqrt(s);
  };
  auto dot = [](const Vec& a, std::span<const double> x) {
    double s = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * x[k];
    return s;
  };
  Vec a1(n, 0.0), a2(n, 0.0), a3(n, 0.0), c(n, 0.0);
  a1[0] = 1.0;
  a2[0] = -1.0;
  a2[last] += 0.5;
  a3[0] = 0.5;
  a3[last] -= 1.0;
  for (std::size_t k = 0; k < n; ++k) c[k] = 0.3 * r[k] * (k % 2 == 0 ? 1.0 : -1.0);
  Vec ta(n);
  for (std::size_t k = 0; k < n; ++k) ta[k] = 1.0 / static_cast<double>(k + 1);
  double lip_max_aff = std::max({lip_linear(a1), lip_linear(a2), lip_linear(a3)});

  using PL = LipFamily;
  std::vector<LipschitzFunction> fs;
  auto add = [&](std::string name, std::function<double(std::span<const double>)> fn, double lip,
                 std::optional<double> sup, LipFamily fam) {
    fs.push_back({std::move(name), std::move(fn), lip, sup, fam});
  };
  add("constant", [](std::span<const double>) { return 0.7; }, 0.0, 0.7, PL::smooth);
  add("abs_x1", [](std::span<const double> x) { return std::abs(x[0]); }, r1, std::nullopt, PL::piecewise_linear);
  add("abs_x1_clamped", [](std::span<const double> x) { return std::min(std::abs(x[0]), 1.0); }, r1, 1.0,
      PL::piecewise_linear);
  add("tent", [](std::span<const double> x) { return std::max(0.0, 1.0 - std::abs(x[0] - 0.3)); }, r1, 1.0,
      PL::piecewise_linear);
  add("max_affine",
      [=](std::span<const double> x) { return std::max({dot(a1, x) - 0.5, dot(a2, x), dot(a3, x) + 0.2}); },
      lip_max_aff, std::nullopt, PL::piecewise_linear);
  add("min_affine_clamped",
      [=](std::span<const double> x) { return std::clamp(std::min(dot(a1, x), 0.3 - dot(a3, x)), -1.0, 1.0); },
      std::max(lip_linear(a1), lip_linear(a3)), 1.0, PL::piecewise_linear);
  add("zigzag",
      [](std::span<const double> x) {
        double u = x[0] - std::floor(x[0]);
        return 0.5 - std::abs(u - 0.5);
      },
      r1, 0.5, PL::piecewise_linear);
  add("abs_difference", [=](std::span<const double> x) { return std::abs(x[0]) - std::abs(x[last] - 0.2); },
      r1 + rl, std::nullopt, PL::piecewise_linear);
  add("r_norm_capped", [=](std::span<const double> x) { return std::min(1.0, rnorm(x)); }, 1.0, 1.0,
      PL::norm_based);
  add("r_norm_shifted",
      [=](std::span<const double> x) {
        Vec d(x.begin(), x.end());
        for (std::size_t k = 0; k < d.size(); ++k) d[k] -= c[k];
        return rnorm(d);
      },
      1.0, std::nullopt, PL::norm_based);
  add("r_ball_distance", [=](std::span<const double> x) { return std::max(0.0, rnorm(x) - 0.5); }, 1.0,
      std::nullopt, PL::norm_based);
  add("h_norm_capped", [=](std::span<const double> x) { return std::min(2.0, hnorm(x)); }, rmax, 2.0,
      PL::norm_based);
  add("negative_r_norm_capped",
      [=](std::span<const double> x) {
        Vec d(x.begin(), x.end());
        for (std::size_t k = 0; k < d.size(); ++k) d[k] -= c[k];
        return -std::min(1.5, rnorm(d));
      },
      1.0, 1.5, PL::norm_based);
  add("r_annulus", [=](std::span<const double> x) { return std::min(1.0, std::abs(rnorm(x) - 1.0)); }, 1.0, 1.0,
      PL::norm_based);
  add("sin_2x1", [](std::span<const double> x) { return std::sin(2.0 * x[0]); }, 2.0 * r1, 1.0, PL::smooth);
  add("tanh_projection", [=](std::span<const double> x) { return std::tanh(dot(ta, x)); }, lip_linear(ta), 1.0,
      PL::smooth);
  add("gaussian_bump",
      [=](std::span<const double> x) {
        double s = rnorm(x);
        return std::exp(-s * s);
      },
      std::sqrt(2.0) * std::exp(-0.5), 1.0, PL::smooth);
  add("smooth_abs", [](std::span<const double> x) { return std::sqrt(x[0] * x[0] + 0.01); }, r1, std::nullopt,
      PL::smooth);
  add("cosine_pair", [=](std::span<const double> x) { return 0.5 * (std::cos(x[0]) + std::cos(x[last])); },
      n == 1 ? r1 : 0.5 * (r1 + rl), 1.0, PL::smooth);
  add("lorentzian",
      [=](std::span<const double> x) {
        double s = rnorm(x);
        return 1.0 / (1.0 + s * s);
      },
      3.0 * std::sqrt(3.0) / 8.0, 1.0, PL::smooth);
  return fs;
}

}  // namespace simlab
