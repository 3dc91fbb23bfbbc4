#include "simlab/drift.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>
#include <stdexcept>

#include "simlab/errors.hpp"
#include "simlab/parallel.hpp"

namespace simlab {

const char* to_string(DriftKind k) {
  switch (k) {
    case DriftKind::zero: return "zero";
    case DriftKind::nemytskii: return "nemytskii";
    case DriftKind::radial: return "radial";
    case DriftKind::kernel: return "kernel";
  }
  return "unknown";
}

DriftKind drift_kind_from_string(const std::string& s) {
  if (s == "zero") return DriftKind::zero;
  if (s == "nemytskii") return DriftKind::nemytskii;
  if (s == "radial") return DriftKind::radial;
  if (s == "kernel") return DriftKind::kernel;
  throw ConfigError("unknown drift kind '" + s + "'");
}

double PowerProfile::value(double s) const { return c * std::pow(s, p); }

double PowerProfile::derivative(double s) const {
  if (p == 1.0) return c;
  return c * p * std::pow(s, p - 1.0);
}

double PowerProfile::second_derivative(double s) const {
  if (p == 1.0) return 0.0;
  if (p == 2.0) return 2.0 * c;
  return c * p * (p - 1.0) * std::pow(s, p - 2.0);
}

double PowerProfile::inverse(double v) const {
  if (v <= 0.0) return 0.0;
  return std::pow(v / c, 1.0 / p);
}

PowerProfile PowerProfile::parse(const std::string& text) {
  const std::string prefix = "power:";
  if (text.rfind(prefix, 0) != 0) throw ConfigError("profile '" + text + "' is not of the form power:<c>:<p>");
  auto rest = text.substr(prefix.size());
  auto colon = rest.find(':');
  if (colon == std::string::npos) throw ConfigError("profile '" + text + "' is missing the exponent");
  PowerProfile f;
  try {
    std::size_t used = 0;
    f.c = std::stod(rest.substr(0, colon), &used);
    if (used != colon) throw std::invalid_argument("trailing");
    auto ptxt = rest.substr(colon + 1);
    f.p = std::stod(ptxt, &used);
    if (used != ptxt.size()) throw std::invalid_argument("trailing");
  } catch (const std::exception&) {
    throw ConfigError("profile '" + text + "' has non-numeric fields");
  }
  return f;
}

std::string PowerProfile::to_string() const {
  std::ostringstream os;
  os.precision(17);
  os << "power:" << c << ":" << p;
  return os.str();
}

double SuperDissipativity::psi(double s) const {
  return std::pow(s, 1.0 - phi.p) / (phi.c * (phi.p - 1.0));
}

double SuperDissipativity::psi_inverse(double u) const {
  return std::pow(phi.c * (phi.p - 1.0) * u, -1.0 / (phi.p - 1.0));
}

double SuperDissipativity::pair_bound(double t) const { return 2.0 * phi_inverse(2.0 * a) + psi_inverse(t / 4.0); }

void SuperDissipativity::validate() const {
  if (!(a >= 0.0)) throw std::invalid_argument("super-dissipativity constant a must be nonnegative");
  if (!(phi.c > 0.0)) throw std::invalid_argument("phi must be strictly increasing (c > 0)");
  if (!(phi.p > 1.0)) throw std::invalid_argument("1/phi must be integrable at infinity (p > 1)");
}

DriftSpec DriftSpec::zero() { return DriftSpec{}; }

DriftSpec DriftSpec::nemytskii(std::vector<double> b_coeffs, double zeta_F, double zeta_R) {
  DriftSpec s;
  s.kind = DriftKind::nemytskii;
  s.b_coeffs = std::move(b_coeffs);
  s.zeta_F = zeta_F;
  s.zeta_R = zeta_R;
  return s;
}

DriftSpec DriftSpec::radial(PowerProfile f, double zeta_F, double zeta_R) {
  DriftSpec s;
  s.kind = DriftKind::radial;
  s.radial_f = f;
  s.zeta_F = zeta_F;
  s.zeta_R = zeta_R;
  return s;
}

DriftSpec DriftSpec::kernel_diagonal(std::size_t n, std::size_t rank, double strength, double zeta_F,
                                     double zeta_R) {
  if (rank == 0 || rank > 4 || rank > n) throw std::invalid_argument("kernel rank must be in [1, min(4, n)]");
  DriftSpec s;
  s.kind = DriftKind::kernel;
  s.zeta_F = zeta_F;
  s.zeta_R = zeta_R;
  for (std::size_t r = 0; r < rank; ++r) {
    StateVector a(n, 0.0), c(n, 0.0);
    a[r] = 1.0;
    c[r] = -strength;
    s.kernel.a.push_back(a);
    s.kernel.c.push_back(c);
  }
  return s;
}

void DriftSpec::validate(std::size_t n) const {
  switch (kind) {
    case DriftKind::zero:
      break;
    case DriftKind::nemytskii: {
      if (b_coeffs.size() < 2 || b_coeffs.size() % 2 != 0)
        throw std::invalid_argument("b must have odd degree 2m+1");
      if (!(b_coeffs.back() > 0.0)) throw std::invalid_argument("leading coefficient of b must be positive");
      // -b - zeta_F Id dissipative needs zeta_F >= -inf b'.
      double min_slope = std::numeric_limits<double>::infinity();
      for (int i = -400; i <= 400; ++i) {
        double z = 0.025 * i;
        min_slope = std::min(min_slope, polynomial_derivative(b_coeffs, z));
      }
      if (zeta_F < -min_slope - 1e-9) throw std::invalid_argument("zeta_F is below -inf b' on the probe grid");
      break;
    }
    case DriftKind::radial:
      if (!(radial_f.c > 0.0) || !(radial_f.p >= 1.0))
        throw std::invalid_argument("radial profile must be increasing and differentiable (c > 0, p >= 1)");
      break;
    case DriftKind::kernel:
      if (kernel.a.empty() || kernel.a.size() > 4 || kernel.a.size() != kernel.c.size())
        throw std::invalid_argument("kernel rank must be between 1 and 4");
      for (std::size_t r = 0; r < kernel.a.size(); ++r)
        if (kernel.a[r].size() != n || kernel.c[r].size() != n)
          throw std::invalid_argument("kernel factor dimension mismatch");
      break;
  }
  if (super) super->validate();
}

double polynomial_value(std::span<const double> coeffs, double z) {
  double v = 0.0;
  for (std::size_t i = coeffs.size(); i-- > 0;) v = v * z + coeffs[i];
  return v;
}

double polynomial_derivative(std::span<const double> coeffs, double z) {
  double v = 0.0;
  for (std::size_t i = coeffs.size(); i-- > 1;) v = v * z + static_cast<double>(i) * coeffs[i];
  return v;
}

double polynomial_primitive(std::span<const double> coeffs, double z) {
  double v = 0.0;
  for (std::size_t i = coeffs.size(); i-- > 0;) v = v * z + coeffs[i] / static_cast<double>(i + 1);
  return v * z;
}

DriftEvaluator::DriftEvaluator(const DriftSpec& spec, const SpectralModel& model)
    : spec_(spec), model_(model), grid_(model.grid_size()), grid2_(model.grid_size()) {}

void DriftEvaluator::apply(std::span<const double> x, std::span<double> out) {
  std::size_t n = model_.n();
  switch (spec_.kind) {
    case DriftKind::zero:
      std::fill(out.begin(), out.begin() + static_cast<std::ptrdiff_t>(n), 0.0);
      return;
    case DriftKind::nemytskii: {
      model_.to_grid(x, grid_);
      for (std::size_t j = 0; j < grid_.size(); ++j) {
        double v = -polynomial_value(spec_.b_coeffs, grid_[j]);
        if (!std::isfinite(v) || std::abs(v) > 1e300)
          throw DivergedStateError("b overflowed on the grid", j);
        grid_[j] = v;
      }
      model_.from_grid(grid_, out);
      return;
    }
    case DriftKind::radial: {
      double s = h_inner(x, x);
      double k = -2.0 * spec_.radial_f.derivative(s);
      if (!std::isfinite(k)) throw DivergedStateError("radial profile overflowed", 0);
      for (std::size_t i = 0; i < n; ++i) out[i] = k * x[i];
      return;
    }
    case DriftKind::kernel: {
      for (std::size_t i = 0; i < n; ++i) out[i] = spec_.zeta_F * x[i];
      for (std::size_t r = 0; r < spec_.kernel.a.size(); ++r) {
        double p = h_inner(spec_.kernel.a[r], x);
        double p3 = p * p * p;
        if (!std::isfinite(p3)) throw DivergedStateError("kernel term overflowed", r);
        for (std::size_t i = 0; i < n; ++i) out[i] += p3 * spec_.kernel.c[r][i];
      }
      return;
    }
  }
}

void DriftEvaluator::jacobian_apply(std::span<const double> x, std::span<const double> h, std::span<double> out) {
  std::size_t n = model_.n();
  switch (spec_.kind) {
    case DriftKind::zero:
      std::fill(out.begin(), out.begin() + static_cast<std::ptrdiff_t>(n), 0.0);
      return;
    case DriftKind::nemytskii: {
      model_.to_grid(x, grid_);
      model_.to_grid(h, grid2_);
      for (std::size_t j = 0; j < grid_.size(); ++j)
        grid2_[j] *= -polynomial_derivative(spec_.b_coeffs, grid_[j]);
      model_.from_grid(grid2_, out);
      return;
    }
    case DriftKind::radial: {
      double s = h_inner(x, x);
      double xh = h_inner(x, h);
      double k1 = -2.0 * spec_.radial_f.derivative(s);
      double k2 = -4.0 * spec_.radial_f.second_derivative(s) * xh;
      for (std::size_t i = 0; i < n; ++i) out[i] = k1 * h[i] + k2 * x[i];
      return;
    }
    case DriftKind::kernel: {
      for (std::size_t i = 0; i < n; ++i) out[i] = spec_.zeta_F * h[i];
      for (std::size_t r = 0; r < spec_.kernel.a.size(); ++r) {
        double p = h_inner(spec_.kernel.a[r], x);
        double q = h_inner(spec_.kernel.a[r], h);
        double k = 3.0 * p * p * q;
        for (std::size_t i = 0; i < n; ++i) out[i] += k * spec_.kernel.c[r][i];
      }
      return;
    }
  }
}

std::vector<double> DriftEvaluator::jacobian_matrix(std::span<const double> x) {
  std::size_t n = model_.n();
  std::vector<double> m(n * n, 0.0);
  if (spec_.kind == DriftKind::nemytskii) {
    model_.to_grid(x, grid_);
    double w = model_.quadrature_weight();
    for (std::size_t j = 0; j < grid_.size(); ++j) {
      double d = -w * polynomial_derivative(spec_.b_coeffs, grid_[j]);
      for (std::size_t k = 0; k < n; ++k) {
        double bk = d * model_.basis_value(j, k);
        for (std::size_t l = 0; l < n; ++l) m[k * n + l] += bk * model_.basis_value(j, l);
      }
    }
    return m;
  }
  StateVector e(n, 0.0), col(n);
  for (std::size_t l = 0; l < n; ++l) {
    e[l] = 1.0;
    jacobian_apply(x, e, col);
    for (std::size_t k = 0; k < n; ++k) m[k * n + l] = col[k];
    e[l] = 0.0;
  }
  return m;
}

double DriftEvaluator::potential(std::span<const double> x) {
  switch (spec_.kind) {
    case DriftKind::zero:
      return 0.0;
    case DriftKind::nemytskii: {
      model_.to_grid(x, grid_);
      CompensatedSum s;
      for (double g : grid_) s.add(polynomial_primitive(spec_.b_coeffs, g));
      return model_.quadrature_weight() * s.value();
    }
    case DriftKind::radial:
      return spec_.radial_f.value(h_inner(x, x));
    case DriftKind::kernel: {
      double v = -0.5 * spec_.zeta_F * h_inner(x, x);
      for (std::size_t r = 0; r < spec_.kernel.a.size(); ++r) {
        const auto& a = spec_.kernel.a[r];
        double kappa = -h_inner(spec_.kernel.c[r], a) / h_inner(a, a);
        double p = h_inner(a, x);
        v += 0.25 * kappa * p * p * p * p;
      }
      return v;
    }
  }
  return 0.0;
}

StateVector apply_drift(const DriftSpec& spec, const SpectralModel& model, std::span<const double> x) {
  if (x.size() != model.n()) throw std::invalid_argument("state dimension mismatch");
  DriftEvaluator ev(spec, model);
  StateVector out(model.n());
  ev.apply(x, out);
  return out;
}

StateVector drift_jacobian_apply(const DriftSpec& spec, const SpectralModel& model, std::span<const double> x,
                                 std::span<const double> h) {
  DriftEvaluator ev(spec, model);
  StateVector out(model.n());
  ev.jacobian_apply(x, h, out);
  return out;
}

StateVector drift_directional_fd(const DriftSpec& spec, const SpectralModel& model, std::span<const double> x,
                                 std::span<const double> h) {
  std::size_t n = model.n();
  double hn = h_norm(h);
  StateVector out(n, 0.0);
  if (hn == 0.0) return out;
  double eps = 1e-6 * std::max(1.0, h_norm(x)) / hn;
  DriftEvaluator ev(spec, model);
  StateVector xp(x.begin(), x.end()), f0(n), f1(n);
  for (std::size_t i = 0; i < n; ++i) xp[i] += eps * h[i];
  ev.apply(x, f0);
  ev.apply(xp, f1);
  for (std::size_t i = 0; i < n; ++i) out[i] = (f1[i] - f0[i]) / eps;
  return out;
}

namespace {

/// Solves q(y) = y (1 + delta shift) + delta s(y) = z for increasing q, with s supplied with its derivative.
template <class S, class DS>
double scalar_monotone_solve(double z, double delta, double shift, S s, DS ds) {
  auto q = [&](double y) { return y * (1.0 + delta * shift) + delta * s(y); };
  auto dq = [&](double y) { return 1.0 + delta * shift + delta * ds(y); };
  double lo = std::min(0.0, z), hi = std::max(0.0, z);
  double step = 1.0;
  while (q(lo) > z) {
    lo -= step;
    step *= 2.0;
  }
  step = 1.0;
  while (q(hi) < z) {
    hi += step;
    step *= 2.0;
  }
  double y = std::clamp(z / (1.0 + delta * shift), lo, hi);
  for (int it = 0; it < 200; ++it) {
    double f = q(y) - z;
    if (f == 0.0) return y;
    if (f > 0.0) hi = y; else lo = y;
    double d = dq(y);
    double next = y - f / d;
    if (!(next > lo && next < hi) || !std::isfinite(next)) next = 0.5 * (lo + hi);
    if (std::abs(next - y) <= 1e-16 * std::max(1.0, std::abs(y))) return next;
    y = next;
  }
  return y;
}

}  // namespace

StateVector solve_resolvent(const DriftSpec& spec, const SpectralModel& model, double delta, double shift,
                            std::span<const double> x) {
  std::size_t n = model.n();
  if (x.size() != n) throw std::invalid_argument("state dimension mismatch");
  StateVector y(x.begin(), x.end());
  if (spec.kind == DriftKind::zero) {
    for (double& v : y) v /= (1.0 + delta * shift);
    return y;
  }
  double xn = h_norm(x);
  if (spec.kind == DriftKind::radial) {
    if (xn == 0.0) return y;
    const auto& f = spec.radial_f;
    auto s = [&](double rho) { return 2.0 * f.derivative(rho * rho) * rho; };
    auto ds = [&](double rho) {
      return 2.0 * f.derivative(rho * rho) + 4.0 * rho * rho * f.second_derivative(rho * rho);
    };
    double rho = scalar_monotone_solve(xn, delta, shift, s, ds);
    for (double& v : y) v *= rho / xn;
    return y;
  }
  DriftEvaluator ev(spec, model);
  if (spec.kind == DriftKind::nemytskii) {
    std::vector<double> g(model.grid_size());
    model.to_grid(x, g);
    auto s = [&](double z) { return polynomial_value(spec.b_coeffs, z); };
    auto ds = [&](double z) { return polynomial_derivative(spec.b_coeffs, z); };
    for (double& gj : g) gj = scalar_monotone_solve(gj, delta, shift, s, ds);
    model.from_grid(g, y);
  }
  StateVector fy(n), res(n);
  auto residual = [&](const StateVector& yy, StateVector& out) {
    ev.apply(yy, fy);
    for (std::size_t i = 0; i < n; ++i) out[i] = yy[i] - delta * (fy[i] - shift * yy[i]) - x[i];
    return h_norm(out);
  };
  double tol = 1e-10 * std::max(1.0, xn);
  double rn = residual(y, res);
  Eigen::MatrixXd J(n, n);
  Eigen::VectorXd rhs(n);
  StateVector trial(n), trial_res(n);
  for (int it = 0; it < 100 && rn > 0.25 * tol; ++it) {
    auto df = ev.jacobian_matrix(y);
    for (std::size_t k = 0; k < n; ++k) {
      for (std::size_t l = 0; l < n; ++l) J(k, l) = -delta * df[k * n + l];
      J(k, k) += 1.0 + delta * shift;
      rhs(k) = res[k];
    }
    Eigen::VectorXd step = J.ldlt().solve(rhs);
    double lambda = 1.0;
    double trial_norm = rn;
    for (int ls = 0; ls < 40; ++ls) {
      for (std::size_t i = 0; i < n; ++i) trial[i] = y[i] - lambda * step(i);
      trial_norm = residual(trial, trial_res);
      if (trial_norm < rn) break;
      lambda *= 0.5;
    }
    if (!(trial_norm < rn)) break;
    y.swap(trial);
    res.swap(trial_res);
    rn = trial_norm;
  }
  if (!(rn <= tol)) {
    std::ostringstream os;
    os << "resolvent Newton did not converge: residual " << rn << " at delta " << delta;
    throw ConvergenceError(os.str());
  }
  return y;
}

StateVector yosida_resolvent(const DriftSpec& spec, const SpectralModel& model, double delta,
                             std::span<const double> x) {
  if (!(delta > 0.0)) throw std::invalid_argument("delta must be positive");
  if (spec.zeta_F != 0.0 && delta >= 1.0 / std::abs(spec.zeta_F))
    throw std::invalid_argument("delta must lie in (0, 1/|zeta_F|)");
  return solve_resolvent(spec, model, delta, spec.zeta_F, x);
}

StateVector yosida_drift(const DriftSpec& spec, const SpectralModel& model, double delta, std::span<const double> x) {
  auto y = yosida_resolvent(spec, model, delta, x);
  return apply_drift(spec, model, y);
}

namespace {

StateVector random_in_ball(std::mt19937_64& rng, std::size_t n, double radius) {
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> unif;
  StateVector v(n);
  for (double& c : v) c = normal(rng);
  double nv = h_norm(v);
  double rad = radius * std::pow(unif(rng), 1.0 / static_cast<double>(n));
  for (double& c : v) c *= rad / nv;
  return v;
}

}  // namespace

DissipativityProbe probe_dissipativity(const DriftSpec& spec, const SpectralModel& model, std::size_t sample_count,
                                       double radius, std::uint64_t seed) {
  if (sample_count < 2) throw std::invalid_argument("probe needs at least two samples");
  std::size_t n = model.n();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  DriftEvaluator ev(spec, model);
  StateVector fx(n), fy(n);
  DissipativityProbe out;
  out.zeta_F_hat = -std::numeric_limits<double>::infinity();
  out.zeta_R_hat = -std::numeric_limits<double>::infinity();
  auto lam = model.eigenvalues();
  auto rayleigh = [&](const StateVector& x, const StateVector& h) {
    auto dfh = drift_directional_fd(spec, model, x, h);
    StateVector ah(n);
    for (std::size_t k = 0; k < n; ++k) ah[k] = lam[k] * h[k] + dfh[k];
    return r_inner(model, ah, h) / r_inner(model, h, h);
  };
  for (std::size_t s = 0; s < sample_count; ++s) {
    auto x = random_in_ball(rng, n, radius);
    auto y = random_in_ball(rng, n, radius);
    ev.apply(x, fx);
    ev.apply(y, fy);
    StateVector d(n), df(n);
    for (std::size_t k = 0; k < n; ++k) {
      d[k] = x[k] - y[k];
      df[k] = fx[k] - fy[k];
    }
    double dd = h_inner(d, d);
    if (dd > 0.0) out.zeta_F_hat = std::max(out.zeta_F_hat, h_inner(df, d) / dd);
    StateVector h(n);
    if (s < n) {
      std::fill(h.begin(), h.end(), 0.0);
      h[s] = 1.0;
      if (s == 0) std::fill(x.begin(), x.end(), 0.0);
    } else {
      for (double& c : h) c = normal(rng);
    }
    out.zeta_R_hat = std::max(out.zeta_R_hat, rayleigh(x, h));
    ++out.pairs;
  }
  return out;
}

SuperDissipativityReport probe_super_dissipativity(const DriftSpec& spec, const SpectralModel& model,
                                                   std::size_t sample_count, std::uint64_t seed) {
  SuperDissipativityReport rep;
  if (!spec.super) {
    rep.present = false;
    rep.ok = false;
    rep.note = "super-dissipativity absent";
    return rep;
  }
  rep.present = true;
  const auto& sd = *spec.super;
  std::size_t n = model.n();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> unif;
  DriftEvaluator ev(spec, model);
  StateVector fx(n), fy(n), x(n), y(n), u(n);
  rep.worst_margin = std::numeric_limits<double>::infinity();
  rep.ok = true;
  for (std::size_t s = 0; s < sample_count; ++s) {
    double sep = std::pow(10.0, -1.0 + 3.0 * static_cast<double>(s) / static_cast<double>(std::max<std::size_t>(1, sample_count - 1)));
    for (double& c : u) c = normal(rng);
    double un = r_norm(model, u);
    double centre_scale = unif(rng) * sep;
    for (std::size_t k = 0; k < n; ++k) {
      x[k] = centre_scale * normal(rng) / std::sqrt(static_cast<double>(n)) * model.r()[k];
      y[k] = x[k] + sep * u[k] / un;
    }
    ev.apply(x, fx);
    ev.apply(y, fy);
    StateVector d(n), df(n);
    for (std::size_t k = 0; k < n; ++k) {
      d[k] = x[k] - y[k];
      df[k] = fx[k] - fy[k];
    }
    double lhs = r_inner(model, df, d);
    double phi = sd.phi.value(r_inner(model, d, d));
    double margin = sd.a - phi - lhs;
    double scale = std::abs(lhs) + phi + sd.a;
    double normalized = margin / std::max(1.0, scale);
    if (normalized < rep.worst_margin) {
      rep.worst_margin = normalized;
      rep.worst_separation = sep;
    }
    if (margin < -1e-10 * scale) rep.ok = false;
    ++rep.pairs;
  }
  rep.note = sd.fitted ? "constants (a, phi) fitted by scalar scan" : "constants supplied by configuration";
  return rep;
}

SuperDissipativity fit_super_dissipativity(const DriftSpec& spec, const SpectralModel& model) {
  for (double r : model.r())
    if (r != 1.0) throw UnsupportedError("super-dissipativity fit requires R = Id");
  std::vector<double> sigma;  // coefficients of the scalar odd nonlinearity
  if (spec.kind == DriftKind::nemytskii) {
    sigma = spec.b_coeffs;
  } else if (spec.kind == DriftKind::radial) {
    double q = spec.radial_f.p;
    double deg = 2.0 * q - 1.0;
    if (q != std::floor(q) || q < 2.0) throw UnsupportedError("radial fit needs an integer exponent >= 2");
    sigma.assign(static_cast<std::size_t>(deg) + 1, 0.0);
    sigma.back() = 2.0 * spec.radial_f.c * q;
  } else {
    throw UnsupportedError(std::string("no super-dissipativity fit for drift kind ") + to_string(spec.kind));
  }
  std::size_t degree = sigma.size() - 1;
  if (degree < 3 || degree % 2 == 0 || !(sigma.back() > 0.0))
    throw UnsupportedError("super-dissipativity needs an odd nonlinearity of degree >= 3");
  std::size_t m = (degree - 1) / 2;
  double p = static_cast<double>(m + 1);
  bool monomial = std::all_of(sigma.begin(), sigma.end() - 1, [](double v) { return v == 0.0; });
  double c = sigma.back() * std::pow(2.0, -2.0 * static_cast<double>(m));
  if (!monomial) c *= 0.9;
  double a_scalar = 0.0;
  constexpr int kScan = 400;
  constexpr double kRange = 20.0;
  for (int i = 0; i <= kScan; ++i) {
    double uu = -kRange + 2.0 * kRange * i / kScan;
    for (int j = 0; j <= kScan; ++j) {
      double vv = -kRange + 2.0 * kRange * j / kScan;
      double d = uu - vv;
      double lhs = (polynomial_value(sigma, uu) - polynomial_value(sigma, vv)) * d;
      a_scalar = std::max(a_scalar, c * std::pow(d * d, p) - lhs);
    }
  }
  SuperDissipativity sd;
  double wg = model.quadrature_weight() * static_cast<double>(model.grid_size());
  sd.a = std::max(a_scalar * (spec.kind == DriftKind::nemytskii ? wg : 1.0), 1e-9);
  sd.phi = PowerProfile{c, p};
  sd.fitted = true;
  return sd;
}

}  // namespace simlab
