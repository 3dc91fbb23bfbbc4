#include "simlab/integrator.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "simlab/errors.hpp"
#include "simlab/parallel.hpp"
#include "simlab/stats.hpp"

namespace simlab {

const char* to_string(Scheme s) { return s == Scheme::exp_euler ? "exp_euler" : "split_implicit"; }

Scheme scheme_from_string(const std::string& s) {
  if (s == "exp_euler") return Scheme::exp_euler;
  if (s == "split_implicit") return Scheme::split_implicit;
  throw ConfigError("unknown scheme '" + s + "'");
}

std::size_t IntegratorConfig::steps() const {
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(horizon / dt)));
}

double IntegratorConfig::step_size() const { return horizon / static_cast<double>(steps()); }

void IntegratorConfig::validate() const {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw std::invalid_argument("dt must be positive");
  if (!(horizon > 0.0) || !std::isfinite(horizon)) throw std::invalid_argument("horizon must be positive");
  if (dt > horizon * (1.0 + 1e-12)) throw std::invalid_argument("dt must not exceed the horizon");
  if (record_stride == 0) throw std::invalid_argument("record_stride must be positive");
}

Stepper::Stepper(const SpectralModel& model, const DriftSpec& spec, double dt, Scheme scheme)
    : model_(model), spec_(spec), dt_(dt), scheme_(scheme), drift_(spec, model) {
  if (!(dt > 0.0)) throw std::invalid_argument("dt must be positive");
  std::size_t n = model.n();
  decay_.resize(n);
  phi_.resize(n);
  noise_sd_.resize(n);
  f_.resize(n);
  eta_.resize(n);
  auto lam = model.eigenvalues();
  auto r = model.r();
  for (std::size_t k = 0; k < n; ++k) {
    decay_[k] = std::exp(lam[k] * dt);
    phi_[k] = std::expm1(lam[k] * dt) / lam[k];
    noise_sd_[k] = std::sqrt(ou_variance(lam[k], r[k], dt));
  }
}

void Stepper::draw_noise(Rng& rng, std::span<double> eta) {
  for (std::size_t k = 0; k < eta.size(); ++k) eta[k] = noise_sd_[k] * normal_(rng);
}

bool Stepper::step(std::span<double> x, std::span<const double> eta) {
  std::size_t n = model_.n();
  try {
    if (scheme_ == Scheme::exp_euler) {
      drift_.apply(x, f_);
      for (std::size_t k = 0; k < n; ++k) x[k] = decay_[k] * x[k] + phi_[k] * f_[k] + eta[k];
    } else {
      bool linear = spec_.kind == DriftKind::zero;
      if (!linear) {
        auto y = solve_resolvent(spec_, model_, dt_, 0.0, x);
        std::copy(y.begin(), y.end(), x.begin());
      }
      for (std::size_t k = 0; k < n; ++k) x[k] = decay_[k] * x[k] + eta[k];
    }
  } catch (const DivergedStateError&) {
    return false;
  } catch (const ConvergenceError&) {
    return false;
  }
  for (std::size_t k = 0; k < n; ++k)
    if (!(std::abs(x[k]) <= kDivergenceThreshold)) return false;
  return true;
}

bool Stepper::step(std::span<double> x, Rng& rng) {
  draw_noise(rng, eta_);
  return step(x, std::span<const double>(eta_));
}

std::optional<std::size_t> Stepper::run(std::span<double> x, std::size_t steps, Rng& rng) {
  for (std::size_t j = 0; j < steps; ++j)
    if (!step(x, rng)) return j + 1;
  return std::nullopt;
}

void Stepper::variational_step(std::span<const double> x, std::span<double> y) {
  if (scheme_ != Scheme::exp_euler) throw UnsupportedError("variational step implemented for exp_euler only");
  std::size_t n = model_.n();
  drift_.jacobian_apply(x, y, f_);
  for (std::size_t k = 0; k < n; ++k) y[k] = decay_[k] * y[k] + phi_[k] * f_[k];
}

StateVector sample_noise_increment(const SpectralModel& model, double dt, Rng& rng) {
  if (!(dt > 0.0)) throw std::invalid_argument("dt must be positive");
  std::normal_distribution<double> normal;
  StateVector eta(model.n());
  auto lam = model.eigenvalues();
  auto r = model.r();
  for (std::size_t k = 0; k < eta.size(); ++k) eta[k] = std::sqrt(ou_variance(lam[k], r[k], dt)) * normal(rng);
  return eta;
}

namespace {

void check_initial(const SpectralModel& model, std::span<const double> x0) {
  if (x0.size() != model.n()) throw std::invalid_argument("initial condition has wrong dimension");
  for (double v : x0)
    if (!std::isfinite(v)) throw std::invalid_argument("initial condition must be finite");
}

}  // namespace

Trajectory integrate(const SpectralModel& model, const DriftSpec& spec, const IntegratorConfig& config,
                     std::span<const double> x0) {
  config.validate();
  check_initial(model, x0);
  Trajectory tr;
  tr.seed = config.seed;
  tr.config = config;
  std::size_t steps = config.steps();
  double dt = config.step_size();
  Stepper stepper(model, spec, dt, config.scheme);
  Rng rng(config.seed);
  StateVector x(x0.begin(), x0.end());
  tr.times.push_back(0.0);
  tr.states.push_back(x);
  for (std::size_t j = 1; j <= steps; ++j) {
    if (!stepper.step(x, rng)) {
      tr.diverged = true;
      tr.first_bad_index = j;
      break;
    }
    if (j % config.record_stride == 0 || j == steps) {
      tr.times.push_back(j == steps ? config.horizon : static_cast<double>(j) * dt);
      tr.states.push_back(x);
    }
  }
  return tr;
}

std::pair<Trajectory, Trajectory> integrate_coupled_pair(const SpectralModel& model, const DriftSpec& spec,
                                                         const IntegratorConfig& config,
                                                         std::span<const double> x0, std::span<const double> y0) {
  config.validate();
  check_initial(model, x0);
  check_initial(model, y0);
  std::pair<Trajectory, Trajectory> out;
  for (auto* tr : {&out.first, &out.second}) {
    tr->seed = config.seed;
    tr->config = config;
    tr->times.push_back(0.0);
  }
  std::size_t steps = config.steps();
  double dt = config.step_size();
  Stepper sx(model, spec, dt, config.scheme);
  Stepper sy(model, spec, dt, config.scheme);
  Rng rng(config.seed);
  StateVector x(x0.begin(), x0.end()), y(y0.begin(), y0.end()), eta(model.n());
  out.first.states.push_back(x);
  out.second.states.push_back(y);
  bool alive_x = true, alive_y = true;
  for (std::size_t j = 1; j <= steps && (alive_x || alive_y); ++j) {
    sx.draw_noise(rng, eta);
    if (alive_x && !sx.step(x, eta)) {
      alive_x = false;
      out.first.diverged = true;
      out.first.first_bad_index = j;
    }
    if (alive_y && !sy.step(y, eta)) {
      alive_y = false;
      out.second.diverged = true;
      out.second.first_bad_index = j;
    }
    if (j % config.record_stride == 0 || j == steps) {
      double t = j == steps ? config.horizon : static_cast<double>(j) * dt;
      if (alive_x) {
        out.first.times.push_back(t);
        out.first.states.push_back(x);
      }
      if (alive_y) {
        out.second.times.push_back(t);
        out.second.states.push_back(y);
      }
    }
  }
  return out;
}

VariationalTrajectory integrate_variational(const SpectralModel& model, const DriftSpec& spec,
                                            const Trajectory& trajectory, std::span<const double> h) {
  if (trajectory.diverged) throw DivergedStateError("variational equation along a diverged trajectory", 0);
  if (h.size() != model.n()) throw std::invalid_argument("direction has wrong dimension");
  VariationalTrajectory vt;
  vt.direction.assign(h.begin(), h.end());
  vt.times = trajectory.times;
  StateVector y(h.begin(), h.end());
  vt.states.push_back(y);
  for (std::size_t j = 0; j + 1 < trajectory.states.size(); ++j) {
    double dt = trajectory.times[j + 1] - trajectory.times[j];
    Stepper stepper(model, spec, dt, Scheme::exp_euler);
    stepper.variational_step(trajectory.states[j], y);
    vt.states.push_back(y);
  }
  return vt;
}

MomentReport check_moment_bound(const SpectralModel& model, const DriftSpec& spec, const IntegratorConfig& config,
                                std::span<const double> x0, double p, std::size_t samples) {
  if (p != 2.0 && p != 4.0) throw std::invalid_argument("moment order must be 2 or 4");
  if (samples < 2) throw std::invalid_argument("need at least two samples");
  config.validate();
  check_initial(model, x0);
  std::size_t steps = config.steps();
  double dt = config.step_size();
  std::size_t stride = config.record_stride;
  std::vector<std::size_t> rec;
  for (std::size_t j = stride; j <= steps; j += stride) rec.push_back(j);
  if (rec.empty() || rec.back() != steps) rec.push_back(steps);
  std::size_t R = rec.size();
  std::vector<double> norms(samples * R, 0.0), conv(samples * R, 0.0);
  std::vector<char> bad(samples, 0);
  DriftSpec linear = DriftSpec::zero();
  parallel_for(samples, [&](std::size_t i) {
    Stepper st(model, spec, dt, config.scheme);
    Stepper lin(model, linear, dt, Scheme::exp_euler);
    Rng rng(derive_seed(config.seed, i));
    StateVector x(x0.begin(), x0.end()), w(model.n(), 0.0), eta(model.n());
    std::size_t r = 0;
    for (std::size_t j = 1; j <= steps; ++j) {
      st.draw_noise(rng, eta);
      if (!bad[i] && !st.step(x, eta)) bad[i] = 1;
      lin.step(w, eta);
      if (r < R && rec[r] == j) {
        norms[i * R + r] = bad[i] ? 0.0 : std::pow(h_norm(x), p);
        conv[i * R + r] = std::pow(e_norm(model, w), p);
        ++r;
      }
    }
  });
  MomentReport rep;
  rep.p = p;
  rep.samples = samples;
  for (char b : bad) rep.diverged += b ? 1 : 0;
  double denom = 1.0 + std::pow(h_norm(x0), p);
  std::vector<double> col(samples), ccol(samples);
  for (std::size_t r = 0; r < R; ++r) {
    for (std::size_t i = 0; i < samples; ++i) {
      col[i] = norms[i * R + r];
      ccol[i] = conv[i * R + r];
    }
    double m = mean_estimate(col).mean;
    rep.times.push_back(static_cast<double>(rec[r]) * dt);
    rep.moments.push_back(m);
    rep.sup_ratio = std::max(rep.sup_ratio, m / denom);
    rep.stochastic_convolution_sup = std::max(rep.stochastic_convolution_sup, mean_estimate(ccol).mean);
  }
  auto lam = model.eigenvalues();
  auto rr = model.r();
  for (std::size_t k = 0; k < model.n(); ++k) rep.stochastic_convolution_h2_limit += rr[k] * rr[k] / (2.0 * std::abs(lam[k]));
  std::vector<double> tx, ty;
  for (std::size_t r = 0; r < R; ++r) {
    if (rep.times[r] >= 0.5 * config.horizon) {
      tx.push_back(rep.times[r]);
      ty.push_back(rep.moments[r]);
    }
  }
  if (tx.size() >= 3) {
    auto fit = least_squares(tx, ty);
    rep.plateau_slope = fit.slope;
    rep.plateau_slope_se = fit.slope_se;
    rep.plateau_stable = std::abs(fit.slope) <= 2.0 * fit.slope_se || (fit.slope_se == 0.0 && fit.slope == 0.0);
  }
  return rep;
}

}  // namespace simlab
