#include "simlab/constants.hpp"

#include <algorithm>
#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "simlab/errors.hpp"
#include "simlab/integrator.hpp"
#include "simlab/parallel.hpp"
#include "simlab/stats.hpp"

namespace simlab {

double ConstantsPack::C_of_t(double t) const {
  if (t < 0.0) throw std::invalid_argument("C(t) needs t >= 0");
  return 3.0 / std::abs(zeta_R) * (-std::expm1(2.0 * zeta_R * t));
}

double ConstantsPack::harnack_exponent(double p, double t) const {
  if (!(p > 1.0) || !(t > 0.0)) throw std::invalid_argument("Harnack exponent needs p > 1 and t > 0");
  if (zeta_R == 0.0) return p / ((p - 1.0) * t);
  return p * std::expm1(2.0 * zeta_R * t) / (2.0 * zeta_R * (p - 1.0) * t * t);
}

double ConstantsPack::psi_decay(double t) const {
  if (branch == Branch::dissipative_R) return std::exp(2.0 * zeta_R * t);
  return theta_envelope(K, gamma, m0, t);
}

double ConstantsPack::p_max(double q, double t) const {
  if (!(q > 1.0)) throw std::invalid_argument("p_max needs q > 1");
  return (q - 1.0) * std::exp(t / (2.0 * C)) + 1.0;
}

double ConstantsPack::concentration_rate(bool r_variant) const {
  double c = r_variant ? C : C_prime;
  return 1.0 / (16.0 * std::sqrt(2.0) * c);
}

ConstantsPack constants_dissipative(double zeta_R, double r_max) {
  if (!(zeta_R < 0.0)) throw ConfigError("the dissipative branch needs zeta_R < 0");
  ConstantsPack c;
  c.branch = ConstantsPack::Branch::dissipative_R;
  c.zeta_R = zeta_R;
  c.r_max = r_max;
  c.C = 1.0 / (2.0 * std::abs(zeta_R));
  c.C_prime = r_max * c.C;
  c.C_printed = std::numeric_limits<double>::quiet_NaN();
  return c;
}

double theta_envelope(double K, double gamma, double m0, double t) {
  if (!(t > 0.0)) return std::numeric_limits<double>::infinity();
  return K * std::exp(-m0 * t) * std::max(std::pow(t, -gamma), std::pow(t, 1.0 - gamma));
}

double theta_l1_norm(double K, double gamma, double m0) {
  if (!(m0 > 0.0) || !(gamma >= 0.0 && gamma < 1.0)) throw std::invalid_argument("theta norm needs m0 > 0, gamma in [0,1)");
  double lower = boost::math::tgamma_lower(1.0 - gamma, m0) / std::pow(m0, 1.0 - gamma);
  double upper = boost::math::tgamma(2.0 - gamma, m0) / std::pow(m0, 2.0 - gamma);
  return K * (lower + upper);
}

double theta_printed_constant(double K, double gamma, double m0) {
  double lower = boost::math::tgamma_lower(1.0 - gamma, m0) / std::pow(m0, 1.0 - gamma);
  return K * (lower + std::exp(m0) / m0);
}

ConstantsPack constants_smoothing(double K, double gamma, double m0, double zeta_R, double r_max) {
  ConstantsPack c;
  c.branch = ConstantsPack::Branch::smoothing;
  c.K = K;
  c.gamma = gamma;
  c.m0 = m0;
  c.zeta_R = zeta_R;
  c.r_max = r_max;
  c.C = theta_l1_norm(K, gamma, m0);
  c.C_prime = r_max * c.C;
  c.C_printed = theta_printed_constant(K, gamma, m0);
  return c;
}

KFit fit_theta_constant(const SpectralModel& model, const DriftSpec& spec, double horizon, std::size_t trajectories,
                        std::uint64_t seed, const SimulationSettings& settings, double quantile_level) {
  if (trajectories == 0 || !(horizon > 0.0)) throw std::invalid_argument("K fit needs trajectories and a horizon");
  KFit fit;
  fit.gamma = model.smoothing().gamma;
  double zeta = model.zeta_A() + spec.zeta_F;
  fit.m0 = std::min(model.smoothing().w, std::abs(zeta));
  std::size_t n = model.n();
  std::size_t steps = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(horizon / settings.dt)));
  double dt = horizon / static_cast<double>(steps);
  std::vector<double> ratios(trajectories, 0.0);
  parallel_for(trajectories, [&](std::size_t i) {
    Stepper st(model, spec, dt, Scheme::exp_euler);
    Rng rng(derive_seed(seed, i));
    StateVector x(n, 0.0), eta(n);
    std::vector<StateVector> ys(n, StateVector(n, 0.0));
    for (std::size_t k = 0; k < n; ++k) ys[k][k] = 1.0;
    double worst = 0.0;
    for (std::size_t j = 1; j <= steps; ++j) {
      for (auto& y : ys) st.variational_step(x, y);
      st.draw_noise(rng, eta);
      if (!st.step(x, eta)) {
        worst = std::numeric_limits<double>::infinity();
        break;
      }
      double t = dt * static_cast<double>(j);
      double env = theta_envelope(1.0, fit.gamma, fit.m0, t);
      for (const auto& y : ys) worst = std::max(worst, r_norm(model, y) / env);
    }
    ratios[i] = worst;
  });
  fit.K = quantile(ratios, quantile_level);
  fit.K_max = *std::max_element(ratios.begin(), ratios.end());
  fit.trajectories = trajectories;
  return fit;
}

ConstantsPack make_constants(const SpectralModel& model, const DriftSpec& spec, std::uint64_t seed) {
  if (spec.zeta_R < 0.0) return constants_dissipative(spec.zeta_R, model.r_max());
  auto fit = fit_theta_constant(model, spec, 5.0, 100, seed);
  return constants_smoothing(fit.K, fit.gamma, fit.m0, spec.zeta_R, model.r_max());
}

}  // namespace simlab
