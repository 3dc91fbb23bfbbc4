#include "simlab/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "simlab/errors.hpp"
#include "simlab/parallel.hpp"
#include "simlab/stats.hpp"

namespace simlab {

const char* to_string(Basis b) { return b == Basis::dirichlet ? "dirichlet" : "periodic"; }

Basis basis_from_string(const std::string& s) {
  if (s == "dirichlet") return Basis::dirichlet;
  if (s == "periodic") return Basis::periodic;
  throw ConfigError("unknown basis '" + s + "'");
}

SpectralModel SpectralModel::dirichlet_laplacian(std::size_t n, double beta, std::size_t grid_factor) {
  if (n == 0) throw std::invalid_argument("mode count must be positive");
  if (!(beta >= 0.0)) throw std::invalid_argument("beta must be nonnegative");
  SpectralModel m;
  m.basis_ = Basis::dirichlet;
  m.beta_ = beta;
  for (std::size_t k = 1; k <= n; ++k) {
    double kp = static_cast<double>(k) * std::numbers::pi;
    m.eigenvalues_.push_back(-kp * kp);
    m.r_.push_back(std::pow(kp, -2.0 * beta));
  }
  m.grid_factor_ = grid_factor;
  m.build_grid(grid_factor * n + 1);
  m.finalize();
  return m;
}

SpectralModel SpectralModel::periodic_laplacian(std::size_t n, double beta, std::size_t grid_factor) {
  if (n == 0) throw std::invalid_argument("mode count must be positive");
  if (!(beta >= 0.0)) throw std::invalid_argument("beta must be nonnegative");
  SpectralModel m;
  m.basis_ = Basis::periodic;
  m.beta_ = beta;
  for (std::size_t k = 1; k <= n; ++k) {
    double j = static_cast<double>((k + 1) / 2);
    double lam = -(2.0 * std::numbers::pi * j) * (2.0 * std::numbers::pi * j);
    m.eigenvalues_.push_back(lam);
    m.r_.push_back(std::pow(-lam, -beta));
  }
  m.grid_factor_ = grid_factor;
  m.build_grid(grid_factor * n + 1);
  m.finalize();
  return m;
}

SpectralModel SpectralModel::diagonal(std::vector<double> eigenvalues, std::vector<double> r, Basis basis,
                                      std::size_t grid_factor) {
  if (eigenvalues.empty()) throw std::invalid_argument("mode count must be positive");
  if (eigenvalues.size() != r.size()) throw std::invalid_argument("eigenvalues and r differ in length");
  for (std::size_t k = 0; k < eigenvalues.size(); ++k) {
    if (!(eigenvalues[k] < 0.0) || !std::isfinite(eigenvalues[k]))
      throw std::invalid_argument("eigenvalues must be strictly negative");
    if (k > 0 && eigenvalues[k] > eigenvalues[k - 1])
      throw std::invalid_argument("eigenvalues must be nonincreasing");
    if (!(r[k] >= 0.0) || !std::isfinite(r[k])) throw std::invalid_argument("r must be nonnegative");
  }
  SpectralModel m;
  m.basis_ = basis;
  m.eigenvalues_ = std::move(eigenvalues);
  m.r_ = std::move(r);
  m.grid_factor_ = grid_factor;
  m.build_grid(grid_factor * m.n() + 1);
  m.finalize();
  return m;
}

SpectralModel SpectralModel::without_noise() const {
  SpectralModel m = *this;
  std::fill(m.r_.begin(), m.r_.end(), 0.0);
  m.beta_.reset();
  return m;
}

void SpectralModel::build_grid(std::size_t G) {
  std::size_t nn = n();
  if (G < nn) throw std::invalid_argument("grid size smaller than mode count");
  grid_points_.resize(G);
  table_.assign(G * nn, 0.0);
  const double s2 = std::numbers::sqrt2;
  if (basis_ == Basis::dirichlet) {
    weight_ = 1.0 / static_cast<double>(G + 1);
    for (std::size_t j = 0; j < G; ++j) {
      grid_points_[j] = static_cast<double>(j + 1) * weight_;
      for (std::size_t k = 0; k < nn; ++k) {
        // Integer-argument reduction keeps the table symmetric to rounding.
        std::size_t idx = ((j + 1) * (k + 1)) % (2 * (G + 1));
        table_[j * nn + k] = s2 * std::sin(std::numbers::pi * static_cast<double>(idx) * weight_);
      }
    }
  } else {
    weight_ = 1.0 / static_cast<double>(G);
    for (std::size_t j = 0; j < G; ++j) {
      grid_points_[j] = static_cast<double>(j) * weight_;
      for (std::size_t k = 0; k < nn; ++k) {
        std::size_t freq = (k + 2) / 2;
        std::size_t idx = (j * freq) % G;
        double arg = 2.0 * std::numbers::pi * static_cast<double>(idx) * weight_;
        table_[j * nn + k] = s2 * (k % 2 == 0 ? std::cos(arg) : std::sin(arg));
      }
    }
  }
}

void SpectralModel::finalize() {
  zeta_A_ = *std::max_element(eigenvalues_.begin(), eigenvalues_.end());
  smoothing_ = verify_smoothing(*this);
}

double SpectralModel::r_max() const { return *std::max_element(r_.begin(), r_.end()); }

void SpectralModel::to_grid(std::span<const double> x, std::span<double> g) const {
  std::size_t nn = n();
  for (std::size_t j = 0; j < grid_points_.size(); ++j) {
    const double* row = &table_[j * nn];
    double s = 0.0;
    for (std::size_t k = 0; k < nn; ++k) s += row[k] * x[k];
    g[j] = s;
  }
}

void SpectralModel::from_grid(std::span<const double> g, std::span<double> x) const {
  std::size_t nn = n();
  std::fill(x.begin(), x.begin() + static_cast<std::ptrdiff_t>(nn), 0.0);
  for (std::size_t j = 0; j < grid_points_.size(); ++j) {
    const double* row = &table_[j * nn];
    double gj = g[j];
    for (std::size_t k = 0; k < nn; ++k) x[k] += row[k] * gj;
  }
  for (std::size_t k = 0; k < nn; ++k) x[k] *= weight_;
}

StateVector semigroup_flow(const SpectralModel& model, double t, std::span<const double> x) {
  if (t < 0.0) throw std::invalid_argument("semigroup_flow needs t >= 0");
  StateVector y(x.begin(), x.end());
  if (t == 0.0) return y;
  auto lam = model.eigenvalues();
  for (std::size_t k = 0; k < y.size(); ++k) y[k] *= std::exp(lam[k] * t);
  return y;
}

double h_inner(std::span<const double> x, std::span<const double> y) {
  double s = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) s += x[k] * y[k];
  return s;
}

double h_norm(std::span<const double> x) { return std::sqrt(h_inner(x, x)); }

double r_inner(const SpectralModel& model, std::span<const double> x, std::span<const double> y) {
  auto r = model.r();
  double s = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) s += x[k] * y[k] / (r[k] * r[k]);
  return s;
}

double r_norm(const SpectralModel& model, std::span<const double> x) {
  return std::sqrt(r_inner(model, x, x));
}

double e_norm(const SpectralModel& model, std::span<const double> x) {
  std::vector<double> g(model.grid_size());
  model.to_grid(x, g);
  double m = 0.0;
  for (double v : g) m = std::max(m, std::abs(v));
  return m;
}

StateVector grid_transform(const SpectralModel& model, std::span<const double> x) {
  if (x.size() != model.n()) throw std::invalid_argument("state dimension mismatch");
  StateVector g(model.grid_size());
  model.to_grid(x, g);
  return g;
}

StateVector inverse_grid_transform(const SpectralModel& model, std::span<const double> g) {
  if (g.size() != model.grid_size()) throw std::invalid_argument("grid dimension mismatch");
  StateVector x(model.n());
  model.from_grid(g, x);
  return x;
}

double ou_variance(double lambda, double r, double t) {
  if (std::isinf(t)) return r * r / (2.0 * std::abs(lambda));
  return r * r * (-std::expm1(2.0 * lambda * t)) / (2.0 * std::abs(lambda));
}

SmoothingReport verify_smoothing(const SpectralModel& model) {
  SmoothingReport rep;
  auto lam = model.eigenvalues();
  auto r = model.r();
  double lam1 = std::abs(lam[0]);
  for (double rk : r) {
    if (rk <= 0.0) {
      rep.ok = false;
      rep.message = "R is not invertible; smoothing bound undefined";
      rep.constants = {1.0, lam1, 0.0, 1.0};
      return rep;
    }
  }
  constexpr std::size_t kPoints = 241;
  std::vector<double> ts(kPoints), logt(kPoints), loglhs(kPoints);
  for (std::size_t i = 0; i < kPoints; ++i) {
    double u = -4.0 + 5.0 * static_cast<double>(i) / static_cast<double>(kPoints - 1);
    ts[i] = std::pow(10.0, u);
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < lam.size(); ++k) best = std::max(best, lam[k] * ts[i] - std::log(r[k]));
    logt[i] = std::log(ts[i]);
    loglhs[i] = best;
  }
  bool trivial = model.beta().has_value() && *model.beta() == 0.0;
  double gamma = 0.0;
  if (model.beta().value_or(0.0) > 0.0) {
    std::size_t m = kPoints / 5;
    auto fit = least_squares(std::span<const double>(logt).first(m), std::span<const double>(loglhs).first(m));
    rep.fitted_slope = fit.slope;
    gamma = std::clamp(-fit.slope, 0.0, *model.beta());
    if (gamma >= 1.0) gamma = std::nextafter(1.0, 0.0);
  }
  double w = gamma == 0.0 ? lam1 : 0.5 * lam1;
  double logM = -std::numeric_limits<double>::infinity();
  double logM0 = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < kPoints; ++i) {
    logM = std::max(logM, loglhs[i] + gamma * logt[i] + w * ts[i]);
    logM0 = std::max(logM0, loglhs[i] + gamma * logt[i]);
  }
  rep.constants.gamma = gamma;
  rep.constants.w = w;
  rep.constants.M = std::exp(logM) * (1.0 + 1e-9);
  rep.constants.M_at_w0 = std::exp(logM0);
  if (trivial) rep.constants.M = 1.0;

  double worst = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < kPoints; ++i) {
    double rhs = rep.constants.M * std::exp(-w * ts[i]) * std::pow(ts[i], -gamma);
    double lhs = std::exp(loglhs[i]);
    worst = std::min(worst, (rhs - lhs) / rhs);
  }
  rep.worst_margin = worst;
  rep.ok = worst >= -1e-12 && std::isfinite(rep.constants.M);
  std::ostringstream msg;
  msg << (rep.ok ? "smoothing bound verified" : "smoothing bound violated") << " on " << kPoints
      << " points in [1e-4, 10]";
  rep.message = msg.str();
  return rep;
}

}  // namespace simlab
