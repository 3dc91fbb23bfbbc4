#include "simlab/test_function.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace simlab {

StateVector unit_vector(std::size_t n, std::size_t k) {
  if (k >= n) throw std::invalid_argument("unit vector index out of range");
  StateVector e(n, 0.0);
  e[k] = 1.0;
  return e;
}

namespace {

double dot(std::span<const double> a, std::span<const double> x) {
  double s = 0.0;
  std::size_t m = std::min(a.size(), x.size());
  for (std::size_t i = 0; i < m; ++i) s += a[i] * x[i];
  return s;
}

double sech2(double s) {
  double c = std::cosh(s);
  return std::isfinite(c) ? 1.0 / (c * c) : 0.0;
}

std::string fmt(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

}  // namespace

TestFunction TestFunction::constant(double c) {
  TestFunction f;
  f.kind_ = Kind::constant;
  f.offset_ = c;
  f.name_ = "const(" + fmt(c) + ")";
  return f;
}

TestFunction TestFunction::linear(StateVector a, double offset) {
  TestFunction f;
  f.kind_ = Kind::linear_functional;
  f.dirs_ = {std::move(a)};
  f.offset_ = offset;
  f.name_ = "linear";
  return f;
}

TestFunction TestFunction::tanh_cylinder(std::vector<StateVector> directions, std::vector<double> weights,
                                         double offset) {
  if (directions.empty() || directions.size() > 3 || directions.size() != weights.size())
    throw std::invalid_argument("tanh cylinder needs 1 to 3 directions with matching weights");
  TestFunction f;
  f.kind_ = Kind::cylindrical_tanh;
  f.dirs_ = std::move(directions);
  f.weights_ = std::move(weights);
  f.offset_ = offset;
  f.name_ = "tanh" + std::to_string(f.dirs_.size());
  return f;
}

TestFunction TestFunction::exp_quadratic(StateVector a, double theta, double kappa) {
  TestFunction f;
  f.kind_ = Kind::exp_quadratic;
  f.dirs_ = {std::move(a)};
  f.theta_ = theta;
  f.kappa_ = kappa;
  f.name_ = "expq(" + fmt(theta) + "," + fmt(kappa) + ")";
  return f;
}

TestFunction TestFunction::r_norm_squared(StateVector shift, double cap) {
  if (cap < 0.0) throw std::invalid_argument("cap must be nonnegative");
  TestFunction f;
  f.kind_ = Kind::r_norm_squared;
  f.shift_ = std::move(shift);
  f.cap_ = cap;
  f.name_ = cap > 0.0 ? "rnorm2_cap(" + fmt(cap) + ")" : "rnorm2";
  return f;
}

TestFunction TestFunction::exp_r_norm(double lambda) {
  TestFunction f;
  f.kind_ = Kind::exp_r_norm;
  f.lambda_ = lambda;
  f.name_ = "exp_rnorm(" + fmt(lambda) + ")";
  return f;
}

TestFunction TestFunction::grid_mean_tanh(double scale) {
  TestFunction f;
  f.kind_ = Kind::custom_grid;
  f.scale_ = scale;
  f.name_ = "grid_tanh(" + fmt(scale) + ")";
  return f;
}

TestFunction TestFunction::custom(std::string name, ValueFn value, std::optional<GradFn> gradient,
                                  std::optional<double> sup, std::optional<double> lip_r) {
  TestFunction f;
  f.kind_ = Kind::custom;
  f.name_ = std::move(name);
  f.custom_value_ = std::move(value);
  f.custom_grad_ = std::move(gradient);
  f.custom_sup_ = sup;
  f.custom_lip_ = lip_r;
  return f;
}

TestFunction TestFunction::floored(double m) const {
  if (!(m > 0.0)) throw std::invalid_argument("floor must be positive");
  if (floor_ > 0.0) throw std::invalid_argument("function already floored");
  TestFunction f = *this;
  f.floor_ = m;
  f.name_ = "sqrt(" + name_ + "^2+" + fmt(m) + ")";
  return f;
}

TestFunction TestFunction::named(std::string name) const {
  TestFunction f = *this;
  f.name_ = std::move(name);
  return f;
}

double TestFunction::base_value(const SpectralModel& model, std::span<const double> x) const {
  switch (kind_) {
    case Kind::constant:
      return offset_;
    case Kind::linear_functional:
      return dot(dirs_[0], x) + offset_;
    case Kind::cylindrical_tanh: {
      double v = offset_;
      for (std::size_t i = 0; i < dirs_.size(); ++i) v += weights_[i] * std::tanh(dot(dirs_[i], x));
      return v;
    }
    case Kind::exp_quadratic: {
      double s = dot(dirs_[0], x);
      return std::exp(theta_ * s + kappa_ * s * s);
    }
    case Kind::r_norm_squared: {
      auto r = model.r();
      double q = 0.0;
      for (std::size_t k = 0; k < x.size(); ++k) {
        double d = x[k] - (k < shift_.size() ? shift_[k] : 0.0);
        q += d * d / (r[k] * r[k]);
      }
      return cap_ > 0.0 ? cap_ * std::tanh(q / cap_) : q;
    }
    case Kind::exp_r_norm: {
      double q = r_inner(model, x, x);
      return std::exp(lambda_ * q);
    }
    case Kind::custom_grid: {
      std::vector<double> g(model.grid_size());
      model.to_grid(x, g);
      double s = 0.0;
      for (double v : g) s += std::tanh(scale_ * v);
      return s * model.quadrature_weight();
    }
    case Kind::custom:
      return custom_value_(model, x);
  }
  return 0.0;
}

void TestFunction::base_gradient(const SpectralModel& model, std::span<const double> x, std::span<double> out) const {
  std::size_t n = x.size();
  std::fill(out.begin(), out.begin() + static_cast<std::ptrdiff_t>(n), 0.0);
  switch (kind_) {
    case Kind::constant:
      return;
    case Kind::linear_functional:
      for (std::size_t k = 0; k < std::min(n, dirs_[0].size()); ++k) out[k] = dirs_[0][k];
      return;
    case Kind::cylindrical_tanh:
      for (std::size_t i = 0; i < dirs_.size(); ++i) {
        double d = weights_[i] * sech2(dot(dirs_[i], x));
        for (std::size_t k = 0; k < std::min(n, dirs_[i].size()); ++k) out[k] += d * dirs_[i][k];
      }
      return;
    case Kind::exp_quadratic: {
      double s = dot(dirs_[0], x);
      double d = (theta_ + 2.0 * kappa_ * s) * std::exp(theta_ * s + kappa_ * s * s);
      for (std::size_t k = 0; k < std::min(n, dirs_[0].size()); ++k) out[k] = d * dirs_[0][k];
      return;
    }
    case Kind::r_norm_squared: {
      auto r = model.r();
      double q = 0.0;
      for (std::size_t k = 0; k < n; ++k) {
        double d = x[k] - (k < shift_.size() ? shift_[k] : 0.0);
        q += d * d / (r[k] * r[k]);
        out[k] = 2.0 * d / (r[k] * r[k]);
      }
      if (cap_ > 0.0) {
        double s = sech2(q / cap_);
        for (std::size_t k = 0; k < n; ++k) out[k] *= s;
      }
      return;
    }
    case Kind::exp_r_norm: {
      auto r = model.r();
      double v = std::exp(lambda_ * r_inner(model, x, x));
      for (std::size_t k = 0; k < n; ++k) out[k] = v * lambda_ * 2.0 * x[k] / (r[k] * r[k]);
      return;
    }
    case Kind::custom_grid: {
      std::vector<double> g(model.grid_size());
      model.to_grid(x, g);
      for (std::size_t j = 0; j < g.size(); ++j) {
        double d = scale_ * sech2(scale_ * g[j]) * model.quadrature_weight();
        for (std::size_t k = 0; k < n; ++k) out[k] += d * model.basis_value(j, k);
      }
      return;
    }
    case Kind::custom: {
      if (custom_grad_) {
        (*custom_grad_)(model, x, out);
        return;
      }
      StateVector xp(x.begin(), x.end());
      constexpr double h = 1e-5;
      for (std::size_t k = 0; k < n; ++k) {
        double orig = xp[k];
        xp[k] = orig + h;
        double fp = custom_value_(model, xp);
        xp[k] = orig - h;
        double fm = custom_value_(model, xp);
        xp[k] = orig;
        out[k] = (fp - fm) / (2.0 * h);
      }
      return;
    }
  }
}

void TestFunction::base_hessian_diagonal(const SpectralModel& model, std::span<const double> x,
                                         std::span<double> out) const {
  std::size_t n = x.size();
  std::fill(out.begin(), out.begin() + static_cast<std::ptrdiff_t>(n), 0.0);
  switch (kind_) {
    case Kind::constant:
    case Kind::linear_functional:
      return;
    case Kind::cylindrical_tanh:
      for (std::size_t i = 0; i < dirs_.size(); ++i) {
        double s = dot(dirs_[i], x);
        double d2 = -2.0 * weights_[i] * std::tanh(s) * sech2(s);
        for (std::size_t k = 0; k < std::min(n, dirs_[i].size()); ++k) out[k] += d2 * dirs_[i][k] * dirs_[i][k];
      }
      return;
    case Kind::exp_quadratic: {
      double s = dot(dirs_[0], x);
      double e = std::exp(theta_ * s + kappa_ * s * s);
      double l = theta_ + 2.0 * kappa_ * s;
      double d2 = (l * l + 2.0 * kappa_) * e;
      for (std::size_t k = 0; k < std::min(n, dirs_[0].size()); ++k) out[k] = d2 * dirs_[0][k] * dirs_[0][k];
      return;
    }
    case Kind::r_norm_squared: {
      auto r = model.r();
      double q = 0.0;
      for (std::size_t k = 0; k < n; ++k) {
        double d = x[k] - (k < shift_.size() ? shift_[k] : 0.0);
        q += d * d / (r[k] * r[k]);
      }
      for (std::size_t k = 0; k < n; ++k) {
        double r2 = r[k] * r[k];
        double d = x[k] - (k < shift_.size() ? shift_[k] : 0.0);
        if (cap_ > 0.0) {
          double u = q / cap_;
          double p1 = sech2(u);
          double p2 = -2.0 * sech2(u) * std::tanh(u) / cap_;
          double dq = 2.0 * d / r2;
          out[k] = p2 * dq * dq + p1 * 2.0 / r2;
        } else {
          out[k] = 2.0 / r2;
        }
      }
      return;
    }
    case Kind::exp_r_norm: {
      auto r = model.r();
      double v = std::exp(lambda_ * r_inner(model, x, x));
      for (std::size_t k = 0; k < n; ++k) {
        double r2 = r[k] * r[k];
        double g = 2.0 * lambda_ * x[k] / r2;
        out[k] = v * (g * g + 2.0 * lambda_ / r2);
      }
      return;
    }
    case Kind::custom_grid: {
      std::vector<double> g(model.grid_size());
      model.to_grid(x, g);
      for (std::size_t j = 0; j < g.size(); ++j) {
        double u = scale_ * g[j];
        double d2 = -2.0 * scale_ * scale_ * std::tanh(u) * sech2(u) * model.quadrature_weight();
        for (std::size_t k = 0; k < n; ++k) out[k] += d2 * model.basis_value(j, k) * model.basis_value(j, k);
      }
      return;
    }
    case Kind::custom: {
      StateVector xp(x.begin(), x.end());
      constexpr double h = 1e-4;
      double f0 = custom_value_(model, x);
      for (std::size_t k = 0; k < n; ++k) {
        double orig = xp[k];
        xp[k] = orig + h;
        double fp = custom_value_(model, xp);
        xp[k] = orig - h;
        double fm = custom_value_(model, xp);
        xp[k] = orig;
        out[k] = (fp - 2.0 * f0 + fm) / (h * h);
      }
      return;
    }
  }
}

double TestFunction::value(const SpectralModel& model, std::span<const double> x) const {
  double b = base_value(model, x);
  return floor_ > 0.0 ? std::sqrt(b * b + floor_) : b;
}

void TestFunction::gradient(const SpectralModel& model, std::span<const double> x, std::span<double> out) const {
  base_gradient(model, x, out);
  if (floor_ > 0.0) {
    double b = base_value(model, x);
    double s = b / std::sqrt(b * b + floor_);
    for (std::size_t k = 0; k < x.size(); ++k) out[k] *= s;
  }
}

StateVector TestFunction::gradient(const SpectralModel& model, std::span<const double> x) const {
  StateVector g(x.size());
  gradient(model, x, g);
  return g;
}

double TestFunction::r_gradient_norm_sq(const SpectralModel& model, std::span<const double> x) const {
  StateVector g(x.size());
  gradient(model, x, g);
  auto r = model.r();
  double s = 0.0;
  for (std::size_t k = 0; k < g.size(); ++k) s += r[k] * r[k] * g[k] * g[k];
  return s;
}

void TestFunction::hessian_diagonal(const SpectralModel& model, std::span<const double> x,
                                    std::span<double> out) const {
  base_hessian_diagonal(model, x, out);
  if (floor_ > 0.0) {
    double b = base_value(model, x);
    double psi = std::sqrt(b * b + floor_);
    StateVector g(x.size());
    base_gradient(model, x, g);
    for (std::size_t k = 0; k < x.size(); ++k) out[k] = (g[k] * g[k] * floor_ / (psi * psi) + b * out[k]) / psi;
  }
}

double TestFunction::r2_hessian_trace(const SpectralModel& model, std::span<const double> x) const {
  StateVector h(x.size());
  hessian_diagonal(model, x, h);
  auto r = model.r();
  double s = 0.0;
  for (std::size_t k = 0; k < h.size(); ++k) s += r[k] * r[k] * h[k];
  return s;
}

std::optional<double> TestFunction::sup_bound() const {
  std::optional<double> base;
  switch (kind_) {
    case Kind::constant:
      base = std::abs(offset_);
      break;
    case Kind::cylindrical_tanh: {
      double s = std::abs(offset_);
      for (double w : weights_) s += std::abs(w);
      base = s;
      break;
    }
    case Kind::r_norm_squared:
      if (cap_ > 0.0) base = cap_;
      break;
    case Kind::exp_r_norm:
      if (lambda_ <= 0.0) base = 1.0;
      break;
    case Kind::exp_quadratic:
      if (kappa_ < 0.0) base = std::exp(-theta_ * theta_ / (4.0 * kappa_));
      else if (theta_ == 0.0 && kappa_ == 0.0) base = 1.0;
      break;
    case Kind::custom_grid:
      base = 1.0;
      break;
    case Kind::custom:
      base = custom_sup_;
      break;
    case Kind::linear_functional:
      if (dirs_[0].empty() || std::all_of(dirs_[0].begin(), dirs_[0].end(), [](double v) { return v == 0.0; }))
        base = std::abs(offset_);
      break;
  }
  if (base && floor_ > 0.0) return std::sqrt(*base * *base + floor_);
  return base;
}

std::optional<double> TestFunction::lip_r(const SpectralModel& model) const {
  auto r = model.r();
  auto ra_norm = [&](const StateVector& a) {
    double s = 0.0;
    for (std::size_t k = 0; k < std::min(a.size(), r.size()); ++k) s += r[k] * r[k] * a[k] * a[k];
    return std::sqrt(s);
  };
  switch (kind_) {
    case Kind::constant:
      return 0.0;
    case Kind::linear_functional:
      return ra_norm(dirs_[0]);
    case Kind::cylindrical_tanh: {
      double s = 0.0;
      for (std::size_t i = 0; i < dirs_.size(); ++i) s += std::abs(weights_[i]) * ra_norm(dirs_[i]);
      return s;
    }
    case Kind::custom:
      return custom_lip_;
    default:
      return std::nullopt;
  }
}

std::optional<TestFunction::Profile1D> TestFunction::single_direction() const {
  Profile1D p;
  std::function<double(double)> g;
  switch (kind_) {
    case Kind::constant: {
      double c = offset_;
      p.direction = {};
      g = [c](double) { return c; };
      break;
    }
    case Kind::linear_functional: {
      double c = offset_;
      p.direction = dirs_[0];
      g = [c](double s) { return s + c; };
      break;
    }
    case Kind::cylindrical_tanh: {
      if (dirs_.size() != 1) return std::nullopt;
      double w = weights_[0], c = offset_;
      p.direction = dirs_[0];
      g = [w, c](double s) { return c + w * std::tanh(s); };
      break;
    }
    case Kind::exp_quadratic: {
      double th = theta_, ka = kappa_;
      p.direction = dirs_[0];
      g = [th, ka](double s) { return std::exp(th * s + ka * s * s); };
      break;
    }
    default:
      return std::nullopt;
  }
  if (floor_ > 0.0) {
    double m = floor_;
    p.g = [g, m](double s) {
      double b = g(s);
      return std::sqrt(b * b + m);
    };
  } else {
    p.g = g;
  }
  return p;
}

}  // namespace simlab
