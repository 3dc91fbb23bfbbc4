#include "simlab/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "simlab/parallel.hpp"

namespace simlab {

MeanEstimate mean_estimate(std::span<const double> values, double inflation) {
  MeanEstimate e;
  e.count = values.size();
  if (values.empty()) return e;
  e.mean = compensated_sum(values) / static_cast<double>(values.size());
  if (values.size() > 1) {
    e.se = std::sqrt(sample_variance(values) * inflation / static_cast<double>(values.size()));
  }
  return e;
}

double sample_variance(std::span<const double> values) {
  if (values.size() < 2) return 0.0;
  double m = compensated_sum(values) / static_cast<double>(values.size());
  CompensatedSum s;
  for (double v : values) s.add((v - m) * (v - m));
  return s.value() / static_cast<double>(values.size() - 1);
}

double lag1_autocorrelation(std::span<const double> values) {
  std::size_t n = values.size();
  if (n < 3) return 0.0;
  double m = compensated_sum(values) / static_cast<double>(n);
  CompensatedSum num, den;
  for (std::size_t i = 0; i < n; ++i) {
    double d = values[i] - m;
    den.add(d * d);
    if (i + 1 < n) num.add(d * (values[i + 1] - m));
  }
  if (den.value() <= 0.0) return 0.0;
  return num.value() / den.value();
}

double ar1_inflation(std::span<const double> values) {
  double rho = std::clamp(lag1_autocorrelation(values), 0.0, 0.99);
  return (1.0 + rho) / (1.0 - rho);
}

double log_mean_exp(std::span<const double> values) {
  if (values.empty()) return -std::numeric_limits<double>::infinity();
  double mx = *std::max_element(values.begin(), values.end());
  if (!std::isfinite(mx)) return mx;
  CompensatedSum s;
  for (double v : values) s.add(std::exp(v - mx));
  return mx + std::log(s.value() / static_cast<double>(values.size()));
}

double quantile(std::vector<double> values, double level) {
  if (values.empty()) throw std::invalid_argument("quantile of empty sample");
  std::sort(values.begin(), values.end());
  double h = (static_cast<double>(values.size()) - 1.0) * std::clamp(level, 0.0, 1.0);
  auto lo = static_cast<std::size_t>(std::floor(h));
  std::size_t hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

Interval wilson_interval(std::size_t successes, std::size_t trials, double z) {
  if (trials == 0) return {0.0, 1.0};
  double n = static_cast<double>(trials);
  double p = static_cast<double>(successes) / n;
  double z2 = z * z;
  double centre = (p + z2 / (2 * n)) / (1 + z2 / n);
  double half = z * std::sqrt(p * (1 - p) / n + z2 / (4 * n * n)) / (1 + z2 / n);
  return {std::max(0.0, centre - half), std::min(1.0, centre + half)};
}

TailIndex hill_tail_index(std::vector<double> log_w, std::size_t k) {
  std::size_t n = log_w.size();
  if (n < 20) throw std::invalid_argument("hill_tail_index needs at least 20 samples");
  if (k == 0) k = std::clamp<std::size_t>(n / 100, std::min<std::size_t>(100, n / 10), n / 10);
  k = std::clamp<std::size_t>(k, 2, n - 1);
  std::nth_element(log_w.begin(), log_w.begin() + static_cast<std::ptrdiff_t>(n - k - 1), log_w.end());
  double threshold = log_w[n - k - 1];
  CompensatedSum s;
  std::size_t used = 0;
  for (std::size_t i = n - k; i < n; ++i) {
    s.add(log_w[i] - threshold);
    ++used;
  }
  double mean_excess = s.value() / static_cast<double>(used);
  TailIndex t;
  t.k = used;
  t.alpha = mean_excess > 0 ? 1.0 / mean_excess : std::numeric_limits<double>::infinity();
  t.se = t.alpha / std::sqrt(static_cast<double>(used));
  return t;
}

LinearFit least_squares(std::span<const double> x, std::span<const double> y) {
  std::size_t n = x.size();
  if (n != y.size() || n < 2) throw std::invalid_argument("least_squares needs matching samples");
  double mx = compensated_sum(x) / static_cast<double>(n);
  double my = compensated_sum(y) / static_cast<double>(n);
  CompensatedSum sxx, sxy;
  for (std::size_t i = 0; i < n; ++i) {
    sxx.add((x[i] - mx) * (x[i] - mx));
    sxy.add((x[i] - mx) * (y[i] - my));
  }
  LinearFit f;
  f.slope = sxy.value() / sxx.value();
  f.intercept = my - f.slope * mx;
  if (n > 2) {
    CompensatedSum rss;
    for (std::size_t i = 0; i < n; ++i) {
      double r = y[i] - f.intercept - f.slope * x[i];
      rss.add(r * r);
    }
    f.slope_se = std::sqrt(rss.value() / static_cast<double>(n - 2) / sxx.value());
  }
  return f;
}

}  // namespace simlab
