#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "simlab/parallel.hpp"
#include "simlab/quadrature.hpp"
#include "simlab/stats.hpp"

using namespace simlab;

TEST_CASE("mean estimate") {
  std::vector<double> v{1.0, 2.0, 3.0, 4.0};
  auto m = mean_estimate(v);
  CHECK(m.mean == doctest::Approx(2.5));
  CHECK(m.se == doctest::Approx(std::sqrt(5.0 / 3.0 / 4.0)));
  CHECK(m.count == 4);
  std::vector<double> c(10, 7.0);
  CHECK(mean_estimate(c).se == 0.0);
}

TEST_CASE("wilson interval contains the proportion") {
  auto iv = wilson_interval(30, 100);
  CHECK(iv.lo < 0.3);
  CHECK(iv.hi > 0.3);
  auto zero = wilson_interval(0, 1000);
  CHECK(zero.lo == doctest::Approx(0.0));
  CHECK(zero.hi > 0.0);
}

TEST_CASE("log mean exp is stable") {
  std::vector<double> v{1000.0, 1000.0};
  CHECK(log_mean_exp(v) == doctest::Approx(1000.0));
  std::vector<double> w{0.0, std::log(3.0)};
  CHECK(log_mean_exp(w) == doctest::Approx(std::log(2.0)));
}

TEST_CASE("hill estimator recovers a Pareto index") {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> logs(20000);
  // P(W > w) = w^{-2}: log W = -log(U) / 2.
  for (auto& v : logs) v = -std::log(u(rng)) / 2.0;
  auto t = hill_tail_index(logs);
  CHECK(std::abs(t.alpha - 2.0) <= 4.0 * t.se + 0.05);
}

TEST_CASE("least squares") {
  std::vector<double> x{0.0, 1.0, 2.0, 3.0}, y{1.0, 3.0, 5.0, 7.0};
  auto f = least_squares(x, y);
  CHECK(f.slope == doctest::Approx(2.0));
  CHECK(f.intercept == doctest::Approx(1.0));
}

TEST_CASE("gauss hermite") {
  CHECK(gaussian_expectation(0.0, 1.0, [](double z) { return z * z * z * z; }) == doctest::Approx(3.0));
  CHECK(gaussian_expectation(1.0, 2.0, [](double z) { return std::exp(z); }) == doctest::Approx(std::exp(2.0)));
  // E exp(theta S + kappa S^2) for S ~ N(0, 1): (1 - 2 kappa)^{-1/2} exp(theta^2 / (2 (1 - 2 kappa))).
  double v = log_gaussian_exp_quadratic(0.5, 0.2, 0.0, 1.0);
  CHECK(v == doctest::Approx(-0.5 * std::log(0.6) + 0.25 / 1.2));
  CHECK(std::isinf(log_gaussian_exp_quadratic(0.0, 0.5, 0.0, 1.0)));
}

TEST_CASE("seed derivation and compensated sums") {
  CHECK(derive_seed(1, 0) != derive_seed(1, 1));
  CHECK(derive_seed(1, 5) == derive_seed(1, 5));
  std::vector<double> v{1e16, 1.0, -1e16, 1.0};
  CHECK(compensated_sum(v) == 2.0);
}

TEST_CASE("parallel_for is independent of the worker count") {
  std::vector<double> a(1000), b(1000);
  auto body = [](std::vector<double>& out) {
    return [&out](std::size_t i) {
      std::mt19937_64 rng(derive_seed(42, i));
      out[i] = std::normal_distribution<double>()(rng);
    };
  };
  set_worker_count(1);
  parallel_for(a.size(), body(a));
  set_worker_count(8);
  parallel_for(b.size(), body(b));
  set_worker_count(0);
  CHECK(a == b);
}
