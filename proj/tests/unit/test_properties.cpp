#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "simlab/constants.hpp"
#include "simlab/drift.hpp"
#include "simlab/harness.hpp"
#include "simlab/lasry_lions.hpp"
#include "simlab/parallel.hpp"
#include "simlab/report.hpp"

using namespace simlab;

namespace {

struct Gen {
  std::mt19937_64 rng;
  explicit Gen(std::uint64_t seed) : rng(seed) {}
  double uniform(double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng); }
  double log_uniform(double a, double b) { return std::exp(uniform(std::log(a), std::log(b))); }
  std::size_t index(std::size_t lo, std::size_t hi) { return std::uniform_int_distribution<std::size_t>(lo, hi)(rng); }
  StateVector vec(std::size_t n, double scale) {
    StateVector v(n);
    for (auto& x : v) x = uniform(-scale, scale);
    return v;
  }
  double any_double() {
    double m = uniform(-1.0, 1.0);
    int e = static_cast<int>(index(0, 600)) - 300;
    return std::ldexp(m, e);
  }
};

constexpr int kCases = 100;

}  // namespace

TEST_CASE("property: semigroup flow composes") {
  Gen g(1);
  for (int c = 0; c < kCases; ++c) {
    auto m = SpectralModel::dirichlet_laplacian(g.index(1, 16), g.uniform(0.0, 1.0));
    auto x = g.vec(m.n(), 3.0);
    double s = g.uniform(0.0, 0.1), t = g.uniform(0.0, 0.1);
    auto a = semigroup_flow(m, s + t, x);
    auto b = semigroup_flow(m, t, semigroup_flow(m, s, x));
    for (std::size_t k = 0; k < m.n(); ++k) CHECK(a[k] == doctest::Approx(b[k]).epsilon(1e-12));
    CHECK(h_norm(a) <= h_norm(x) + 1e-15);
  }
}

TEST_CASE("property: grid transform round trip") {
  Gen g(2);
  for (int c = 0; c < kCases; ++c) {
    auto m = g.index(0, 1) ? SpectralModel::dirichlet_laplacian(g.index(1, 24), 0.0)
                           : SpectralModel::periodic_laplacian(g.index(1, 12) * 2, 0.0);
    auto x = g.vec(m.n(), 2.0);
    auto y = inverse_grid_transform(m, grid_transform(m, x));
    for (std::size_t k = 0; k < m.n(); ++k) CHECK(std::abs(y[k] - x[k]) <= 1e-12);
  }
}

TEST_CASE("property: verdict is monotone in the margin") {
  Gen g(3);
  for (int c = 0; c < kCases; ++c) {
    double lhs = g.uniform(-5, 5), rhs = g.uniform(-5, 5), se = g.log_uniform(1e-6, 1.0);
    double k = g.uniform(1.0, 5.0), tol = g.uniform(0.0, 0.1);
    auto v = decide(Relation::le, lhs, rhs, se, k, tol);
    auto bigger = decide(Relation::le, lhs, rhs + g.uniform(0.0, 2.0), se, k, tol);
    CHECK(static_cast<int>(bigger) <= static_cast<int>(v));
    if (rhs >= lhs) CHECK(v == Verdict::pass);
    if (rhs < lhs - k * se - tol - 1e-9 * (1 + std::abs(lhs))) CHECK(v == Verdict::fail);
    CHECK(decide(Relation::eq, lhs, rhs, se, k, tol) == decide(Relation::eq, rhs, lhs, se, k, tol));
  }
}

TEST_CASE("property: number formatting round trips") {
  Gen g(4);
  for (int c = 0; c < 1000; ++c) {
    double v = g.any_double();
    CHECK(std::stod(format_number(v)) == v);
  }
}

TEST_CASE("property: compensated sum ignores order") {
  Gen g(5);
  for (int c = 0; c < kCases; ++c) {
    std::vector<double> v(g.index(1, 500));
    for (auto& x : v) x = g.uniform(-1.0, 1.0) * std::pow(10.0, g.uniform(-8, 8));
    double a = compensated_sum(v);
    std::shuffle(v.begin(), v.end(), g.rng);
    double b = compensated_sum(v);
    double scale = 0.0;
    for (double x : v) scale = std::max(scale, std::abs(x));
    CHECK(std::abs(a - b) <= 4e-16 * scale);
  }
}

TEST_CASE("property: derived seeds are distinct") {
  Gen g(6);
  for (int c = 0; c < 20; ++c) {
    std::uint64_t base = g.rng();
    std::set<std::uint64_t> seen;
    for (std::uint64_t i = 0; i < 2000; ++i) seen.insert(derive_seed(base, i));
    CHECK(seen.size() == 2000);
  }
}

TEST_CASE("property: resolvent of the cubic is nonexpansive") {
  Gen g(7);
  auto m = SpectralModel::dirichlet_laplacian(6, 0.0);
  auto spec = DriftSpec::nemytskii({0.0, 0.0, 0.0, 1.0}, 0.0, m.zeta_A());
  for (int c = 0; c < 30; ++c) {
    double delta = g.log_uniform(1e-3, 0.5);
    auto x = g.vec(6, 2.0), y = g.vec(6, 2.0);
    auto jx = yosida_resolvent(spec, m, delta, x), jy = yosida_resolvent(spec, m, delta, y);
    StateVector dj(6), dx(6);
    for (std::size_t k = 0; k < 6; ++k) {
      dj[k] = jx[k] - jy[k];
      dx[k] = x[k] - y[k];
    }
    CHECK(h_norm(dj) <= h_norm(dx) * (1.0 + 1e-8));
  }
}

TEST_CASE("property: Harnack holds at random oracle points") {
  Gen g(8);
  auto m = SpectralModel::diagonal({-1.0}, {1.0});
  auto c = constants_dissipative(-1.0, 1.0);
  for (int i = 0; i < 40; ++i) {
    double t = g.log_uniform(0.05, 3.0), p = g.uniform(1.1, 4.0);
    StateVector x{g.uniform(-2, 2)}, h{g.uniform(-2, 2)};
    auto phi = TestFunction::tanh_cylinder({unit_vector(1, 0)}, {g.uniform(0.2, 2.0)}, g.uniform(1.5, 3.0));
    auto r = check_harnack(m, DriftSpec::zero(), t, x, h, p, phi, c, EvalMode::oracle);
    CHECK(r.verdict == Verdict::pass);
  }
}

TEST_CASE("property: hypercontractivity holds for random exponentials") {
  Gen g(9);
  auto m = SpectralModel::dirichlet_laplacian(3, 0.0);
  auto spec = DriftSpec::zero();
  spec.zeta_R = m.zeta_A();
  auto c = make_constants(m, spec);
  for (int i = 0; i < 40; ++i) {
    auto a = g.vec(3, 1.0);
    auto phi = TestFunction::exp_quadratic(a, g.uniform(-2, 2), g.uniform(0.0, 0.5));
    auto r = check_hypercontractivity_gaussian(m, g.log_uniform(0.01, 1.0), g.uniform(1.2, 4.0), phi, c);
    CHECK(r.verdict != Verdict::fail);
  }
}

TEST_CASE("property: envelope stays within its sandwich") {
  Gen g(10);
  auto m = SpectralModel::diagonal({-1.0, -4.0}, {1.0, 0.5});
  auto corpus = lasry_lions_corpus(m);
  for (int i = 0; i < 20; ++i) {
    const auto& f = corpus[g.index(0, corpus.size() - 1)];
    double eps = g.log_uniform(0.01, 1.0);
    auto x = g.vec(2, 2.0);
    double v = envelope(f, eps, x, m).value;
    double fx = f(x);
    // f - eps Lip^2 / 2 <= f_eps <= f.
    double l2 = f.lip_r * f.lip_r;
    CHECK_MESSAGE(v <= fx + 1e-6 * (1 + std::abs(fx)), f.name);
    CHECK_MESSAGE(v >= fx - eps * l2 / 2.0 - 1e-6 * (1 + std::abs(fx)), f.name);
    if (f.sup) CHECK(std::abs(v) <= *f.sup + 1e-9);
  }
}
