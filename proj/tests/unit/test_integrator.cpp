#include <doctest.h>

#include <cmath>
#include <numbers>

#include "simlab/integrator.hpp"
#include "simlab/parallel.hpp"
#include "simlab/semigroup.hpp"
#include "simlab/stats.hpp"

using namespace simlab;
using std::numbers::pi;

TEST_CASE("noise increment variance matches the closed form") {
  auto m = SpectralModel::diagonal({-1.0}, {1.0});
  Rng rng(3);
  std::vector<double> v(1000000);
  for (auto& x : v) x = sample_noise_increment(m, 0.1, rng)[0];
  double expect = ou_variance(-1.0, 1.0, 0.1);
  double var = sample_variance(v);
  double se = expect * std::sqrt(2.0 / static_cast<double>(v.size()));
  CHECK(std::abs(var - expect) <= 4.0 * se);
}

TEST_CASE("deterministic linear flow is exact") {
  auto m = SpectralModel::dirichlet_laplacian(3, 0.0).without_noise();
  IntegratorConfig c;
  c.dt = 1.0 / (pi * pi) / 10.0;
  c.horizon = 1.0 / (pi * pi);
  StateVector x0{1.0, 0.0, 0.0};
  auto tr = integrate(m, DriftSpec::zero(), c, x0);
  CHECK(tr.states.back()[0] == doctest::Approx(std::exp(-1.0)).epsilon(1e-13));
  CHECK(tr.times.back() == c.horizon);
}

TEST_CASE("stationary OU variance at T = 50") {
  auto m = SpectralModel::diagonal({-1.0}, {1.0});
  StateVector x0{0.0};
  std::vector<double> end(100000);
  parallel_for(end.size(), [&](std::size_t i) {
    Stepper st(m, DriftSpec::zero(), 50.0);
    Rng rng(derive_seed(17, i));
    StateVector x = x0;
    st.step(x, rng);
    end[i] = x[0] * x[0];
  });
  auto est = mean_estimate(end);
  CHECK(std::abs(est.mean - 0.5) <= 4.0 * est.se);
}

TEST_CASE("identical starts give identical coupled trajectories") {
  auto m = SpectralModel::dirichlet_laplacian(8, 0.0);
  auto spec = DriftSpec::nemytskii({0.0, 0.0, 0.0, 1.0}, 0.0, m.zeta_A());
  IntegratorConfig c;
  c.dt = 1e-3;
  c.horizon = 0.2;
  c.seed = 4;
  StateVector x0(8, 0.3);
  auto [a, b] = integrate_coupled_pair(m, spec, c, x0, x0);
  CHECK(a.states == b.states);
  auto solo = integrate(m, spec, c, x0);
  CHECK(solo.states.back() == a.states.back());
}

TEST_CASE("linear coupled pair contracts at rate pi^2") {
  auto m = SpectralModel::dirichlet_laplacian(4, 0.0);
  IntegratorConfig c;
  c.dt = 1e-3;
  c.horizon = 0.5;
  c.seed = 5;
  StateVector x0{1.0, 0.5, -0.2, 0.1}, y0{-1.0, 0.2, 0.3, 0.0};
  auto [a, b] = integrate_coupled_pair(m, DriftSpec::zero(), c, x0, y0);
  StateVector d0(4), d1(4);
  for (std::size_t k = 0; k < 4; ++k) {
    d0[k] = x0[k] - y0[k];
    d1[k] = a.states.back()[k] - b.states.back()[k];
  }
  CHECK(h_norm(d1) <= std::exp(-pi * pi * 0.5) * h_norm(d0) * (1.0 + 1e-12));
}

TEST_CASE("deterministic cubic flow is nonincreasing") {
  auto m = SpectralModel::dirichlet_laplacian(8, 0.0).without_noise();
  auto spec = DriftSpec::nemytskii({0.0, 0.0, 0.0, 1.0}, 0.0, m.zeta_A());
  IntegratorConfig c;
  c.dt = 1e-4;
  c.horizon = 0.1;
  StateVector x0(8, 0.0);
  x0[0] = 2.0;
  x0[1] = -1.0;
  auto tr = integrate(m, spec, c, x0);
  for (std::size_t j = 1; j < tr.states.size(); ++j) CHECK(h_norm(tr.states[j]) <= h_norm(tr.states[j - 1]) + 1e-14);
}

TEST_CASE("variational solution for F = 0 is the linear flow") {
  auto m = SpectralModel::dirichlet_laplacian(4, 0.0);
  IntegratorConfig c;
  c.dt = 1e-3;
  c.horizon = 0.3;
  c.seed = 6;
  auto tr = integrate(m, DriftSpec::zero(), c, StateVector{0.1, 0.2, 0.3, 0.4});
  StateVector h{1.0, -1.0, 0.5, 0.0};
  auto vt = integrate_variational(m, DriftSpec::zero(), tr, h);
  auto expect = semigroup_flow(m, 0.3, h);
  for (std::size_t k = 0; k < 4; ++k) CHECK(std::abs(vt.states.back()[k] - expect[k]) <= 1e-10);
}

TEST_CASE("cubic coupled pair from far apart respects the pair bound") {
  auto m = SpectralModel::dirichlet_laplacian(8, 0.0);
  auto spec = DriftSpec::nemytskii({0.0, 0.0, 0.0, 1.0}, 0.0, m.zeta_A());
  auto sd = fit_super_dissipativity(spec, m);
  IntegratorConfig c;
  c.dt = 1e-3;
  c.horizon = 1.0;
  c.seed = 7;
  c.scheme = Scheme::split_implicit;
  StateVector x0(8, 0.0), y0(8, 0.0);
  x0[0] = 5.0;
  y0[0] = -5.0;
  auto [a, b] = integrate_coupled_pair(m, spec, c, x0, y0);
  REQUIRE_FALSE(a.diverged);
  REQUIRE_FALSE(b.diverged);
  StateVector d(8);
  for (std::size_t k = 0; k < 8; ++k) d[k] = a.states.back()[k] - b.states.back()[k];
  CHECK(r_norm(m, d) * r_norm(m, d) <= sd.pair_bound(1.0));
}

TEST_CASE("moment bound") {
  auto m = SpectralModel::dirichlet_laplacian(4, 0.0);
  IntegratorConfig c;
  c.dt = 1e-3;
  c.horizon = 1.0;
  c.record_stride = 50;
  c.seed = 8;
  auto rep = check_moment_bound(m, DriftSpec::zero(), c, StateVector(4, 0.0), 2.0, 400);
  double series = 0.0;
  for (int k = 1; k <= 4; ++k) series += 1.0 / (2.0 * k * k * pi * pi);
  CHECK(rep.stochastic_convolution_h2_limit == doctest::Approx(series));
  CHECK(rep.moments.back() == doctest::Approx(series).epsilon(0.15));
  CHECK_THROWS(check_moment_bound(m, DriftSpec::zero(), c, StateVector(4, 0.0), 3.0, 10));
}

TEST_CASE("weak error of the cubic scheme shrinks with dt") {
  auto m = SpectralModel::dirichlet_laplacian(8, 0.0);
  auto spec = DriftSpec::nemytskii({0.0, 0.0, 0.0, 1.0}, 0.0, m.zeta_A());
  auto phi = TestFunction::tanh_cylinder({unit_vector(8, 0)}, {1.0});
  StateVector x(8, 0.0);
  x[0] = 1.5;
  auto est = [&](double dt) {
    SimulationSettings s;
    s.dt = dt;
    return estimate_semigroup(m, spec, 0.2, x, phi, 4000, 99, s);
  };
  auto a = est(0.02), b = est(0.01), c = est(0.005);
  double d1 = std::abs(a.value - b.value), d2 = std::abs(b.value - c.value);
  CHECK(d2 < d1);
}
