#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "simlab/spectral.hpp"

using namespace simlab;
using std::numbers::pi;

TEST_CASE("dirichlet eigenvalues and noise weights") {
  auto m = SpectralModel::dirichlet_laplacian(1, 0.0);
  CHECK(m.eigenvalues()[0] == doctest::Approx(-pi * pi));
  CHECK(m.r()[0] == doctest::Approx(1.0));
  auto m3 = SpectralModel::dirichlet_laplacian(3, 0.5);
  CHECK(m3.r()[1] == doctest::Approx(1.0 / (2.0 * pi)));
  CHECK(m3.zeta_A() == doctest::Approx(-pi * pi));
}

TEST_CASE("diagonal model rejects nonnegative eigenvalues") {
  CHECK_THROWS(SpectralModel::diagonal({0.0}, {1.0}));
  CHECK_THROWS(SpectralModel::diagonal({-1.0, -2.0}, {1.0}));
}

TEST_CASE("semigroup flow") {
  auto m = SpectralModel::dirichlet_laplacian(4, 0.0);
  StateVector x{0.3, -1.0, 2.0, 0.5};
  auto same = semigroup_flow(m, 0.0, x);
  for (std::size_t k = 0; k < 4; ++k) CHECK(same[k] == x[k]);
  StateVector e1{1.0, 0.0, 0.0, 0.0};
  auto y = semigroup_flow(m, 1.0 / (pi * pi), e1);
  CHECK(y[0] == doctest::Approx(std::exp(-1.0)).epsilon(1e-14));
  CHECK(y[1] == 0.0);
}

TEST_CASE("smoothing bound holds at t = 0.01 for random x") {
  auto m = SpectralModel::dirichlet_laplacian(8, 0.5);
  const auto& c = m.smoothing();
  std::mt19937_64 rng(3);
  std::normal_distribution<double> nd;
  double t = 0.01;
  for (int trial = 0; trial < 20; ++trial) {
    StateVector x(8);
    for (auto& v : x) v = nd(rng);
    double lhs = r_norm(m, semigroup_flow(m, t, x));
    double rhs = c.M * std::exp(-c.w * t) * std::pow(t, -c.gamma) * h_norm(x);
    CHECK(lhs <= rhs * (1.0 + 1e-12));
  }
}

TEST_CASE("smoothing constants") {
  auto m0 = SpectralModel::dirichlet_laplacian(8, 0.0);
  CHECK(m0.smoothing().M == doctest::Approx(1.0));
  CHECK(m0.smoothing().w == doctest::Approx(pi * pi));
  CHECK(m0.smoothing().gamma == doctest::Approx(0.0));
  auto m = SpectralModel::dirichlet_laplacian(64, 0.5);
  CHECK(std::abs(m.smoothing().gamma - 0.5) <= 0.05);
  // sup_l l^{1/2} e^{-l t} = (1/(2 e t))^{1/2}.
  CHECK(m.smoothing().M_at_w0 == doctest::Approx(std::sqrt(1.0 / (2.0 * std::exp(1.0)))).epsilon(0.05));
  auto rep = verify_smoothing(m);
  CHECK(rep.ok);
}

TEST_CASE("norms") {
  auto m = SpectralModel::diagonal({-1.0, -4.0}, {1.0, 0.5});
  StateVector x{0.0, 1.0};
  CHECK(r_norm(m, x) == doctest::Approx(2.0));
  auto m0 = SpectralModel::dirichlet_laplacian(5, 0.0);
  StateVector y{1.0, -2.0, 0.5, 0.0, 3.0};
  CHECK(r_norm(m0, y) == doctest::Approx(h_norm(y)));
  auto mb = SpectralModel::dirichlet_laplacian(16, 0.5);
  std::mt19937_64 rng(4);
  std::normal_distribution<double> nd;
  for (int trial = 0; trial < 50; ++trial) {
    StateVector z(16);
    for (auto& v : z) v = nd(rng);
    CHECK(h_norm(z) <= mb.r()[0] * r_norm(mb, z) * (1.0 + 1e-12));
  }
}

TEST_CASE("grid transform") {
  auto m = SpectralModel::dirichlet_laplacian(6, 0.0);
  StateVector e1(6, 0.0);
  e1[0] = 1.0;
  auto g = grid_transform(m, e1);
  auto xi = m.grid_points();
  double scale = g[0] / std::sin(pi * xi[0]);
  for (std::size_t j = 0; j < g.size(); ++j) CHECK(g[j] == doctest::Approx(scale * std::sin(pi * xi[j])));

  std::mt19937_64 rng(5);
  std::normal_distribution<double> nd;
  StateVector x(6);
  for (auto& v : x) v = nd(rng);
  auto back = inverse_grid_transform(m, grid_transform(m, x));
  for (std::size_t k = 0; k < 6; ++k) CHECK(std::abs(back[k] - x[k]) <= 1e-12);

  // ||e1 + e2||_E is the max of the summed sines on the collocation grid.
  StateVector e12(6, 0.0);
  e12[0] = e12[1] = 1.0;
  auto g12 = grid_transform(m, e12);
  double expect = 0.0;
  for (double v : g12) expect = std::max(expect, std::abs(v));
  CHECK(e_norm(m, e12) == doctest::Approx(expect));
  double dense = 0.0;
  for (int i = 0; i <= 10000; ++i) {
    double s = i / 10000.0;
    dense = std::max(dense, std::abs(scale * (std::sin(pi * s) + std::sin(2.0 * pi * s))));
  }
  CHECK(e_norm(m, e12) <= dense * (1.0 + 1e-12));
  CHECK(e_norm(m, e12) >= 0.95 * dense);
}

TEST_CASE("ou variance") {
  CHECK(ou_variance(-1.0, 1.0, 50.0) == doctest::Approx(0.5));
  double dt = 1e-6;
  CHECK(ou_variance(-3.0, 2.0, dt) == doctest::Approx(4.0 * dt).epsilon(1e-5));
}
