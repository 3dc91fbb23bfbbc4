#include <benchmark/benchmark.h>

#include "simlab/integrator.hpp"
#include "simlab/lasry_lions.hpp"
#include "simlab/parallel.hpp"
#include "simlab/semigroup.hpp"

using namespace simlab;

namespace {

DriftSpec cubic(const SpectralModel& m) { return DriftSpec::nemytskii({0.0, 0.0, 0.0, 1.0}, 0.0, m.zeta_A()); }

void BM_ExpEulerStep(benchmark::State& state) {
  auto m = SpectralModel::dirichlet_laplacian(static_cast<std::size_t>(state.range(0)), 0.0);
  Stepper st(m, cubic(m), 1e-3, Scheme::exp_euler);
  Rng rng(1);
  StateVector x(m.n(), 0.1);
  for (auto _ : state) {
    if (!st.step(x, rng)) x.assign(m.n(), 0.1);
    benchmark::DoNotOptimize(x.data());
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_ExpEulerStep)->Arg(8)->Arg(32)->Arg(128);

void BM_SplitImplicitStep(benchmark::State& state) {
  auto m = SpectralModel::dirichlet_laplacian(static_cast<std::size_t>(state.range(0)), 0.0);
  Stepper st(m, cubic(m), 5e-3, Scheme::split_implicit);
  Rng rng(2);
  StateVector x(m.n(), 0.1);
  for (auto _ : state) {
    st.step(x, rng);
    benchmark::DoNotOptimize(x.data());
  }
}
BENCHMARK(BM_SplitImplicitStep)->Arg(8)->Arg(32);

void BM_SemigroupEstimate(benchmark::State& state) {
  set_worker_count(static_cast<std::size_t>(state.range(0)));
  auto m = SpectralModel::dirichlet_laplacian(8, 0.0);
  auto phi = TestFunction::tanh_cylinder({unit_vector(8, 0)}, {1.0});
  for (auto _ : state) {
    auto est = estimate_semigroup(m, cubic(m), 0.2, StateVector(8, 0.2), phi, 512, 3);
    benchmark::DoNotOptimize(est.value);
  }
  set_worker_count(0);
}
BENCHMARK(BM_SemigroupEstimate)->Arg(1)->Arg(8)->Unit(benchmark::kMillisecond);

void BM_Envelope(benchmark::State& state) {
  auto m = SpectralModel::dirichlet_laplacian(2, 0.0);
  auto corpus = lasry_lions_corpus(m);
  EnvelopeSettings s;
  s.mode = state.range(0) == 0 ? EnvelopeMode::descent : EnvelopeMode::grid;
  StateVector x{0.3, -0.2};
  for (auto _ : state) {
    auto r = envelope(corpus[2], 0.1, x, m, s);
    benchmark::DoNotOptimize(r.value);
  }
}
BENCHMARK(BM_Envelope)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
