#include <benchmark/benchmark.h>

#include "decoh/experiments.hpp"
#include "decoh/qinfo.hpp"
#include "decoh/random.hpp"

namespace {

decoh::Setup make_setup(int n_points) {
  decoh::ExperimentConfig c;
  c.particles.n_points = n_points;
  return decoh::prepare(c);
}

void BM_Apply(benchmark::State& state) {
  const auto s = make_setup(static_cast<int>(state.range(0)));
  decoh::Rng rng(1);
  const decoh::Vector v = decoh::random_complex_gaussian(s.hamiltonian.space.total_dim(), rng);
  decoh::Vector out;
  for (auto _ : state) {
    s.compiled.apply(v, out);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * v.size());
}
BENCHMARK(BM_Apply)->Arg(8)->Arg(16)->Unit(benchmark::kMillisecond);

void BM_KrylovStep(benchmark::State& state) {
  const auto s = make_setup(static_cast<int>(state.range(0)));
  decoh::KrylovPropagator prop(s.compiled, 30, 1e-12);
  decoh::Vector psi = decoh::initial_from_system(s, s.pair.amplitudes());
  const double dt = static_cast<double>(state.range(1)) / 4.0;
  decoh::StepStats stats;
  for (auto _ : state) {
    psi = prop.step(psi, dt, &stats);
    benchmark::DoNotOptimize(psi.data());
  }
  state.counters["substeps"] = stats.substeps;
  state.counters["matvecs"] = stats.matvecs;
}
BENCHMARK(BM_KrylovStep)->Args({8, 1})->Args({16, 1})->Args({16, 8})->Unit(benchmark::kMillisecond);

void BM_FactorFidelity(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  decoh::Rng rng(2);
  const std::size_t dsa = 256 * n;
  const decoh::Matrix a = decoh::leading_factor(decoh::random_complex_gaussian(dsa * n, rng), dsa);
  const decoh::Matrix b = decoh::leading_factor(decoh::random_complex_gaussian(dsa * n, rng), dsa);
  for (auto _ : state) benchmark::DoNotOptimize(decoh::fidelity_from_factors(a, b));
}
BENCHMARK(BM_FactorFidelity)->Arg(16)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
