#include <benchmark/benchmark.h>

#include <array>

#include <nlsq/nlsq.hpp>

namespace {

using namespace nlsq;

void BM_SpinFamily(benchmark::State& state) {
  const DickeBasis basis(static_cast<int>(state.range(0)));
  const int order = static_cast<int>(state.range(1));
  for (auto _ : state) benchmark::DoNotOptimize(build_spin_family(basis, order));
}
BENCHMARK(BM_SpinFamily)->Args({16, 5})->Args({100, 3})->Unit(benchmark::kMillisecond);

void BM_MomentData(benchmark::State& state) {
  const DickeBasis basis(static_cast<int>(state.range(0)));
  const OperatorFamily family = build_spin_family(basis, static_cast<int>(state.range(1)));
  const QuantumState st =
      TwistingEvolver(basis, TwistingModel::oat).evolve(coherent_spin_state_z(basis), 0.3);
  for (auto _ : state) benchmark::DoNotOptimize(moment_data(st, family));
}
BENCHMARK(BM_MomentData)->Args({16, 5})->Args({100, 3})->Unit(benchmark::kMillisecond);

// One sweep point: evolve, measure once at K_max, optimize every prefix.
void BM_SweepPoint(benchmark::State& state) {
  const DickeBasis basis(static_cast<int>(state.range(0)));
  const int kmax = static_cast<int>(state.range(1));
  const OperatorFamily family = build_spin_family(basis, kmax);
  const TwistingEvolver evolver(basis, TwistingModel::oat);
  const QuantumState css = coherent_spin_state_z(basis);
  const std::array<std::size_t, 3> slots = {0, 1, 2};
  for (auto _ : state) {
    const QuantumState st = evolver.evolve(css, 0.7);
    const MomentInputs in = measure_moments(st, family);
    for (int k = 1; k <= kmax; ++k) {
      benchmark::DoNotOptimize(optimized_squeezing(moment_data(in.leading(spin_family_size(k))),
                                                   slots, basis.n_particles()));
    }
    benchmark::DoNotOptimize(f_max_density(st, basis));
  }
}
BENCHMARK(BM_SweepPoint)->Args({16, 5})->Args({100, 3})->Unit(benchmark::kMillisecond);

void BM_FockThirdOrder(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const FockBasis basis(default_cutoff(n));
  const OperatorFamily family = build_cv_third_order_family(basis);
  const QuantumState st = fock_state(basis, n);
  for (auto _ : state) benchmark::DoNotOptimize(moment_data(st, family));
}
BENCHMARK(BM_FockThirdOrder)->Arg(10);

}  // namespace

BENCHMARK_MAIN();
