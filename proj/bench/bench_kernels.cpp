// Serial reference kernels against their OpenMP counterparts.

#include <benchmark/benchmark.h>

#include <vector>

#include "recomb/acceptance.hpp"
#include "recomb/kernels.hpp"
#include "recomb/martingale.hpp"
#include "recomb/rng.hpp"

namespace {

std::vector<double> table(int n) {
  recomb::RandomStream rng = recomb::rng_substream(1, static_cast<std::uint64_t>(n));
  const recomb::Pmf mu = recomb::random_pmf(n, rng);
  return {mu.weights().begin(), mu.weights().end()};
}

template <void (*Wht)(std::span<double>, int)>
void BM_Wht(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const std::vector<double> base = table(n);
  for (auto _ : state) {
    std::vector<double> t = base;
    Wht(t, n);
    benchmark::DoNotOptimize(t.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long long>(base.size()));
}

template <void (*Collide)(std::span<const double>, std::span<const double>, std::span<double>, int)>
void BM_Collision(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  std::vector<double> a = table(n);
  recomb::kernels::wht_forward_serial(a, n);
  std::vector<double> out(a.size());
  for (auto _ : state) {
    Collide(a, a, out, n);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long long>(a.size()));
}

void BM_WSamples(benchmark::State& state) {
  const auto t = static_cast<double>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(recomb::w_samples(t, 4096, {7, 1}).size());
}

void BM_WInfinityClosure(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(recomb::w_infinity_samples(1024, {7, 2}).size());
}

}  // namespace

BENCHMARK(BM_Wht<recomb::kernels::wht_forward_serial>)->Name("wht/serial")->DenseRange(12, 22, 5);
BENCHMARK(BM_Wht<recomb::kernels::wht_forward>)->Name("wht/openmp")->DenseRange(12, 22, 5);
BENCHMARK(BM_Collision<recomb::kernels::collision_serial>)->Name("collision/serial")->DenseRange(10, 16, 3);
BENCHMARK(BM_Collision<recomb::kernels::collision>)->Name("collision/openmp")->DenseRange(10, 16, 3);
BENCHMARK(BM_WSamples)->Name("w_samples/4096")->Arg(2)->Arg(6)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_WInfinityClosure)->Name("w_infinity/1024")->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
