#include <benchmark/benchmark.h>

#include <random>

#include "nlllab/cts_reference.hpp"
#include "nlllab/hamiltonian.hpp"
#include "nlllab/nll_finite.hpp"
#include "nlllab/nll_mean_field.hpp"
#include "nlllab/transition_kernel.hpp"

using namespace nlllab;

namespace {

NodePolicy reference_policy(const GameSpec& spec, const SimplexLattice& lat, double h) {
  NodePolicy pol(spec.d, lat.size());
  for (std::size_t n = 0; n < lat.size(); ++n) {
    for (State x = 0; x < spec.d; ++x) {
      const Vec a = spec.cost->reference_control(x, lat.point(n), h, admissible_set(spec, h, x));
      std::copy(a.begin(), a.end(), pol.row(x, n).begin());
    }
  }
  return pol;
}

}  // namespace

static void BM_KernelLaw(benchmark::State& state) {
  const int N = static_cast<int>(state.range(0));
  const int d = static_cast<int>(state.range(1));
  const GameSpec spec = build_quadratic_nearest_neighbor(d, 0.1);
  const TransitionKernel kernel(N, d);
  const NodePolicy pol = reference_policy(spec, kernel.lattice(), 0.05);
  const std::size_t node = kernel.lattice().size() / 2;
  for (auto _ : state) benchmark::DoNotOptimize(kernel.law(0, node, pol));
}
BENCHMARK(BM_KernelLaw)->Args({8, 3})->Args({16, 3})->Args({8, 4})->Args({32, 2});

static void BM_MinimizeHamiltonian(benchmark::State& state) {
  const bool quartic = state.range(0) != 0;
  const GameSpec spec = quartic ? build_quartic_nearest_neighbor(5, 0.1, 0.5)
                                : build_quadratic_nearest_neighbor(5, 0.1);
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  const Vec mu(5, 0.2);
  const AdmissibleSet adm = admissible_set(spec, 0.1, 2);
  std::vector<Vec> vs(64, Vec(5));
  for (auto& v : vs) {
    for (auto& e : v) e = U(rng);
  }
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(minimize_hamiltonian({2, mu, vs[i++ % vs.size()], 0.1, adm, *spec.cost}));
  }
  state.SetLabel(quartic ? "quartic" : "quadratic");
}
BENCHMARK(BM_MinimizeHamiltonian)->Arg(0)->Arg(1);

static void BM_SolveOneStep(benchmark::State& state) {
  const int N = static_cast<int>(state.range(0));
  const GameSpec spec = build_quadratic_nearest_neighbor(3, 0.1);
  const TransitionKernel kernel(N, 3);
  const NodeValues phi = terminal_values(spec, kernel.lattice());
  FixedPointOptions opt;
  opt.workers = static_cast<int>(state.range(1));
  for (auto _ : state) benchmark::DoNotOptimize(solve_one_step(spec, 0.01, kernel, phi, opt));
}
BENCHMARK(BM_SolveOneStep)->Args({6, 1})->Args({12, 1})->Args({12, 4})->Unit(benchmark::kMillisecond);

static void BM_SolveMeanField(benchmark::State& state) {
  const GameSpec spec = build_quadratic_nearest_neighbor(2, 0.1);
  auto lat = std::make_shared<const SimplexLattice>(static_cast<int>(state.range(0)), 2);
  for (auto _ : state) benchmark::DoNotOptimize(solve_mf_nll(spec, TimeGrid(0.05, 4), lat));
}
BENCHMARK(BM_SolveMeanField)->Arg(64)->Arg(256)->Unit(benchmark::kMillisecond);

static void BM_CtsReference(benchmark::State& state) {
  const GameSpec spec = build_quadratic_nearest_neighbor(3, 0.1);
  CtsOptions opt;
  opt.M = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(solve_cts_nll(spec, 4, 0.5, opt));
}
BENCHMARK(BM_CtsReference)->Arg(500)->Arg(2000)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
