#include <benchmark/benchmark.h>

#include <cmath>

#include "tch/assembly.hpp"
#include "tch/saddle_precond.hpp"
#include "tch/simulation.hpp"

using namespace tch;

namespace {

MeshGrid grid(benchmark::State& state) {
  const auto nx = static_cast<Index>(state.range(0));
  return build_mesh(2, {10.0, 2.5}, {nx, nx / 2});
}

CsrMatrix schur_factor(const MeshGrid& mesh) {
  const double tau = 1e-4, eps = 1e-3;
  return add(tau, assemble_stiffness(mesh), std::sqrt(tau / eps), assemble_mass(mesh));
}

void BM_Assembly(benchmark::State& state) {
  const auto mesh = grid(state);
  for (auto _ : state) {
    auto m = assemble_mass(mesh);
    auto k = assemble_stiffness(mesh);
    benchmark::DoNotOptimize(m);
    benchmark::DoNotOptimize(k);
  }
  state.SetComplexityN(mesh.num_nodes());
}

void BM_AmgSetup(benchmark::State& state) {
  const auto mesh = grid(state);
  const auto a = schur_factor(mesh);
  for (auto _ : state) {
    auto h = amg_setup(a);
    benchmark::DoNotOptimize(h);
  }
  state.SetComplexityN(mesh.num_nodes());
}

void BM_AmgVcycle(benchmark::State& state) {
  const auto mesh = grid(state);
  const auto h = amg_setup(schur_factor(mesh));
  auto ws = h.make_workspace();
  std::vector<double> b(static_cast<std::size_t>(h.size()), 1.0), x(b.size());
  for (auto _ : state) {
    std::fill(x.begin(), x.end(), 0.0);
    h.vcycle(b, x, ws);
    benchmark::ClobberMemory();
  }
  state.SetComplexityN(mesh.num_nodes());
}

void BM_PreconditionerApply(benchmark::State& state) {
  const auto mesh = grid(state);
  const auto m = assemble_mass(mesh);
  const auto k = assemble_stiffness(mesh);
  const auto p = MatchingPreconditioner::build(m, k, 1e-4, 1e-3);
  std::vector<double> v(static_cast<std::size_t>(2 * m.rows()), 1.0), w(v.size());
  for (auto _ : state) {
    p.apply(v, w);
    benchmark::ClobberMemory();
  }
  state.SetComplexityN(mesh.num_nodes());
}

void BM_TimeStep(benchmark::State& state) {
  const auto mesh = grid(state);
  const ModelParams params;
  const Stepper stepper(mesh, params, {});
  const auto s0 = initialize(mesh, params, 0);
  for (auto _ : state) {
    auto out = stepper.step(s0);
    benchmark::DoNotOptimize(out);
  }
  state.SetComplexityN(mesh.num_nodes());
}

}  // namespace

BENCHMARK(BM_Assembly)->RangeMultiplier(2)->Range(100, 400)->Complexity()->Unit(benchmark::kMillisecond);
BENCHMARK(BM_AmgSetup)->RangeMultiplier(2)->Range(100, 400)->Complexity()->Unit(benchmark::kMillisecond);
BENCHMARK(BM_AmgVcycle)->RangeMultiplier(2)->Range(100, 400)->Complexity()->Unit(benchmark::kMillisecond);
BENCHMARK(BM_PreconditionerApply)->RangeMultiplier(2)->Range(100, 400)->Complexity()->Unit(benchmark::kMillisecond);
BENCHMARK(BM_TimeStep)->RangeMultiplier(2)->Range(100, 200)->Complexity()->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
