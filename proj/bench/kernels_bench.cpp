// Serial reference vs OpenMP paths of the solver kernels.

#include "vbgk/kernels.hpp"
#include "vbgk/kinetic.hpp"
#include "vbgk/linstab.hpp"

#include <benchmark/benchmark.h>

#include <numbers>

using namespace vbgk;

namespace {

struct Fixture {
  explicit Fixture(int nx) : config() {
    config.nx = nx;
    config.ntheta = 64;
    config.init.amplitude = 0.05;
    field = std::make_unique<PhaseField>(init_field(config));
    const SphereGrid g = solver_angles(config.ntheta);
    for (int j = 0; j < config.ntheta; ++j) {
      cos_t.push_back(g.nodes()(j, 0));
      sin_t.push_back(g.nodes()(j, 1));
      weights.push_back(g.weights()(j));
    }
  }
  AngularTable angles() const { return {cos_t, sin_t, weights}; }

  SolverConfig config;
  std::unique_ptr<PhaseField> field;
  std::vector<double> cos_t, sin_t, weights;
};

Execution exec_of(const benchmark::State& s) { return s.range(1) ? Execution::parallel : Execution::serial; }

void BM_CollideNonlinear(benchmark::State& state) {
  Fixture f(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    collide_nonlinear(f.field->values(), f.field->points(), f.angles(), 0.005, 0.0, exec_of(state));
    benchmark::DoNotOptimize(f.field->values().data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long>(f.field->points()));
}

void BM_ApplyPhases(benchmark::State& state) {
  const std::size_t n = static_cast<std::size_t>(state.range(0)) * (state.range(0) / 2 + 1) * 64;
  std::vector<std::complex<double>> spec(n, {1.0, 0.5}), phase(n, std::polar(1.0, 0.1));
  for (auto _ : state) {
    apply_phases(spec, phase, exec_of(state));
    benchmark::DoNotOptimize(spec.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long>(n));
}

void BM_Step(benchmark::State& state) {
  SolverConfig c;
  c.nx = static_cast<int>(state.range(0));
  c.init.amplitude = 0.05;
  KineticSolver solver(c, exec_of(state));
  for (auto _ : state) solver.step();
}

void BM_Sweep(benchmark::State& state) {
  const auto zs = rectangular_z_grid(-0.05, 2.0, 5, 50.0, 41);
  const auto ks = lattice_wave_vectors(2, 10.0, 20.0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(invertibility_sweep(1.0, Vec::Zero(2), zs, ks, exec_of(state)));
  }
}

}  // namespace

BENCHMARK(BM_CollideNonlinear)->ArgsProduct({{16, 32}, {0, 1}})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ApplyPhases)->ArgsProduct({{32, 64}, {0, 1}})->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_Step)->ArgsProduct({{32}, {0, 1}})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Sweep)->ArgsProduct({{0}, {0, 1}})->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
