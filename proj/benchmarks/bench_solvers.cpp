// Microbenchmarks for the hot paths: the constrained Lyapunov solve, the
// analytic gradient, the projected-gradient allocator, and the time-domain
// oracle. Sizes follow typical reduced networks (a handful to a few dozen
// retained buses).

#include <benchmark/benchmark.h>

#include <Eigen/Dense>

#include "inertia/allocate.hpp"
#include "inertia/grid.hpp"
#include "inertia/h2.hpp"
#include "inertia/lyapunov.hpp"
#include "inertia/simulate.hpp"
#include "inertia/state_space.hpp"

namespace {

using namespace inertia;

struct Fixture {
  GridModel grid;
  PerformanceSpec spec;
  Eigen::VectorXd m;
};

// Chain of n buses with a deterministic spread of parameters; heavy enough
// to be representative, cheap enough to rebuild per benchmark.
Fixture make_chain(int n) {
  std::vector<Bus> buses;
  std::vector<WeightedEdge> edges;
  for (int i = 0; i < n; ++i) {
    Bus b;
    b.id = i + 1;
    b.damping = 1.0 + 0.3 * (i % 4);
    b.inertia_floor = 0.5 + 0.1 * (i % 3);
    b.inertia_cap = b.inertia_floor + 4.0;
    b.disturbance_weight = 0.5 + 0.25 * ((i * 7) % 5);
    b.freq_penalty = 1.0;
    buses.push_back(b);
    if (i > 0) edges.push_back({i, i + 1, 1.0 + 0.5 * (i % 2)});
  }
  Fixture f{GridModel::build(buses, edges), {}, {}};
  f.spec.angle_mode = AnglePenalty::NetworkLaplacian;
  f.spec.freq_mode = FreqPenalty::Explicit;
  f.m = 0.5 * (f.grid.inertia_floor_vector() + f.grid.inertia_cap_vector());
  return f;
}

void BM_LyapunovSolve(benchmark::State& state) {
  const Fixture f = make_chain(static_cast<int>(state.range(0)));
  const StateSpace ss = assemble_state_space(f.grid, f.spec, f.m);
  const Eigen::MatrixXd q = ss.output_gram();
  for (auto _ : state) {
    const Gramian gram = solve_constrained_lyapunov(
        ss.a, q, ss.null_mode(), ss.left_null_mode(f.grid));
    benchmark::DoNotOptimize(gram.p.data());
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_LyapunovSolve)->RangeMultiplier(2)->Range(4, 32)->Complexity();

void BM_Gradient(benchmark::State& state) {
  const Fixture f = make_chain(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    const Eigen::VectorXd g = gradient(f.grid, f.spec, f.m);
    benchmark::DoNotOptimize(g.data());
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_Gradient)->RangeMultiplier(2)->Range(4, 32)->Complexity();

void BM_SolveGeneral(benchmark::State& state) {
  const Fixture f = make_chain(static_cast<int>(state.range(0)));
  AllocationProblem problem(f.grid, f.spec,
                            f.grid.inertia_floor_vector().sum() +
                                0.8 * static_cast<double>(state.range(0)));
  SolverOptions options;
  options.multistarts = 1;
  options.max_iters = 300;
  for (auto _ : state) {
    const AllocationResult res = solve_general(problem, options);
    benchmark::DoNotOptimize(res.objective);
  }
}
BENCHMARK(BM_SolveGeneral)->Arg(4)->Arg(8)->Arg(16);

void BM_ImpulseOracle(benchmark::State& state) {
  const Fixture f = make_chain(static_cast<int>(state.range(0)));
  const StateSpace ss = assemble_state_space(f.grid, f.spec, f.m);
  double rho = 0.0;
  for (const auto& mode : eigen_spectrum(ss))
    rho = std::max(rho, std::abs(mode.value));
  const double dt = 0.05 / rho;
  for (auto _ : state) {
    benchmark::DoNotOptimize(h2_via_impulse_auto(ss, dt));
  }
}
BENCHMARK(BM_ImpulseOracle)->Arg(3)->Arg(6);

}  // namespace

BENCHMARK_MAIN();
