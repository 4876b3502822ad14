#include <random>

#include <benchmark/benchmark.h>

#include "resilnet/dynamics.hpp"
#include "resilnet/grid_case.hpp"
#include "resilnet/optimizer.hpp"
#include "resilnet/sdp.hpp"
#include "resilnet/topologies.hpp"
#include "resilnet/vulnerability.hpp"

using namespace resilnet;

namespace {

WeightedGraph bench_graph(int n) {
  std::mt19937_64 rng(static_cast<std::uint64_t>(n));
  return random_connected_graph(n, 4.0 / n, rng);
}

DesignProblem bench_problem(const WeightedGraph& g, std::vector<int> nodes) {
  DesignProblem p;
  p.num_nodes = g.num_nodes();
  p.edges = g.edges();
  p.perturbed_nodes = std::move(nodes);
  return p;
}

void BM_Measure(benchmark::State& state) {
  const WeightedGraph g = bench_graph(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(vulnerability_measure(g, 1));
}
BENCHMARK(BM_Measure)->RangeMultiplier(2)->Range(8, 256);

void BM_Gradient(benchmark::State& state) {
  const WeightedGraph g = bench_graph(static_cast<int>(state.range(0)));
  const SpectralBundle s = spectral_bundle(g);
  for (auto _ : state) benchmark::DoNotOptimize(vulnerability_gradient(g, s, 1));
}
BENCHMARK(BM_Gradient)->RangeMultiplier(2)->Range(8, 256);

void BM_SolveSingleNode(benchmark::State& state) {
  const WeightedGraph g = bench_graph(static_cast<int>(state.range(0)));
  const DesignProblem p = bench_problem(g, {1});
  for (auto _ : state) benchmark::DoNotOptimize(solve_single_node(p, 1).objective);
}
BENCHMARK(BM_SolveSingleNode)->Arg(10)->Arg(20)->Arg(40)->Unit(benchmark::kMillisecond);

void BM_SolveMinMax(benchmark::State& state) {
  const WeightedGraph g = bench_graph(static_cast<int>(state.range(0)));
  const DesignProblem p = bench_problem(g, {1, 2, 3, 4});
  for (auto _ : state) benchmark::DoNotOptimize(solve_min_max(p).objective);
}
BENCHMARK(BM_SolveMinMax)->Arg(10)->Arg(20)->Unit(benchmark::kMillisecond);

void BM_SubstituteCaseSolve(benchmark::State& state) {
  const GridCase c = load_case(RESILNET_SUBSTITUTE_CASE);
  DesignProblem p;
  p.num_nodes = c.num_nodes();
  p.edges = c.edges();
  p.perturbed_nodes = {c.node_of(c.generator_buses().front())};
  p.natural_frequencies = c.injections();
  p.budget = c.total_susceptance();
  for (auto _ : state) benchmark::DoNotOptimize(solve_single_node(p, p.perturbed_nodes[0]).objective);
}
BENCHMARK(BM_SubstituteCaseSolve)->Unit(benchmark::kMillisecond);

void BM_AssembleSdp(benchmark::State& state) {
  const WeightedGraph g = bench_graph(static_cast<int>(state.range(0)));
  const DesignProblem p = bench_problem(g, {1, 2});
  for (auto _ : state) benchmark::DoNotOptimize(assemble_sdp(p).dimension);
}
BENCHMARK(BM_AssembleSdp)->Arg(10)->Arg(40);

void BM_Simulate(benchmark::State& state) {
  const WeightedGraph g = complete_graph(static_cast<int>(state.range(0)));
  const Eigen::VectorXd omega = Eigen::VectorXd::Zero(g.num_nodes());
  SimConfig cfg;
  cfg.horizon = 50.0;
  cfg.realizations = 1;
  cfg.keep_trajectories = false;
  const bool nonlinear = state.range(1) != 0;
  const SteadyState base = steady_state(g, omega);
  for (auto _ : state) {
    const TrajectoryEnsemble t = nonlinear
                                     ? integrate_nonlinear(g, omega, base.theta0, NoiseSpec::box(1), cfg)
                                     : integrate_linearized(g, base, NoiseSpec::box(1), cfg);
    benchmark::DoNotOptimize(t.spread.front());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(cfg.horizon / cfg.h));
}
BENCHMARK(BM_Simulate)->ArgsProduct({{5, 20}, {0, 1}})->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
