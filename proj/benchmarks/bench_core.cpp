// SPDX-License-Identifier: Apache-2.0
#include <benchmark/benchmark.h>

#include <Eigen/Core>

#include "pinchopt/expected_snr.hpp"
#include "pinchopt/harness.hpp"
#include "pinchopt/multi_pa.hpp"
#include "pinchopt/scenario.hpp"
#include "pinchopt/single_pa.hpp"

namespace {

using namespace pinchopt;

Scenario fixed_scenario(int n, int m) {
  ScenarioConfig cfg;
  cfg.N = n;
  cfg.M = m;
  cfg.seed = 7;
  return make_scenario(cfg);
}

Eigen::VectorXd spread_positions(const Scenario& sc) {
  const int n = sc.num_antennas();
  Eigen::VectorXd x(n);
  for (int i = 0; i < n; ++i)
    x[i] = sc.layout.region_side_m * (i + 1.0) / (n + 1.0);
  return x;
}

void BM_BuildExpectedMatrix(benchmark::State& state) {
  const Scenario sc = fixed_scenario(static_cast<int>(state.range(0)), 10);
  const Eigen::VectorXd x = spread_positions(sc);
  for (auto _ : state) {
    auto A = build_expected_matrix(x, sc.users[0], sc.constants, sc.layout);
    benchmark::DoNotOptimize(A.u);
  }
}
BENCHMARK(BM_BuildExpectedMatrix)->Arg(2)->Arg(4)->Arg(8);

void BM_LargestEigenpair(benchmark::State& state) {
  const Scenario sc = fixed_scenario(static_cast<int>(state.range(0)), 10);
  const Eigen::VectorXd x = spread_positions(sc);
  const auto A = build_expected_matrix(x, sc.users[0], sc.constants, sc.layout);
  for (auto _ : state) {
    auto e = largest_eigenpair(A);
    benchmark::DoNotOptimize(e.lambda_max);
  }
}
BENCHMARK(BM_LargestEigenpair)->Arg(2)->Arg(4)->Arg(8);

void BM_ObjectiveMulti(benchmark::State& state) {
  const Scenario sc = fixed_scenario(4, static_cast<int>(state.range(0)));
  const Eigen::VectorXd x = spread_positions(sc);
  for (auto _ : state) {
    benchmark::DoNotOptimize(objective_multi(x, sc));
  }
}
BENCHMARK(BM_ObjectiveMulti)->Arg(5)->Arg(10);

void BM_ObjectiveAndGradient(benchmark::State& state) {
  const Scenario sc = fixed_scenario(4, static_cast<int>(state.range(0)));
  const Eigen::VectorXd x = spread_positions(sc);
  for (auto _ : state) {
    auto eval = objective_and_gradient(x, sc);
    benchmark::DoNotOptimize(eval.value);
  }
}
BENCHMARK(BM_ObjectiveAndGradient)->Arg(5)->Arg(10);

void BM_MonteCarloSnr(benchmark::State& state) {
  const Scenario sc = fixed_scenario(4, 10);
  const Eigen::VectorXd x = spread_positions(sc);
  const Eigen::VectorXcd w =
      optimal_beamformer(x, sc.users[0], sc.constants, sc.layout);
  const auto samples = static_cast<std::uint64_t>(state.range(0));
  for (auto _ : state) {
    auto est = monte_carlo_expected_snr(x, w, sc, 0, samples, 99);
    benchmark::DoNotOptimize(est.mean);
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_MonteCarloSnr)->Arg(1000)->Arg(100000);

void BM_PgdSolve(benchmark::State& state) {
  const Scenario sc = fixed_scenario(1, 10);
  for (auto _ : state) {
    auto sol = pgd_solve(sc);
    benchmark::DoNotOptimize(sol.total_power_w);
  }
}
BENCHMARK(BM_PgdSolve);

void BM_LbfgsSolve(benchmark::State& state) {
  const Scenario sc = fixed_scenario(static_cast<int>(state.range(0)), 10);
  for (auto _ : state) {
    auto sol = lbfgs_solve(sc);
    benchmark::DoNotOptimize(sol.total_power_w);
  }
}
BENCHMARK(BM_LbfgsSolve)->Arg(2)->Arg(4)->Arg(8)->Unit(benchmark::kMillisecond);

void BM_GridSearchSingle(benchmark::State& state) {
  const Scenario sc = fixed_scenario(1, 10);
  for (auto _ : state) {
    auto res = grid_search(sc, static_cast<int>(state.range(0)));
    benchmark::DoNotOptimize(res.best_power_w);
  }
}
BENCHMARK(BM_GridSearchSingle)->Arg(1001)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
