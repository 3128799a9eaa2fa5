#include <benchmark/benchmark.h>

#include "rlfalsify/experiments.hpp"
#include "rlfalsify/lp.hpp"
#include "rlfalsify/qlearning.hpp"
#include "rlfalsify/random.hpp"
#include "rlfalsify/synthesis.hpp"
#include "rlfalsify/td.hpp"

namespace {

using namespace rlfalsify;

Mdp dense_mdp(int n, int m, double alpha, std::uint64_t seed) {
  Rng rng(seed);
  Mdp mdp;
  mdp.num_states = n;
  mdp.num_controls = m;
  mdp.alpha = alpha;
  mdp.actions.assign(n, {});
  for (auto& us : mdp.actions) {
    for (int u = 0; u < m; ++u) us.push_back(u);
  }
  mdp.transitions.assign(m, Matrix::Zero(n, n));
  for (auto& p : mdp.transitions) {
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) p(i, j) = uniform(rng, 0.05, 1.0);
      p.row(i) /= p.row(i).sum();
    }
  }
  mdp.costs = zero_table(mdp);
  for (int i = 0; i < n; ++i) {
    for (int u = 0; u < m; ++u) mdp.costs(i, u) = uniform(rng, 0, 10);
  }
  return mdp;
}

void BM_QValueIteration(benchmark::State& state) {
  const Mdp mdp = dense_mdp(static_cast<int>(state.range(0)), 4, 0.9, 1);
  for (auto _ : state) benchmark::DoNotOptimize(q_value_iteration(mdp, mdp.costs));
}
BENCHMARK(BM_QValueIteration)->Arg(6)->Arg(20)->Arg(50);

void BM_TdFixedPoint(benchmark::State& state) {
  const Mdp mdp = random_walk_mdp();
  const Policy mu = first_control_policy(mdp);
  const FeatureBasis basis = quadratic_basis(20);
  for (auto _ : state) benchmark::DoNotOptimize(td_fixed_point(mdp, mu, basis, 1.0, mdp.costs));
}
BENCHMARK(BM_TdFixedPoint);

void BM_TdRun(benchmark::State& state) {
  const Mdp mdp = random_walk_mdp();
  const Policy mu = first_control_policy(mdp);
  const FeatureBasis basis = quadratic_basis(20);
  TdConfig cfg;
  cfg.lambda = 0.5;
  cfg.horizon = state.range(0);
  for (auto _ : state) benchmark::DoNotOptimize(run_td(mdp, mu, basis, cfg, truthful_costs(mdp)));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_TdRun)->Arg(100000);

void BM_QLearning(benchmark::State& state) {
  const Mdp mdp = dense_mdp(4, 2, 0.5, 2);
  QLearnConfig cfg;
  cfg.horizon = state.range(0);
  for (auto _ : state) benchmark::DoNotOptimize(run_q_learning(mdp, cfg, truthful_costs(mdp)));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_QLearning)->Arg(100000);

void BM_GordanFeasibility(benchmark::State& state) {
  Rng rng(3);
  const auto rows = static_cast<int>(state.range(0));
  Matrix h(rows, 4);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < 4; ++c) h(r, c) = uniform(rng, -1, 1);
  }
  for (auto _ : state) benchmark::DoNotOptimize(gordan_feasibility(h));
}
BENCHMARK(BM_GordanFeasibility)->Arg(8)->Arg(32);

void BM_FullAttack(benchmark::State& state) {
  const Mdp mdp = dense_mdp(10, 3, 0.9, 4);
  Policy target;
  target.control.assign(10, 1);
  for (auto _ : state) benchmark::DoNotOptimize(synthesize_full_attack(mdp, target, 0.1));
}
BENCHMARK(BM_FullAttack);

}  // namespace

BENCHMARK_MAIN();
