#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "cvxmdp/backup.hpp"
#include "cvxmdp/common.hpp"
#include "cvxmdp/mdp.hpp"

namespace {

using namespace cvxmdp;

struct BenchProblem {
    TabularMdp mdp;
    Vec reward;
    Vec u;
    Vec beta;
};

BenchProblem make_problem(int states, int actions) {
    BenchProblem p{make_random_mdp(states, actions, std::min(states, 8), 1234), Vec(), Vec(), Vec()};
    auto rng = make_rng(99, 0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    p.reward.resize(p.mdp.dim());
    for (double& r : p.reward) r = unit(rng);
    p.u.resize(states);
    for (double& v : p.u) v = unit(rng);
    p.beta.assign(p.mdp.dim(), 0.1);
    return p;
}

void bench_bellman(benchmark::State& state, Exec exec) {
    const int states = int(state.range(0));
    const int actions = int(state.range(1));
    BenchProblem p = make_problem(states, actions);
    Vec out(states);
    std::vector<int> greedy(states);
    for (auto _ : state) {
        bellman_backup(p.mdp, p.reward, p.u, 0.0, p.mdp.gamma, out, &greedy, exec);
        benchmark::DoNotOptimize(out.data());
        benchmark::ClobberMemory();
    }
    state.SetItemsProcessed(state.iterations() * int64_t(states) * actions);
}

void bench_optimistic(benchmark::State& state, Exec exec) {
    const int states = int(state.range(0));
    const int actions = int(state.range(1));
    BenchProblem p = make_problem(states, actions);
    Vec out(states);
    std::vector<int> greedy(states);
    for (auto _ : state) {
        optimistic_backup(states, actions, p.mdp.transition, p.beta, p.reward, p.u, 0.0,
                          p.mdp.gamma, out, &greedy, exec);
        benchmark::DoNotOptimize(out.data());
        benchmark::ClobberMemory();
    }
    state.SetItemsProcessed(state.iterations() * int64_t(states) * actions);
}

void bench_value_iteration(benchmark::State& state, Exec exec) {
    const int states = int(state.range(0));
    const int actions = int(state.range(1));
    BenchProblem p = make_problem(states, actions);
    for (auto _ : state) {
        ViResult r = value_iteration(p.mdp, p.reward, 1e-8, 200000, exec);
        benchmark::DoNotOptimize(r.value.data());
    }
}

void bellman_serial(benchmark::State& s) { bench_bellman(s, Exec::serial); }
void bellman_parallel(benchmark::State& s) { bench_bellman(s, Exec::parallel); }
void optimistic_serial(benchmark::State& s) { bench_optimistic(s, Exec::serial); }
void optimistic_parallel(benchmark::State& s) { bench_optimistic(s, Exec::parallel); }
void value_iteration_serial(benchmark::State& s) { bench_value_iteration(s, Exec::serial); }
void value_iteration_parallel(benchmark::State& s) { bench_value_iteration(s, Exec::parallel); }

// Sizes chosen so the transition table spans L1-resident to several MB.
void sweep_sizes(benchmark::internal::Benchmark* b) {
    b->Args({64, 4})->Args({256, 4})->Args({1024, 4});
}

BENCHMARK(bellman_serial)->Apply(sweep_sizes);
BENCHMARK(bellman_parallel)->Apply(sweep_sizes);
BENCHMARK(optimistic_serial)->Apply(sweep_sizes);
BENCHMARK(optimistic_parallel)->Apply(sweep_sizes);
BENCHMARK(value_iteration_serial)->Args({256, 4});
BENCHMARK(value_iteration_parallel)->Args({256, 4});

}  // namespace

BENCHMARK_MAIN();
