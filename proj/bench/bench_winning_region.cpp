// Parallel Jacobi sweep vs. serial attractor on synthetic and benchmark games.

#include "dynshield/envs/environment.hpp"
#include "dynshield/game.hpp"

#include <benchmark/benchmark.h>

#include <random>
#include <string>

using namespace dynshield;

namespace {

// Unsafe states are absorbing; every other move lands near its source.
SafetyGame synthetic_game(std::size_t n, std::uint32_t seed)
{
    const std::size_t nc = 4, ne = 3;
    std::mt19937 rng(seed);
    std::uniform_int_distribution<int> jump(-20, 20);
    std::bernoulli_distribution unsafe(0.02);
    std::vector<SafetyGame::State> states(n);
    std::vector<std::string> names(n);
    std::vector<bool> safe(n);
    std::vector<StateId> succ(n * nc * ne);
    std::vector<OutputSymbol> predicted(n * nc * ne, 0);
    for (std::size_t g = 0; g < n; ++g) {
        states[g] = {static_cast<StateId>(g), 0};
        names[g] = "g" + std::to_string(g);
        safe[g] = g == 0 || !unsafe(rng);
        for (std::size_t k = 0; k < nc * ne; ++k) {
            long t = static_cast<long>(g) + jump(rng);
            t = std::clamp(t, 0L, static_cast<long>(n) - 1);
            succ[g * nc * ne + k] = safe[g] ? static_cast<StateId>(t) : static_cast<StateId>(g);
        }
    }
    return SafetyGame(Alphabet({"a", "b", "c", "d"}), Alphabet({"x", "y", "z"}), std::move(states), std::move(names),
                      std::move(safe), std::move(succ), std::move(predicted));
}

SafetyGame benchmark_game(const std::string& name)
{
    auto env = make_environment(name);
    return compose(ground_truth(*env), env->spec());
}

void BM_SyntheticParallel(benchmark::State& state)
{
    SafetyGame g = synthetic_game(static_cast<std::size_t>(state.range(0)), 7);
    for (auto _ : state)
        benchmark::DoNotOptimize(winning_region(g));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_SyntheticSerial(benchmark::State& state)
{
    SafetyGame g = synthetic_game(static_cast<std::size_t>(state.range(0)), 7);
    for (auto _ : state)
        benchmark::DoNotOptimize(winning_region_serial(g));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_BenchmarkParallel(benchmark::State& state, const std::string& env)
{
    SafetyGame g = benchmark_game(env);
    for (auto _ : state)
        benchmark::DoNotOptimize(winning_region(g));
}

void BM_BenchmarkSerial(benchmark::State& state, const std::string& env)
{
    SafetyGame g = benchmark_game(env);
    for (auto _ : state)
        benchmark::DoNotOptimize(winning_region_serial(g));
}

} // namespace

BENCHMARK(BM_SyntheticParallel)->RangeMultiplier(10)->Range(1000, 100000)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_SyntheticSerial)->RangeMultiplier(10)->Range(1000, 100000)->Unit(benchmark::kMicrosecond);
BENCHMARK_CAPTURE(BM_BenchmarkParallel, watertank, std::string("watertank"))->Unit(benchmark::kMicrosecond);
BENCHMARK_CAPTURE(BM_BenchmarkSerial, watertank, std::string("watertank"))->Unit(benchmark::kMicrosecond);
BENCHMARK_CAPTURE(BM_BenchmarkParallel, taxi, std::string("taxi"))->Unit(benchmark::kMicrosecond);
BENCHMARK_CAPTURE(BM_BenchmarkSerial, taxi, std::string("taxi"))->Unit(benchmark::kMicrosecond);

BENCHMARK_MAIN();
