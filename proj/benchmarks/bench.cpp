#include <benchmark/benchmark.h>

#include "tmfrac/analytics.hpp"
#include "tmfrac/oracle.hpp"
#include "tmfrac/simulator.hpp"
#include "tmfrac/tree.hpp"
#include "tmfrac/zoo.hpp"

using namespace tmfrac;

static void bm_d_star(benchmark::State& state) {
    const auto m = zoo::generalized_bernoulli(2, {{3, 0.3, 0.05}}, {{2, 0.9, 0.0}, {3, 0.6, 0.0}});
    for (auto _ : state) benchmark::DoNotOptimize(d_star(m).value);
}
BENCHMARK(bm_d_star);

static void bm_emptiness(benchmark::State& state) {
    const auto m = zoo::interval_split(0.8);
    for (auto _ : state) benchmark::DoNotOptimize(emptiness_probability(m, 20).probability);
}
BENCHMARK(bm_emptiness);

static void bm_sample_tree(benchmark::State& state) {
    const auto m = zoo::mandelbrot(2, 2, 0.9);
    std::uint64_t seed = 0;
    for (auto _ : state) benchmark::DoNotOptimize(sample_tree(m, state.range(0), ++seed).size());
}
BENCHMARK(bm_sample_tree)->Arg(6)->Arg(8)->Arg(10);

static void bm_flow(benchmark::State& state) {
    const auto m = zoo::mandelbrot(2, 2, 0.9);
    const auto t = sample_tree(m, 9, 1);
    for (auto _ : state) benchmark::DoNotOptimize(flow(t, 1.0, t.root()).value);
}
BENCHMARK(bm_flow);

static void bm_box_count(benchmark::State& state) {
    const auto m = zoo::mandelbrot(2, 2, 0.9);
    for (auto _ : state) benchmark::DoNotOptimize(box_count(m, 10, 50, 1).slope);
}
BENCHMARK(bm_box_count);

static void bm_exact_min_cut(benchmark::State& state) {
    const auto m = zoo::binary_case2(0.8);
    for (auto _ : state) benchmark::DoNotOptimize(exact_min_cut(m, 0.5, 3).outcomes.size());
}
BENCHMARK(bm_exact_min_cut);

BENCHMARK_MAIN();
