#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "broker/canonical.hpp"
#include "broker/simplex.hpp"

namespace {

std::vector<double> tableau(std::size_t rows, std::size_t cols) {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<double> t(rows * (cols + 1));
    for (auto &v : t) v = u(rng);
    return t;
}

template <auto Pivot>
void BM_pivot(benchmark::State &state) {
    const auto rows = static_cast<std::size_t>(state.range(0));
    const std::size_t cols = 2 * rows;
    auto t = tableau(rows, cols);
    std::size_t k = 0;
    for (auto _ : state) {
        const std::size_t r = k % rows;
        const std::size_t s = (k * 7) % cols;
        t[r * (cols + 1) + s] = 1.5;  // keep the pivot away from zero
        Pivot(t.data(), rows, cols + 1, cols, r, s);
        benchmark::DoNotOptimize(t.data());
        ++k;
    }
    state.SetItemsProcessed(state.iterations() * static_cast<long long>(rows * cols));
}

void BM_pivot_serial(benchmark::State &s) { BM_pivot<broker::lp::kernels::pivot_serial>(s); }
void BM_pivot_parallel(benchmark::State &s) { BM_pivot<broker::lp::kernels::pivot_parallel>(s); }

void BM_uniform_solve(benchmark::State &state) {
    const auto sc = broker::canonical::uniform_market(static_cast<std::size_t>(state.range(0)));
    broker::SolveOptions o;
    o.simplex.parallel = state.range(1) != 0;
    for (auto _ : state) benchmark::DoNotOptimize(broker::solve(sc, o).revenue);
}

}  // namespace

BENCHMARK(BM_pivot_serial)->Arg(100)->Arg(400)->Arg(1600);
BENCHMARK(BM_pivot_parallel)->Arg(100)->Arg(400)->Arg(1600);
BENCHMARK(BM_uniform_solve)->Args({25, 0})->Args({25, 1})->Args({50, 0})->Args({50, 1})->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
