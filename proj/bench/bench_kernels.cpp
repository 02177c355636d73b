// Serial versus OpenMP timings for the O(n^2) kernels.

#include "ccf/kernels.hpp"

#include <benchmark/benchmark.h>

#include <cmath>
#include <numbers>
#include <vector>

namespace {

std::vector<double> wave(std::size_t n, double phase) {
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double x = 2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(n);
        v[i] = 1.0 + std::cos(x + phase) + 0.3 * std::cos(3.0 * x);
    }
    return v;
}

template <auto Kernel>
void quadrature(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const auto a = wave(n, 0.0), b = wave(n, 0.1), w = wave(n, 0.7);
    std::vector<double> out(n);
    for (auto _ : state) {
        Kernel(a, b, w, -static_cast<std::ptrdiff_t>(n / 2), 2, out);
        benchmark::DoNotOptimize(out.data());
    }
    state.SetComplexityN(state.range(0));
}

template <auto Kernel>
void holder(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const auto v = wave(n, 0.0);
    const double h = 2.0 * std::numbers::pi / static_cast<double>(n);
    for (auto _ : state) benchmark::DoNotOptimize(Kernel(v, h, 0.2));
    state.SetComplexityN(state.range(0));
}

using namespace ccf::kernels;

}  // namespace

BENCHMARK(quadrature<difference_quadrature_serial>)->RangeMultiplier(2)->Range(128, 2048)->Complexity();
BENCHMARK(quadrature<difference_quadrature_parallel>)->RangeMultiplier(2)->Range(128, 2048)->Complexity();
BENCHMARK(holder<holder_max_serial>)->RangeMultiplier(2)->Range(128, 2048)->Complexity();
BENCHMARK(holder<holder_max_parallel>)->RangeMultiplier(2)->Range(128, 2048)->Complexity();

BENCHMARK_MAIN();
