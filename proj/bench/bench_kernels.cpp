// Serial reference versus OpenMP kernels, and the serial versus parallel trial runner.

#include <random>
#include <vector>

#include <benchmark/benchmark.h>

#include "morilab/experiment.hpp"
#include "morilab/kernels.hpp"

namespace {

using namespace morilab;

struct Stencil {
    std::vector<double> coupling, x, y;

    explicit Stencil(std::size_t d) : coupling(d + 1, 0.0), x(d), y(d) {
        std::mt19937_64 gen(7);
        std::uniform_real_distribution<double> u(0.5, 1.5);
        for (std::size_t n = 1; n < d; ++n) coupling[n] = u(gen);
        for (auto& v : x) v = u(gen) - 1.0;
    }
};

template <auto Kernel>
void bm_generator(benchmark::State& state) {
    const auto d = static_cast<std::size_t>(state.range(0));
    Stencil s(d);
    for (auto _ : state) {
        Kernel(s.coupling, s.x, s.y, d - 1, d - 1, 0.5);
        benchmark::DoNotOptimize(s.y.data());
    }
    state.SetItemsProcessed(state.iterations() * static_cast<long>(d));
}

template <auto Kernel>
void bm_chebyshev(benchmark::State& state) {
    const auto d = static_cast<std::size_t>(state.range(0));
    Stencil s(d);
    for (auto _ : state) {
        Kernel(s.coupling, s.x, s.y, d - 1, d - 1, 1e-3);
        benchmark::DoNotOptimize(s.y.data());
    }
    state.SetItemsProcessed(state.iterations() * static_cast<long>(d));
}

BENCHMARK(bm_generator<kernels::apply_generator_serial>)->Name("apply_generator/serial")->RangeMultiplier(8)->Range(1 << 10, 1 << 22);
BENCHMARK(bm_generator<kernels::apply_generator_omp>)->Name("apply_generator/omp")->RangeMultiplier(8)->Range(1 << 10, 1 << 22);
BENCHMARK(bm_chebyshev<kernels::chebyshev_update_serial>)->Name("chebyshev_update/serial")->RangeMultiplier(8)->Range(1 << 10, 1 << 22);
BENCHMARK(bm_chebyshev<kernels::chebyshev_update_omp>)->Name("chebyshev_update/omp")->RangeMultiplier(8)->Range(1 << 10, 1 << 22);

ScenarioSetup small_setup() {
    auto c = default_config(Scenario::Decay);
    c.d = 600;
    c.n_f = 200;
    c.trials = 8;
    c.t_max = 20.0;
    return prepare(c);
}

void bm_trials_serial(benchmark::State& state) {
    const auto setup = small_setup();
    for (auto _ : state) benchmark::DoNotOptimize(run_trials_serial(setup));
}

void bm_trials_parallel(benchmark::State& state) {
    const auto setup = small_setup();
    for (auto _ : state) benchmark::DoNotOptimize(run_trials_parallel(setup));
}

BENCHMARK(bm_trials_serial)->Name("trials/serial")->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(bm_trials_parallel)->Name("trials/parallel")->Unit(benchmark::kMillisecond)->UseRealTime();

}  // namespace

BENCHMARK_MAIN();
