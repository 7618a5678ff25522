#include <benchmark/benchmark.h>

#include "thermoctl/genericity_scanner.hpp"
#include "thermoctl/simulator.hpp"
#include "thermoctl/toc_solver.hpp"

#include <vector>

namespace {

using namespace thermoctl;

ReducedSystem window_system(int m, int k) {
    static const EigenBasis basis = EigenBasis::build_interval(1.0, 24);
    static const ControlRegion window =
        ControlRegion::subintervals(basis.domain(), {{0.21, 0.54}});
    std::vector<double> y0(static_cast<std::size_t>(m));
    for (int i = 0; i < m; ++i) y0[(std::size_t)i] = 1.0 / (1.0 + i);
    return build_reduced(basis, window, y0, m, k,
                         ControlBounds{std::vector<double>((std::size_t)k, 1.0)});
}

void CouplingMatrix(benchmark::State& state) {
    const EigenBasis basis = EigenBasis::build_interval(1.0, 24);
    const ControlRegion window =
        ControlRegion::subintervals(basis.domain(), {{0.21, 0.54}, {0.7, 0.82}});
    const int n = static_cast<int>(state.range(0));
    for (auto _ : state) {
        benchmark::DoNotOptimize(coupling_matrix(basis, window, n, n));
    }
}
BENCHMARK(CouplingMatrix)->Arg(4)->Arg(8)->Arg(16);

void FeasibilityMargin(benchmark::State& state) {
    const ReducedSystem sys = window_system(static_cast<int>(state.range(0)), 2);
    for (auto _ : state) {
        benchmark::DoNotOptimize(feasibility_margin(sys, 0.3));
    }
}
BENCHMARK(FeasibilityMargin)->Arg(2)->Arg(3)->Arg(4)->Unit(benchmark::kMillisecond);

void MinTimeBisect(benchmark::State& state) {
    const ReducedSystem sys = window_system(static_cast<int>(state.range(0)), 2);
    for (auto _ : state) {
        benchmark::DoNotOptimize(min_time_bisect(sys));
    }
}
BENCHMARK(MinTimeBisect)->Arg(2)->Arg(3)->Unit(benchmark::kMillisecond);

void GenericityScan(benchmark::State& state) {
    const EigenBasis basis = EigenBasis::build_interval(1.0, 8);
    const ControlRegion half = ControlRegion::subintervals(basis.domain(), {{0.0, 0.5}});
    const ScanGrid grid = ScanGrid::uniform(basis.domain(), 0.55, 0.95,
                                            static_cast<int>(state.range(0)), 0.005, 0.05, 20,
                                            1e-6, 3, 3);
    for (auto _ : state) {
        benchmark::DoNotOptimize(scan(basis, half, grid));
    }
}
BENCHMARK(GenericityScan)->Arg(50)->Arg(200)->Unit(benchmark::kMillisecond);

void SimulateTruncated(benchmark::State& state) {
    const EigenBasis basis = EigenBasis::build_interval(1.0, static_cast<int>(state.range(0)));
    const ControlRegion window = ControlRegion::subintervals(basis.domain(), {{0.21, 0.54}});
    ControlTrajectory traj;
    traj.horizon = 0.3;
    traj.channels = {ChannelSchedule{{0.0, 0.1, 0.22, 0.3}, {1.0, -1.0, 1.0}},
                     ChannelSchedule{{0.0, 0.17, 0.3}, {-1.0, 1.0}}};
    const std::vector<double> y0 = {1.0, 0.8, 0.5};
    for (auto _ : state) {
        benchmark::DoNotOptimize(
            simulate_truncated(basis, window, traj,
                               std::span<const double>(y0.data(), y0.size()), 257));
    }
}
BENCHMARK(SimulateTruncated)->Arg(20)->Arg(60)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
