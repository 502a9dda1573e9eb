// Serial reference vs OpenMP forms of the hot kernels.

#include "lambda_memory/kernels.hpp"

#include <benchmark/benchmark.h>

#include <cmath>
#include <vector>

using namespace lmem;
using kernels::Exec;

namespace {

std::vector<cplx> ramp(std::size_t n, double scale) {
    std::vector<cplx> v(n);
    for (std::size_t i = 0; i < n; ++i)
        v[i] = cplx(std::sin(scale * i), std::cos(0.5 * scale * i));
    return v;
}

void BM_mb_derivatives(benchmark::State& state, Exec exec) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const kernels::MbCoefficients c{std::sqrt(12.0), cplx(1.0, 0.0), 1e-6};
    const auto e = ramp(n, 0.01), p = ramp(n, 0.02), s = ramp(n, 0.03);
    std::vector<cplx> dp(n), ds(n);
    for (auto _ : state) {
        kernels::mb_derivatives(c, cplx(1.5, 0.0), e, p, s, dp, ds, exec);
        benchmark::DoNotOptimize(dp.data());
        benchmark::DoNotOptimize(ds.data());
    }
    state.SetItemsProcessed(state.iterations() * static_cast<long>(n));
}

void BM_rk4_combine(benchmark::State& state, Exec exec) {
    const auto n = static_cast<std::size_t>(state.range(0));
    auto y = ramp(n, 0.01);
    const auto k1 = ramp(n, 0.02), k2 = ramp(n, 0.03), k3 = ramp(n, 0.04), k4 = ramp(n, 0.05);
    for (auto _ : state) {
        kernels::rk4_combine(y, 1e-9, k1, k2, k3, k4, exec);
        benchmark::DoNotOptimize(y.data());
    }
    state.SetItemsProcessed(state.iterations() * static_cast<long>(n));
}

void BM_control_free_batch(benchmark::State& state, Exec exec) {
    const auto columns = static_cast<std::size_t>(state.range(0));
    const SpaceGrid grid(101);
    const kernels::ControlFreeSystem sys(12.0, grid);
    std::vector<std::vector<cplx>> s0(columns, std::vector<cplx>(grid.size()));
    for (std::size_t k = 0; k < columns; ++k)
        s0[k][k % grid.size()] = 1.0;
    for (auto _ : state) {
        auto runs = kernels::propagate_control_free_batch(sys, s0, {}, 0.1, 300, exec);
        benchmark::DoNotOptimize(runs.data());
    }
}

} // namespace

BENCHMARK_CAPTURE(BM_mb_derivatives, serial, Exec::serial)->Arg(200)->Arg(4096)->Arg(65536);
BENCHMARK_CAPTURE(BM_mb_derivatives, parallel, Exec::parallel)->Arg(200)->Arg(4096)->Arg(65536);
BENCHMARK_CAPTURE(BM_rk4_combine, serial, Exec::serial)->Arg(200)->Arg(4096)->Arg(65536);
BENCHMARK_CAPTURE(BM_rk4_combine, parallel, Exec::parallel)->Arg(200)->Arg(4096)->Arg(65536);
BENCHMARK_CAPTURE(BM_control_free_batch, serial, Exec::serial)->Arg(101);
BENCHMARK_CAPTURE(BM_control_free_batch, parallel, Exec::parallel)->Arg(101);

BENCHMARK_MAIN();
