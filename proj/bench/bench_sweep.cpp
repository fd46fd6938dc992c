// serial reference (workers = 1) against the OpenMP kernels on the same inputs

#include "zl/microlocal.hpp"
#include "zl/spectral.hpp"

#include <benchmark/benchmark.h>

using namespace zl;

namespace {

void BM_lap_sweep(benchmark::State& st) {
    Potential V(PotentialSpec{});
    auto g = Grid::make(Domain::half_line, 4000, 2000.0);
    auto H = build_hamiltonian(g, V, {3, 0});
    const Vec w = bracket_weight(g, -1.3);
    SweepSpec sw;
    sw.E = logspace(1e-4, 1.0, 13);
    for (auto _ : st) {
        auto p = lap_sweep(H, sw, w, w, "lap", 1.3, {}, int(st.range(0)), 1);
        benchmark::DoNotOptimize(p.statistic);
    }
}

void BM_weyl_quantize(benchmark::State& st) {
    auto g = Grid::make(Domain::full_line, 512, 256.0);
    SymbolFn a = [](double x, double xi) { return cplx(xi * xi / (1 + 0.01 * x * x), 0); };
    for (auto _ : st) {
        auto op = weyl_quantize(a, g, {}, int(st.range(0)));
        benchmark::DoNotOptimize(op.M.data());
    }
}

void BM_ball_sweep(benchmark::State& st) {
    Potential V(PotentialSpec{});
    std::vector<double> rho;
    for (int i = 0; i < 20; ++i) rho.push_back(10.0 + 10.0 * i);
    for (auto _ : st) {
        auto b = dirichlet_ball_sweep(V, rho, 8, 2000, int(st.range(0)));
        benchmark::DoNotOptimize(b.N.data());
    }
}

void BM_hoelder_fit(benchmark::State& st) {
    Potential V(PotentialSpec{});
    auto g = Grid::make(Domain::half_line, 4000, 2000.0);
    auto H = build_hamiltonian(g, V, {3, 0});
    const Vec w = bracket_weight(g, -1.3);
    std::vector<HoelderPair> pairs;
    const cplx ray = std::polar(1.0, pi / 4);
    for (double d = 4e-4; pairs.size() < 9; d *= 1.7782794100389228) pairs.push_back({2.0 * d * ray, d * ray});
    for (auto _ : st) {
        auto f = hoelder_fit(H, pairs, w, {}, int(st.range(0)), 1);
        benchmark::DoNotOptimize(f.gamma);
    }
}

} // namespace

BENCHMARK(BM_lap_sweep)->Arg(1)->Arg(2)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_weyl_quantize)->Arg(1)->Arg(2)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ball_sweep)->Arg(1)->Arg(2)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_hoelder_fit)->Arg(1)->Arg(2)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
