#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "zl/microlocal.hpp"
#include "zl/parallel.hpp"
#include "zl/spectral.hpp"

#include <atomic>
#include <stdexcept>

using namespace zl;

// the serial loop is the reference; OpenMP runs must agree bit for bit

TEST_CASE("parallel_for visits every index once") {
    for (int w : {1, 2, 4}) {
        std::vector<int> hits(97, 0);
        parallel_for(hits.size(), w, [&](std::size_t i) { hits[i] += 1; });
        for (int h : hits) CHECK(h == 1);
    }
    int calls = 0;
    parallel_for(0, 4, [&](std::size_t) { ++calls; });
    CHECK(calls == 0);
}

TEST_CASE("parallel_for propagates exceptions") {
    for (int w : {1, 3}) {
        std::atomic<int> done{0};
        CHECK_THROWS_AS(parallel_for(20, w,
                                     [&](std::size_t i) {
                                         if (i == 7) throw std::runtime_error("boom");
                                         ++done;
                                     }),
                        std::runtime_error);
        CHECK(done.load() < 20);
    }
}

TEST_CASE("lap_sweep serial equals parallel") {
    Potential V(PotentialSpec{});
    auto g = Grid::make(Domain::half_line, 1000, 500.0);
    auto H = build_hamiltonian(g, V, {3, 0});
    const Vec w = bracket_weight(g, -1.3);
    SweepSpec sw;
    sw.E = logspace(1e-3, 1.0, 7);
    auto a = lap_sweep(H, sw, w, w, "lap", -1.3, {}, 1, 11);
    auto b = lap_sweep(H, sw, w, w, "lap", -1.3, {}, 2, 11);
    REQUIRE(a.rows.size() == b.rows.size());
    for (std::size_t i = 0; i < a.rows.size(); ++i) {
        CHECK(a.rows[i].E == b.rows[i].E);
        CHECK(a.rows[i].arg == b.rows[i].arg);
        CHECK(a.rows[i].norm == b.rows[i].norm);
        CHECK(a.rows[i].residual == b.rows[i].residual);
    }
    CHECK(a.statistic == b.statistic);
    CHECK(a.growth == b.growth);
}

TEST_CASE("weyl quantization serial equals parallel") {
    auto g = Grid::make(Domain::full_line, 128, 32.0);
    SymbolFn a = [](double x, double xi) { return cplx(std::exp(-x * x / 50) * xi * xi + x / (1 + x * x), 0); };
    auto s = weyl_quantize(a, g, {}, 1), p = weyl_quantize(a, g, {}, 3);
    CHECK((s.M - p.M).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("microlocal sweep serial equals parallel") {
    Potential V(PotentialSpec{});
    auto g = Grid::make(Domain::full_line, 128, 64.0);
    WeightFamily wf{1.0, 0.99 * std::sqrt(0.5)};
    CutoffFamily cf{1.0, 0.9 * 0.99 * std::sqrt(0.5)};
    SweepSpec sw;
    sw.E = logspace(1e-2, 1.0, 3);
    sw.arg_fractions = {0.5};
    MicrolocalSweepOptions o;
    o.power.cap = 60;
    auto a = microlocal_norm_sweep(V, g, wf, cf, sw, o, 1, 5);
    auto b = microlocal_norm_sweep(V, g, wf, cf, sw, o, 2, 5);
    REQUIRE(a.rows.size() == b.rows.size());
    for (std::size_t i = 0; i < a.rows.size(); ++i) {
        CHECK(a.rows[i].experiment == b.rows[i].experiment);
        CHECK(a.rows[i].norm == b.rows[i].norm);
    }
    CHECK(a.statistic == b.statistic);
}

TEST_CASE("ball sweep serial equals parallel") {
    Potential V(PotentialSpec{});
    std::vector<double> rho;
    for (int i = 0; i <= 10; ++i) rho.push_back(10.0 + 5.0 * i);
    auto a = dirichlet_ball_sweep(V, rho, 4, 800, 1);
    auto b = dirichlet_ball_sweep(V, rho, 4, 800, 2);
    REQUIRE(a.lambda.size() == b.lambda.size());
    for (std::size_t i = 0; i < a.lambda.size(); ++i) CHECK((a.lambda[i] - b.lambda[i]).cwiseAbs().maxCoeff() == 0.0);
    CHECK(a.N == b.N);
    REQUIRE(a.crossings.size() == b.crossings.size());
    for (std::size_t i = 0; i < a.crossings.size(); ++i) CHECK(a.crossings[i].rho == b.crossings[i].rho);
}
