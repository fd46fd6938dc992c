#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "zl/spectral.hpp"

using namespace zl;

namespace {

Potential coulombic() { return Potential(PotentialSpec{}); }

std::vector<double> uniform(double a, double b, int n) {
    std::vector<double> r(n);
    for (int i = 0; i < n; ++i) r[i] = a + (b - a) * i / (n - 1);
    return r;
}

double max_interior_deriv(const FunctionalTrace& t) {
    double m = 0;
    for (std::size_t i = 1; i + 1 < t.r.size(); ++i) m = std::max(m, std::abs(t.deriv[i]));
    return m;
}

} // namespace

TEST_CASE("regular solution against the free sine") {
    PotentialSpec z;
    z.c1 = 0;
    auto V = Potential::unchecked(z);
    auto f = regular_solution(V, 4.0, uniform(0.1, 10.0, 50));
    // w = A sin(2r); fix A from the first node
    const double A = f.w[0] / std::sin(0.2);
    for (std::size_t i = 0; i < f.r.size(); ++i) {
        CHECK(std::abs(f.w[i] - A * std::sin(2 * f.r[i])) <= 1e-9 * std::abs(A));
        CHECK(std::abs(f.dw[i] - 2 * A * std::cos(2 * f.r[i])) <= 1e-9 * std::abs(A));
    }
}

TEST_CASE("zero function gives zero functionals") {
    RadialFunction f;
    f.r = uniform(1.0, 50.0, 100);
    f.w.assign(100, 0.0);
    f.dw.assign(100, 0.0);
    auto V = coulombic();
    auto F = F_functional(f, V, 0.9, 2.0);
    auto G = G_functional(f, V, 8, 0.5, 1.0, 2.0);
    for (std::size_t i = 0; i < 100; ++i) {
        CHECK(F.value[i] == 0.0);
        CHECK(G.value[i] == 0.0);
        CHECK(F.deriv[i] == 0.0);
        CHECK(G.deriv[i] == 0.0);
    }
}

TEST_CASE("analytic derivatives match differences at second order") {
    PotentialSpec sp;
    sp.v2 = Bump{V2Kind::bump, 0.3, 4.0, 2.0, 1.0};
    for (int dim : {1, 3}) {
        sp.dim = dim;
        sp.ell = dim == 3 ? 1 : 0;
        auto V = Potential(sp);
        double err_prev = 0;
        for (int n : {400, 800}) {
            auto f = regular_solution(V, 0.0, uniform(1.0, 40.0, n));
            auto F = F_functional(f, V, 0.9, 2.0);
            auto G = G_functional(f, V, 3, 0.5, 1.0, 2.0);
            const double err = std::max(F.tolerance / max_interior_deriv(F), G.tolerance / max_interior_deriv(G));
            CHECK(err < 1e-2);
            if (err_prev > 0) CHECK(err_prev / err == doctest::Approx(4.0).epsilon(0.15));
            err_prev = err;
        }
    }
}

TEST_CASE("F and G monotone on the oscillatory zero-energy solution") {
    auto V = coulombic();
    auto f = regular_solution(V, 0.0, uniform(1.0, 2000.0, 40000));
    auto F = F_functional(f, V, 0.9, 5.0);
    CHECK(F.min_margin >= -F.tolerance);
    CHECK(F.onset <= 5.0);
    auto G = G_functional(f, V, 8, 0.5, 1.0, 5.0);
    CHECK(G.min_margin >= -G.tolerance);
    CHECK(G.onset < 2000.0);
}

TEST_CASE("integrability ratio is at most one on test functions") {
    auto g = Grid::make(Domain::half_line, 2000, 200.0);
    for (double c : {5.0, 20.0, 60.0}) {
        Vec phi = sample(g, [&](double x) { return std::exp(-(x - c) * (x - c) / 20.0) * std::sin(x); });
        const double q = integrability_ratio(g, phi, 10.0, 0.5, 1.0);
        CHECK(q > 0.0);
        CHECK(q <= 1.0);
    }
}

TEST_CASE("ball sweep: monotone counts and crossings at the ODE nodes") {
    auto V = coulombic();
    const auto rho = uniform(10.0, 200.0, 39);
    auto b = dirichlet_ball_sweep(V, rho, 8, 4000, 1);
    CHECK(b.N_nondecreasing);
    CHECK(b.branches_nonincreasing);
    CHECK_FALSE(b.ambiguity);
    CHECK(b.crossings.size() >= 5);
    for (std::size_t i = 1; i < b.N.size(); ++i) CHECK(b.N[i] >= b.N[i - 1]);
    for (const auto& c : b.crossings) {
        CHECK(std::abs(c.lambda) <= 1e-8);
        REQUIRE(c.ode_node > 0);
        // discretization error of the n-node box, O(dx^2) relative
        CHECK(std::abs(c.rho - c.ode_node) <= 1e-3 * c.ode_node);
    }
    auto nodes = zero_energy_nodes(V, 200.0);
    CHECK(nodes.size() >= 5);
    CHECK(zero_persistence(b, 1e-12) <= 1);
}

TEST_CASE("ball sweep rejects bad input") {
    auto V = coulombic();
    CHECK_THROWS(dirichlet_ball_sweep(V, {10.0, 5.0}, 3, 100, 1));
    CHECK_THROWS(dirichlet_ball_sweep(V, {10.0, 20.0}, 0, 100, 1));
}

TEST_CASE("free WKB is exact") {
    PotentialSpec z;
    z.c1 = 0;
    auto w = wkb_reference(Potential::unchecked(z), 1.0, 1.0, 1e3, 200);
    CHECK_FALSE(w.turning_point);
    CHECK(w.max_envelope_error <= 1e-9);
    CHECK(w.max_phase_error <= 1e-8);
}

TEST_CASE("zero-energy WKB exponents") {
    auto w = wkb_reference(coulombic(), 0.0, 1.0, 1e4, 2000);
    CHECK_FALSE(w.turning_point);
    CHECK(w.envelope_exponent == doctest::Approx(0.25).epsilon(0.05 / 0.25));
    CHECK(std::abs(w.phase_exponent - 0.5) <= 0.05);
    CHECK(w.max_envelope_error < 0.05);

    PotentialSpec rep;
    rep.c1 = -1;
    auto t = wkb_reference(Potential::unchecked(rep), 0.1, 1.0, 100.0, 50);
    CHECK(t.turning_point);
}

TEST_CASE("weight optimality probe") {
    auto g = Grid::make(Domain::half_line, 2000, 2000.0);
    auto H = build_hamiltonian(g, coulombic(), {1, 0});
    const auto Es = logspace(1e-3, 1e-1, 5);
    CVec zero = CVec::Zero(g.n);
    auto z = weight_optimality_probe(H, g, zero, 1, 0.1, 1.0, Es, pi / 2, 1);
    for (std::size_t i = 0; i < Es.size(); ++i) {
        CHECK(z.sharp[i] == 0.0);
        CHECK(z.loose[i] == 0.0);
    }
    Vec p = sample(g, [](double x) { return std::exp(-(x - 3) * (x - 3)); });
    CVec phi = (p / p.norm()).cast<cplx>();
    auto r = weight_optimality_probe(H, g, phi, 1, 0.1, 1.0, Es, pi / 2, 1);
    for (std::size_t i = 0; i < Es.size(); ++i) CHECK(r.loose[i] < r.sharp[i]);
    CHECK(r.growth_sharp > 1.0);
}
