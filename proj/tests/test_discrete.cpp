#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "zl/discrete.hpp"
#include "zl/linalg.hpp"

#include <Eigen/Eigenvalues>

using namespace zl;

namespace {

CVec gaussian(const Grid& g, double c, double w, double k = 0.0) {
    CVec v(g.n);
    for (int j = 0; j < g.n; ++j) {
        const double t = (g.x[j] - c) / w;
        v[j] = std::exp(-t * t) * std::polar(1.0, k * g.x[j]);
    }
    return v;
}

} // namespace

TEST_CASE("radial reduction") {
    CHECK(RadialReduction{3, 0}.q_eff() == 0.0);
    CHECK(RadialReduction{1, 0}.q_eff() == 0.0);
    CHECK(RadialReduction{2, 0}.q_eff() == doctest::Approx(-0.25));
    CHECK(RadialReduction{3, 1}.q_eff() == doctest::Approx(2.0));
}

TEST_CASE("grid") {
    auto g = Grid::make(Domain::half_line, 99, 10.0);
    CHECK(g.dx * (g.n + 1) == doctest::Approx(10.0));
    CHECK(g.x.front() == doctest::Approx(g.dx));
    auto f = Grid::make(Domain::full_line, 101, 5.0);
    CHECK(f.x[50] == doctest::Approx(0.0).scale(1e-14));
    CHECK_THROWS(Grid::make(Domain::half_line, 8, 1.0));
}

TEST_CASE("free discrete spectrum matches closed form") {
    PotentialSpec z;
    z.c1 = 0;
    auto V0 = Potential::unchecked(z);
    for (int n : {16, 100, 512}) {
        auto g = Grid::make(Domain::full_line, n, 7.0);
        auto H = build_hamiltonian(g, V0, {1, 0});
        Eigen::SelfAdjointEigenSolver<Mat> es(H.dense().real());
        const double L = 2 * g.rmax;
        for (int k = 1; k <= n; ++k) {
            const double lam = 2.0 / (g.dx * g.dx) * (1 - std::cos(k * pi * g.dx / L));
            CHECK(std::abs(es.eigenvalues()[k - 1] - lam) <= 1e-13 * 4.0 / (g.dx * g.dx));
        }
    }
}

TEST_CASE("hamiltonian basics") {
    Potential V(PotentialSpec{});
    auto g = Grid::make(Domain::half_line, 200, 50.0);
    auto H = build_hamiltonian(g, V, {3, 0});
    CHECK(H.hermitian_residual() == 0.0);
    CHECK(H.diag[0].real() == doctest::Approx(2 / (g.dx * g.dx) + V.V(g.x[0])));
    auto H2 = build_hamiltonian(g, V, {2, 0});
    CHECK(H2.diag[3].real() - H.diag[3].real() == doctest::Approx(-0.25 / (g.x[3] * g.x[3])));
    CHECK_THROWS(build_hamiltonian(Grid::make(Domain::full_line, 64, 5.0), V, {3, 1}));

    // monotone in V
    PotentialSpec s2;
    s2.c1 = 0.5; // V' = -0.5<x>^-1 >= V
    auto Hp = build_hamiltonian(g, Potential(s2), {3, 0});
    for (int t = 0; t < 20; ++t) {
        CVec v = random_vector(g.n, 100 + t);
        CHECK(v.dot(H.apply(v)).real() <= v.dot(Hp.apply(v)).real());
    }
}

TEST_CASE("dilation generator") {
    auto g = Grid::make(Domain::full_line, 301, 15.0);
    auto A = build_dilation_generator(g);
    CHECK(A.hermitian_residual() == 0.0);
    CHECK((A.dense() - A.dense().adjoint()).norm() == 0.0);
    CVec one = CVec::Ones(g.n);
    CVec a = A.apply(one);
    for (int j = 1; j + 1 < g.n; ++j) CHECK(std::abs(a[j] - cplx(0, -0.5)) < 1e-12);
}

TEST_CASE("commutator residual is second order") {
    Potential V(PotentialSpec{});
    double prev = 0;
    std::vector<double> res;
    for (int n : {401, 801, 1601}) {
        auto g = Grid::make(Domain::full_line, n, 20.0);
        auto H = build_hamiltonian(g, V, {1, 0});
        auto A = build_dilation_generator(g);
        Vec W = virial_diag(g, V);
        std::vector<CVec> ts{gaussian(g, 0.0, 1.5), gaussian(g, 3.0, 2.0, 0.7), gaussian(g, -4.0, 1.0)};
        res.push_back(commutator_residual(H, A, W, ts));
        (void)prev;
    }
    CHECK(res[0] / res[1] == doctest::Approx(4.0).epsilon(0.15));
    CHECK(res[1] / res[2] == doctest::Approx(4.0).epsilon(0.15));

    // free case
    PotentialSpec z;
    z.c1 = 0;
    auto V0 = Potential::unchecked(z);
    auto g = Grid::make(Domain::full_line, 801, 20.0);
    auto H0 = build_hamiltonian(g, V0, {1, 0});
    auto A = build_dilation_generator(g);
    std::vector<CVec> ts{gaussian(g, 0.0, 1.5)};
    const double r0 = commutator_residual(H0, A, Vec::Zero(g.n), ts);
    CHECK(r0 < 1e-2);
    // W -> W + 1 shifts the residual by the unit vector norm
    CVec u = ts[0] / ts[0].norm();
    const double r1 = commutator_residual(H0, A, Vec::Ones(g.n), {u});
    CHECK(std::abs(r1 - 1.0) <= r0 + 1e-12);
}

TEST_CASE("weight operators") {
    auto g = Grid::make(Domain::full_line, 101, 10.0);
    Vec k = k_weight(g, 1.0, -0.6);
    CHECK(k[50] == doctest::Approx(1.0));
    auto Wp = WeightOperator::from(bracket_weight(g, 1.3));
    auto Wm = WeightOperator::from(bracket_weight(g, -1.3));
    CHECK((Wp.d.cwiseProduct(Wm.d) - Vec::Ones(g.n)).cwiseAbs().maxCoeff() < 1e-14);
    CHECK((Wp.d.cwiseProduct(Wp.inv) - Vec::Ones(g.n)).cwiseAbs().maxCoeff() < 1e-15);
    for (int j = 51; j + 1 < g.n; ++j) CHECK(Wm.d[j + 1] < Wm.d[j]);
    CHECK_THROWS(WeightOperator::from(Vec::Zero(4)));
}
