#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "zl/microlocal.hpp"

using namespace zl;

namespace {

WeightFamily wf_default() { return WeightFamily{1.0, 0.99 * std::sqrt(0.5)}; }

// Fourier differentiation matrix -i d/dx on an N-periodic grid (even N), top-left n x n block
CMat spectral_derivative(int n, int N, double dx) {
    CMat D = CMat::Zero(n, n);
    for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) {
            if (j == k) continue;
            const int d = j - k;
            const double v = (pi / (N * dx)) * ((d % 2) ? -1.0 : 1.0) / std::tan(pi * d / N);
            D(j, k) = -I * v;
        }
    return D;
}

} // namespace

TEST_CASE("weyl quantization of polynomials") {
    auto g = Grid::make(Domain::full_line, 128, 10.0);
    auto one = weyl_quantize([](double, double) { return cplx(1.0); }, g);
    CHECK((one.M - CMat::Identity(g.n, g.n)).cwiseAbs().maxCoeff() < 1e-14);
    CHECK_FALSE(one.alias_warning);

    auto X = weyl_quantize([](double x, double) { return cplx(x); }, g);
    CMat Xd = CMat::Zero(g.n, g.n);
    for (int j = 0; j < g.n; ++j) Xd(j, j) = g.x[j];
    CHECK((X.M - Xd).cwiseAbs().maxCoeff() < 1e-12);

    auto D = weyl_quantize([](double, double xi) { return cplx(xi); }, g);
    CHECK((D.M - spectral_derivative(g.n, 2 * g.n, g.dx)).cwiseAbs().maxCoeff() < 1e-10);
    // a = xi has full mass at the band edge
    CHECK(D.alias_warning);
    CHECK(D.hermitian_residual < 1e-14);
}

TEST_CASE("weyl quantization invariants") {
    auto g = Grid::make(Domain::full_line, 200, 20.0);
    auto a = [](double x, double xi) { return cplx(std::exp(-x * x / 10) * std::cos(xi) + 0.1 * x * xi * xi); };
    auto b = [](double x, double xi) { return cplx(std::sin(x) / (1 + xi * xi)); };
    WeylOptions o;
    o.taper = true;
    auto A = weyl_quantize(a, g, o), B = weyl_quantize(b, g, o);
    CHECK(opnorm(A.M - A.M.adjoint()) <= 1e-12 * opnorm(A.M));
    CHECK(opnorm(B.M - B.M.adjoint()) <= 1e-12 * opnorm(B.M));
    auto C = weyl_quantize([&](double x, double xi) { return 2.0 * a(x, xi) - 3.0 * b(x, xi); }, g, o);
    CHECK((C.M - (2.0 * A.M - 3.0 * B.M)).cwiseAbs().maxCoeff() < 1e-12 * A.M.cwiseAbs().maxCoeff());
    // a grows like xi^2 up to the band edge: flagged even when tapered; b decays and is not
    CHECK(A.alias_warning);
    CHECK(B.alias_metric < 0.05);

    // worker count does not change the matrix
    auto A2 = weyl_quantize(a, g, o, 2);
    CHECK((A2.M - A.M).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("smooth step and cutoff family") {
    CHECK(smooth_step(0.0) == 0.0);
    CHECK(smooth_step(1.0) == 1.0);
    CHECK(smooth_step(0.5) == doctest::Approx(0.5));
    CutoffFamily cf{1.0, 0.6};
    CHECK_NOTHROW(cf.validate(0.7));
    CHECK_THROWS(cf.validate(0.5));
    CHECK(cf.Fp(1.0) == 0.0);
    CHECK(cf.Fp(2.0) == 1.0);
    CHECK(cf.Ftm(0.5 * cf.kappa) == 0.0);  // sup supp Ft- < kappa
    CHECK(cf.Ftp(-0.5 * cf.kappa) == 0.0); // inf supp Ft+ > -kappa
    CHECK(cf.Ftm_sep(-0.2 * cf.kappa) == 0.0);
    CHECK(cf.Ftp_sep(0.2 * cf.kappa) == 0.0);
    CHECK(cf.Fm_sep(0.75) == 0.0);
    for (double s = -2; s < 4; s += 0.01) {
        CHECK(cf.Fp(s) + cf.Fm(s) == 1.0);
        CHECK(cf.Ftp(s) + cf.Ftm(s) == 1.0);
    }
}

TEST_CASE("localizer partition") {
    auto wf = wf_default();
    auto g = Grid::make(Domain::full_line, 256, 64.0);
    CutoffFamily cf{1.0, 0.9 * 0.99 * std::sqrt(0.5)};
    for (double E : {1e-3, 1e-1, 1.0}) {
        auto L = build_localizers(cf, PhaseSymbols{wf, E}, g);
        CHECK(L.pointwise_residual <= 1e-15);
        CHECK(L.operator_residual <= 1e-8);
        CHECK_FALSE(L.plus.alias_warning);
    }
    // S(1,g) seminorms of F-(a0) G(b) are finite and comparable across E
    std::vector<std::pair<double, double>> pts;
    for (double x : {-300.0, -20.0, -1.0, 0.0, 3.0, 50.0, 1000.0})
        for (double r : {-1.5, -0.5, 0.0, 0.3, 1.0}) pts.push_back({x, r});
    std::vector<std::vector<double>> sn;
    for (double E : {1e-4, 1e-2, 1.0}) {
        PhaseSymbols ps{wf, E};
        std::vector<std::pair<double, double>> scaled;
        for (auto [x, r] : pts) scaled.push_back({x, r * wf.f(x, E)});
        sn.push_back(symbol_seminorms(
            [&](double x, double xi) { return cplx(cf.Fm(ps.a0(x, xi)) * cf.Ftm(ps.b(x, xi))); }, ps, scaled));
    }
    for (const auto& s : sn)
        for (double v : s) CHECK(std::isfinite(v));
    for (int i = 0; i < 6; ++i) CHECK(sn[0][i] <= 10 * sn[2][i] + 1e-12);
}

TEST_CASE("C0 calibration") {
    auto wf = wf_default();
    std::vector<double> xs;
    for (int j = -2000; j <= 2000; ++j) xs.push_back(0.5 * j);
    std::vector<cplx> zs;
    for (double E : logspace(1e-4, 1.0, 9))
        for (double f : {0.25, 0.5, 0.75}) zs.push_back(std::polar(E, f * pi / 2));
    Potential V(PotentialSpec{});
    const double c0 = calibrate_C0(V, wf, xs, zs);
    CHECK(std::isfinite(c0));
    CHECK(c0 > 0);
    CHECK(c0 <= 2.0);

    PotentialSpec z;
    z.c1 = 0;
    const double c00 = calibrate_C0(Potential::unchecked(z), wf, xs, zs);
    CHECK(c00 <= 2 * wf.kappa0 * wf.kappa0 + 1e-15);

    PotentialSpec s2;
    s2.c1 = 2.0;
    CHECK(calibrate_C0(Potential(s2), wf, xs, zs) >= c0);
}

TEST_CASE("metric probe") {
    auto wf = wf_default();
    auto rep = metric_uniformity_probe(wf, logspace(1e-4, 1.0, 5), 10000, 2, 7);
    CHECK(rep.pass());
    for (double u : rep.uncertainty) CHECK(u >= 1.0);
    CHECK(rep.slow_C.front() <= 10 * rep.slow_C.back());
}

TEST_CASE("moyal composition") {
    // exact for polynomials on well resolved packets
    auto rp = moyal_residual(jet_monomial(1, 0), jet_monomial(0, 1), 1, 20.0, {128, 256});
    for (double r : rp.residual) CHECK(r < 1e-11);
    auto r0 = moyal_residual(jet_monomial(0, 0), jet_monomial(0, 0), 0, 20.0, {64});
    CHECK(r0.opnorm_residual[0] < 1e-14);

    // second order terms: x^2 # xi^2 terminates at j = 2
    auto rq = moyal_residual(jet_monomial(2, 0), jet_monomial(0, 2), 2, 20.0, {256});
    auto rq1 = moyal_residual(jet_monomial(2, 0), jet_monomial(0, 2), 1, 20.0, {256});
    CHECK(rq.residual[0] < 1e-9);
    CHECK(rq1.residual[0] > 0.1);

    auto a1 = jet_gaussian(1.0, 8.0, 0.5, 4.0), a2 = jet_gaussian(-0.5, 6.0, 0.0, 3.0);
    std::vector<double> res;
    for (int N = 0; N <= 2; ++N) res.push_back(moyal_residual(a1, a2, N, 80.0, {512}).residual[0]);
    CHECK(res[1] < 0.5 * res[0]);
    CHECK(res[2] < 1e-2 * res[0]);
}

TEST_CASE("fefferman-phong probe") {
    auto g = Grid::make(Domain::full_line, 256, 64.0);
    auto rep = fefferman_phong_probe(wf_default(), g, logspace(1e-3, 1.0, 4));
    CHECK(rep.stable);
    for (double c : rep.C) CHECK(std::isfinite(c));
}

TEST_CASE("exterior scaling reproduces the whole-line resolvent inside") {
    Potential V(PotentialSpec{});
    auto gb = Grid::make(Domain::full_line, 2 * 20000 - 1, 20000.0);
    auto gs = Grid::make(Domain::full_line, 2 * 400 - 1, 400.0);
    ExteriorScaling e;
    e.enabled = true;
    e.start = 0.5;
    const int off = (gb.n - gs.n) / 2;
    for (double E : {0.1, 0.01, 0.001}) {
        const cplx z = std::polar(E, pi / 4);
        CVec ub(gb.n), us(gs.n), up(gs.n);
        for (int j = 0; j < gb.n; ++j) ub[j] = std::exp(-std::pow((gb.x[j] - 3) / 2, 2));
        for (int j = 0; j < gs.n; ++j) us[j] = up[j] = std::exp(-std::pow((gs.x[j] - 3) / 2, 2));
        TriLU(shifted(build_hamiltonian(gb, V, {1, 0}), z)).solve_inplace(ub, 'N');
        TriLU(shifted(build_scaled_hamiltonian(gs, V, e), z)).solve_inplace(us, 'N');
        TriLU(shifted(build_hamiltonian(gs, V, {1, 0}), z)).solve_inplace(up, 'N');
        double d = 0, dp = 0, m = 0;
        for (int j = 0; j < gs.n; ++j)
            if (std::abs(gs.x[j]) < 150) {
                d = std::max(d, std::abs(us[j] - ub[j + off]));
                dp = std::max(dp, std::abs(up[j] - ub[j + off]));
                m = std::max(m, std::abs(ub[j + off]));
            }
        CHECK(d <= 1e-3 * m);
        if (E < 0.005) CHECK(dp > 10 * d); // the plain box reflects
    }
    // off: the ordinary operator
    e.enabled = false;
    auto H0 = build_scaled_hamiltonian(gs, V, e), H1 = build_hamiltonian(gs, V, {1, 0});
    CHECK((H0.dense() - H1.dense()).cwiseAbs().maxCoeff() == 0.0);
    e.enabled = true;
    auto m = interior_mask(gs, e), w = observation_window(gs, e);
    for (int j = 0; j < gs.n; ++j) {
        if (std::abs(gs.x[j]) >= 200) CHECK(m[j] == 0.0);
        if (std::abs(gs.x[j]) <= 170) CHECK(m[j] == 1.0);
        CHECK(w[j] <= m[j]);
    }
}
