#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "zl/classical.hpp"

using namespace zl;

namespace {

Potential coulombic() { return Potential(PotentialSpec{}); }

Potential free_potential() {
    PotentialSpec z;
    z.c1 = 0;
    return Potential::unchecked(z);
}

WeightFamily wf_default() { return WeightFamily{1.0, 0.99 * std::sqrt(0.5)}; }

std::vector<double> uniform_times(double T, int n) {
    std::vector<double> t;
    for (int i = 0; i <= n; ++i) t.push_back(T * i / n);
    return t;
}

} // namespace

TEST_CASE("free flow is linear") {
    auto V0 = free_potential();
    auto tr = integrate_flow(V0, wf_default(), 1.5, 0.7, uniform_times(50, 100), {});
    for (std::size_t i = 0; i < tr.t.size(); ++i) {
        CHECK(tr.x[i] == doctest::Approx(1.5 + 1.4 * tr.t[i]).epsilon(1e-10));
        CHECK(tr.xi[i] == 0.7);
    }
}

TEST_CASE("bound orbit stays confined") {
    auto V = coulombic();
    auto tr = integrate_flow(V, wf_default(), 10.0, 0.0, uniform_times(2000, 2000), {});
    CHECK(tr.E < 0);
    CHECK_FALSE(tr.step_collapse);
    for (double x : tr.x) CHECK(std::abs(x) <= 10.0 + 1e-8);
    CHECK(tr.max_drift <= 1e-8 * (1 + std::abs(tr.E)));
}

TEST_CASE("tolerance halving reduces drift") {
    auto V = coulombic();
    FlowOptions a, b;
    a.tol = 1e-8;
    a.drift_limit = 1.0;
    b = a;
    b.tol = 1e-10;
    auto ta = integrate_flow(V, wf_default(), 3.0, -0.4, uniform_times(500, 50), a);
    auto tb = integrate_flow(V, wf_default(), 3.0, -0.4, uniform_times(500, 50), b);
    CHECK(tb.max_drift < ta.max_drift);
}

TEST_CASE("time reversal") {
    auto V = coulombic();
    const double x0 = 4.0, xi0 = 0.3;
    auto f = integrate_flow(V, wf_default(), x0, xi0, {0.0, 40.0}, {});
    auto b = integrate_flow(V, wf_default(), f.x.back(), -f.xi.back(), {0.0, 40.0}, {});
    CHECK(std::abs(b.x.back() - x0) <= 1e-7);
    CHECK(std::abs(-b.xi.back() - xi0) <= 1e-7);
}

TEST_CASE("bracket {h,b}") {
    auto V = coulombic();
    auto wf = wf_default();
    // E = 0 trajectory
    const double x0 = 5.0;
    auto tr = integrate_flow(V, wf, x0, std::sqrt(-V.V(x0)), uniform_times(100, 2000), {});
    CHECK(std::abs(tr.E) < 1e-14);
    auto br = bracket_residual(tr, V, wf);
    CHECK(br.max_residual <= 1e-6);
    CHECK(br.grad_w_residual <= 1e-6);

    // free case: closed form is w^{-1}(2 xi^2 - 2 b^2 v)
    auto V0 = free_potential();
    const double x = 2.0, xi = 0.8, E = xi * xi;
    const double w = wf.w(x, E), b = x * xi / w;
    CHECK(bracket_hb(V0, wf, x, xi, E) == doctest::Approx((2 * xi * xi - 2 * b * b * wf.v(x, E)) / w).epsilon(1e-15));
    auto tf = integrate_flow(V0, wf, 1.0, 0.5, uniform_times(20, 400), {});
    CHECK(bracket_residual(tf, V0, wf).max_residual < 1e-8);

    // stationary point
    CHECK(bracket_hb(V, wf, 0.0, 0.0, 0.0) == doctest::Approx((2 * V.V(0.0) + V.W(0.0)) / wf.w(0.0, 0.0)));
}

TEST_CASE("b^2 <= a0 along traces") {
    auto V = coulombic();
    auto wf = wf_default();
    auto tr = integrate_flow(V, wf, 2.0, 0.9, uniform_times(200, 400), {});
    for (std::size_t i = 0; i < tr.t.size(); ++i) CHECK(tr.b[i] * tr.b[i] <= tr.a0[i] * (1 + 1e-14));
}

TEST_CASE("propagation observable monotonicity") {
    auto V = coulombic();
    auto wf = wf_default();
    auto po = PropagationObservable::defaults(wf.kappa0 / 0.99);
    CHECK(po.F(po.kt) == 1.0);
    CHECK(po.F(po.k) == 0.0);
    for (double b = po.kt; b < po.k; b += 1e-3) CHECK(po.dF(b) <= 0.0);

    // outgoing start: F = 0 throughout, q = 0
    const double x0 = 5.0;
    auto out = integrate_flow(V, wf, x0, std::sqrt(-V.V(x0)), uniform_times(1000, 200), {}, &po);
    CHECK(out.b.front() > po.k);
    for (double q : out.q) CHECK(q == 0.0);
    CHECK(observable_monotonicity(out, V, wf, po).violations == 0);

    // incoming start
    auto in = integrate_flow(V, wf, 8.0, -std::sqrt(-V.V(8.0)), uniform_times(400, 4000), {}, &po);
    auto rep = observable_monotonicity(in, V, wf, po);
    CHECK(rep.violations == 0);
    CHECK(rep.ft_increase == 0);
    for (std::size_t i = 1; i < in.q.size(); ++i) CHECK(in.q[i] <= in.q[i - 1] + 1e-8);

    auto bad = po;
    bad.increasing = true;
    auto neg = observable_monotonicity(in, V, wf, bad);
    CHECK(neg.violations > 0);
}

TEST_CASE("minimal velocity") {
    auto V = coulombic();
    auto k = kappa0_from_virial(V, logspace(1e-3, 1e5, 2000));
    CHECK(k.raw == doctest::Approx(std::sqrt(0.5)).epsilon(1e-9));
    CHECK(minimal_velocity_constant(k.raw, 1.0) == doctest::Approx(3.0).epsilon(1e-9));

    auto wf = wf_default();
    const double x0 = 5.0;
    auto ts = logspace(1.0, 1e4, 200);
    ts.insert(ts.begin(), 0.0);
    auto tr = integrate_flow(V, wf, x0, std::sqrt(-V.V(x0)), ts, {});
    auto vr = minimal_velocity_ratio(tr, wf, k.raw, 0.0);
    CHECK(vr.liminf_proxy >= 0.9);
    CHECK(vr.phase_residual < 1e-3);
    CHECK_FALSE(vr.bounded_flag);

    auto V0 = free_potential();
    auto tf = integrate_flow(V0, wf, 1.0, 0.3, ts, {});
    auto vf = minimal_velocity_ratio(tf, wf, k.raw, 0.09);
    // r ~ t^{1/3} for free motion
    CHECK(vf.r.back() > 3 * vf.r[vf.r.size() / 2]);
}
