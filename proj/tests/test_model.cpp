#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "zl/model.hpp"

using namespace zl;

namespace {

std::vector<double> radial_grid(double rmax, int n) {
    std::vector<double> g;
    for (int i = 0; i <= n; ++i) g.push_back(rmax * i / n);
    return g;
}

PotentialSpec bump_spec() {
    PotentialSpec s;
    s.v2.kind = V2Kind::bump;
    s.v2.amp = 0.8;
    s.v2.center = 3.0;
    s.v2.radius = 2.0;
    return s;
}

} // namespace

TEST_CASE("eval_potential examples") {
    Potential V(PotentialSpec{});
    auto p0 = V.eval(0.0);
    CHECK(p0.V == doctest::Approx(-1.0).epsilon(1e-15));
    CHECK(p0.dV == 0.0);
    CHECK(V.V(1.0) == doctest::Approx(-0.70710678118654752).epsilon(1e-14));
    auto p = V.eval(2.5);
    CHECK(p.V == doctest::Approx(p.V1 + p.V2).epsilon(1e-15));

    Potential B(bump_spec());
    CHECK(B.V2(5.0) == 0.0);
    CHECK(B.V2(5.5) == 0.0);
    CHECK(B.V2(0.9) == 0.0);
    CHECK(B.V2(3.0) > 0.0);
    CHECK(B.eval(-4.0).dV == doctest::Approx(-B.eval(4.0).dV));
}

TEST_CASE("analytic gradients match central differences") {
    Potential V(bump_spec());
    const double h = 1e-5;
    for (double x : {0.3, 1.7, 2.4, 3.3, 4.6, 7.0, 30.0}) {
        const double fd = (V.V(x + h) - V.V(x - h)) / (2 * h);
        CHECK(V.eval(x).dV == doctest::Approx(fd).epsilon(1e-7));
        const double fdW = x * (V.W(x + h) - V.W(x - h)) / (2 * h);
        CHECK(V.x_grad_W(x) == doctest::Approx(fdW).epsilon(1e-6).scale(1e-9));
        const double fd2 = (V.dV2(x + h) - V.dV2(x - h)) / (2 * h);
        CHECK(V.d2V2(x) == doctest::Approx(fd2).epsilon(1e-6).scale(1e-9));
    }
}

TEST_CASE("virial") {
    Potential V(PotentialSpec{});
    CHECK(V.W(0.0) == doctest::Approx(2.0));
    for (double x : {0.0, 0.5, 3.0, 40.0}) {
        const double b = jbr(x);
        CHECK(V.W(x) == doctest::Approx((2.0 - x * x / (b * b)) / b).epsilon(1e-14));
    }
    CHECK(V.W(1e4) * jbr(1e4) == doctest::Approx(1.0).epsilon(1e-7));

    PotentialSpec z;
    z.c1 = 0.0;
    auto V0 = Potential::unchecked(z);
    for (double x : {0.0, 1.0, 10.0}) CHECK(V0.W(x) == 0.0);
}

TEST_CASE("kappa0_from_virial") {
    auto g = radial_grid(1e4, 20000);
    auto k = kappa0_from_virial(Potential(PotentialSpec{}), g);
    REQUIRE(k.ok);
    CHECK(k.raw == doctest::Approx(std::sqrt(0.5)).epsilon(1e-6));
    CHECK(k.used == doctest::Approx(0.99 * k.raw));

    PotentialSpec s4;
    s4.c1 = 4.0;
    auto k4 = kappa0_from_virial(Potential(s4), g);
    CHECK(k4.raw == doctest::Approx(2.0 * k.raw).epsilon(1e-12));

    PotentialSpec rep;
    rep.c1 = -1.0;
    auto kr = kappa0_from_virial(Potential::unchecked(rep), g);
    CHECK_FALSE(kr.ok);
    CHECK(kr.message.find("virial violation") != std::string::npos);
}

TEST_CASE("weights") {
    WeightFamily wf;
    CHECK(wf.f(0.0, 0.0) == doctest::Approx(std::sqrt(2.0)));
    CHECK(wf.k(std::sqrt(3.0)) == doctest::Approx(std::pow(2.0, 1.5)));
    for (double x : {0.0, 5.0, 1e3}) CHECK(wf.f(x, 1e12) / std::sqrt(1e12) == doctest::Approx(1.0 / wf.kappa0).epsilon(1e-6));
    for (double mu : {0.5, 1.0, 1.5}) {
        WeightFamily w{mu, 0.6};
        for (double E : {0.0, 1e-3, 1.0})
            for (double x : {0.0, 1.0, 10.0, 1e3}) {
                CHECK(w.f(x, E) >= std::pow(jbr(x), -mu / 2));
                CHECK(w.w(x, E) >= std::pow(jbr(x), 1 - mu / 2));
                CHECK(w.f(x, E) >= w.f(x + 1.0, E)); // nonincreasing in |x|
            }
    }
    // grad w = v x / w and the closed-form grad f
    const double h = 1e-6;
    for (double x : {0.4, 2.0, 9.0})
        for (double E : {0.0, 0.3}) {
            CHECK(wf.dw(x, E) == doctest::Approx((wf.w(x + h, E) - wf.w(x - h, E)) / (2 * h)).epsilon(1e-7));
            CHECK(wf.df(x, E) == doctest::Approx((wf.f(x + h, E) - wf.f(x - h, E)) / (2 * h)).epsilon(1e-7));
        }
    auto ev = eval_weights(wf, 1.0, 0.0, {-1.3, 2.0});
    CHECK(ev.powers[1] == doctest::Approx(2.0));
}

TEST_CASE("family invariants") {
    auto g = radial_grid(500.0, 5000);
    for (double mu : {0.5, 1.0, 1.5})
        for (double c1 : {0.5, 1.0, 3.0}) {
            PotentialSpec s;
            s.mu = mu;
            s.c1 = c1;
            Potential V(s);
            for (double x : g) CHECK(V.W(x) * std::pow(jbr(x), mu) >= (2 - mu) * c1 * (1 - 1e-14));
            auto rep = validate_assumptions(V, g);
            CHECK(rep.eps2 >= (2 - mu) * (1 - 1e-12));
            PotentialSpec s2 = s;
            s2.c1 = 2.5 * c1;
            Potential V2(s2);
            CHECK(V2.W(7.0) == doctest::Approx(2.5 * V.W(7.0)));
            CHECK(kappa0_from_virial(V2, g).raw == doctest::Approx(std::sqrt(2.5) * kappa0_from_virial(V, g).raw));
        }
}

TEST_CASE("validate_assumptions") {
    auto g = radial_grid(1000.0, 2000);
    auto rep = validate_assumptions(Potential(PotentialSpec{}), g);
    CHECK(rep.all_pass());
    CHECK(rep.eps1 == doctest::Approx(1.0));
    CHECK(rep.eps_h_max > 0);
    CHECK(rep.kappa0.ok);

    auto repb = validate_assumptions(Potential(bump_spec()), g);
    CHECK(repb.all_pass());
    CHECK(repb.R == doctest::Approx(5.0));

    PotentialSpec glob;
    glob.v2.kind = V2Kind::bracket;
    glob.v2.amp = 1.0;
    glob.v2.order = 1.0;
    auto repg = validate_assumptions(Potential(glob), g);
    CHECK_FALSE(repg.c5p_compact_support);
    CHECK_FALSE(repg.all_pass());

    PotentialSpec bad;
    bad.mu = 2.0;
    CHECK_THROWS_AS(Potential{bad}, std::invalid_argument);
    bad.mu = 1.0;
    bad.c1 = -1.0;
    CHECK_THROWS_AS(Potential{bad}, std::invalid_argument);
}
