#include "zl/classical.hpp"

#include <array>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/numeric/odeint.hpp>
#include <stdexcept>

namespace zl {

namespace ode = boost::numeric::odeint;

PropagationObservable PropagationObservable::defaults(double kappa0) {
    PropagationObservable p;
    p.kp = 0.99 * kappa0;
    p.k = 0.9 * p.kp;
    p.kt = 0.8 * p.k;
    return p;
}

namespace {

double smoothstep(double s) { return s * s * s * (10.0 + s * (-15.0 + 6.0 * s)); }
double dsmoothstep(double s) { return 30.0 * s * s * (1.0 - s) * (1.0 - s); }

} // namespace

double PropagationObservable::F(double b) const {
    double v;
    if (b <= kt) v = 1.0;
    else if (b >= k) v = 0.0;
    else v = 1.0 - smoothstep((b - kt) / (k - kt));
    return increasing ? 1.0 - v : v;
}

double PropagationObservable::dF(double b) const {
    if (b <= kt || b >= k) return 0.0;
    const double d = -dsmoothstep((b - kt) / (k - kt)) / (k - kt);
    return increasing ? -d : d;
}

double bracket_hb(const Potential& V, const WeightFamily& wf, double x, double xi, double E) {
    const double w = wf.w(x, E), b = x * xi / w, h = xi * xi + V.V(x);
    return (2.0 * h + V.W(x) - 2.0 * b * b * wf.v(x, E)) / w;
}

Trajectory integrate_flow(const Potential& V, const WeightFamily& wf, double x0, double xi0,
                          const std::vector<double>& times, const FlowOptions& opt, const PropagationObservable* po) {
    using state = std::array<double, 2>;
    Trajectory tr;
    tr.E = xi0 * xi0 + V.V(x0);
    const double E = tr.E;
    const double Ew = std::max(E, 0.0); // weights are defined for E >= 0
    const double limit = opt.drift_limit * (1.0 + std::abs(E));
    auto sys = [&](const state& s, state& d, double) {
        d[0] = 2.0 * s[1];
        d[1] = -V.eval(s[0]).dV;
    };
    auto stepper = ode::make_controlled(opt.tol, opt.tol, ode::runge_kutta_dopri5<state>());
    state s{x0, xi0};
    double t = 0.0, dt = opt.dt0;

    auto record = [&](double tt) {
        const double x = s[0], xi = s[1];
        tr.t.push_back(tt);
        tr.x.push_back(x);
        tr.xi.push_back(xi);
        const double h = xi * xi + V.V(x);
        tr.drift.push_back(h - E);
        tr.max_drift = std::max(tr.max_drift, std::abs(h - E));
        const double f = wf.f(x, Ew), w = wf.w(x, Ew);
        tr.a0.push_back(xi * xi / (f * f));
        const double b = x * xi / w;
        tr.b.push_back(b);
        tr.v.push_back(wf.v(x, Ew));
        tr.w.push_back(w);
        tr.q.push_back(po ? w * (po->kp - b) * po->F(b) : 0.0);
    };

    for (double target : times) {
        if (target < t) throw std::invalid_argument("integrate_flow: times must be increasing");
        while (t < target) {
            const double h0 = std::min({dt, target - t, opt.dt_max});
            const bool clipped = h0 < dt;
            double h = h0;
            const state save = s;
            const double tsave = t;
            const auto res = stepper.try_step(sys, s, t, h); // advances s, t and proposes h
            if (res == ode::fail) {
                dt = h;
                ++tr.rejected;
            } else if (std::abs(s[1] * s[1] + V.V(s[0]) - E) > limit) {
                s = save;
                t = tsave;
                dt = 0.5 * h0;
                ++tr.rejected;
            } else {
                ++tr.steps;
                dt = clipped ? std::max(dt, h) : h;
            }
            if (dt < 1e-12) {
                tr.step_collapse = true;
                break;
            }
        }
        if (tr.step_collapse) break;
        record(target);
    }
    return tr;
}

namespace {

// 6th-order central first derivative on a uniform trace
double d6(const std::vector<double>& y, std::size_t i, double h) {
    return (-y[i - 3] + 9.0 * y[i - 2] - 45.0 * y[i - 1] + 45.0 * y[i + 1] - 9.0 * y[i + 2] + y[i + 3]) /
           (60.0 * h);
}

} // namespace

BracketResidual bracket_residual(const Trajectory& tr, const Potential& V, const WeightFamily& wf) {
    BracketResidual br;
    const std::size_t n = tr.t.size();
    const double Ew = std::max(tr.E, 0.0);
    for (std::size_t i = 3; i + 3 < n; ++i) {
        const double h1 = tr.t[i] - tr.t[i - 1], h2 = tr.t[i + 1] - tr.t[i];
        if (std::abs(h1 - h2) > 1e-9 * h1) continue; // uniform stretches only
        if (std::abs(tr.t[i - 2] - tr.t[i - 3] - h1) > 1e-9 * h1 || std::abs(tr.t[i + 3] - tr.t[i + 2] - h1) > 1e-9 * h1)
            continue;
        const double fd = d6(tr.b, i, h1);
        const double cf = bracket_hb(V, wf, tr.x[i], tr.xi[i], Ew);
        br.max_residual = std::max(br.max_residual, std::abs(fd - cf));
        // grad w against v x / w by central difference of the closed form w
        const double x = tr.x[i], eps = 1e-5 * std::max(1.0, std::abs(x));
        const double gw = (wf.w(x + eps, Ew) - wf.w(x - eps, Ew)) / (2 * eps);
        br.grad_w_residual = std::max(br.grad_w_residual, std::abs(gw - wf.v(x, Ew) * x / wf.w(x, Ew)));
    }
    return br;
}

MonotonicityReport observable_monotonicity(const Trajectory& tr, const Potential& V, const WeightFamily& wf,
                                           const PropagationObservable& po, double tol) {
    MonotonicityReport rep;
    const double Ew = std::max(tr.E, 0.0);
    const double k0 = wf.kappa0, mu = wf.mu;
    for (std::size_t i = 0; i < tr.t.size(); ++i) {
        const double x = tr.x[i], xi = tr.xi[i];
        const double w = wf.w(x, Ew), b = x * xi / w, v = wf.v(x, Ew);
        const double h = xi * xi + V.V(x);
        const double P = 2.0 * h + V.W(x) - 2.0 * b * b * v; // w {h,b}
        const double F = po.F(b), dF = po.dF(b);
        const double dq = (2.0 * v * b * (po.kp - b) - P) * F + (po.kp - b) * dF * P;
        const double bound = -2.0 * (k0 * k0 - po.k * po.kp) * std::pow(jbr(x), -mu) * F;
        rep.max_dq = std::max(rep.max_dq, dq);
        rep.worst = std::max(rep.worst, dq - bound);
        if (dq - bound > tol) ++rep.violations;
        if (i > 0 && po.F(tr.b[i]) > po.F(tr.b[i - 1]) + tol) ++rep.ft_increase;
    }
    return rep;
}

double minimal_velocity_constant(double kappa0, double mu) {
    return kappa0 * (2.0 + mu) / std::sqrt(1.0 - mu / 2.0);
}

double phase_function(double r, const WeightFamily& wf, double E) {
    const double mu = wf.mu, k0 = wf.kappa0;
    auto g = [&](double s) { return 0.5 / std::sqrt(E / (k0 * k0) + std::pow(s, -mu) / (1.0 - mu / 2.0)); };
    return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(g, 1.0, r, 12, 1e-13);
}

VelocityReport minimal_velocity_ratio(const Trajectory& tr, const WeightFamily& wf, double kappa0, double E) {
    VelocityReport vr;
    const double mu = wf.mu;
    vr.C = minimal_velocity_constant(kappa0, mu);
    const double p = 1.0 / (1.0 + mu / 2.0);
    const double T = tr.t.empty() ? 0.0 : tr.t.back();
    double lim = 1e300;
    for (std::size_t i = 0; i < tr.t.size(); ++i) {
        if (tr.t[i] <= 0) continue;
        const double r = std::abs(tr.x[i]) / std::pow(vr.C * tr.t[i], p);
        vr.t.push_back(tr.t[i]);
        vr.r.push_back(r);
        if (tr.t[i] >= T / 10.0) lim = std::min(lim, r);
    }
    vr.liminf_proxy = lim;
    // dF(<x>)/dt = b by three-point differences on the (possibly nonuniform) trace
    std::vector<double> F;
    for (double x : tr.x) F.push_back(phase_function(jbr(x), wf, std::max(E, 0.0)));
    for (std::size_t i = 1; i + 1 < tr.t.size(); ++i) {
        const double h1 = tr.t[i] - tr.t[i - 1], h2 = tr.t[i + 1] - tr.t[i];
        const double d = (-h2 / (h1 * (h1 + h2))) * F[i - 1] + ((h2 - h1) / (h1 * h2)) * F[i] +
                         (h1 / (h2 * (h1 + h2))) * F[i + 1];
        vr.phase_residual = std::max(vr.phase_residual, std::abs(d - tr.b[i]));
    }
    if (E > 0 && !tr.x.empty()) {
        double mx = 0;
        for (double x : tr.x) mx = std::max(mx, std::abs(x));
        vr.bounded_flag = std::abs(tr.x.back()) < 0.5 * mx;
    }
    return vr;
}

} // namespace zl
