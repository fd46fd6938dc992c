#include "zl/spectral.hpp"

#include "zl/parallel.hpp"

#include <algorithm>
#include <array>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/numeric/odeint.hpp>
#include <stdexcept>

namespace zl {

namespace ode = boost::numeric::odeint;

namespace {

double q_eff(const PotentialSpec& s) { return RadialReduction{s.dim, s.ell}.q_eff(); }

// exponent of the regular solution at 0: w ~ r^p with p(p-1) = q_eff
double regular_exponent(const PotentialSpec& s) {
    const double a = s.ell + (s.dim - 1) / 2.0;
    return a >= 0.5 ? a : 1.0 - a;
}

Potential without_v2(const Potential& V) {
    PotentialSpec s = V.spec();
    s.v2 = Bump{};
    return Potential::unchecked(s);
}

std::vector<double> centered(const std::vector<double>& r, const std::vector<double>& y) {
    std::vector<double> d(y.size(), 0.0);
    for (std::size_t i = 1; i + 1 < y.size(); ++i) d[i] = (y[i + 1] - y[i - 1]) / (r[i + 1] - r[i - 1]);
    return d;
}

void finish_trace(FunctionalTrace& t, double R1) {
    t.deriv_fd = centered(t.r, t.value);
    const std::size_t n = t.r.size();
    t.tolerance = 0;
    for (std::size_t i = 1; i + 1 < n; ++i) t.tolerance = std::max(t.tolerance, std::abs(t.deriv[i] - t.deriv_fd[i]));
    t.min_margin = 1e300;
    for (std::size_t i = 0; i < n; ++i)
        if (t.r[i] > R1) t.min_margin = std::min(t.min_margin, t.deriv[i]);
    t.onset = n ? t.r.back() : 0.0;
    for (std::size_t i = n; i-- > 0;) {
        if (t.deriv[i] < -t.tolerance) break;
        t.onset = t.r[i];
    }
}

} // namespace

RadialFunction regular_solution(const Potential& V, double E, const std::vector<double>& r, double tol) {
    if (r.empty() || r.front() <= 0) throw std::invalid_argument("regular_solution: r must be positive");
    const auto& sp = V.spec();
    const double q = q_eff(sp), p = regular_exponent(sp);
    using state = std::array<double, 2>;
    auto sys = [&](const state& s, state& d, double x) {
        d[0] = s[1];
        d[1] = (q / (x * x) + V.V1(x) + V.V2(x) - E) * s[0];
    };
    const double r0 = std::min(1e-6, 0.5 * r.front());
    state s{std::pow(r0, p), p * std::pow(r0, p - 1)};
    RadialFunction f;
    f.dim = sp.dim;
    f.ell = sp.ell;
    std::vector<double> times{r0};
    times.insert(times.end(), r.begin(), r.end());
    auto obs = [&](const state& st, double x) {
        if (x == r0) return;
        f.r.push_back(x);
        f.w.push_back(st[0]);
        f.dw.push_back(st[1]);
    };
    ode::integrate_times(ode::make_controlled(tol, tol, ode::runge_kutta_dopri5<state>()), sys, s, times.begin(),
                         times.end(), 1e-4 * r0, obs);
    return f;
}

FunctionalTrace F_functional(const RadialFunction& f, const Potential& V, double s, double R1) {
    FunctionalTrace t;
    t.r = f.r;
    const double lB = f.lambda_B(), c = f.c_dim();
    for (std::size_t i = 0; i < f.r.size(); ++i) {
        const double r = f.r[i], w = f.w[i], dw = f.dw[i];
        const double V1 = V.V1(r), V2 = V.V2(r), dV1 = V.dV1(r);
        const double F = dw * dw - lB * w * w / (r * r) - V1 * w * w - s * w * dw / r;
        t.value.push_back(F);
        t.deriv.push_back(2 * dw * w * (r * V2 + c / r) + (1 - s) * dw * dw - (V1 + r * dV1) * w * w +
                          (1 - s) * lB * w * w / (r * r) - s * (c / (r * r) + V1 + V2) * w * w);
    }
    // deriv is d/dr (r F); difference r F
    std::vector<double> rF(t.r.size());
    for (std::size_t i = 0; i < t.r.size(); ++i) rF[i] = t.r[i] * t.value[i];
    const auto keep = t.value;
    t.value = rF;
    finish_trace(t, R1);
    t.value = keep;
    return t;
}

FunctionalTrace G_functional(const RadialFunction& f, const Potential& V, int m, double eps_h, double C, double R1) {
    FunctionalTrace t;
    t.r = f.r;
    t.m = m;
    const double lB = f.lambda_B(), c = f.c_dim(), mu = V.spec().mu, eg = 1.0 / (2.0 * C);
    for (std::size_t i = 0; i < f.r.size(); ++i) {
        const double r = f.r[i], w = f.w[i], dw = f.dw[i];
        const double rm = std::pow(r, m), wm = rm * w, dwm = m * std::pow(r, m - 1) * w + rm * dw;
        const double V1 = V.V1(r), V2 = V.V2(r), dV1 = V.dV1(r);
        const double g = eg * eps_h * std::pow(r, -1.0 - mu / 2.0);
        const double dr2g = eg * eps_h * (1.0 - mu / 2.0) * std::pow(r, -mu / 2.0);
        const double G = dwm * dwm - lB * wm * wm / (r * r) + (m * (m + 1.0) / (r * r) - g - V1) * wm * wm;
        t.value.push_back(r * r * G);
        t.deriv.push_back(2 * r *
                          (wm * dwm * (r * V2 - r * g + c / r) + (2 * m + 1) * dwm * dwm -
                           (dr2g + 2 * r * V1 + r * r * dV1) / (2 * r) * wm * wm));
    }
    finish_trace(t, R1);
    return t;
}

double integrability_ratio(const Grid& g, const Vec& phi, double R, double eps_h, double mu) {
    if (g.domain != Domain::half_line) throw std::invalid_argument("integrability_ratio: half-line grid");
    const int n = g.n;
    auto at = [&](int j) { return (j < 0 || j >= n) ? 0.0 : phi[j]; };
    double lhs = 0, p2 = 0, pot = 0;
    for (int j = -1; j < n; ++j) {
        const double d = (at(j + 1) - at(j)) / g.dx, mid = (j + 1.5) * g.dx;
        p2 += d * d * g.dx;
        if (mid > R) lhs += d * d * g.dx;
    }
    for (int j = 0; j < n; ++j)
        if (g.x[j] > R) {
            const double h = eps_h * std::pow(g.x[j], -mu / 2.0);
            pot += h * h * phi[j] * phi[j] * g.dx;
        }
    const double rhs = p2 + pot;
    return rhs > 0 ? lhs / rhs : 0.0;
}

std::vector<double> zero_energy_nodes(const Potential& V, double rmax, double tol) {
    const Potential V1 = without_v2(V);
    const double h = 0.01;
    std::vector<double> r;
    for (double x = h; x <= rmax; x += h) r.push_back(x);
    auto f = regular_solution(V1, 0.0, r, tol);
    std::vector<double> nodes;
    for (std::size_t i = 0; i + 1 < f.r.size(); ++i) {
        if (f.w[i] == 0.0) {
            nodes.push_back(f.r[i]);
            continue;
        }
        if (f.w[i] * f.w[i + 1] >= 0) continue;
        // cubic Hermite on [r_i, r_i+1], bisection on the interpolant
        const double a = f.r[i], b = f.r[i + 1], L = b - a;
        auto H = [&](double x) {
            const double t = (x - a) / L, t2 = t * t, t3 = t2 * t;
            return (2 * t3 - 3 * t2 + 1) * f.w[i] + (t3 - 2 * t2 + t) * L * f.dw[i] + (-2 * t3 + 3 * t2) * f.w[i + 1] +
                   (t3 - t2) * L * f.dw[i + 1];
        };
        double lo = a, hi = b;
        for (int it = 0; it < 60; ++it) {
            const double mid = 0.5 * (lo + hi);
            if ((H(mid) > 0) == (H(lo) > 0)) lo = mid;
            else hi = mid;
        }
        nodes.push_back(0.5 * (lo + hi));
    }
    return nodes;
}

BallSweep dirichlet_ball_sweep(const Potential& V, const std::vector<double>& rho, int count, int n, int workers) {
    if (count < 1) throw std::invalid_argument("dirichlet_ball_sweep: count >= 1");
    for (std::size_t i = 1; i < rho.size(); ++i)
        if (!(rho[i] > rho[i - 1])) throw std::invalid_argument("dirichlet_ball_sweep: rho must increase");
    const Potential V1 = without_v2(V);
    const RadialReduction red{V.spec().dim, V.spec().ell};
    auto tri = [&](double R, Vec& d, Vec& e) {
        auto g = Grid::make(Domain::half_line, n, R);
        auto H = build_hamiltonian(g, V1, red);
        d = H.diag.real();
        e = H.lower.real();
    };
    BallSweep b;
    b.rho = rho;
    b.nodes = n;
    b.lambda.resize(rho.size());
    b.N.resize(rho.size());
    parallel_for(rho.size(), workers, [&](std::size_t i) {
        Vec d, e;
        tri(rho[i], d, e);
        b.lambda[i] = tridiagonal_eigenvalues(d, e, 1, count);
        b.N[i] = int(tridiagonal_eigen(d, e, 0.0, false).values.size());
    });
    for (std::size_t i = 0; i < rho.size(); ++i) {
        const Vec& l = b.lambda[i];
        for (int j = 0; j + 1 < l.size(); ++j)
            if (l[j + 1] - l[j] < 1e-8) b.ambiguity = true;
        if (i == 0) continue;
        if (b.N[i] < b.N[i - 1]) b.N_nondecreasing = false;
        for (int j = 0; j < std::min(l.size(), b.lambda[i - 1].size()); ++j)
            if (l[j] > b.lambda[i - 1][j] + 1e-10 * (1 + std::abs(l[j]))) b.branches_nonincreasing = false;
    }
    const auto nodes = zero_energy_nodes(V, rho.back());
    for (int j = 0; j < count; ++j)
        for (std::size_t i = 0; i + 1 < rho.size(); ++i) {
            if (j >= b.lambda[i].size() || j >= b.lambda[i + 1].size()) continue;
            if (!(b.lambda[i][j] > 0 && b.lambda[i + 1][j] <= 0)) continue;
            double lo = rho[i], hi = rho[i + 1], lam = b.lambda[i + 1][j], mid = hi;
            for (int it = 0; it < 80; ++it) {
                mid = 0.5 * (lo + hi);
                Vec d, e;
                tri(mid, d, e);
                lam = tridiagonal_eigenvalues(d, e, j + 1, j + 1)[0];
                if (std::abs(lam) <= 1e-8) break;
                if (lam > 0) lo = mid;
                else hi = mid;
            }
            Crossing c{j, mid, lam, j < int(nodes.size()) ? nodes[j] : 0.0};
            b.crossings.push_back(c);
        }
    return b;
}

int zero_persistence(const BallSweep& b, double delta) {
    int best = 0;
    std::size_t branches = 0;
    for (const auto& l : b.lambda) branches = std::max<std::size_t>(branches, l.size());
    for (std::size_t j = 0; j < branches; ++j) {
        int run = 0;
        for (const auto& l : b.lambda) {
            if (j < std::size_t(l.size()) && std::abs(l[j]) <= delta) best = std::max(best, ++run);
            else run = 0;
        }
    }
    return best;
}

WkbReport wkb_reference(const Potential& V, double E, double x0, double x1, int samples, double tol) {
    if (!(x0 > 0 && x1 > x0 && samples >= 2)) throw std::invalid_argument("wkb_reference: bad range");
    WkbReport rep;
    auto p = [&](double x) { return std::sqrt(std::max(E - V.V(x), 0.0)); };
    const auto xs = logspace(x0, x1, samples);
    // turning point scan on a finer grid
    for (double x : logspace(x0, x1, 20 * samples))
        if (E - V.V(x) <= 0) rep.turning_point = true;
    if (rep.turning_point) return rep;

    // Re psi, Im psi, Re psi', Im psi', int p, arg psi
    using state = std::array<double, 6>;
    auto sys = [&](const state& s, state& d, double x) {
        const double k = V.V(x) - E;
        d[0] = s[2];
        d[1] = s[3];
        d[2] = k * s[0];
        d[3] = k * s[1];
        d[4] = p(x);
        d[5] = (s[0] * s[3] - s[1] * s[2]) / (s[0] * s[0] + s[1] * s[1]);
    };
    const double p0 = p(x0), dp0 = -V.eval(x0).dV / (2 * p0);
    const cplx psi0 = 1.0 / std::sqrt(p0), dpsi0 = psi0 * (I * p0 - dp0 / (2 * p0));
    const double S0 = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(p, 0.0, x0, 15, 1e-14);
    state s{psi0.real(), psi0.imag(), dpsi0.real(), dpsi0.imag(), S0, S0};
    auto obs = [&](const state& st, double x) {
        rep.x.push_back(x);
        rep.amp_ode.push_back(std::hypot(st[0], st[1]));
        rep.amp_wkb.push_back(1.0 / std::sqrt(p(x)));
        rep.phase_ode.push_back(st[5]);
        rep.phase_wkb.push_back(st[4]);
    };
    ode::integrate_times(ode::make_controlled(tol, tol, ode::runge_kutta_dopri5<state>()), sys, s, xs.begin(),
                         xs.end(), 1e-3 * x0, obs);
    std::vector<double> lx, la, lxp, lp;
    for (std::size_t i = 0; i < rep.x.size(); ++i) {
        rep.max_envelope_error = std::max(rep.max_envelope_error, std::abs(rep.amp_ode[i] / rep.amp_wkb[i] - 1.0));
        rep.max_phase_error = std::max(rep.max_phase_error, std::abs(rep.phase_ode[i] - rep.phase_wkb[i]));
        if (rep.x[i] >= x1 / 100) {
            lx.push_back(jbr(rep.x[i]));
            la.push_back(rep.amp_ode[i]);
            lxp.push_back(rep.x[i]);
            lp.push_back(rep.phase_ode[i]);
        }
    }
    rep.envelope_exponent = loglog_fit(lx, la).slope;
    rep.phase_exponent = loglog_fit(lxp, lp).slope;
    return rep;
}

WeightOptimalityReport weight_optimality_probe(const BandedOperator& H, const Grid& g, const CVec& phi, int m,
                                               double eps, double mu, const std::vector<double>& Es, double arg,
                                               int workers) {
    WeightOptimalityReport rep;
    rep.E = Es;
    rep.sharp.assign(Es.size(), 0.0);
    rep.loose.assign(Es.size(), 0.0);
    const Vec ks = k_weight(g, mu, -(m - 0.5)), kl = k_weight(g, mu, -(m - 0.5) - eps);
    parallel_for(Es.size(), workers, [&](std::size_t i) {
        Resolvent R(H, std::polar(Es[i], arg));
        const CVec u = R.apply_power(phi, m);
        rep.sharp[i] = ks.cast<cplx>().cwiseProduct(u).norm();
        rep.loose[i] = kl.cast<cplx>().cwiseProduct(u).norm();
    });
    rep.statistic_loose = decade_statistic(Es, rep.loose);
    std::vector<std::size_t> idx(Es.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return Es[a] < Es[b]; });
    rep.sharp_monotone = !idx.empty();
    for (std::size_t i = 0; i + 1 < idx.size(); ++i)
        if (!(rep.sharp[idx[i]] > rep.sharp[idx[i + 1]])) rep.sharp_monotone = false;
    if (!idx.empty() && rep.sharp[idx.back()] > 0) rep.growth_sharp = rep.sharp[idx.front()] / rep.sharp[idx.back()];
    return rep;
}

} // namespace zl
