#include "zl/microlocal.hpp"

#include "zl/parallel.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <array>
#include <fftw3.h>
#include <memory>
#include <mutex>
#include <random>
#include <stdexcept>

namespace zl {

double smooth_step(double t) {
    if (t <= 0.0) return 0.0;
    if (t >= 1.0) return 1.0;
    const double a = std::exp(-1.0 / t), b = std::exp(-1.0 / (1.0 - t));
    return a / (a + b);
}

namespace {

std::mutex fftw_plan_mutex; // planner calls are not thread safe

struct FftwPlan {
    fftw_plan p = nullptr;
    explicit FftwPlan(int N) {
        std::lock_guard<std::mutex> lk(fftw_plan_mutex);
        auto* in = fftw_alloc_complex(N);
        auto* out = fftw_alloc_complex(N);
        p = fftw_plan_dft_1d(N, in, out, FFTW_BACKWARD, FFTW_ESTIMATE);
        fftw_free(in);
        fftw_free(out);
    }
    ~FftwPlan() {
        std::lock_guard<std::mutex> lk(fftw_plan_mutex);
        fftw_destroy_plan(p);
    }
    FftwPlan(const FftwPlan&) = delete;
    FftwPlan& operator=(const FftwPlan&) = delete;
};

struct FftwBuf {
    fftw_complex* in;
    fftw_complex* out;
    explicit FftwBuf(int N) : in(fftw_alloc_complex(N)), out(fftw_alloc_complex(N)) {}
    ~FftwBuf() {
        fftw_free(in);
        fftw_free(out);
    }
    FftwBuf(const FftwBuf&) = delete;
    FftwBuf& operator=(const FftwBuf&) = delete;
};

} // namespace

WeylOperator weyl_quantize(const SymbolFn& a, const Grid& g, const WeylOptions& o, int workers) {
    const int n = g.n, N = 2 * n;
    const double dx = g.dx, xi_nyq = pi / dx;
    std::vector<double> xi(N);
    for (int m = 0; m < N; ++m) xi[m] = 2.0 * pi * (m < N / 2 ? m : m - N) / (N * dx);
    auto taper = [&](double q) {
        if (!o.taper) return 1.0;
        const double s = std::abs(q) / xi_nyq;
        return 1.0 - smooth_step((s - o.band_fraction) / (1.0 - o.band_fraction));
    };

    WeylOperator W;
    W.M = CMat::Zero(n, n);
    FftwPlan plan(N);
    const int np = 2 * n - 1;
    std::vector<double> amax(np, 0.0), avar(np, 0.0);
    parallel_for(std::size_t(np), workers, [&](std::size_t pi_) {
        const int p = int(pi_);
        const double mid = g.x[0] + 0.5 * p * dx;
        FftwBuf buf(N);
        double mx = 0;
        for (int m = 0; m < N; ++m) {
            cplx v;
            if (m == N / 2) // split the Nyquist mode evenly between +/- band edge
                v = 0.5 * (a(mid, xi_nyq) * taper(xi_nyq) + a(mid, -xi_nyq) * taper(-xi_nyq));
            else
                v = a(mid, xi[m]) * taper(xi[m]);
            buf.in[m][0] = v.real();
            buf.in[m][1] = v.imag();
            mx = std::max(mx, std::abs(v));
        }
        const cplx vn(buf.in[N / 2][0], buf.in[N / 2][1]);
        double var = 0;
        for (int m = 0; m < N; ++m)
            if (std::abs(xi[m]) >= o.band_fraction * xi_nyq)
                var = std::max(var, std::abs(cplx(buf.in[m][0], buf.in[m][1]) - vn));
        amax[p] = mx;
        avar[p] = var;
        fftw_execute_dft(plan.p, buf.in, buf.out);
        const int jlo = std::max(0, p - (n - 1)), jhi = std::min(p, n - 1);
        for (int j = jlo; j <= jhi; ++j) {
            const int k = p - j, d = ((j - k) % N + N) % N;
            W.M(j, k) = cplx(buf.out[d][0], buf.out[d][1]) / double(N);
        }
    });
    const double amx = *std::max_element(amax.begin(), amax.end());
    const double avr = *std::max_element(avar.begin(), avar.end());
    W.alias_metric = amx > 0 ? avr / amx : 0.0;
    W.alias_warning = W.alias_metric > o.alias_threshold;
    const double nf = W.M.norm();
    W.hermitian_residual = nf > 0 ? (W.M - W.M.adjoint()).norm() / nf : 0.0;
    return W;
}

void CutoffFamily::validate(double kappa0) const {
    if (!(C0 > 0)) throw std::invalid_argument("C0 must be positive");
    if (!(kappa > 0 && kappa < kappa0)) throw std::invalid_argument("need 0 < kappa < kappa0");
}

Localizers build_localizers(const CutoffFamily& cf, const PhaseSymbols& ps, const Grid& g, int workers) {
    Localizers L;
    L.plus = weyl_quantize([&](double x, double xi) { return cplx(cf.Fp(ps.a0(x, xi))); }, g, {}, workers);
    L.minus_minus = weyl_quantize(
        [&](double x, double xi) { return cplx(cf.Fm(ps.a0(x, xi)) * cf.Ftm(ps.b(x, xi))); }, g, {}, workers);
    L.minus_plus = weyl_quantize(
        [&](double x, double xi) { return cplx(cf.Fm(ps.a0(x, xi)) * cf.Ftp(ps.b(x, xi))); }, g, {}, workers);
    const double xn = pi / g.dx;
    for (double x : g.x)
        for (int m = -g.n; m <= g.n; ++m) {
            const double xi = xn * m / g.n, a0 = ps.a0(x, xi), b = ps.b(x, xi);
            const double s = cf.Fp(a0) + cf.Fm(a0) * cf.Ftm(b) + cf.Fm(a0) * cf.Ftp(b);
            L.pointwise_residual = std::max(L.pointwise_residual, std::abs(s - 1.0));
        }
    const CMat S = L.plus.M + L.minus_minus.M + L.minus_plus.M - CMat::Identity(g.n, g.n);
    L.operator_residual = S.cwiseAbs().maxCoeff();
    return L;
}

double calibrate_C0(const Potential& V, const WeightFamily& wf, const std::vector<double>& x,
                    const std::vector<cplx>& zetas) {
    double C = 0;
    for (cplx z : zetas) {
        const double E = std::abs(z);
        for (double xx : x) {
            const double f = wf.f(xx, E);
            C = std::max(C, std::abs(V.V(xx) - z.real()) / (f * f));
        }
    }
    return 2.0 * C;
}

std::vector<double> symbol_seminorms(const SymbolFn& s, const PhaseSymbols& ps,
                                     const std::vector<std::pair<double, double>>& points) {
    std::vector<double> out(6, 0.0); // (0,0) (1,0) (0,1) (2,0) (1,1) (0,2)
    for (auto [x, xi] : points) {
        const double bx = jbr(x), f = ps.wf.f(x, ps.E);
        const double hx = 1e-3 * bx, hq = 1e-3 * f;
        const auto& a = s;
        const cplx c = a(x, xi);
        const cplx dx1 = (a(x + hx, xi) - a(x - hx, xi)) / (2 * hx);
        const cplx dq1 = (a(x, xi + hq) - a(x, xi - hq)) / (2 * hq);
        const cplx dx2 = (a(x + hx, xi) - 2.0 * c + a(x - hx, xi)) / (hx * hx);
        const cplx dq2 = (a(x, xi + hq) - 2.0 * c + a(x, xi - hq)) / (hq * hq);
        const cplx dxq = (a(x + hx, xi + hq) - a(x + hx, xi - hq) - a(x - hx, xi + hq) + a(x - hx, xi - hq)) /
                         (4 * hx * hq);
        const double v[6] = {std::abs(c),          std::abs(dx1) * bx,         std::abs(dq1) * f,
                             std::abs(dx2) * bx * bx, std::abs(dxq) * bx * f, std::abs(dq2) * f * f};
        for (int i = 0; i < 6; ++i) out[i] = std::max(out[i], v[i]);
    }
    return out;
}

double MetricProbeReport::spread(const std::vector<double>& v) const {
    if (v.empty()) return 0;
    const double mx = *std::max_element(v.begin(), v.end()), mn = *std::min_element(v.begin(), v.end());
    return mn > 0 ? mx / mn : std::numeric_limits<double>::infinity();
}

bool MetricProbeReport::pass() const {
    for (const auto* v : {&ratio_C, &slow_C, &temper_C})
        for (double c : *v)
            if (!std::isfinite(c)) return false;
    for (double u : uncertainty)
        if (u < 1.0) return false;
    return spread(ratio_C) < 10 && spread(slow_C) < 10 && spread(temper_C) < 10;
}

MetricProbeReport metric_uniformity_probe(const WeightFamily& wf, const std::vector<double>& Es, int samples,
                                          int N, std::uint64_t seed, double xmax) {
    MetricProbeReport rep;
    rep.E = Es;
    rep.N = N;
    rep.samples = samples;
    const double mu = wf.mu;
    for (std::size_t e = 0; e < Es.size(); ++e) {
        const double E = Es[e];
        std::mt19937_64 rng(mix_seed(seed, e));
        std::uniform_real_distribution<double> U(0.0, 1.0);
        auto draw = [&] {
            const double mag = std::pow(10.0, -2.0 + (std::log10(xmax) + 2.0) * U(rng));
            return U(rng) < 0.5 ? -mag : mag;
        };
        double rc = 0, sc = 0, tc = 0, un = 1e300;
        for (int i = 0; i < samples; ++i) {
            const double x = draw(), y = draw();
            const double fx = wf.f(x, E), fy = wf.f(y, E), bx = jbr(x), by = jbr(y);
            rc = std::max(rc, fx / fy / std::pow(1.0 + by / bx, mu / 2.0));
            // temperateness with base point x, xi = eta (worst case)
            const double gr = std::max(by * by / (bx * bx), fy * fy / (fx * fx));
            tc = std::max(tc, gr / std::pow(1.0 + fx * fx * (x - y) * (x - y), N));
            // slow variation: displacement with g_x(d) <= 1/4
            const double d = (2.0 * U(rng) - 1.0) * 0.5 * bx, z = x + d;
            const double fz = wf.f(z, E), bz = jbr(z);
            sc = std::max(sc, std::max(bx * bx / (bz * bz), fx * fx / (fz * fz)));
            un = std::min(un, fx * bx);
        }
        rep.ratio_C.push_back(rc);
        rep.slow_C.push_back(sc);
        rep.temper_C.push_back(tc);
        rep.uncertainty.push_back(un);
    }
    return rep;
}

namespace {

double fact(int k) {
    double r = 1;
    for (int i = 2; i <= k; ++i) r *= i;
    return r;
}

} // namespace

cplx moyal_term(const SymbolJet& a1, const SymbolJet& a2, int j, double x, double xi) {
    if (j < 0 || j > 3) throw std::invalid_argument("moyal_term: 0 <= j <= 3");
    cplx s = 0;
    for (int al = 0; al <= j; ++al) {
        const int be = j - al;
        const double c = ((al % 2) ? -1.0 : 1.0) / (fact(al) * fact(be));
        s += c * a1(x, xi, be, al) * a2(x, xi, al, be);
    }
    return std::pow(0.5 * I, j) * s;
}

MoyalReport moyal_residual(const SymbolJet& a1, const SymbolJet& a2, int N, double rmax, const std::vector<int>& ns,
                           const WeylOptions& o, int workers) {
    if (N < 0 || N > 3) throw std::invalid_argument("moyal_residual: 0 <= N <= 3");
    MoyalReport rep;
    for (int n : ns) {
        const Grid g = Grid::make(Domain::full_line, n, rmax);
        auto A1 = weyl_quantize([&](double x, double xi) { return a1(x, xi, 0, 0); }, g, o, workers);
        auto A2 = weyl_quantize([&](double x, double xi) { return a2(x, xi, 0, 0); }, g, o, workers);
        auto S = weyl_quantize(
            [&](double x, double xi) {
                cplx s = 0;
                for (int j = 0; j <= N; ++j) s += moyal_term(a1, a2, j, x, xi);
                return s;
            },
            g, o, workers);
        rep.alias_warning = rep.alias_warning || A1.alias_warning || A2.alias_warning || S.alias_warning;
        const CMat D = A1.M * A2.M - S.M;
        // well resolved packets away from the walls
        double worst = 0;
        const double xn = pi / g.dx, wd = rmax / 10.0;
        for (double c : {-rmax / 4, 0.0, rmax / 4})
            for (double k : {-0.25 * xn, 0.0, 0.25 * xn}) {
                CVec u(n);
                for (int j = 0; j < n; ++j) u[j] = std::exp(-std::pow((g.x[j] - c) / wd, 2)) * std::polar(1.0, k * g.x[j]);
                worst = std::max(worst, (D * u).norm() / u.norm());
            }
        rep.n.push_back(n);
        rep.residual.push_back(worst);
        rep.opnorm_residual.push_back(opnorm(D));
    }
    return rep;
}

SymbolJet jet_monomial(int px, int pxi) {
    return [px, pxi](double x, double xi, int ax, int axi) -> cplx {
        if (ax > px || axi > pxi) return 0.0;
        const double cx = fact(px) / fact(px - ax), cq = fact(pxi) / fact(pxi - axi);
        return cx * std::pow(x, px - ax) * cq * std::pow(xi, pxi - axi);
    };
}

namespace {

// d^k/du^k exp(-u^2) = (-1)^k H_k(u) exp(-u^2), physicists' Hermite
double gauss_deriv(double u, int k) {
    double h0 = 1, h1 = 2 * u;
    double hk = k == 0 ? h0 : h1;
    for (int i = 2; i <= k; ++i) {
        hk = 2 * u * h1 - 2 * (i - 1) * h0;
        h0 = h1;
        h1 = hk;
    }
    return ((k % 2) ? -1.0 : 1.0) * hk * std::exp(-u * u);
}

} // namespace

SymbolJet jet_gaussian(double x0, double sx, double xi0, double sxi) {
    return [=](double x, double xi, int ax, int axi) -> cplx {
        return gauss_deriv((x - x0) / sx, ax) / std::pow(sx, ax) * gauss_deriv((xi - xi0) / sxi, axi) /
               std::pow(sxi, axi);
    };
}

namespace {

struct ScaledNodes {
    std::vector<cplx> z;
    cplx left, right; // scaled images of the two Dirichlet end points
};

ScaledNodes scaled_nodes(const Grid& g, const ExteriorScaling& ecs) {
    const double x0 = ecs.start * g.rmax, w = ecs.ramp * g.rmax;
    const cplx rot = std::polar(1.0, ecs.angle) - 1.0;
    // G(r) = int_{x0}^{r} S((s - x0)/w) ds by composite Simpson per cell
    auto G = [&](double r) {
        if (r <= x0) return 0.0;
        const int m = 64;
        const double h = (r - x0) / m;
        double acc = smooth_step(0.0) + smooth_step((r - x0) / w);
        for (int i = 1; i < m; ++i) acc += (i % 2 ? 4.0 : 2.0) * smooth_step(i * h / w);
        return acc * h / 3.0;
    };
    auto F = [&](double x) -> cplx {
        if (!ecs.enabled) return x;
        const double r = std::abs(x);
        const cplx v = r + rot * G(r);
        return x < 0 ? -v : v;
    };
    ScaledNodes s;
    for (double x : g.x) s.z.push_back(F(x));
    const double a = g.domain == Domain::full_line ? -g.rmax : 0.0;
    s.left = F(a);
    s.right = F(g.rmax);
    return s;
}

} // namespace

BandedOperator build_scaled_hamiltonian(const Grid& g, const Potential& V, const ExteriorScaling& ecs) {
    if (!ecs.enabled) return build_hamiltonian(g, V, {1, 0});
    if (g.domain != Domain::full_line) throw std::invalid_argument("exterior scaling: full-line grids only");
    if (V.v2_support() > ecs.start * g.rmax) throw std::invalid_argument("exterior scaling: V2 must vanish where x is scaled");
    const auto sn = scaled_nodes(g, ecs);
    const int n = g.n;
    BandedOperator H;
    H.bandwidth = 1;
    H.diag = CVec(n);
    H.lower = CVec(n - 1);
    H.upper = CVec(n - 1);
    const auto& sp = V.spec();
    for (int j = 0; j < n; ++j) {
        const cplx zm = j > 0 ? sn.z[j - 1] : sn.left, zp = j + 1 < n ? sn.z[j + 1] : sn.right, z = sn.z[j];
        const cplx hm = z - zm, hp = zp - z, s = 2.0 / (hm + hp);
        // -u'' on three nonuniform complex nodes
        H.diag[j] = s * (1.0 / hp + 1.0 / hm);
        if (j > 0) H.lower[j - 1] = -s / hm; // entry (j, j-1)
        if (j + 1 < n) H.upper[j] = -s / hp; // entry (j, j+1)
        const double r = std::abs(g.x[j]);
        const cplx v1 = -sp.c1 * std::pow(1.0 + z * z, -sp.mu / 2.0);
        H.diag[j] += v1 + V.V2(r);
    }
    H.hermitian = false;
    return H;
}

Vec interior_mask(const Grid& g, const ExteriorScaling& ecs) {
    Vec m = Vec::Ones(g.n);
    if (!ecs.enabled) return m;
    const double xc = ecs.start * g.rmax;
    for (int j = 0; j < g.n; ++j) m[j] = 1.0 - smooth_step((std::abs(g.x[j]) / xc - 0.85) / 0.15);
    return m;
}

Vec observation_window(const Grid& g, const ExteriorScaling& ecs) {
    Vec m = Vec::Ones(g.n);
    if (!ecs.enabled) return m;
    const double xc = ecs.start * g.rmax, a = ecs.window_lo * xc, b = ecs.window_hi * xc;
    for (int j = 0; j < g.n; ++j) m[j] = 1.0 - smooth_step((std::abs(g.x[j]) - a) / (b - a));
    return m;
}

namespace {

// product of diagonal, dense and resolvent-power factors, applied right to left
struct Chain {
    struct Factor {
        enum Kind { diag, dense, res } kind;
        const Vec* d = nullptr;
        const CMat* M = nullptr;
        int m = 1;
    };
    std::vector<Factor> f; // left to right
    const TriLU* lu = nullptr;
    const Vec* mask = nullptr; // resolvent factors are compressed to the mask support

    CVec apply(CVec v) const {
        for (auto it = f.rbegin(); it != f.rend(); ++it) v = step(*it, v, false);
        return v;
    }
    CVec apply_adjoint(CVec v) const {
        for (const auto& x : f) v = step(x, v, true);
        return v;
    }
    CVec step(const Factor& x, const CVec& v, bool adj) const {
        switch (x.kind) {
        case Factor::diag: return x.d->cast<cplx>().cwiseProduct(v);
        case Factor::dense: return adj ? CVec(x.M->adjoint() * v) : CVec(*x.M * v);
        case Factor::res: {
            CVec u = v;
            if (mask) u = mask->cast<cplx>().cwiseProduct(u);
            for (int i = 0; i < x.m; ++i) lu->solve_inplace(u, adj ? 'C' : 'N');
            if (mask) u = mask->cast<cplx>().cwiseProduct(u);
            return u;
        }
        }
        return v;
    }
};

} // namespace

MicrolocalSweep microlocal_norm_sweep(const Potential& V, const Grid& g, const WeightFamily& wf,
                                      const CutoffFamily& cf, const SweepSpec& sw,
                                      const MicrolocalSweepOptions& o, int workers, std::uint64_t seed) {
    if (g.domain != Domain::full_line) throw std::invalid_argument("microlocal sweeps need a 1-d full-line grid");
    if (g.n > 1024) throw std::invalid_argument("microlocal sweeps: n <= 1024 (dense localizers)");
    cf.validate(wf.kappa0);
    MicrolocalSweep out;
    out.C0 = cf.C0;

    const BandedOperator H = build_scaled_hamiltonian(g, V, o.ecs);
    const Vec inner = interior_mask(g, o.ecs);

    const double mu = wf.mu, t = o.t, e = o.eps, td = o.t_disjoint;
    const Vec win = observation_window(g, o.ecs);
    const Vec kGain = k_weight(g, mu, t - 0.5 - e).cwiseProduct(win),
              kLoss = k_weight(g, mu, -t - 0.5 - e).cwiseProduct(win), kDis = k_weight(g, mu, td).cwiseProduct(win);
    std::vector<Vec> kLossM;
    for (int m : o.powers) kLossM.push_back(k_weight(g, mu, -t - m + 0.5 - e).cwiseProduct(win));

    struct Est {
        std::string id;
        std::vector<std::pair<int, int>> f; // (kind, index) left to right; kinds 0 diag, 1 dense, 2 res
        int m = 1;
    };
    // dense slots
    enum { P, MM, MP, MMs, MPs, FsTp, FsTm, NOPS };
    // diag slots
    std::vector<const Vec*> diags{&kGain, &kLoss, &kDis};
    for (const auto& v : kLossM) diags.push_back(&v);
    std::vector<Est> ests{
        {"ii-a", {{0, 0}, {1, P}, {2, 1}, {0, 1}}},
        {"ii-b", {{0, 1}, {2, 1}, {1, P}, {0, 0}}},
        {"iii-a", {{0, 0}, {1, MM}, {2, 1}, {0, 1}}},
        {"iii-b", {{0, 1}, {2, 1}, {1, MP}, {0, 0}}},
        {"iv-b", {{0, 2}, {1, MMs}, {2, 1}, {1, MPs}, {0, 2}}},
        {"iv-a", {{0, 2}, {1, P}, {2, 1}, {1, FsTp}, {0, 2}}},
        {"iv-a2", {{0, 2}, {1, FsTm}, {2, 1}, {1, P}, {0, 2}}},
    };
    for (std::size_t i = 0; i < o.powers.size(); ++i) {
        const int m = o.powers[i], dl = 3 + int(i);
        const std::string s = "-m" + std::to_string(m);
        ests.push_back({"ii-a" + s, {{0, 0}, {1, P}, {2, m}, {0, dl}}});
        ests.push_back({"ii-b" + s, {{0, dl}, {2, m}, {1, P}, {0, 0}}});
        ests.push_back({"iii-a" + s, {{0, 0}, {1, MM}, {2, m}, {0, dl}}});
        ests.push_back({"iii-b" + s, {{0, dl}, {2, m}, {1, MP}, {0, 0}}});
    }
    if (o.negative_control) ests.push_back({"control", {{0, 0}, {1, MP}, {2, 1}, {0, 1}}});

    const std::size_t nE = sw.E.size(), nA = sw.arg_fractions.size(), nX = ests.size();
    std::vector<ProbeRow> rows(nE * nA * nX);
    std::vector<std::array<double, 3>> locnorm(nE);
    std::vector<char> alias(nE, 0);

    parallel_for(nE, workers, [&](std::size_t ie) {
        const double E = sw.E[ie];
        const PhaseSymbols ps{wf, E};
        auto q = [&](auto&& fn) {
            return weyl_quantize([&](double x, double xi) { return cplx(fn(ps.a0(x, xi), ps.b(x, xi))); }, g, {}, 1);
        };
        std::vector<WeylOperator> ops(NOPS);
        ops[P] = q([&](double a, double) { return cf.Fp(a); });
        ops[MM] = q([&](double a, double b) { return cf.Fm(a) * cf.Ftm(b); });
        ops[MP] = q([&](double a, double b) { return cf.Fm(a) * cf.Ftp(b); });
        ops[MMs] = q([&](double a, double b) { return cf.Fm(a) * cf.Ftm_sep(b); });
        ops[MPs] = q([&](double a, double b) { return cf.Fm(a) * cf.Ftp_sep(b); });
        ops[FsTp] = q([&](double a, double b) { return cf.Fm_sep(a) * cf.Ftp(b); });
        ops[FsTm] = q([&](double a, double b) { return cf.Fm_sep(a) * cf.Ftm(b); });
        for (const auto& w : ops) alias[ie] = alias[ie] || w.alias_warning;
        for (int l = 0; l < 3; ++l) {
            const CMat& M = ops[l].M;
            PowerOptions po = o.power;
            po.seed = mix_seed(seed ^ 0x5bd1e995ULL, ie * 3 + l);
            locnorm[ie][l] = power_norm([&](const CVec& v) -> CVec { return M * v; },
                                        [&](const CVec& v) -> CVec { return M.adjoint() * v; }, g.n, po)
                                 .norm;
        }
        for (std::size_t ia = 0; ia < nA; ++ia) {
            const double arg = sw.arg_fractions[ia] * sw.theta;
            const cplx z = std::polar(E, arg);
            const TriLU lu(shifted(H, z));
            for (std::size_t ix = 0; ix < nX; ++ix) {
                const auto& es = ests[ix];
                Chain ch;
                ch.lu = &lu;
                if (o.ecs.enabled) ch.mask = &inner;
                for (auto [kind, idx] : es.f) {
                    Chain::Factor fa{Chain::Factor::diag};
                    if (kind == 0) fa.d = diags[idx];
                    else if (kind == 1) {
                        fa.kind = Chain::Factor::dense;
                        fa.M = &ops[idx].M;
                    } else {
                        fa.kind = Chain::Factor::res;
                        fa.m = idx;
                    }
                    ch.f.push_back(fa);
                }
                const std::size_t r = (ie * nA + ia) * nX + ix;
                PowerOptions po = o.power;
                po.seed = mix_seed(seed, r);
                auto pr = power_norm([&](const CVec& v) { return ch.apply(v); },
                                     [&](const CVec& v) { return ch.apply_adjoint(v); }, g.n, po);
                ProbeRow& row = rows[r];
                row.experiment = es.id;
                row.E = E;
                row.arg = arg;
                row.expo = t;
                row.m = 1;
                for (auto [kind, idx] : es.f)
                    if (kind == 2) row.m = idx;
                row.norm = pr.norm;
                row.converged = pr.converged;
                if (!lu.ok()) row.flags = "singular";
                if (!pr.converged) row.flags += row.flags.empty() ? "cap" : ";cap";
            }
        }
    });

    out.rows = rows;
    for (char a : alias) out.alias_warning = out.alias_warning || a;
    for (const auto& r : rows) out.all_converged = out.all_converged && r.converged;
    for (const auto& es : ests) {
        std::vector<double> Ev, nv;
        for (const auto& r : rows)
            if (r.experiment == es.id) {
                Ev.push_back(r.E);
                nv.push_back(r.norm);
            }
        out.statistic[es.id] = decade_statistic(Ev, nv);
        // growth along rays: norm at smallest E over norm at largest E, minimized over rays
        double gmin = 1e300;
        for (std::size_t ia = 0; ia < nA; ++ia) {
            std::size_t lo = 0, hi = 0;
            for (std::size_t ie = 0; ie < nE; ++ie) {
                if (sw.E[ie] < sw.E[lo]) lo = ie;
                if (sw.E[ie] > sw.E[hi]) hi = ie;
            }
            const std::size_t ix = std::size_t(&es - ests.data());
            const double a = rows[(lo * nA + ia) * nX + ix].norm, b = rows[(hi * nA + ia) * nX + ix].norm;
            gmin = std::min(gmin, b > 0 ? a / b : 0.0);
        }
        out.growth[es.id] = gmin;
    }
    const char* names[3] = {"plus", "minus_minus", "minus_plus"};
    for (int l = 0; l < 3; ++l) {
        double mx = 0, mn = 1e300;
        for (const auto& ln : locnorm) {
            mx = std::max(mx, ln[l]);
            mn = std::min(mn, ln[l]);
        }
        out.localizer_norm_spread[names[l]] = mn > 0 ? mx / mn : 0.0;
    }
    return out;
}

FeffermanPhongReport fefferman_phong_probe(const WeightFamily& wf, const Grid& g, const std::vector<double>& Es,
                                           int workers) {
    FeffermanPhongReport rep;
    rep.E = Es;
    rep.min_eig.assign(Es.size(), 0.0);
    rep.C.assign(Es.size(), 0.0);
    std::vector<double> scale(Es.size(), 0.0);
    // chi supported in a0 in [0.25, 1.75]
    auto chi = [](double a) { return smooth_step((a - 0.25) / 0.5) * (1.0 - smooth_step((a - 1.25) / 0.5)); };
    parallel_for(Es.size(), workers, [&](std::size_t i) {
        const PhaseSymbols ps{wf, Es[i]};
        auto W = weyl_quantize(
            [&](double x, double xi) {
                const double w = wf.w(x, Es[i]), c = chi(ps.a0(x, xi));
                return cplx(w * w * c * c);
            },
            g, {}, 1);
        const CMat Hm = 0.5 * (W.M + W.M.adjoint());
        Eigen::SelfAdjointEigenSolver<CMat> es(Hm, Eigen::EigenvaluesOnly);
        rep.min_eig[i] = es.eigenvalues()[0];
        rep.C[i] = std::max(0.0, -rep.min_eig[i]);
        scale[i] = std::max(std::abs(es.eigenvalues()[0]), std::abs(es.eigenvalues()[g.n - 1]));
    });
    rep.scale = *std::max_element(scale.begin(), scale.end());
    const double cmax = *std::max_element(rep.C.begin(), rep.C.end());
    const double cmin = *std::min_element(rep.C.begin(), rep.C.end());
    // stable: all constants within 10x of each other, or negligible against the operator scale
    rep.stable = cmax <= 1e-10 * rep.scale || (cmin > 0 && cmax / cmin < 10.0);
    return rep;
}

} // namespace zl
