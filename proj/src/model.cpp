#include "zl/model.hpp"

#include <algorithm>
#include <sstream>

namespace zl {

void PotentialSpec::validate() const {
    if (!(mu > 0.0 && mu < 2.0)) throw std::invalid_argument("mu must lie in (0,2)");
    if (!(c1 > 0.0)) throw std::invalid_argument("c1 must be positive (V1 < 0 everywhere)");
    if (dim < 1) throw std::invalid_argument("dim must be >= 1");
    if (ell < 0) throw std::invalid_argument("ell must be >= 0");
    if (v2.kind == V2Kind::bump) {
        if (!(v2.radius > 0.0)) throw std::invalid_argument("v2.radius must be positive");
        if (!(v2.order > 0.0)) throw std::invalid_argument("v2.order must be positive");
        if (v2.center < 0.0) throw std::invalid_argument("v2.center must be >= 0");
    }
}

Potential::Potential(const PotentialSpec& s) : spec_(s) { spec_.validate(); }

Potential Potential::unchecked(const PotentialSpec& s) {
    Potential p;
    p.spec_ = s;
    return p;
}

double Potential::V1(double r) const {
    return -spec_.c1 * std::pow(1.0 + r * r, -spec_.mu / 2.0);
}

double Potential::dV1(double r) const {
    const double u = 1.0 + r * r;
    return spec_.c1 * spec_.mu * r * std::pow(u, -spec_.mu / 2.0 - 1.0);
}

double Potential::d2V1(double r) const {
    const double u = 1.0 + r * r, mu = spec_.mu;
    return spec_.c1 * mu * std::pow(u, -mu / 2.0 - 2.0) * (u - (mu + 2.0) * r * r);
}

namespace {

struct BumpEval {
    double v, d1, d2;
};

BumpEval eval_v2(const Bump& b, double r) {
    switch (b.kind) {
    case V2Kind::none:
        return {0, 0, 0};
    case V2Kind::bump: {
        const double s = (r - b.center) / b.radius;
        if (std::abs(s) >= 1.0) return {0, 0, 0};
        const double q = 1.0 - s * s;
        const double g = -b.order / q;
        const double v = b.amp * std::exp(g);
        if (v == 0.0) return {0, 0, 0};
        const double g1 = -b.order * 2.0 * s / (q * q);
        const double g2 = -b.order * (2.0 / (q * q) + 8.0 * s * s / (q * q * q));
        return {v, v * g1 / b.radius, v * (g1 * g1 + g2) / (b.radius * b.radius)};
    }
    case V2Kind::bracket: {
        const double u = 1.0 + r * r, p = b.order;
        return {b.amp * std::pow(u, -p / 2.0), -b.amp * p * r * std::pow(u, -p / 2.0 - 1.0),
                -b.amp * p * std::pow(u, -p / 2.0 - 2.0) * (u - (p + 2.0) * r * r)};
    }
    }
    return {0, 0, 0};
}

} // namespace

double Potential::V2(double r) const { return eval_v2(spec_.v2, r).v; }
double Potential::dV2(double r) const { return eval_v2(spec_.v2, r).d1; }
double Potential::d2V2(double r) const { return eval_v2(spec_.v2, r).d2; }

double Potential::v2_support() const {
    switch (spec_.v2.kind) {
    case V2Kind::none: return 0.0;
    case V2Kind::bump: return spec_.v2.center + spec_.v2.radius;
    case V2Kind::bracket: return std::numeric_limits<double>::infinity();
    }
    return 0.0;
}

PotentialValue Potential::eval(double x) const {
    const double r = std::abs(x);
    const auto b = eval_v2(spec_.v2, r);
    PotentialValue pv;
    pv.V1 = V1(r);
    pv.V2 = b.v;
    pv.V = pv.V1 + pv.V2;
    const double dr = dV1(r) + b.d1;
    pv.dV = x < 0 ? -dr : dr;
    return pv;
}

double Potential::W(double x) const {
    const double r = std::abs(x);
    const auto b = eval_v2(spec_.v2, r);
    return -2.0 * (V1(r) + b.v) - r * (dV1(r) + b.d1);
}

double Potential::x_grad_W(double x) const {
    const double r = std::abs(x);
    const auto b = eval_v2(spec_.v2, r);
    // W' = -3V' - r V''
    return r * (-3.0 * (dV1(r) + b.d1) - r * (d2V1(r) + b.d2));
}

Kappa0 kappa0_from_virial(const Potential& V, const std::vector<double>& grid) {
    Kappa0 k;
    const double mu = V.spec().mu;
    double best = std::numeric_limits<double>::infinity();
    for (double x : grid) {
        const double w = V.W(x);
        if (!(w > 0.0)) {
            std::ostringstream os;
            os << "virial violation: W(" << x << ") = " << w << " <= 0";
            k.message = os.str();
            return k;
        }
        const double q = w * std::pow(jbr(x), mu) / 2.0;
        if (q < best) {
            best = q;
            k.argmin = x;
        }
    }
    if (grid.empty()) {
        k.message = "empty grid";
        return k;
    }
    k.ok = true;
    k.raw = std::sqrt(best);
    k.used = 0.99 * k.raw;
    return k;
}

double WeightFamily::f(double x, double E) const {
    return std::sqrt(E / (kappa0 * kappa0) + std::pow(jbr(x), -mu) / (1.0 - mu / 2.0));
}

double WeightFamily::v(double x, double E) const {
    return E / (kappa0 * kappa0) + std::pow(jbr(x), -mu);
}

double WeightFamily::df(double x, double E) const {
    const double u = 1.0 + x * x;
    return -mu / (2.0 - mu) * x * std::pow(u, -mu / 2.0 - 1.0) / f(x, E);
}

double f_mourre(double x, double E, double mu) { return std::sqrt(E + std::pow(jbr(x), -mu)); }

WeightValues eval_weights(const WeightFamily& wf, double x, double E, const std::vector<double>& s_list) {
    WeightValues v{wf.f(x, E), wf.w(x, E), wf.k(x), jbr(x), {}};
    for (double s : s_list) v.powers.push_back(wf.bracket_pow(x, s));
    return v;
}

bool AssumptionReport::all_pass() const {
    return c1_negative && c2_symbol && c3_virial && c4_compact && c5_decay && c5p_compact_support &&
           unique_continuation && h_condition;
}

std::string AssumptionReport::describe() const {
    std::ostringstream os;
    os << "V1 <= -eps1<x>^-mu: " << c1_negative << " eps1=" << eps1 << "\n"
       << "symbol bounds: " << c2_symbol << " C0=" << C_alpha[0] << " C1=" << C_alpha[1]
       << " C2=" << C_alpha[2] << "\n"
       << "virial: " << c3_virial << " eps2=" << eps2 << "\n"
       << "V2 relatively compact: " << c4_compact << "\n"
       << "V2 decay: " << c5_decay << " delta=" << delta << " R=" << R << "\n"
       << "supp V2 compact: " << c5p_compact_support << "\n"
       << "unique continuation (hypothesis): " << unique_continuation << "\n"
       << "h = eps r^-mu/2, s=" << s << ": " << h_condition << " eps_max=" << eps_h_max << " C=" << C_h
       << " o(h) ratio at end=" << o_h_ratio_end << "\n"
       << "kappa0: " << kappa0.ok << " raw=" << kappa0.raw << " used=" << kappa0.used << " "
       << kappa0.message << "\n";
    return os.str();
}

AssumptionReport validate_assumptions(const Potential& V, const std::vector<double>& grid, double s) {
    AssumptionReport rep;
    rep.s = s;
    const auto& sp = V.spec();
    const double mu = sp.mu;
    if (grid.empty()) return rep;

    // solver nodes plus a 10x finer audit grid
    std::vector<double> g;
    const double lo = std::abs(*std::min_element(grid.begin(), grid.end(), [](double a, double b) {
        return std::abs(a) < std::abs(b);
    }));
    double hi = 0;
    for (double x : grid) hi = std::max(hi, std::abs(x));
    for (double x : grid) g.push_back(std::abs(x));
    const std::size_t na = 10 * grid.size();
    for (std::size_t i = 0; i <= na; ++i) g.push_back(lo + (hi - lo) * double(i) / double(na));
    std::sort(g.begin(), g.end());
    g.erase(std::unique(g.begin(), g.end()), g.end());

    rep.eps1 = std::numeric_limits<double>::infinity();
    rep.eps2 = std::numeric_limits<double>::infinity();
    for (double r : g) {
        const double b = jbr(r);
        const double v1 = V.V1(r), d1 = V.dV1(r), d2 = V.d2V1(r);
        rep.eps1 = std::min(rep.eps1, -v1 * std::pow(b, mu));
        rep.C_alpha[0] = std::max(rep.C_alpha[0], std::pow(b, mu) * std::abs(v1));
        rep.C_alpha[1] = std::max(rep.C_alpha[1], std::pow(b, mu + 1) * std::abs(d1));
        rep.C_alpha[2] = std::max(rep.C_alpha[2], std::pow(b, mu + 2) * std::abs(d2));
        const double W1 = -2.0 * v1 - r * d1;
        if (v1 < 0) rep.eps2 = std::min(rep.eps2, W1 / (-v1));
        else rep.eps2 = -1.0;
    }
    rep.c1_negative = rep.eps1 > 0.0 && std::isfinite(rep.eps1);
    rep.c2_symbol = std::isfinite(rep.C_alpha[0]) && std::isfinite(rep.C_alpha[1]) &&
                    std::isfinite(rep.C_alpha[2]);
    rep.c3_virial = rep.eps2 > 0.0 && std::isfinite(rep.eps2);

    const auto& b = sp.v2;
    switch (b.kind) {
    case V2Kind::none:
        rep.c4_compact = rep.c5_decay = rep.c5p_compact_support = true;
        rep.delta = 1.0;
        rep.R = 1.0;
        break;
    case V2Kind::bump:
        rep.c4_compact = rep.c5_decay = rep.c5p_compact_support = true;
        rep.delta = 1.0; // any delta works beyond the support
        rep.R = std::max(1.0, V.v2_support());
        break;
    case V2Kind::bracket:
        rep.c4_compact = b.order > 0.0;
        rep.delta = b.order - 1.0 - mu / 2.0;
        rep.c5_decay = rep.delta > 0.0;
        rep.c5p_compact_support = b.amp == 0.0;
        rep.R = 1.0;
        break;
    }

    // h condition on r > R
    const double R = std::isfinite(V.v2_support()) ? std::max(1.0, V.v2_support()) : 1.0;
    double e2 = std::numeric_limits<double>::infinity();
    std::vector<double> tail;
    for (double r : g)
        if (r > R) tail.push_back(r);
    for (double r : tail) {
        const double q = std::pow(r, mu) * (-(s + 1.0) * V.V1(r) - r * V.dV1(r));
        e2 = std::min(e2, q);
    }
    if (!tail.empty() && e2 > 0.0) {
        rep.eps_h_max = std::sqrt(e2);
        const double eps = rep.eps_h_max;
        auto h = [&](double r) { return eps * std::pow(r, -mu / 2.0); };
        auto ratio = [&](double r) { return (1.0 / r + r * std::abs(V.V2(r))) / h(r); };
        double sup = 0.0;
        for (double r : tail) {
            const double hp = -mu / 2.0 * eps * std::pow(r, -mu / 2.0 - 1.0);
            sup = std::max(sup, hp / (h(r) * h(r)));
        }
        rep.C_h = std::max(1.0, sup);
        const double r_end = tail.back(), r_mid = tail[tail.size() / 2];
        rep.o_h_ratio_end = ratio(r_end);
        rep.h_little_o = rep.o_h_ratio_end < ratio(r_mid) && rep.o_h_ratio_end < 1.0;
        rep.h_condition = rep.c1_negative && rep.h_little_o;
    }

    std::vector<double> signed_grid(grid.begin(), grid.end());
    rep.kappa0 = kappa0_from_virial(V, signed_grid);
    return rep;
}

} // namespace zl
