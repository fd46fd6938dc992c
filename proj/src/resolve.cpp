#include "zl/resolve.hpp"

#include "zl/parallel.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <map>
#include <stdexcept>

namespace zl {

SolveRecord shifted_solve(const BandedOperator& H, cplx z, const CVec& rhs, double tol) {
    SolveRecord rec;
    TriLU lu(shifted(H, z));
    if (!lu.ok()) throw std::runtime_error("shifted_solve: zeta numerically on the spectrum");
    rec.u = lu.solve(rhs);
    const CVec r = H.apply(rec.u) - z * rec.u - rhs;
    const double nb = rhs.norm();
    rec.residual = nb > 0 ? r.norm() / nb : r.norm();
    rec.ok = rec.residual <= tol;
    return rec;
}

Resolvent::Resolvent(const BandedOperator& H, cplx z) : z_(z), lu_(shifted(H, z)) {}

CVec Resolvent::apply_power(CVec v, int m) const {
    for (int k = 0; k < m; ++k) lu_.solve_inplace(v, 'N');
    return v;
}

CVec Resolvent::apply_adjoint_power(CVec v, int m) const {
    for (int k = 0; k < m; ++k) lu_.solve_inplace(v, 'C');
    return v;
}

PowerResult weighted_norm(const Resolvent& R, const Vec& left, const Vec& right, int m, const PowerOptions& opt) {
    if (m < 1) throw std::invalid_argument("m >= 1");
    const CVec L = left.cast<cplx>(), Rw = right.cast<cplx>();
    auto M = [&](const CVec& v) -> CVec {
        return L.cwiseProduct(R.apply_power(Rw.cwiseProduct(v), m));
    };
    auto Mt = [&](const CVec& v) -> CVec {
        return Rw.cwiseProduct(R.apply_adjoint_power(L.cwiseProduct(v), m));
    };
    return power_norm(M, Mt, R.size(), opt);
}

PowerResult weighted_norm(const BandedOperator& H, cplx z, const Vec& left, const Vec& right, int m,
                          const PowerOptions& opt) {
    Resolvent R(H, z);
    if (!R.ok()) throw std::runtime_error("weighted_norm: singular shift");
    return weighted_norm(R, left, right, m, opt);
}

double opnorm(const CMat& m) {
    if (m.size() == 0) return 0.0;
    Eigen::BDCSVD<CMat> svd(m);
    return svd.singularValues()(0);
}

double weighted_norm_dense(const BandedOperator& H, cplx z, const Vec& left, const Vec& right, int m) {
    const int n = H.size();
    CMat A = shifted(H, z).dense();
    Eigen::PartialPivLU<CMat> lu(A);
    CMat R = lu.inverse();
    CMat P = R;
    for (int k = 1; k < m; ++k) P = P * R;
    CMat M = left.cast<cplx>().asDiagonal() * P * right.cast<cplx>().asDiagonal();
    (void)n;
    return opnorm(M);
}

namespace {

// bins [E0 10^k, E0 10^{k+1}) anchored at the smallest modulus; top bin closed
std::map<int, double> bin_max(const std::vector<double>& E, const std::vector<double>& norms) {
    std::map<int, double> out;
    if (E.empty()) return out;
    const double e0 = *std::min_element(E.begin(), E.end());
    const double e1 = *std::max_element(E.begin(), E.end());
    const int top = std::max(0, int(std::ceil(std::log10(e1 / e0) - 1e-9)) - 1);
    for (std::size_t i = 0; i < E.size(); ++i) {
        int k = int(std::floor(std::log10(E[i] / e0) + 1e-9));
        k = std::clamp(k, 0, top);
        auto it = out.find(k);
        if (it == out.end()) out[k] = norms[i];
        else it->second = std::max(it->second, norms[i]);
    }
    return out;
}

} // namespace

std::vector<double> decade_maxima(const std::vector<double>& E, const std::vector<double>& norms) {
    std::vector<double> v;
    for (auto& [k, m] : bin_max(E, norms)) v.push_back(m);
    return v;
}

double decade_statistic(const std::vector<double>& E, const std::vector<double>& norms) {
    auto b = bin_max(E, norms);
    if (b.empty()) return 0.0;
    return b.begin()->second / b.rbegin()->second;
}

double sweep_growth(const ResolventProbe& p) {
    std::map<double, std::vector<std::pair<double, double>>> rays;
    for (auto& r : p.rows) rays[r.arg].push_back({r.E, r.norm});
    double g = std::numeric_limits<double>::infinity();
    for (auto& [a, v] : rays) {
        auto lo = *std::min_element(v.begin(), v.end());
        auto hi = *std::max_element(v.begin(), v.end());
        g = std::min(g, lo.second / hi.second);
    }
    return rays.empty() ? 0.0 : g;
}

ResolventProbe lap_sweep(const BandedOperator& H, const SweepSpec& sw, const Vec& left, const Vec& right,
                         const std::string& experiment, double expo, const PowerOptions& opt, int workers,
                         std::uint64_t seed) {
    const std::size_t na = sw.arg_fractions.size();
    const std::size_t npts = sw.E.size() * na;
    ResolventProbe probe;
    probe.rows.resize(npts);
    const bool unit_weights = left.maxCoeff() <= 1.0 && right.maxCoeff() <= 1.0;
    parallel_for(npts, workers, [&](std::size_t idx) {
        const double E = sw.E[idx / na];
        const double arg = sw.arg_fractions[idx % na] * sw.theta;
        SectorPoint sp{E, arg, sw.theta, true};
        const cplx z = sp.zeta();
        ProbeRow row;
        row.experiment = experiment;
        row.E = E;
        row.arg = arg;
        row.side = +1;
        row.expo = expo;
        row.m = sw.m;
        Resolvent R(H, z);
        if (!R.ok()) {
            row.flags = "singular";
            row.converged = false;
            probe.rows[idx] = row;
            return;
        }
        // residual of a single solve on a fixed probe vector
        const CVec b = random_vector(H.size(), mix_seed(seed, 7919 + idx));
        const CVec u = R.apply(b);
        row.residual = (H.apply(u) - z * u - b).norm() / b.norm();
        PowerOptions o = opt;
        o.seed = mix_seed(seed, idx);
        const auto pr = weighted_norm(R, left, right, sw.m, o);
        row.norm = pr.norm;
        row.converged = pr.converged;
        if (!pr.converged) row.flags = "power-cap";
        if (row.residual > 1e-10) row.flags += row.flags.empty() ? "residual" : ";residual";
        probe.rows[idx] = row;
    });
    std::vector<double> Es, ns;
    for (auto& r : probe.rows) {
        Es.push_back(r.E);
        ns.push_back(r.norm);
        probe.sup = std::max(probe.sup, r.norm);
        probe.all_converged = probe.all_converged && r.converged;
        if (unit_weights) {
            const double im = r.E * std::sin(r.arg);
            if (r.norm > std::pow(1.0 / im, r.m) * (1 + 1e-6)) probe.bound_ok = false;
        }
    }
    probe.statistic = decade_statistic(Es, ns);
    probe.growth = sweep_growth(probe);
    return probe;
}

HoelderFit hoelder_fit(const BandedOperator& H, const std::vector<HoelderPair>& pairs, const Vec& weight,
                       const PowerOptions& opt, int workers, std::uint64_t seed) {
    for (auto& p : pairs)
        if (p.z1 == p.z2) throw std::invalid_argument("hoelder_fit: coincident pair");
    HoelderFit fit;
    fit.sep.resize(pairs.size());
    fit.diff.resize(pairs.size());
    const CVec w = weight.cast<cplx>();
    parallel_for(pairs.size(), workers, [&](std::size_t i) {
        Resolvent R1(H, pairs[i].z1), R2(H, pairs[i].z2);
        auto M = [&](const CVec& v) -> CVec {
            const CVec x = w.cwiseProduct(v);
            return w.cwiseProduct(R1.apply(x) - R2.apply(x));
        };
        auto Mt = [&](const CVec& v) -> CVec {
            const CVec x = w.cwiseProduct(v);
            return w.cwiseProduct(R1.apply_adjoint(x) - R2.apply_adjoint(x));
        };
        PowerOptions o = opt;
        o.seed = mix_seed(seed, i);
        fit.diff[i] = power_norm(M, Mt, H.size(), o).norm;
        fit.sep[i] = std::abs(pairs[i].z1 - pairs[i].z2);
    });
    const auto lf = loglog_fit(fit.sep, fit.diff);
    fit.gamma = lf.slope;
    fit.r2 = lf.r2;
    fit.ill_conditioned = pairs.size() < 8 || !lf.ok || lf.r2 < 0.9;
    return fit;
}

BoundaryValues boundary_values(const BandedOperator& H, const Vec& left, const Vec& right, double lambda,
                               double lambda_max, const LadderSpec& ls, int workers) {
    if (!(lambda >= 0.0 && lambda <= lambda_max)) throw std::invalid_argument("boundary_values: lambda outside [0, E_max]");
    BoundaryValues bv;
    const double lmax = left.maxCoeff(), rmax = right.maxCoeff();
    for (int j = 0; j < left.size(); ++j)
        if (left[j] >= ls.weight_floor * lmax) bv.rows.push_back(j);
    for (int j = 0; j < right.size(); ++j)
        if (right[j] >= ls.weight_floor * rmax) bv.cols.push_back(j);
    const int nr = int(bv.rows.size()), nc = int(bv.cols.size());
    const int K = ls.halvings + 1;

    std::vector<CMat> P(K, CMat(nr, nc)), Mn(K, CMat(nr, nc));
    const int n = H.size();
    for (int k = 0; k < K; ++k) {
        const double eta = ls.eta0 * std::pow(0.5, k);
        Resolvent Rp(H, cplx(lambda, eta)), Rm(H, cplx(lambda, -eta));
        parallel_for(std::size_t(nc), workers, [&](std::size_t c) {
            CVec e = CVec::Zero(n);
            e[bv.cols[c]] = right[bv.cols[c]];
            const CVec up = Rp.apply(e), um = Rm.apply(e);
            for (int r = 0; r < nr; ++r) {
                P[k](r, c) = left[bv.rows[r]] * up[bv.rows[r]];
                Mn[k](r, c) = left[bv.rows[r]] * um[bv.rows[r]];
            }
        });
    }
    // Richardson, order 1 in eta
    auto rich = [&](const std::vector<CMat>& A, double& err) {
        std::vector<CMat> X;
        for (int k = 1; k < K; ++k) X.push_back(2.0 * A[k] - A[k - 1]);
        err = X.size() > 1 ? opnorm(X.back() - X[X.size() - 2]) : 0.0;
        return X.empty() ? A.back() : X.back();
    };
    bv.plus = rich(P, bv.err_plus);
    bv.minus = rich(Mn, bv.err_minus);
    for (int k = 1; k < K; ++k) bv.ladder_increments.push_back(opnorm(P[k] - P[k - 1]));
    if (bv.ladder_increments.size() >= 2) {
        const auto& d = bv.ladder_increments;
        bv.diverged = d.back() >= d[d.size() - 2];
    }
    bv.Eprime = (bv.plus - bv.minus) / (2.0 * pi * I);
    bv.err = (bv.err_plus + bv.err_minus) / (2.0 * pi);
    if (bv.rows == bv.cols) {
        const double ne = opnorm(bv.Eprime);
        if (ne > 0) {
            bv.hermitian_defect = opnorm(bv.Eprime - bv.Eprime.adjoint()) / ne;
            Eigen::SelfAdjointEigenSolver<CMat> es((bv.Eprime + bv.Eprime.adjoint()) / 2.0);
            bv.min_eig = es.eigenvalues()(0) / ne;
        }
    }
    return bv;
}

ExpansionFit expansion_fit(const BandedOperator& H, const Vec& weight, const std::vector<double>& lambdas, int J,
                           const LadderSpec& ls0, double lambda_bar, int workers) {
    if (int(lambdas.size()) < J + 3) throw std::invalid_argument("expansion_fit needs >= J+3 window points");
    ExpansionFit ef;
    ef.J = J;
    LadderSpec ls = ls0;
    ls.eta0 = 1e-2 * lambda_bar;
    const double lmax = *std::max_element(lambdas.begin(), lambdas.end());
    std::vector<BoundaryValues> bvs;
    for (double l : lambdas) bvs.push_back(boundary_values(H, weight, weight, l, lmax, ls, workers));
    const int nr = int(bvs[0].rows.size()), nc = int(bvs[0].cols.size());
    const int L = int(lambdas.size());

    auto fit_side = [&](bool plus, std::vector<CMat>& coeff, std::vector<double>& res) {
        for (int order = 0; order <= J; ++order) {
            Mat V(L, order + 1);
            for (int i = 0; i < L; ++i)
                for (int j = 0; j <= order; ++j) V(i, j) = std::pow(lambdas[i], j);
            Eigen::ColPivHouseholderQR<Mat> qr(V);
            std::vector<CMat> c(order + 1, CMat::Zero(nr, nc));
            for (int r = 0; r < nr; ++r)
                for (int s = 0; s < nc; ++s) {
                    Eigen::VectorXcd y(L);
                    for (int i = 0; i < L; ++i) y[i] = plus ? bvs[i].plus(r, s) : bvs[i].minus(r, s);
                    const Vec cr = qr.solve(Vec(y.real())), ci = qr.solve(Vec(y.imag()));
                    for (int j = 0; j <= order; ++j) c[j](r, s) = cplx(cr[j], ci[j]);
                }
            double worst = 0;
            for (int i = 0; i < L; ++i) {
                CMat f = CMat::Zero(nr, nc);
                for (int j = 0; j <= order; ++j) f += std::pow(lambdas[i], j) * c[j];
                worst = std::max(worst, opnorm(f - (plus ? bvs[i].plus : bvs[i].minus)));
            }
            res.push_back(worst);
            if (order == J) coeff = c;
        }
    };
    fit_side(true, ef.coeff_plus, ef.residual_plus);
    fit_side(false, ef.coeff_minus, ef.residual_minus);
    for (int j = 1; j <= J; ++j)
        if (ef.residual_plus[j] > ef.residual_plus[j - 1] * (1 + 1e-9)) ef.overfit = true;
    ef.r0_gap = opnorm(ef.coeff_plus[0] - ef.coeff_minus[0]);
    if (nr == nc) ef.adjoint_defect = opnorm(ef.coeff_minus[0] - ef.coeff_plus[0].adjoint());
    const auto lo = std::min_element(lambdas.begin(), lambdas.end()) - lambdas.begin();
    ef.eprime0 = opnorm(bvs[lo].Eprime);
    return ef;
}

namespace {

std::vector<int> support_of(const Vec& v2) {
    std::vector<int> S;
    for (int j = 0; j < v2.size(); ++j)
        if (v2[j] != 0.0) S.push_back(j);
    return S;
}

} // namespace

CVec perturbed_resolvent_apply(const BandedOperator& H1, const Vec& v2, cplx z, const CVec& phi) {
    Resolvent R1(H1, z);
    if (!R1.ok()) throw std::runtime_error("perturbed_resolvent: singular shift");
    const auto S = support_of(v2);
    if (S.empty()) return R1.apply(phi);
    const int s = int(S.size()), n = H1.size();
    // (I_S + V2 R1|_SS) y = -V2 (R1 phi)|_S
    CMat K = CMat::Identity(s, s);
    for (int c = 0; c < s; ++c) {
        CVec e = CVec::Zero(n);
        e[S[c]] = 1.0;
        const CVec col = R1.apply(e);
        for (int r = 0; r < s; ++r) K(r, c) += v2[S[r]] * col[S[r]];
    }
    const CVec u1 = R1.apply(phi);
    CVec rhs(s);
    for (int r = 0; r < s; ++r) rhs[r] = -v2[S[r]] * u1[S[r]];
    const CVec y = K.partialPivLu().solve(rhs);
    CVec chi = phi;
    for (int r = 0; r < s; ++r) chi[S[r]] += y[r];
    return R1.apply(chi);
}

FredholmReport fredholm_condition(const BandedOperator& H1, const Vec& v2, cplx z, const Vec& bracket_s,
                                  const PowerOptions& opt) {
    FredholmReport rep;
    Resolvent R1(H1, z);
    if (!R1.ok()) throw std::runtime_error("fredholm_condition: singular shift");
    const auto S = support_of(v2);
    rep.support = int(S.size());
    const int n = H1.size(), s = int(S.size());
    const CVec D = bracket_s.cast<cplx>(), Di = bracket_s.cwiseInverse().cast<cplx>(), V = v2.cast<cplx>();
    auto G = [&](const CVec& v) -> CVec { return D.cwiseProduct(V.cwiseProduct(R1.apply(Di.cwiseProduct(v)))); };
    auto Gt = [&](const CVec& v) -> CVec { return Di.cwiseProduct(R1.apply_adjoint(V.cwiseProduct(D.cwiseProduct(v)))); };
    auto T = [&](const CVec& v) -> CVec { return v + G(v); };
    auto Tt = [&](const CVec& v) -> CVec { return v + Gt(v); };
    rep.norm_T = power_norm(T, Tt, n, opt).norm;
    if (s == 0) {
        rep.norm_Tinv = 1.0;
        rep.cond = rep.norm_T;
        return rep;
    }
    CMat Gss = CMat::Zero(s, s);
    for (int c = 0; c < s; ++c) {
        CVec e = CVec::Zero(n);
        e[S[c]] = 1.0;
        const CVec col = G(e);
        for (int r = 0; r < s; ++r) Gss(r, c) = col[S[r]];
    }
    const Eigen::PartialPivLU<CMat> lu(CMat::Identity(s, s) + Gss);
    const Eigen::PartialPivLU<CMat> lut(CMat::Identity(s, s) + Gss.adjoint());
    auto Tinv = [&](const CVec& v) -> CVec {
        const CVec g = G(v);
        CVec gs(s);
        for (int r = 0; r < s; ++r) gs[r] = g[S[r]];
        const CVec y = lu.solve(gs);
        CVec x = v;
        for (int r = 0; r < s; ++r) x[S[r]] -= y[r];
        return x;
    };
    auto Tinvt = [&](const CVec& v) -> CVec {
        CVec vs(s);
        for (int r = 0; r < s; ++r) vs[r] = v[S[r]];
        const CVec zz = lut.solve(vs);
        CVec e = CVec::Zero(n);
        for (int r = 0; r < s; ++r) e[S[r]] = zz[r];
        return v - Gt(e);
    };
    rep.norm_Tinv = power_norm(Tinv, Tinvt, n, opt).norm;
    rep.cond = rep.norm_T * rep.norm_Tinv;
    rep.near_singular = !(rep.cond < 1e12);
    return rep;
}

} // namespace zl
