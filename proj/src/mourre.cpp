#include "zl/mourre.hpp"

#include <Eigen/Eigenvalues>
#include <stdexcept>

namespace zl {

BandedOperator regularized_operator(const BandedOperator& H, const Vec& W, cplx z, double eps) {
    const cplx a = 1.0 - 2.0 * I * eps;
    BandedOperator K = a * H;
    K.diag -= (I * eps) * W.cast<cplx>();
    K.diag.array() -= z;
    K.hermitian = false;
    return K;
}

SolveRecord regularized_resolvent(const BandedOperator& H, const Vec& W, cplx z, double eps, const CVec& rhs,
                                  double tol) {
    const auto K = regularized_operator(H, W, z, eps);
    TriLU lu(K);
    if (!lu.ok()) throw std::runtime_error("regularized_resolvent: loss of invertibility");
    SolveRecord rec;
    rec.u = lu.solve(rhs);
    const double nb = rhs.norm();
    rec.residual = (K.apply(rec.u) - rhs).norm() / (nb > 0 ? nb : 1.0);
    rec.ok = rec.residual <= tol;
    return rec;
}

DerivativeCheck derivative_identity_check(const BandedOperator& H, const BandedOperator& A, const Vec& W,
                                          const Vec& xgradW, cplx z, double eps, const CVec& phi, double delta) {
    DerivativeCheck dc;
    TriLU lu(regularized_operator(H, W, z, eps));
    auto R = [&](const CVec& v) { return lu.solve(v); };
    const CVec Wc = W.cast<cplx>(), Xc = xgradW.cast<cplx>();
    auto T = [&](const CVec& v) -> CVec { return 2.0 * H.apply(v) + Wc.cwiseProduct(v); };

    const CVec Rphi = R(phi);
    const CVec exact = I * R(T(Rphi));
    auto fd = [&](double d) {
        TriLU lp(regularized_operator(H, W, z, eps + d)), lm(regularized_operator(H, W, z, eps - d));
        return CVec((lp.solve(phi) - lm.solve(phi)) / (2.0 * d));
    };
    const double ne = exact.norm();
    dc.fd_error = (fd(delta) - exact).norm() / ne;
    dc.fd_error_half = (fd(delta / 2) - exact).norm() / ne;

    const CVec comm = R(A.apply(phi)) - A.apply(Rphi);
    const CVec rxr = R(Xc.cwiseProduct(Rphi));
    const cplx pre = 1.0 / (1.0 - 2.0 * I * eps);
    dc.comm_eps = (pre * (comm + eps * rxr) - exact).norm() / ne;
    dc.comm_ieps = (pre * (comm + I * eps * rxr) - exact).norm() / ne;
    return dc;
}

BandedOperator gamma_squared(const BandedOperator& p2, const Vec& f2) {
    BandedOperator g = p2;
    g.diag += f2.cast<cplx>();
    return g;
}

QuadraticRatio quadratic_estimate_ratio(const BandedOperator& H, const Vec& W, const BandedOperator& gamma2,
                                        cplx z, double eps, const Vec& B, const PowerOptions& opt) {
    QuadraticRatio q;
    TriLU lu(regularized_operator(H, W, z, eps));
    if (!lu.ok()) throw std::runtime_error("quadratic_estimate_ratio: singular");
    const CVec b = B.cast<cplx>();
    // ||gamma R B||^2 = ||B^* R^* gamma^2 R B||
    auto Q = [&](const CVec& v) -> CVec {
        return b.cwiseProduct(lu.solve_adjoint(gamma2.apply(lu.solve(b.cwiseProduct(v)))));
    };
    auto M = [&](const CVec& v) -> CVec { return b.cwiseProduct(lu.solve(b.cwiseProduct(v))); };
    auto Mt = [&](const CVec& v) -> CVec { return b.cwiseProduct(lu.solve_adjoint(b.cwiseProduct(v))); };
    const int n = H.size();
    const auto pq = power_norm(Q, Q, n, opt);
    PowerOptions o2 = opt;
    o2.seed = opt.seed + 1;
    const auto pm = power_norm(M, Mt, n, o2);
    q.lhs = eps * pq.norm;
    q.rhs = pm.norm;
    q.ratio = q.rhs > 0 ? q.lhs / q.rhs : 0.0;
    q.converged = pq.converged && pm.converged;
    return q;
}

NumRangeReport numerical_range_positivity(const BandedOperator& H, const BandedOperator& p2, const Vec& W,
                                          const Vec& bracket_mu, const RegularizedPoint& pt,
                                          const std::vector<CVec>& testset) {
    NumRangeReport rep;
    const auto X = regularized_operator(H, W, pt.zeta, pt.eps);
    const auto Xs = X.adjoint();
    const double C1 = pt.c.C1, C2 = pt.c.C2;
    // -C1 Re X - eps^{-1} C2 Im X
    BandedOperator L = cplx(-C1 / 2.0) * (X + Xs);
    L = L + cplx(-C2 / pt.eps) * ((1.0 / (2.0 * I)) * (X + (-1.0) * Xs));
    // p^2 + C2 W + V + g
    const CVec V = H.diag - p2.diag;
    BandedOperator Rhs = p2;
    Rhs.diag += C2 * W.cast<cplx>() + V;
    Rhs.diag.array() += pt.g();
    const CMat diff = L.dense() - Rhs.dense();
    const CMat ref = Rhs.dense();
    rep.identity_residual = diff.cwiseAbs().maxCoeff() / ref.cwiseAbs().maxCoeff();

    for (const auto& u : testset) {
        const cplx a = u.dot(L.apply(u)), b = u.dot(Rhs.apply(u));
        rep.vector_residual = std::max(rep.vector_residual, std::abs(a - b) / std::abs(b));
    }
    const Vec m = C2 * W + V.real() - bracket_mu;
    rep.margin = m.minCoeff();
    rep.positive = rep.margin >= 0.0;
    for (std::size_t t = 0; t < testset.size(); ++t) {
        const auto& u = testset[t];
        const double form = (u.cwiseAbs2().array() * m.array()).sum();
        if (form < 0) {
            rep.offending = int(t);
            rep.positive = false;
            break;
        }
    }
    return rep;
}

double calibrate_C2(const Vec& W, const Vec& V, const Vec& bracket_mu, double cmax) {
    for (double c = 0.0; c <= cmax + 1e-12; c += 0.25)
        if ((c * W + V - bracket_mu).minCoeff() >= 0.0) return c;
    return -1.0;
}

double eps0_prime(const std::vector<double>& eps_grid, const std::vector<cplx>& zs, const MourreConstants& c) {
    double best = 0.0;
    for (double e : eps_grid) {
        bool ok = true;
        for (cplx z : zs) {
            RegularizedPoint p{z, e, c};
            if (std::abs(z) > p.g()) ok = false;
        }
        if (ok) best = std::max(best, e);
    }
    return best;
}

double weighted_epsilonA_bound(const BandedOperator& H, const BandedOperator& A, const Vec& W, cplx z, double eps,
                               const Vec& weight, double Creg) {
    const int n = H.size();
    if (n > 512) throw std::invalid_argument("weighted_epsilonA_bound: n <= 512 (dense)");
    Eigen::SelfAdjointEigenSolver<CMat> es(A.dense());
    if (es.info() != Eigen::Success) throw std::runtime_error("dense eigensolve failed");
    const Vec lam = es.eigenvalues();
    Vec d(n);
    for (int j = 0; j < n; ++j) d[j] = 1.0 / std::sqrt(Creg + eps * eps * lam[j] * lam[j]);
    const CMat U = es.eigenvectors();
    const CMat Ainv = U * d.cast<cplx>().asDiagonal() * U.adjoint();
    const CMat K = regularized_operator(H, W, z, eps).dense();
    const CMat R = K.partialPivLu().inverse();
    const CMat D = weight.cast<cplx>().asDiagonal();
    return opnorm(Ainv * D * R * D * Ainv);
}

} // namespace zl
