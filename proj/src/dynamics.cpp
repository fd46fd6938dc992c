#include "zl/dynamics.hpp"

#include "zl/parallel.hpp"

#include <stdexcept>

namespace zl {

double EnergyWindow::operator()(double l) const {
    if (E1 <= 0) return 0.0;
    const double u = l / E1;
    if (std::abs(u) >= 1.0) return 0.0;
    const double b = std::exp(1.0 - 1.0 / (1.0 - u * u));
    return vanish_at_zero ? u * b : b;
}

int LowEnergyPropagator::first_nonnegative() const {
    int k = 0;
    while (k < lambda.size() && lambda[k] < 0) ++k;
    return k;
}

CVec LowEnergyPropagator::evolve(const CVec& v, double t) const {
    const int k0 = first_nonnegative(), m = int(lambda.size()) - k0;
    CVec c = phi.middleCols(k0, m).transpose().cast<cplx>() * v;
    for (int i = 0; i < m; ++i) c[i] *= f(lambda[k0 + i]) * std::exp(-I * t * lambda[k0 + i]);
    return phi.middleCols(k0, m).cast<cplx>() * c;
}

LowEnergyPropagator diagonalize_low_energy(const BandedOperator& H, double Lambda, double E1) {
    if (H.hermitian_residual() > 0.0) throw std::invalid_argument("diagonalize_low_energy: H must be Hermitian");
    const int n = H.size();
    for (int j = 0; j < n; ++j)
        if (H.diag[j].imag() != 0.0 || (j + 1 < n && H.lower[j].imag() != 0.0))
            throw std::invalid_argument("diagonalize_low_energy: real symmetric H expected");
    LowEnergyPropagator P;
    P.Lambda = Lambda;
    P.f.E1 = E1 > 0 ? E1 : Lambda / 4;
    if (Lambda > 0 && P.f.E1 > Lambda / 2) throw std::invalid_argument("diagonalize_low_energy: window must sit in [-Lambda/2, Lambda/2]");
    const Vec d = H.diag.real(), e = H.lower.real();
    auto te = tridiagonal_eigen(d, e, Lambda);
    P.ok = te.ok();
    if (!P.ok) return P;
    P.lambda = te.values;
    P.phi = te.vectors;
    const CMat Phi = P.phi.cast<cplx>();
    for (int k = 0; k < P.lambda.size(); ++k) {
        const CVec r = H.apply(Phi.col(k)) - P.lambda[k] * Phi.col(k);
        P.max_residual = std::max(P.max_residual, r.norm());
    }
    P.negative_count = P.first_nonnegative();
    const int k0 = P.negative_count;
    double gmax = 0;
    for (int k = k0; k + 1 < P.lambda.size() && P.lambda[k] < P.f.E1; ++k) gmax = std::max(gmax, P.lambda[k + 1] - P.lambda[k]);
    if (k0 + 1 < P.lambda.size()) P.spacing_near_zero = P.lambda[k0 + 1] - P.lambda[k0];
    P.T_max = gmax > 0 ? 1.0 / gmax : 0.0;
    return P;
}

namespace {

DecayReport finish(DecayReport r) {
    std::vector<double> at;
    for (double t : r.t) at.push_back(std::abs(t));
    r.slope = loglog_fit(at, r.value).slope;
    return r;
}

} // namespace

DecayReport local_decay_check(const LowEnergyPropagator& P, const Grid& g, const BoundaryValues& Ep, double s,
                              const std::vector<double>& ts, const PowerOptions& opt, int workers,
                              std::uint64_t seed) {
    if (Ep.rows != Ep.cols) throw std::invalid_argument("local_decay_check: square E' block expected");
    const auto& K = Ep.rows;
    const int nk = int(K.size()), k0 = P.first_nonnegative(), m = int(P.lambda.size()) - k0;
    // rows of <x>^{-s} phi_n on K
    Mat B(nk, m);
    for (int i = 0; i < nk; ++i) {
        const double w = std::pow(jbr(g.x[K[i]]), -s);
        for (int c = 0; c < m; ++c) B(i, c) = w * P.phi(K[i], k0 + c);
    }
    Vec fl(m);
    for (int c = 0; c < m; ++c) fl[c] = P.f(P.lambda[k0 + c]);
    const CMat Bc = B.cast<cplx>();

    DecayReport r;
    r.s = s;
    r.t = ts;
    r.value.assign(ts.size(), 0.0);
    std::vector<char> conv(ts.size(), 1);
    parallel_for(ts.size(), workers, [&](std::size_t i) {
        const double t = ts[i];
        CVec ph(m);
        for (int c = 0; c < m; ++c) ph[c] = fl[c] * std::exp(-I * t * P.lambda[k0 + c]);
        const cplx corr = I / t * P.f.at_zero();
        auto A = [&](const CVec& v) -> CVec {
            CVec c = Bc.transpose() * v;
            return Bc * ph.cwiseProduct(c) + corr * (Ep.Eprime * v);
        };
        auto At = [&](const CVec& v) -> CVec {
            CVec c = Bc.transpose() * v;
            return Bc * ph.conjugate().cwiseProduct(c) + std::conj(corr) * (Ep.Eprime.adjoint() * v);
        };
        PowerOptions po = opt;
        po.seed = mix_seed(seed, i);
        auto pr = power_norm(A, At, nk, po);
        r.value[i] = pr.norm;
        conv[i] = pr.converged;
    });
    for (std::size_t i = 0; i < ts.size(); ++i) {
        r.converged = r.converged && conv[i];
        if (std::abs(ts[i]) > P.T_max) r.horizon_violation = true;
    }
    return finish(r);
}

DecayReport quantum_minimal_velocity(const LowEnergyPropagator& P, const Grid& g, double s, double mu, double eps,
                                     const std::vector<double>& ts, const PowerOptions& opt, int workers,
                                     std::uint64_t seed) {
    const int k0 = P.first_nonnegative(), m = int(P.lambda.size()) - k0, n = g.n;
    Mat B(n, m);
    for (int j = 0; j < n; ++j) {
        const double w = std::pow(jbr(g.x[j]), -s);
        for (int c = 0; c < m; ++c) B(j, c) = w * P.phi(j, k0 + c);
    }
    Vec fl(m);
    for (int c = 0; c < m; ++c) fl[c] = P.f(P.lambda[k0 + c]);
    if (g.domain == Domain::full_line) throw std::invalid_argument("quantum_minimal_velocity: half-line grids");
    const CMat Phi = P.phi.middleCols(k0, m).cast<cplx>(), Bt = B.transpose().cast<cplx>(), Bc = B.cast<cplx>();

    DecayReport r;
    r.s = s;
    r.kappa = (1.0 - eps) / (1.0 + mu / 2.0);
    r.t = ts;
    r.value.assign(ts.size(), 0.0);
    std::vector<char> conv(ts.size(), 1);
    parallel_for(ts.size(), workers, [&](std::size_t i) {
        const double t = ts[i], R = std::pow(std::abs(t), r.kappa);
        int rows = 0;
        while (rows < n && std::abs(g.x[rows]) < R) ++rows;
        if (rows == 0) return;
        const auto top = Phi.topRows(rows);
        CVec ph(m);
        for (int c = 0; c < m; ++c) ph[c] = fl[c] * std::exp(-I * t * P.lambda[k0 + c]);
        auto A = [&](const CVec& v) -> CVec { return top * ph.cwiseProduct(Bt * v); };
        auto At = [&](const CVec& v) -> CVec { return Bc * ph.conjugate().cwiseProduct(top.adjoint() * v); };
        PowerOptions po = opt;
        po.seed = mix_seed(seed, i);
        auto pr = power_norm(A, At, n, po);
        r.value[i] = pr.norm;
        conv[i] = pr.converged;
    });
    for (std::size_t i = 0; i < ts.size(); ++i) {
        r.converged = r.converged && conv[i];
        if (std::abs(ts[i]) > P.T_max) r.horizon_violation = true;
    }
    return finish(r);
}

int minimal_velocity_order(double s, double mu, double eps, double eps_prime) {
    const double hi = s / (1.0 + mu / 2.0) + 0.5, lo = 0.5 + (1.0 + 0.5 * eps_prime) / eps;
    const int m = int(std::floor(lo)) + 1;
    return m < hi ? m : 0;
}

CMat smoothed_spectral_density(const LowEnergyPropagator& P, const Vec& weight, const std::vector<int>& nodes,
                               double lambda, double sigma) {
    const int nk = int(nodes.size());
    CMat D = CMat::Zero(nk, nk);
    for (int k = 0; k < P.lambda.size(); ++k) {
        const double u = (lambda - P.lambda[k]) / sigma;
        if (std::abs(u) > 8) continue;
        const double gk = std::exp(-0.5 * u * u) / (sigma * std::sqrt(2 * pi));
        Vec col(nk);
        for (int i = 0; i < nk; ++i) col[i] = weight[nodes[i]] * P.phi(nodes[i], k);
        D += gk * (col * col.transpose()).cast<cplx>();
    }
    return D;
}

} // namespace zl
