#include "zl/discrete.hpp"

#include <stdexcept>

namespace zl {

Grid Grid::make(Domain d, int n, double rmax) {
    if (n < 16) throw std::invalid_argument("grid needs n >= 16");
    if (!(rmax > 0)) throw std::invalid_argument("grid needs rmax > 0");
    Grid g;
    g.domain = d;
    g.n = n;
    g.rmax = rmax;
    const double len = d == Domain::half_line ? rmax : 2.0 * rmax;
    g.dx = len / (n + 1);
    g.x.resize(n);
    const double x0 = d == Domain::half_line ? 0.0 : -rmax;
    for (int j = 0; j < n; ++j) g.x[j] = x0 + (j + 1) * g.dx;
    return g;
}

CVec BandedOperator::apply(const CVec& v) const {
    const int n = size();
    CVec out(n);
    for (int j = 0; j < n; ++j) {
        cplx s = diag[j] * v[j];
        if (bandwidth > 0) {
            if (j > 0) s += lower[j - 1] * v[j - 1];
            if (j + 1 < n) s += upper[j] * v[j + 1];
        }
        out[j] = s;
    }
    return out;
}

CVec BandedOperator::apply_adjoint(const CVec& v) const {
    const int n = size();
    CVec out(n);
    for (int j = 0; j < n; ++j) {
        cplx s = std::conj(diag[j]) * v[j];
        if (bandwidth > 0) {
            if (j > 0) s += std::conj(upper[j - 1]) * v[j - 1];
            if (j + 1 < n) s += std::conj(lower[j]) * v[j + 1];
        }
        out[j] = s;
    }
    return out;
}

BandedOperator BandedOperator::adjoint() const {
    BandedOperator a;
    a.bandwidth = bandwidth;
    a.diag = diag.conjugate();
    a.lower = upper.conjugate();
    a.upper = lower.conjugate();
    a.hermitian = hermitian;
    return a;
}

CMat BandedOperator::dense() const {
    const int n = size();
    CMat m = CMat::Zero(n, n);
    for (int j = 0; j < n; ++j) m(j, j) = diag[j];
    if (bandwidth > 0)
        for (int j = 0; j + 1 < n; ++j) {
            m(j + 1, j) = lower[j];
            m(j, j + 1) = upper[j];
        }
    return m;
}

double BandedOperator::hermitian_residual() const {
    double r = 0;
    for (int j = 0; j < size(); ++j) r = std::max(r, std::abs(diag[j].imag()));
    if (bandwidth > 0)
        for (int j = 0; j + 1 < size(); ++j) r = std::max(r, std::abs(lower[j] - std::conj(upper[j])));
    return r;
}

BandedOperator BandedOperator::diagonal(const CVec& d, bool herm) {
    BandedOperator a;
    a.bandwidth = 0;
    a.diag = d;
    a.lower = CVec::Zero(std::max<Eigen::Index>(0, d.size() - 1));
    a.upper = a.lower;
    a.hermitian = herm;
    return a;
}

BandedOperator BandedOperator::diagonal(const Vec& d) { return diagonal(d.cast<cplx>(), true); }

BandedOperator operator+(const BandedOperator& a, const BandedOperator& b) {
    if (a.size() != b.size()) throw std::invalid_argument("size mismatch");
    BandedOperator c;
    c.bandwidth = std::max(a.bandwidth, b.bandwidth);
    c.diag = a.diag + b.diag;
    c.lower = a.lower + b.lower;
    c.upper = a.upper + b.upper;
    c.hermitian = a.hermitian && b.hermitian;
    return c;
}

BandedOperator operator*(cplx s, const BandedOperator& a) {
    BandedOperator c = a;
    c.diag *= s;
    c.lower *= s;
    c.upper *= s;
    c.hermitian = a.hermitian && s.imag() == 0.0;
    return c;
}

BandedOperator shifted(const BandedOperator& a, cplx z) {
    BandedOperator c = a;
    c.diag.array() -= z;
    c.hermitian = a.hermitian && z.imag() == 0.0;
    return c;
}

BandedOperator build_laplacian(const Grid& g) {
    const int n = g.n;
    const double h2 = 1.0 / (g.dx * g.dx);
    BandedOperator a;
    a.bandwidth = 1;
    a.diag = CVec::Constant(n, 2.0 * h2);
    a.lower = CVec::Constant(n - 1, -h2);
    a.upper = CVec::Constant(n - 1, -h2);
    a.hermitian = true;
    return a;
}

BandedOperator build_hamiltonian(const Grid& g, const Potential& V, const RadialReduction& red) {
    const double q = red.q_eff();
    if (q < -0.25 - 1e-12) throw std::invalid_argument("q_eff < -1/4: not bounded below at the origin");
    if (g.domain == Domain::full_line && q != 0.0)
        throw std::invalid_argument("centrifugal term needs the half-line grid");
    BandedOperator H = build_laplacian(g);
    for (int j = 0; j < g.n; ++j) {
        const double x = g.x[j];
        H.diag[j] += V.V(x) + (q != 0.0 ? q / (x * x) : 0.0);
    }
    return H;
}

BandedOperator build_dilation_generator(const Grid& g) {
    const int n = g.n;
    BandedOperator A;
    A.bandwidth = 1;
    A.diag = CVec::Zero(n);
    A.upper.resize(n - 1);
    A.lower.resize(n - 1);
    for (int j = 0; j + 1 < n; ++j) {
        const double c = (g.x[j] + g.x[j + 1]) / (4.0 * g.dx);
        A.upper[j] = cplx(0.0, -c);
        A.lower[j] = cplx(0.0, c);
    }
    A.hermitian = true;
    return A;
}

Vec virial_diag(const Grid& g, const Potential& V) {
    return sample(g, [&](double x) { return V.W(x); });
}

Vec x_grad_W_diag(const Grid& g, const Potential& V) {
    return sample(g, [&](double x) { return V.x_grad_W(x); });
}

double commutator_residual(const BandedOperator& H, const BandedOperator& A, const Vec& W,
                           const std::vector<CVec>& testset) {
    double worst = 0;
    for (const auto& phi : testset) {
        const CVec Hp = H.apply(phi);
        const CVec r = I * (H.apply(A.apply(phi)) - A.apply(Hp)) - 2.0 * Hp -
                       (W.cast<cplx>().array() * phi.array()).matrix();
        const double nphi = phi.norm();
        if (nphi > 0) worst = std::max(worst, r.norm() / nphi);
    }
    return worst;
}

WeightOperator WeightOperator::from(const Vec& d) {
    if ((d.array() <= 0.0).any()) throw std::invalid_argument("weight must be positive");
    return {d, d.cwiseInverse()};
}

Vec bracket_weight(const Grid& g, double s) {
    return sample(g, [&](double x) { return std::pow(jbr(x), s); });
}

Vec k_weight(const Grid& g, double mu, double expo) {
    return sample(g, [&](double x) { return std::pow(jbr(x), (1.0 + mu / 2.0) * expo); });
}

} // namespace zl
