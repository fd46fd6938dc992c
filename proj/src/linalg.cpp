#include "zl/linalg.hpp"

#include <random>
#include <stdexcept>

#define lapack_complex_float std::complex<float>
#define lapack_complex_double std::complex<double>
#include <lapacke.h>

namespace zl {

TriLU::TriLU(const BandedOperator& a) {
    const int n = a.size();
    d_ = a.diag;
    if (n > 1) {
        dl_ = a.lower;
        du_ = a.upper;
    } else {
        dl_ = CVec::Zero(1);
        du_ = CVec::Zero(1);
    }
    du2_ = CVec::Zero(std::max(1, n - 2));
    ipiv_.assign(n, 0);
    info_ = LAPACKE_zgttrf(n, dl_.data(), d_.data(), du_.data(), du2_.data(), ipiv_.data());
    double lo = std::numeric_limits<double>::infinity(), hi = 0;
    for (int j = 0; j < n; ++j) {
        lo = std::min(lo, std::abs(d_[j]));
        hi = std::max(hi, std::abs(d_[j]));
    }
    pivot_ratio_ = hi > 0 ? lo / hi : 0.0;
    collapsed_ = pivot_ratio_ < 1e-15;
}

void TriLU::solve_inplace(CVec& b, char trans) const {
    if (!ok()) throw std::runtime_error("singular shifted operator (pivot collapse)");
    const int n = size();
    const int info = LAPACKE_zgttrs(LAPACK_COL_MAJOR, trans, n, 1, dl_.data(), d_.data(), du_.data(),
                                    du2_.data(), ipiv_.data(), b.data(), n);
    if (info != 0) throw std::runtime_error("zgttrs failed");
}

CVec TriLU::solve(const CVec& b) const {
    CVec x = b;
    solve_inplace(x, 'N');
    return x;
}

CVec TriLU::solve_adjoint(const CVec& b) const {
    CVec x = b;
    solve_inplace(x, 'C');
    return x;
}

CVec random_vector(int n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd;
    CVec v(n);
    for (int j = 0; j < n; ++j) {
        const double a = nd(rng);
        const double b = nd(rng);
        v[j] = cplx(a, b);
    }
    return v;
}

PowerResult power_norm(const LinOp& M, const LinOp& Mt, int n, const PowerOptions& opt) {
    PowerResult r;
    CVec v = random_vector(n, opt.seed);
    v /= v.norm();
    double prev = 0;
    for (int it = 1; it <= opt.cap; ++it) {
        const CVec u = M(v);
        const double s = u.norm(); // Rayleigh quotient of M*M is s^2
        r.norm = s;
        r.iterations = it;
        if (s == 0.0) {
            r.converged = true;
            return r;
        }
        if (it > 1 && std::abs(s - prev) <= opt.tol * s) {
            r.converged = true;
            return r;
        }
        prev = s;
        CVec w = Mt(u);
        const double nw = w.norm();
        if (nw == 0.0) {
            r.converged = true;
            return r;
        }
        v = w / nw;
    }
    return r;
}

TriEigen tridiagonal_eigen(const Vec& d, const Vec& e, double vu, bool vectors) {
    const int n = int(d.size());
    TriEigen r;
    if (n == 0) return r;
    // Gershgorin lower bound
    double vl = d[0];
    for (int j = 0; j < n; ++j) {
        const double off = (j > 0 ? std::abs(e[j - 1]) : 0.0) + (j + 1 < n ? std::abs(e[j]) : 0.0);
        vl = std::min(vl, d[j] - off);
    }
    vl -= 1.0;
    if (vu <= vl) return r;
    Vec dd = d, ee(n);
    ee.head(n - 1) = e;
    ee[n - 1] = 0.0;
    int m = 0;
    Vec w(n);
    Mat z(vectors ? n : 1, vectors ? n : 1);
    std::vector<int> isuppz(2 * n);
    r.info = LAPACKE_dstevr(LAPACK_COL_MAJOR, vectors ? 'V' : 'N', 'V', n, dd.data(), ee.data(), vl, vu, 0, 0, 0.0,
                            &m, w.data(), z.data(), vectors ? n : 1, isuppz.data());
    r.values = w.head(m);
    if (vectors) r.vectors = z.leftCols(m);
    return r;
}

Vec tridiagonal_eigenvalues(const Vec& d, const Vec& e, int il, int iu) {
    const int n = int(d.size());
    iu = std::min(iu, n);
    if (n == 0 || il > iu) return Vec();
    Vec dd = d, ee(n), w(n);
    ee.head(n - 1) = e;
    ee[n - 1] = 0.0;
    int m = 0;
    double z = 0;
    std::vector<int> isuppz(2 * n);
    const int info = LAPACKE_dstevr(LAPACK_COL_MAJOR, 'N', 'I', n, dd.data(), ee.data(), 0, 0, il, iu, 0.0, &m,
                                    w.data(), &z, 1, isuppz.data());
    if (info != 0) throw std::runtime_error("dstevr failed");
    return w.head(m);
}

} // namespace zl
