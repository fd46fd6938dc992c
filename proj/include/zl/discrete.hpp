#pragma once

#include "zl/model.hpp"
#include "zl/types.hpp"

namespace zl {

enum class Domain { half_line, full_line };

// Dirichlet grid; nodes exclude the two boundary points.
// half_line: r_j = j dx, j=1..n, (n+1) dx = rmax
// full_line: x_j = -rmax + j dx, j=1..n, (n+1) dx = 2 rmax
struct Grid {
    Domain domain = Domain::half_line;
    int n = 0;
    double rmax = 0;
    double dx = 0;
    std::vector<double> x;

    static Grid make(Domain d, int n, double rmax);
    int size() const { return n; }
};

struct RadialReduction {
    int d = 1;
    int ell = 0;
    double q_eff() const {
        return double(ell) * (ell + d - 2) + (d - 1.0) * (d - 3.0) / 4.0;
    }
};

// Complex banded matrix with bandwidth 0 (diagonal) or 1 (tridiagonal).
struct BandedOperator {
    int bandwidth = 1;
    CVec lower; // size n-1, entries (j+1, j)
    CVec diag;  // size n
    CVec upper; // size n-1, entries (j, j+1)
    bool hermitian = false;

    int size() const { return int(diag.size()); }
    CVec apply(const CVec& v) const;
    CVec apply_adjoint(const CVec& v) const;
    BandedOperator adjoint() const;
    CMat dense() const;
    double hermitian_residual() const;

    static BandedOperator diagonal(const CVec& d, bool herm);
    static BandedOperator diagonal(const Vec& d);
};

BandedOperator operator+(const BandedOperator& a, const BandedOperator& b);
BandedOperator operator*(cplx s, const BandedOperator& a);
BandedOperator shifted(const BandedOperator& a, cplx z); // a - z I

// -d^2/dr^2 + q_eff r^{-2} + V, 3-point, Dirichlet ends
BandedOperator build_hamiltonian(const Grid& g, const Potential& V, const RadialReduction& red);
// -d^2/dr^2 alone (p^2)
BandedOperator build_laplacian(const Grid& g);
// -i(x d/dx + 1/2), antisymmetrized central difference
BandedOperator build_dilation_generator(const Grid& g);

// samples of x -> fn(x) on the grid nodes
template <class Fn>
Vec sample(const Grid& g, Fn&& fn) {
    Vec v(g.n);
    for (int j = 0; j < g.n; ++j) v[j] = fn(g.x[j]);
    return v;
}

Vec virial_diag(const Grid& g, const Potential& V);
Vec x_grad_W_diag(const Grid& g, const Potential& V);

// max over the test set of |(i[H,A] - 2H - W) phi| / |phi|
double commutator_residual(const BandedOperator& H, const BandedOperator& A, const Vec& W,
                           const std::vector<CVec>& testset);

// diagonal weight and its exact inverse
struct WeightOperator {
    Vec d, inv;
    static WeightOperator from(const Vec& d);
    BandedOperator op() const { return BandedOperator::diagonal(d); }
};

// weight descriptors
Vec bracket_weight(const Grid& g, double s);            // <x>^s
Vec k_weight(const Grid& g, double mu, double expo);    // k^expo, k=<x>^{1+mu/2}

} // namespace zl
