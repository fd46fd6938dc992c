#pragma once

#include "zl/resolve.hpp"

namespace zl {

struct MourreConstants {
    double C2 = 2.0;
    double C1 = 3.0;     // 2 C2 - 1
    double Creg = 100.0; // <A> = (Creg + A^2)^{1/2}
    double eps0 = 0.5;   // sector condition -2 eps0 Re z <= Im z
};

struct RegularizedPoint {
    cplx zeta;
    double eps = 1e-2;
    MourreConstants c;

    double g() const { return c.C1 * zeta.real() + c.C2 * zeta.imag() / eps; }
    bool valid() const {
        return eps > 0 && std::abs(zeta) <= 1.0 + 1e-12 && -2.0 * c.eps0 * zeta.real() <= zeta.imag();
    }
};

// H - i eps (2H + W) - z, with i[H,A] replaced by the exact virial form 2H + W
BandedOperator regularized_operator(const BandedOperator& H, const Vec& W, cplx z, double eps);

SolveRecord regularized_resolvent(const BandedOperator& H, const Vec& W, cplx z, double eps, const CVec& rhs,
                                  double tol = 1e-10);

struct DerivativeCheck {
    double fd_error = 0;      // |FD dR/deps phi - i R T R phi| / |i R T R phi|, step delta
    double fd_error_half = 0; // same at delta/2
    double comm_eps = 0;      // commutator form with eps R (x.grad W) R
    double comm_ieps = 0;     // commutator form with i eps R (x.grad W) R
};

DerivativeCheck derivative_identity_check(const BandedOperator& H, const BandedOperator& A, const Vec& W,
                                          const Vec& xgradW, cplx z, double eps, const CVec& phi, double delta);

// gamma^2 = p^2 + f^2 as a banded Hermitian operator
BandedOperator gamma_squared(const BandedOperator& p2, const Vec& f2);

struct QuadraticRatio {
    double lhs = 0; // eps ||gamma R B||^2
    double rhs = 0; // ||B^* R B||
    double ratio = 0;
    bool converged = true;
};

QuadraticRatio quadratic_estimate_ratio(const BandedOperator& H, const Vec& W, const BandedOperator& gamma2,
                                        cplx z, double eps, const Vec& B, const PowerOptions& opt);

struct NumRangeReport {
    double identity_residual = 0; // matrix identity, relative
    double vector_residual = 0;   // on the test set, relative
    double margin = 0;            // min over nodes of C2 W + V - <x>^{-mu}
    bool positive = false;
    int offending = -1;           // first test vector with negative form margin
};

NumRangeReport numerical_range_positivity(const BandedOperator& H, const BandedOperator& p2, const Vec& W,
                                          const Vec& bracket_mu, const RegularizedPoint& pt,
                                          const std::vector<CVec>& testset);

// smallest C2 on a 0.25 grid with C2 W + V >= <x>^{-mu} on all nodes (V includes centrifugal terms)
double calibrate_C2(const Vec& W, const Vec& V, const Vec& bracket_mu, double cmax = 20.0);

// largest eps on the grid with |z| <= g_z(eps) at every point
double eps0_prime(const std::vector<double>& eps_grid, const std::vector<cplx>& zs, const MourreConstants& c);

// || <eps A>^{-1} f^{1/2} <x>^{-(1/2+delta)} R_z(eps) <x>^{-(1/2+delta)} f^{1/2} <eps A>^{-1} ||, dense
double weighted_epsilonA_bound(const BandedOperator& H, const BandedOperator& A, const Vec& W, cplx z, double eps,
                               const Vec& weight, double Creg);

struct MourreRow {
    double E, arg, eps, value;
    std::string quantity;
    bool flag_ok = true;
};

} // namespace zl
