#pragma once

#include "zl/resolve.hpp"

namespace zl {

// w(r) = r^{(d-1)/2} psi(r omega) in one angular sector, with w'
struct RadialFunction {
    std::vector<double> r, w, dw;
    int dim = 1;
    int ell = 0;
    double lambda_B() const { return double(ell) * (ell + dim - 2); } // -<w,Bw> / |w|^2
    double c_dim() const { return (dim - 1.0) * (dim - 3.0) / 4.0; }
};

// regular solution of -w'' + (q r^{-2} + V1 + V2 - E) w = 0 from r ~ 0, sampled on r (increasing, > 0)
RadialFunction regular_solution(const Potential& V, double E, const std::vector<double>& r, double tol = 1e-12);

struct FunctionalTrace {
    std::vector<double> r, value;   // F(r), or r^2 G(m,r)
    std::vector<double> deriv;      // analytic d/dr of r F, or of r^2 G
    std::vector<double> deriv_fd;   // centered differences of the same
    int m = 0;
    double tolerance = 0;           // max |deriv - deriv_fd| over interior nodes
    double min_margin = 0;          // min deriv over r > R1
    double onset = 0;               // smallest grid r beyond which deriv >= -tolerance
};

// F(r) = |w'|^2 + r^{-2}<w,Bw> - V1 |w|^2 - s r^{-1} w w'
FunctionalTrace F_functional(const RadialFunction& f, const Potential& V, double s, double R1);

// r^2 G(m,r) with w_m = r^m w and g = r^{-1} h / (2C), h = eps_h r^{-mu/2}
FunctionalTrace G_functional(const RadialFunction& f, const Potential& V, int m, double eps_h, double C, double R1);

// int_R^inf |w'|^2 / (|| p phi ||^2 + int_{r>R} h^2 |phi|^2) for a half-line sample phi
double integrability_ratio(const Grid& g, const Vec& phi, double R, double eps_h, double mu);

struct Crossing {
    int branch = 0;   // 0-based eigenvalue index
    double rho = 0;   // lambda_branch(rho) = 0
    double lambda = 0;
    double ode_node = 0; // matching zero of the regular E=0 solution, 0 if none
};

struct BallSweep {
    std::vector<double> rho;
    std::vector<Vec> lambda;  // lowest eigenvalues per rho
    std::vector<int> N;       // number of negative eigenvalues (all of them)
    std::vector<Crossing> crossings;
    bool N_nondecreasing = true;
    bool branches_nonincreasing = true;
    bool ambiguity = false;   // two tracked eigenvalues closer than the tracking tolerance
    int nodes = 0;
};

// H1 = -d^2/dr^2 + q r^{-2} + V1 on (0, rho) with Dirichlet ends, n nodes for every rho
BallSweep dirichlet_ball_sweep(const Potential& V, const std::vector<double>& rho, int count, int n, int workers);

// zeros of the regular E = 0 solution of H1 on (0, rmax)
std::vector<double> zero_energy_nodes(const Potential& V, double rmax, double tol = 1e-12);

// longest run of consecutive rho samples on which some branch stays within delta of 0
int zero_persistence(const BallSweep& b, double delta);

struct WkbReport {
    std::vector<double> x, amp_ode, amp_wkb, phase_ode, phase_wkb;
    double max_envelope_error = 0; // max | |psi| / amplitude - 1 |
    double max_phase_error = 0;
    double envelope_exponent = 0;  // fit of log |psi| against log <x> over the last two decades
    double phase_exponent = 0;     // fit of log (int_0^x p) from the ode phase
    bool turning_point = false;
};

// outgoing WKB data at x0, then -psi'' + V psi = E psi to x1 (1-d, x0 > 0)
WkbReport wkb_reference(const Potential& V, double E, double x0, double x1, int samples, double tol = 1e-12);

struct WeightOptimalityReport {
    std::vector<double> E;
    std::vector<double> sharp;  // || k^{-(m-1/2)} R^m phi ||
    std::vector<double> loose;  // || k^{-(m-1/2)-eps} R^m phi ||
    double statistic_loose = 0;
    double growth_sharp = 0;    // sharp(E_min) / sharp(E_max)
    bool sharp_monotone = false; // strictly increasing as E decreases
};

WeightOptimalityReport weight_optimality_probe(const BandedOperator& H, const Grid& g, const CVec& phi, int m,
                                               double eps, double mu, const std::vector<double>& Es, double arg,
                                               int workers);

} // namespace zl
