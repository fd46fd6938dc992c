#pragma once

#include "zl/resolve.hpp"

namespace zl {

// f(l) = exp(1 - 1/(1 - (l/E1)^2)) on |l| < E1, zero outside; f(0) = 1.
// vanish_at_zero multiplies by l/E1 (a window with f(0) = 0).
struct EnergyWindow {
    double E1 = 1.0;
    bool vanish_at_zero = false;
    double operator()(double l) const;
    double at_zero() const { return vanish_at_zero ? 0.0 : 1.0; }
};

struct LowEnergyPropagator {
    Vec lambda;  // all eigenvalues <= Lambda, ascending
    Mat phi;     // eigenvectors as columns
    double Lambda = 0;
    EnergyWindow f;
    int negative_count = 0;
    double spacing_near_zero = 0; // first positive gap
    double T_max = 0;             // 1 / max positive level spacing below E1
    double max_residual = 0;      // max ||H phi - lambda phi||
    bool ok = false;

    int first_nonnegative() const;
    // u(t) = e^{-itH} (f 1_[0,inf))(H) v
    CVec evolve(const CVec& v, double t) const;
};

// H real symmetric tridiagonal; E1 = Lambda/4 unless given
LowEnergyPropagator diagonalize_low_energy(const BandedOperator& H, double Lambda, double E1 = 0.0);

struct DecayReport {
    std::vector<double> t, value;
    double slope = 0;
    double s = 0, kappa = 0;
    bool horizon_violation = false;
    bool converged = true;
};

// || <x>^{-s} (e^{-itH}(f 1_[0,inf))(H) + i t^{-1} f(0) E'(+0)) <x>^{-s} || on the rows/cols kept in Ep
// (boundary values of the same H, weights <x>^{-s}). Negative t are allowed.
DecayReport local_decay_check(const LowEnergyPropagator& P, const Grid& g, const BoundaryValues& Ep, double s,
                              const std::vector<double>& ts, const PowerOptions& opt, int workers,
                              std::uint64_t seed);

// || 1{|x| < t^kappa} e^{-itH}(f 1_[0,inf))(H) <x>^{-s} ||, kappa = (1-eps)/(1+mu/2)
DecayReport quantum_minimal_velocity(const LowEnergyPropagator& P, const Grid& g, double s, double mu, double eps,
                                     const std::vector<double>& ts, const PowerOptions& opt, int workers,
                                     std::uint64_t seed);

// integer m with s/(1+mu/2) + 1/2 > m > 1/2 + (1 + eps'/2)/eps, or 0 if none
int minimal_velocity_order(double s, double mu, double eps, double eps_prime);

// Gaussian-smoothed eigen histogram: sum_n w phi_n phi_n^T w g_sigma(lambda - lambda_n), on the given nodes
CMat smoothed_spectral_density(const LowEnergyPropagator& P, const Vec& weight, const std::vector<int>& nodes,
                               double lambda, double sigma);

} // namespace zl
