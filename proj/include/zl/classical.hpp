#pragma once

#include "zl/model.hpp"

namespace zl {

struct PhasePoint {
    double x = 0, xi = 0, E = 0;
};

// kt < k < kp; Ft(b) = 1 for b <= kt, 0 for b >= k, quintic smoothstep between (C^2)
struct PropagationObservable {
    double kt = 0, k = 0, kp = 0;
    bool increasing = false; // negative control: 1 - Ft

    static PropagationObservable defaults(double kappa0); // kt=0.8k, k=0.9kp, kp=0.99kappa0
    double F(double b) const;
    double dF(double b) const;
};

struct FlowOptions {
    double tol = 1e-10;
    double drift_limit = 1e-8; // times (1 + |E|)
    double dt0 = 1e-3;
    double dt_max = 10.0;
};

struct Trajectory {
    double E = 0; // h(x0, xi0)
    std::vector<double> t, x, xi, drift, a0, b, q, v, w;
    double max_drift = 0;
    bool step_collapse = false;
    long steps = 0, rejected = 0;
};

// h = xi^2 + V(x); xdot = 2 xi, xidot = -V'(x). Samples at the given increasing times.
Trajectory integrate_flow(const Potential& V, const WeightFamily& wf, double x0, double xi0,
                          const std::vector<double>& times, const FlowOptions& opt,
                          const PropagationObservable* po = nullptr);

// exact {h,b} = w^{-1}(2h + W - 2 b^2 v)
double bracket_hb(const Potential& V, const WeightFamily& wf, double x, double xi, double E);

struct BracketResidual {
    double max_residual = 0; // |db/dt (finite differences) - closed form|
    double grad_w_residual = 0;
};

// traces must be uniform in time over the inspected part; uses 6th-order central differences
BracketResidual bracket_residual(const Trajectory& tr, const Potential& V, const WeightFamily& wf);

struct MonotonicityReport {
    int violations = 0;
    double worst = -1e300;      // max of dq/dt - bound
    int ft_increase = 0;        // samples where Ft(b) increased beyond tol
    double max_dq = -1e300;     // max of dq/dt
};

// dq/dt from the exact Poisson bracket along the trace versus -2(k0^2 - k k')<x>^{-mu} Ft(b)
MonotonicityReport observable_monotonicity(const Trajectory& tr, const Potential& V, const WeightFamily& wf,
                                           const PropagationObservable& po, double tol = 1e-8);

struct VelocityReport {
    double C = 0;
    std::vector<double> t, r;
    double liminf_proxy = 0; // min of r over the last time decade
    double phase_residual = 0; // max |dF(<x>)/dt - b|
    bool bounded_flag = false;
};

double minimal_velocity_constant(double kappa0, double mu);
VelocityReport minimal_velocity_ratio(const Trajectory& tr, const WeightFamily& wf, double kappa0, double E);

// F(r) = 1/2 int_1^r (kappa0^{-2}E + (1-mu/2)^{-1}s^{-mu})^{-1/2} ds
double phase_function(double r, const WeightFamily& wf, double E);

} // namespace zl
