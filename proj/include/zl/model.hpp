#pragma once

#include "zl/types.hpp"

#include <limits>
#include <optional>
#include <stdexcept>

namespace zl {

enum class V2Kind { none, bump, bracket };

// compact bump A*exp(-order/(1-s^2)), s=(r-center)/radius;
// the bracket kind is amp*<r>^{-order}, globally supported (for negative probes)
struct Bump {
    V2Kind kind = V2Kind::none;
    double amp = 0.0;
    double center = 0.0;
    double radius = 1.0;
    double order = 1.0;
};

struct PotentialSpec {
    double mu = 1.0;
    double c1 = 1.0;
    Bump v2;
    int dim = 1;
    int ell = 0;

    void validate() const; // throws std::invalid_argument
};

struct PotentialValue {
    double V = 0, dV = 0, V1 = 0, V2 = 0;
};

// V(x) = V1(|x|) + V2(|x|); derivatives in x (signed) for 1-d, radial for r>=0
class Potential {
public:
    explicit Potential(const PotentialSpec& s); // validates
    static Potential unchecked(const PotentialSpec& s);

    const PotentialSpec& spec() const { return spec_; }

    PotentialValue eval(double x) const;
    double V(double x) const { return eval(x).V; }
    double W(double x) const;        // -2V - x V'
    double x_grad_W(double x) const; // x W'

    // radial pieces, r >= 0
    double V1(double r) const;
    double dV1(double r) const;
    double d2V1(double r) const;
    double V2(double r) const;
    double dV2(double r) const;
    double d2V2(double r) const;

    // outer radius of supp V2 (infinity for the bracket kind, 0 for none)
    double v2_support() const;

private:
    Potential() = default;
    PotentialSpec spec_;
};

struct Kappa0 {
    bool ok = false;
    double raw = 0.0;  // sqrt(min W<x>^mu / 2) on the grid
    double used = 0.0; // deflated by 1%
    double argmin = 0.0;
    std::string message;
};

Kappa0 kappa0_from_virial(const Potential& V, const std::vector<double>& grid);

// f_E^2 = kappa0^{-2} E + (1-mu/2)^{-1} <x>^{-mu}
struct WeightFamily {
    double mu = 1.0;
    double kappa0 = std::sqrt(0.5);

    double f(double x, double E) const;
    double w(double x, double E) const { return jbr(x) * f(x, E); }
    double k(double x) const { return std::pow(jbr(x), 1.0 + mu / 2.0); }
    double bracket_pow(double x, double s) const { return std::pow(jbr(x), s); }
    double v(double x, double E) const; // kappa0^{-2}E + <x>^{-mu}
    double df(double x, double E) const;
    double dw(double x, double E) const { return v(x, E) * x / w(x, E); }
};

// f = (E + <x>^{-mu})^{1/2}, the Mourre-section weight
double f_mourre(double x, double E, double mu);

struct WeightValues {
    double f, w, k, bracket;
    std::vector<double> powers;
};
WeightValues eval_weights(const WeightFamily& wf, double x, double E,
                          const std::vector<double>& s_list = {});

struct AssumptionReport {
    // hypotheses on V1, V2 and unique continuation
    bool c1_negative = false;
    double eps1 = 0; // min -V1 <x>^mu
    bool c2_symbol = false;
    double C_alpha[3] = {0, 0, 0};
    bool c3_virial = false;
    double eps2 = 0; // min W1 / (-V1)
    bool c4_compact = false;
    bool c5_decay = false;
    double delta = 0;
    double R = 0;
    bool c5p_compact_support = false;
    bool unique_continuation = true; // hypothesis flag; V is smooth and bounded
    // positivity with h = eps r^{-mu/2} on r > R
    bool h_condition = false;
    double s = 0.9;
    double eps_h_max = 0; // largest admissible eps
    double C_h = 1.0;
    double o_h_ratio_end = 0; // (r^{-1} + r|V2|)/h at the far end
    bool h_little_o = false;
    // virial constant (reported; not one of the LAP hypotheses)
    Kappa0 kappa0;
    bool all_pass() const;
    std::string describe() const;
};

// grid: solver nodes (r >= 0); a 10x finer audit grid on the same range is added
AssumptionReport validate_assumptions(const Potential& V, const std::vector<double>& grid,
                                      double s = 0.9);

} // namespace zl
