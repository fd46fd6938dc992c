#pragma once

#include "zl/discrete.hpp"
#include "zl/linalg.hpp"

#include <string>

namespace zl {

struct SectorPoint {
    double E = 1.0;     // |zeta|
    double arg = 0.0;   // in (0, theta)
    double theta = pi / 2;
    bool upper = true;  // false: conjugate point

    cplx zeta() const {
        const cplx z = std::polar(E, arg);
        return upper ? z : std::conj(z);
    }
    bool valid() const { return E > 0 && E <= 1.0 && arg > 0 && arg < theta && theta > 0 && theta < pi; }
};

struct SolveRecord {
    CVec u;
    double residual = 0; // relative
    bool ok = false;
};

// (H - z)u = rhs by banded LU; residual verified and recorded
SolveRecord shifted_solve(const BandedOperator& H, cplx z, const CVec& rhs, double tol = 1e-10);

// factorized R(z) = (H - z)^{-1}
class Resolvent {
public:
    Resolvent(const BandedOperator& H, cplx z);
    cplx z() const { return z_; }
    bool ok() const { return lu_.ok(); }
    CVec apply(const CVec& v) const { return lu_.solve(v); }
    CVec apply_adjoint(const CVec& v) const { return lu_.solve_adjoint(v); }
    CVec apply_power(CVec v, int m) const;
    CVec apply_adjoint_power(CVec v, int m) const;
    int size() const { return lu_.size(); }

private:
    cplx z_;
    TriLU lu_;
};

// || D_L R(z)^m D_R || by power iteration
PowerResult weighted_norm(const BandedOperator& H, cplx z, const Vec& left, const Vec& right, int m,
                          const PowerOptions& opt = {});
PowerResult weighted_norm(const Resolvent& R, const Vec& left, const Vec& right, int m,
                          const PowerOptions& opt = {});

// same by dense SVD (oracle, small n)
double weighted_norm_dense(const BandedOperator& H, cplx z, const Vec& left, const Vec& right, int m);

struct ProbeRow {
    std::string experiment;
    double E = 0, arg = 0;
    int side = +1;
    double expo = 0;
    int m = 1;
    double norm = 0;
    double residual = 0;
    bool converged = true;
    std::string flags;
};

struct SweepSpec {
    double theta = pi / 2;
    std::vector<double> E;                           // moduli in (0,1]
    std::vector<double> arg_fractions{0.25, 0.5, 0.75}; // arguments = fraction * theta
    int m = 1;
};

struct ResolventProbe {
    std::vector<ProbeRow> rows;
    double statistic = 0; // max over smallest decade / max over largest decade
    double growth = 0;    // min over rays of norm(E_min)/norm(E_max)
    double sup = 0;       // empirical supremum
    bool all_converged = true;
    bool bound_ok = true; // ||R|| <= 1/Im z checked where weights <= 1
};

// one power-iteration norm per (E, arg); row order is E-major, arg-minor
ResolventProbe lap_sweep(const BandedOperator& H, const SweepSpec& sw, const Vec& left, const Vec& right,
                         const std::string& experiment, double expo, const PowerOptions& opt, int workers,
                         std::uint64_t seed);

// max over the smallest-E decade divided by max over the largest-E decade
double decade_statistic(const std::vector<double>& E, const std::vector<double>& norms);
// per-decade maxima ordered from small E to large E
std::vector<double> decade_maxima(const std::vector<double>& E, const std::vector<double>& norms);
double sweep_growth(const ResolventProbe& p);

struct HoelderPair {
    cplx z1, z2;
};

struct HoelderFit {
    std::vector<double> sep, diff;
    double gamma = 0;
    double r2 = 0;
    bool ill_conditioned = false;
};

// slope of log ||D(R(z1)-R(z2))D|| against log |z1-z2|; needs >= 8 pairs
HoelderFit hoelder_fit(const BandedOperator& H, const std::vector<HoelderPair>& pairs, const Vec& weight,
                       const PowerOptions& opt, int workers, std::uint64_t seed);

struct BoundaryValues {
    std::vector<int> rows, cols;   // grid indices kept (weight above floor)
    CMat plus, minus;              // D_L R(lambda +- i0) D_R, Richardson-extrapolated
    CMat Eprime;                   // (2 pi i)^{-1}(plus - minus)
    double err_plus = 0, err_minus = 0, err = 0;
    bool diverged = false;
    double hermitian_defect = 0;   // ||E' - E'^*|| / ||E'|| (rows == cols only)
    double min_eig = 0;            // smallest eigenvalue of the Hermitian part / ||E'||
    std::vector<double> ladder_increments;
};

struct LadderSpec {
    double eta0 = 1e-2;
    int halvings = 6;
    double weight_floor = 1e-12; // drop nodes whose weight is below floor * max
};

BoundaryValues boundary_values(const BandedOperator& H, const Vec& left, const Vec& right, double lambda,
                               double lambda_max, const LadderSpec& ls, int workers);

double opnorm(const CMat& m);

struct ExpansionFit {
    int side = +1;
    int J = 0;
    std::vector<CMat> coeff_plus, coeff_minus;
    std::vector<double> residual_plus, residual_minus; // per order 0..J
    double r0_gap = 0;        // ||R0+ - R0-||
    double eprime0 = 0;       // ||E'(+0)|| from the lowest window point
    double adjoint_defect = 0; // ||R0- - (R0+)^*||
    bool overfit = false;
};

ExpansionFit expansion_fit(const BandedOperator& H, const Vec& weight, const std::vector<double>& lambdas,
                           int J, const LadderSpec& ls, double lambda_bar, int workers);

// R(z) phi through R = R1 (I + V2 R1)^{-1}, dense only on supp V2
CVec perturbed_resolvent_apply(const BandedOperator& H1, const Vec& v2, cplx z, const CVec& phi);

struct FredholmReport {
    double norm_T = 0, norm_Tinv = 0, cond = 0;
    int support = 0;
    bool near_singular = false;
};

// condition number of <x>^s (I + V2 R1(z)) <x>^{-s}
FredholmReport fredholm_condition(const BandedOperator& H1, const Vec& v2, cplx z, const Vec& bracket_s,
                                  const PowerOptions& opt);

} // namespace zl
