#pragma once

#include "zl/resolve.hpp"

#include <functional>
#include <map>

namespace zl {

using SymbolFn = std::function<cplx(double x, double xi)>;
// partial derivative d_x^ax d_xi^axi of a symbol
using SymbolJet = std::function<cplx(double x, double xi, int ax, int axi)>;

struct WeylOptions {
    bool taper = false;         // multiply by a smooth cutoff from 90% of the band to the band edge
    double band_fraction = 0.9;
    double alias_threshold = 1e-3;
};

struct WeylOperator {
    CMat M;
    double hermitian_residual = 0; // ||M - M^*||_F / ||M||_F
    double alias_metric = 0;       // variation of the symbol over the top 10% of the band, relative to max |a|
    bool alias_warning = false;
};

// Kernel (2pi)^{-1} int e^{i(x-y)xi} a((x+y)/2, xi) dxi on a 1-d grid. The xi-grid is the dual of the
// doubled box (2n points), so kernel entries at separation |j-k| < n are never periodic images.
WeylOperator weyl_quantize(const SymbolFn& a, const Grid& g, const WeylOptions& o = {}, int workers = 1);

// C-infinity step: 0 for t <= 0, 1 for t >= 1
double smooth_step(double t);

// F+ rises on [C0, 2C0]; Ft- falls on [-kappa/2, kappa/2]. The *_sep variants have separated supports
// for the disjoint-support estimates.
struct CutoffFamily {
    double C0 = 1.0;
    double kappa = 0.5;
    double gap = 0.2; // Ft-_sep lives below -gap kappa, Ft+_sep above gap kappa

    double Fp(double a) const { return smooth_step((a - C0) / C0); }
    double Fm(double a) const { return 1.0 - Fp(a); }
    double Fm_sep(double a) const { return 1.0 - smooth_step((a - 0.25 * C0) / (0.5 * C0)); } // supp <= 0.75 C0
    double Ftm(double b) const { return 1.0 - smooth_step((b + 0.5 * kappa) / kappa); }
    double Ftp(double b) const { return 1.0 - Ftm(b); }
    double Ftm_sep(double b) const { return 1.0 - smooth_step((b + (gap + 0.4) * kappa) / (0.4 * kappa)); }
    double Ftp_sep(double b) const { return smooth_step((b - gap * kappa) / (0.4 * kappa)); }

    // support conditions against kappa0; throws on violation
    void validate(double kappa0) const;
};

// a0 = xi^2/f^2 and b = x xi / w at energy E
struct PhaseSymbols {
    WeightFamily wf;
    double E = 0;
    double a0(double x, double xi) const {
        const double f = wf.f(x, E);
        return xi * xi / (f * f);
    }
    double b(double x, double xi) const { return x * xi / wf.w(x, E); }
};

struct Localizers {
    WeylOperator plus;        // Op(F+(a0))
    WeylOperator minus_minus; // Op(F-(a0) Ft-(b))
    WeylOperator minus_plus;  // Op(F-(a0) Ft+(b))
    double pointwise_residual = 0;
    double operator_residual = 0; // ||sum Op - I||, max-abs entry
};

Localizers build_localizers(const CutoffFamily& cf, const PhaseSymbols& ps, const Grid& g, int workers = 1);

// C = sup |Re(V - zeta)| / f^2 over nodes and points; returns 2C
double calibrate_C0(const Potential& V, const WeightFamily& wf, const std::vector<double>& x,
                    const std::vector<cplx>& zetas);

// sampled S(1,g) seminorms sup |d_x^a d_xi^b s| <x>^a f^b, a+b <= 2, by centered differences
std::vector<double> symbol_seminorms(const SymbolFn& s, const PhaseSymbols& ps,
                                     const std::vector<std::pair<double, double>>& points);

struct MetricProbeReport {
    std::vector<double> E;
    std::vector<double> ratio_C;       // f(x)/f(y) (1 + <y>/<x>)^{-mu/2}
    std::vector<double> slow_C;        // sup g_y/g_x over g_x(y-x) <= 1/4
    std::vector<double> temper_C;      // sup (g_x/g_y) / (1 + g^sigma_y(x-y))^N
    std::vector<double> uncertainty;   // min f <x>
    int N = 2;
    int samples = 0;
    double spread(const std::vector<double>& v) const; // max/min
    bool pass() const;
};

MetricProbeReport metric_uniformity_probe(const WeightFamily& wf, const std::vector<double>& Es, int samples,
                                          int N, std::uint64_t seed, double xmax = 1e6);

// Moyal composition terms s_j for j <= 3
cplx moyal_term(const SymbolJet& a1, const SymbolJet& a2, int j, double x, double xi);

struct MoyalReport {
    std::vector<int> n;
    std::vector<double> residual;        // max over test packets of |(Op a1 Op a2 - Op sum) u| / |u|
    std::vector<double> opnorm_residual; // full matrix, spectral norm
    bool alias_warning = false;
};

// residuals on a fixed box at each resolution in ns
MoyalReport moyal_residual(const SymbolJet& a1, const SymbolJet& a2, int N, double rmax, const std::vector<int>& ns,
                           const WeylOptions& o = {}, int workers = 1);

// jets used in tests and the cli
SymbolJet jet_monomial(int px, int pxi); // x^px xi^pxi
SymbolJet jet_gaussian(double x0, double sx, double xi0, double sxi);

// Smooth exterior complex scaling: x -> F(x) with F' ramping from 1 to e^{i angle} beyond start*rmax.
// For vectors supported in |x| < start*rmax the scaled resolvent agrees with the whole-line one.
struct ExteriorScaling {
    bool enabled = false;
    double start = 0.6; // fraction of rmax
    double ramp = 0.1;  // fraction of rmax over which F' turns
    double angle = 0.5;
    // outer weights are multiplied by a smooth window falling from 1 to 0 between these fractions of
    // start*rmax, away from the sharp edge of the compression
    double window_lo = 0.5, window_hi = 0.8;
};

// -d^2/dz^2 + V(z) on the scaled nodes z_j = F(x_j); V1 continued analytically, V2 must vanish
// in the scaled region. Reduces to build_hamiltonian when disabled.
BandedOperator build_scaled_hamiltonian(const Grid& g, const Potential& V, const ExteriorScaling& ecs);
// smooth, 1 up to 0.85 start*rmax and 0 from start*rmax on
Vec interior_mask(const Grid& g, const ExteriorScaling& ecs);
// smooth observation window inside the interior; all ones when scaling is off
Vec observation_window(const Grid& g, const ExteriorScaling& ecs);

struct MicrolocalSweepOptions {
    double t = 1.0;
    double eps = 0.1;
    double t_disjoint = 2.0;
    std::vector<int> powers{2};       // iterated estimates for these m
    bool negative_control = true;
    ExteriorScaling ecs{true}; // resolvents compressed to the interior, weights windowed
    PowerOptions power;
};

struct MicrolocalSweep {
    std::vector<ProbeRow> rows;                  // experiment = estimate id
    std::map<std::string, double> statistic;     // decade statistic per estimate id
    std::map<std::string, double> growth;        // per estimate id
    std::map<std::string, double> localizer_norm_spread; // max/min over E of ||Op|| per localizer
    double C0 = 0;
    bool alias_warning = false;
    bool all_converged = true;
};

MicrolocalSweep microlocal_norm_sweep(const Potential& V, const Grid& g, const WeightFamily& wf,
                                      const CutoffFamily& cf, const SweepSpec& sw,
                                      const MicrolocalSweepOptions& o, int workers, std::uint64_t seed);

struct FeffermanPhongReport {
    std::vector<double> E, min_eig, C; // C = max(0, -min_eig)
    double scale = 0;                  // max ||Op||
    bool stable = false;
};

// bottom of Op(w^2 chi(a0)^2) with a compactly supported chi, per E
FeffermanPhongReport fefferman_phong_probe(const WeightFamily& wf, const Grid& g, const std::vector<double>& Es,
                                           int workers = 1);

} // namespace zl
