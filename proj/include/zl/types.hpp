#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <cstdint>
#include <string>
#include <vector>

namespace zl {

using cplx = std::complex<double>;
using Vec = Eigen::VectorXd;
using CVec = Eigen::VectorXcd;
using Mat = Eigen::MatrixXd;
using CMat = Eigen::MatrixXcd;

inline constexpr double pi = 3.14159265358979323846;
inline constexpr cplx I{0.0, 1.0};

// japanese bracket <x>
inline double jbr(double x) { return std::sqrt(1.0 + x * x); }

// log-spaced points, inclusive
std::vector<double> logspace(double lo, double hi, int n);

// least-squares slope of log y against log x
struct LogFit {
    double slope = 0, intercept = 0, r2 = 0;
    bool ok = false;
};
LogFit loglog_fit(const std::vector<double>& x, const std::vector<double>& y);

// per-index seed, independent of scheduling
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t index);

} // namespace zl
