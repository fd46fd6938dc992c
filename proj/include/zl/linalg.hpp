#pragma once

#include "zl/discrete.hpp"
#include "zl/types.hpp"

#include <functional>

namespace zl {

// LU of a tridiagonal complex matrix (partial pivoting)
class TriLU {
public:
    TriLU() = default;
    explicit TriLU(const BandedOperator& a);

    bool ok() const { return info_ == 0 && !collapsed_; }
    int info() const { return info_; }
    double pivot_ratio() const { return pivot_ratio_; }
    int size() const { return int(d_.size()); }

    CVec solve(const CVec& b) const;         // a^{-1} b
    CVec solve_adjoint(const CVec& b) const; // a^{-*} b
    void solve_inplace(CVec& b, char trans) const;

private:
    CVec dl_, d_, du_, du2_;
    std::vector<int> ipiv_;
    int info_ = -1;
    bool collapsed_ = false;
    double pivot_ratio_ = 0;
};

using LinOp = std::function<CVec(const CVec&)>;

struct PowerOptions {
    double tol = 1e-6;
    int cap = 200;
    std::uint64_t seed = 1;
};

struct PowerResult {
    double norm = 0;
    int iterations = 0;
    bool converged = false;
};

// largest singular value of M by power iteration on M*M
PowerResult power_norm(const LinOp& M, const LinOp& Mt, int n, const PowerOptions& opt = {});

CVec random_vector(int n, std::uint64_t seed);

struct TriEigen {
    Vec values;   // ascending
    Mat vectors;  // columns, unit norm
    int info = 0;
    bool ok() const { return info == 0; }
};

// eigenpairs of the real symmetric tridiagonal (d, e) with eigenvalue <= vu
TriEigen tridiagonal_eigen(const Vec& d, const Vec& e, double vu, bool vectors = true);
// eigenvalues il..iu (1-based, ascending) only
Vec tridiagonal_eigenvalues(const Vec& d, const Vec& e, int il, int iu);

} // namespace zl
