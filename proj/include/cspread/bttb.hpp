#pragma once

#include "cspread/types.hpp"

#include <functional>

namespace cspread {

int next_pow2(int n);

// 2-level Toeplitz operator; the circulant-embedding spectrum is cached on
// first matvec (embedding sizes are the next powers of two >= 2m-1, 2n-1).
struct BTTBMatrix {
    int m;
    int n;
    GeneratingArray gen;

    explicit BTTBMatrix(GeneratingArray g) : m(g.m), n(g.n), gen(std::move(g)) {}

    mutable std::vector<cplx> spectrum;
    mutable int E2 = 0;
    mutable int E1 = 0;
    void ensure_spectrum() const;
};

std::vector<double> matvec(const BTTBMatrix& T, const std::vector<double>& x);

// Dense expansion (tests and small oracles only).
std::vector<double> bttb_dense(const GeneratingArray& g);

// Frobenius-optimal block-circulant-with-circulant-blocks approximation,
// stored by its m x n eigenvalue array.
struct BCCBPreconditioner {
    int m = 0;
    int n = 0;
    std::vector<cplx> eigen;
};

BCCBPreconditioner optimal_bccb(const BTTBMatrix& T);
std::vector<double> apply_inverse(const BCCBPreconditioner& P, const std::vector<double>& x);
// matvec by the BCCB approximation itself (round-trip checks)
std::vector<double> bccb_apply(const BCCBPreconditioner& P, const std::vector<double>& x);

struct SolverStats {
    double iterations = 0.0;
    double rel_residual = 0.0;
    bool breakdown = false;
    bool converged = false;
};

using LinOp = std::function<std::vector<double>(const std::vector<double>&)>;

// Right-preconditioned BICGSTAB; residuals are reported against b (true
// residual recomputed at algorithmic convergence). P = nullptr disables
// preconditioning; x0 = nullptr starts from zero.
std::pair<std::vector<double>, SolverStats>
bicgstab(const LinOp& A, const BCCBPreconditioner* P, const std::vector<double>& b,
         double tol = 1e-10, int maxit = 500, const std::vector<double>* x0 = nullptr);

} // namespace cspread
