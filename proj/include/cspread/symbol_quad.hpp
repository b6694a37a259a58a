#pragma once

#include "cspread/models.hpp"
#include "cspread/types.hpp"

namespace cspread {

// Frequency quadrature for the symbol-method assembly. The scaled variable
// zeta = h*xi is sampled with the midpoint rule on [-radius_pi*pi, radius_pi*pi]
// at step 2*pi/fft_size, so samples fold exactly onto an fft_size-periodic
// lattice and one 2D FFT produces every node-difference phase at once.
struct SymbolQuadConfig {
    int radius_pi = 10; // truncation radius in units of pi (zeta scale), i.e. Xi = radius_pi*pi/h
    int fft_size = 0;   // power of two; 0 = choose the smallest alias-free size
};

struct JumpAssemblyDiag {
    double tail_bound = 0.0;
    double imag_residue = 0.0;
    double max_entry = 0.0;
};

int default_fft_size(int reach);

// Generating array of the jump operator: entries
//   (2 pi)^-2 int J(xi) |phi0_hat(xi)|^2 e^{i xi . (x_k - x_j)} d xi
// over differences |k1-j1|, |k2-j2| <= reach (default: all differences of the
// grid's interior nodes). The imaginary residue must stay below
// 1e-10 * max|entry|; larger residue aborts.
GeneratingArray jump_generating(const Grid2D& grid, const SymbolFn& symbol,
                                const SymbolQuadConfig& quad, int reach = -1,
                                JumpAssemblyDiag* diag = nullptr);

// Adaptive-quadrature oracle for the same integrals (small grids only).
GeneratingArray jump_generating_direct(const Grid2D& grid, const SymbolFn& symbol,
                                       int reach = -1, double abs_tol = 1e-9,
                                       double radius_pi = 40.0);

// Single entry by nested adaptive quadrature (tests).
cplx jump_entry_adaptive(const Grid2D& grid, const SymbolFn& symbol, int dq, int dp,
                         double abs_tol = 1e-9, double radius_pi = 40.0);
// Single entry by a fixed high-order panel rule (independent scheme, tests).
cplx jump_entry_panels(const Grid2D& grid, const SymbolFn& symbol, int dq, int dp,
                       double radius_pi = 40.0, int panels_per_pi = 4);

} // namespace cspread
