#pragma once

#include "cspread/types.hpp"

#include <array>
#include <functional>

namespace cspread {

// Irwin-Hall cubic spline on [-2, 2], normalized so s3(0) = 1.
double s3(double x);
double s3_prime(double x);

// Fourier transform of s3: 24 sin^4(w/2) / w^4, value 3/2 at w = 0.
double s3_hat(double w);

// Exact Fourier transform of the mother basis phi0(x) = s3(x1/h) s3(x2/h):
// h^2 * s3_hat(h xi1) * s3_hat(h xi2).
double phi0_hat(double xi1, double xi2, double h);

// 1D Gram sequences of the unit-scale spline, |delta| <= 3, by Gauss-Legendre
// quadrature (4 points per unit cell, exact for the degree-6 integrands):
//   overlap_ss   [d] = int s3(t)    s3(t-d)  dt
//   overlap_dd   [d] = int s3'(t)   s3'(t-d) dt
//   overlap_ds(d)    = int s3'(t)   s3(t-d)  dt   (odd in d)
std::array<double, 4> spline_overlap_ss();
std::array<double, 4> spline_overlap_dd();
double spline_overlap_ds(int d);

// Mass generating array: g(p, q) = (phi_j, phi_k) with (p, q) = (k2-j2, k1-j1).
// reach < 0 means the march size n_int - 1; larger reaches only add zeros
// beyond the |delta| <= 3 overlap band (used when applying the operator to
// the extended boundary lattice).
GeneratingArray mass_generating(const Grid2D& grid, int reach = -1);

// Diffusion + drift stiffness generating array for the bilinear form
//   a(u, w) = 1/2 sum_lm Sigma_lm (d_m u, d_l w) - sum_l b_l (d_l u, w),
// i.e. the weak form of the negative generator with one integration by parts
// on the second-order term.
GeneratingArray bs_stiffness_generating(const Grid2D& grid,
                                        const std::array<std::array<double, 2>, 2>& Sigma,
                                        const std::array<double, 2>& b, int reach = -1);

struct PayoffParams {
    double K;
    double c;
    double s01;
    double s02;
};

inline double spread_payoff(const PayoffParams& pp, double x1, double x2) {
    double v = pp.s02 * std::exp(x2) - pp.c * pp.s01 * std::exp(x1) - pp.K;
    return v > 0.0 ? v : 0.0;
}

// Spline coefficients that collocate a function at the nodes of the extended
// lattice j in {-pad .. cells+pad} per dimension (node x = x_lo + j*h).
// Out-of-band coefficients are treated as zero.
struct ExtendedLattice {
    double h;
    double x_lo;
    int j_min;   // typically -3
    int j_max;   // typically cells + 3
    int count() const { return j_max - j_min + 1; }
    double node(int j) const { return x_lo + j * h; }
};

ExtendedLattice extended_lattice(const Grid2D& grid, int pad = 3);

// Tensor quasi-interpolation: solve the 1D collocation system
// (1/4) c_{k-1} + c_k + (1/4) c_{k+1} = f(x_k) along each dimension.
std::vector<double> interpolate_psi(const ExtendedLattice& lat, const PayoffParams& pp);
std::vector<double> interpolate_on_lattice(const ExtendedLattice& lat,
                                           const std::function<double(double, double)>& f);

// Evaluate a spline expansion sum_j c_j phi_j(x) whose coefficients live on
// nodes j1, j2 in [j_min, j_max] (row-major, j1 fastest).
double spline_eval(const ExtendedLattice& lat, const std::vector<double>& coef,
                   double x1, double x2);

// Same for a vector on the interior nodes of a grid (j = 1..n_int per dim).
double spline_eval_interior(const Grid2D& grid, const std::vector<double>& coef,
                            double x1, double x2);

} // namespace cspread
