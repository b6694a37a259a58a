#pragma once

#include <vector>

#include "cspread/bttb.hpp"
#include "cspread/fem.hpp"
#include "cspread/models.hpp"
#include "cspread/symbol_quad.hpp"
#include "cspread/types.hpp"

namespace cspread {

struct SchemeConfig {
    double theta = 0.5;
    int time_steps = -1;        // -1 couples to the grid as 2^level
    double domain_length = 8.0; // outer square [x_lo, x_lo + L]^2
    double x_lo = -4.0;
    int level = 6;
    double omega = 1.1; // effective domain [-omega, omega]^2, strictly inside
    SymbolQuadConfig quad;
    double solver_tol = 1e-10;
    int solver_maxit = 500;

    enum class Snapshots { automatic, all, final_only };
    Snapshots snapshots = Snapshots::automatic;

    int steps() const { return time_steps >= 0 ? time_steps : (1 << level); }
    Grid2D make_grid() const { return Grid2D(domain_length, level, x_lo); }
    void validate() const;
};

// March-ready discretization. The evolution matrix splits into a local
// diffusion/drift part Agen (zero for the time-changed model, whose whole
// symbol is nonlocal and lives in Jgen), the jump part Jgen, and the mass
// Mgen; F is the constant load carrying the boundary lift.
struct AssembledSystem {
    Grid2D grid{8.0, 2, -4.0};
    double r = 0.0;
    GeneratingArray Mgen;
    GeneratingArray Agen;
    GeneratingArray Jgen;
    std::vector<double> F;
    ExtendedLattice lat;
    std::vector<double> psi;
    JumpAssemblyDiag jump_diag;
};

AssembledSystem assemble(const JumpDiffusionParams& p, const Contract& contract,
                         const SchemeConfig& cfg);
AssembledSystem assemble(const TimeChangeParams& p, const Contract& contract,
                         const SchemeConfig& cfg);

// Time-marched coefficients. times[k] are the stored tau levels (ascending,
// starting at 0); coefs[k] the matching interior spline coefficients of v.
// The price itself is v + psi, already in present-value terms.
struct PriceSurface {
    Grid2D grid{8.0, 2, -4.0};
    Contract contract;
    double r = 0.0;
    double theta = 0.5;
    double omega = 1.1;
    std::vector<double> times;
    std::vector<std::vector<double>> coefs;
    ExtendedLattice lat;
    std::vector<double> psi;
    double mean_iterations = 0.0;
};

PriceSurface evolve(const AssembledSystem& sys, const Contract& contract, const SchemeConfig& cfg);

// Price in currency units at time-to-maturity tau and spot prices (S1, S2);
// log-moneyness must fall inside the effective domain.
double price_at(const PriceSurface& surf, double tau, double S1, double S2);

struct ErrorRow {
    int level = 0;
    double rel_l2_error = 0.0;
    double mean_iterations = 0.0;
    double seconds = 0.0;
};

struct ErrorTable {
    std::vector<ErrorRow> rows;
    double fitted_rate = 0.0;
    int ref_level = 0;
};

// Self-convergence against a fine reference: relative L2 errors of v + psi
// over the effective domain at tau = T, sampled at 2x2 Gauss points of each
// coarse cell fully inside the domain, plus the fitted log-log rate.
ErrorTable convergence_study(const JumpDiffusionParams& p, const Contract& contract,
                             const std::vector<int>& levels = {4, 5, 6, 7, 8},
                             int ref_level = 9, const SchemeConfig& base = SchemeConfig());
ErrorTable convergence_study(const TimeChangeParams& p, const Contract& contract,
                             const std::vector<int>& levels = {4, 5, 6, 7, 8},
                             int ref_level = 9, const SchemeConfig& base = SchemeConfig());

} // namespace cspread
