#pragma once

#include "cspread/types.hpp"

#include <array>
#include <functional>

namespace cspread {

// Bivariate jump-diffusion: correlated Brownian part plus idiosyncratic
// Gaussian jumps per asset and a common jump with correlated Gaussian pair
// sizes. Drift is pinned by the risk-neutral constraint.
struct JumpDiffusionParams {
    double r = 0.0;
    double sigma1 = 0.0, sigma2 = 0.0;
    double rho_B = 0.0;
    double lambda0 = 0.0, lambda1 = 0.0, lambda2 = 0.0;
    double muJ1 = 0.0, muJ2 = 0.0;
    double sigJ1 = 0.0, sigJ2 = 0.0;
    double mu01 = 0.0, mu02 = 0.0;
    double sig01 = 0.0, sig02 = 0.0;
    double rho_J = 0.0;
    std::array<double, 2> s0 = {1.0, 1.0};

    void validate() const;
    std::array<std::array<double, 2>, 2> sigma_B() const {
        return {{{sigma1 * sigma1, rho_B * sigma1 * sigma2},
                 {rho_B * sigma1 * sigma2, sigma2 * sigma2}}};
    }
};

// Brownian motions with drift evaluated at Gamma subordinators
// R_j = L0 + d_j L_j (L_l independent Gamma processes, shape alpha_l, rate beta_l).
struct TimeChangeParams {
    double r = 0.0;
    double alpha0 = 0.0, beta0 = 0.0;
    double alpha1 = 0.0, beta1 = 0.0;
    double alpha2 = 0.0, beta2 = 0.0;
    double d1 = 1.0, d2 = 1.0;
    double mu1 = 0.0, mu2 = 0.0;
    double sigr1 = 0.0, sigr2 = 0.0;
    std::array<double, 2> s0 = {1.0, 1.0};

    void validate() const;
    // 0 < mu_j + sigr_j^2/2 < min(beta0, beta_j); advisory (see selftest)
    bool rn_feasible() const;
};

struct MomentSet {
    std::array<double, 2> m1{}, m2{}, m3{}, m4{};
    double m12 = 0.0;
    double corr = 0.0;
    double dt = 0.0;

    void validate() const;
};

struct CoercivityReport {
    double C1 = 0.0, C2 = 0.0, C3 = 0.0;
    int alpha_idx = 2;
    int beta_idx = 1;
    double m_eig = 0.0, M_eig = 0.0;
    bool holds = false;
};

/// Risk-neutral drift b^Q: the exponent built with it satisfies
// Psi(-i e_j) = r for j = 1, 2.
std::array<double, 2> merton_rn_drift(const JumpDiffusionParams& p);

cplx merton_char_exponent(const JumpDiffusionParams& p, cplx u1, cplx u2);
cplx gamma_char_exponent(const TimeChangeParams& p, cplx u1, cplx u2);

// Symbol pieces routed through the FFT assembly: for the jump-diffusion model
// the pure-jump part of A(xi) = -Psi(xi); for the time-changed model the full
// symbol (the rate term rides on the mass matrix, and there is no separable
// diffusion/drift part).
cplx merton_jump_symbol(const JumpDiffusionParams& p, double xi1, double xi2);
cplx gamma_jump_symbol(const TimeChangeParams& p, double xi1, double xi2);

using SymbolFn = std::function<cplx(double, double)>;
SymbolFn make_jump_symbol(const JumpDiffusionParams& p);
SymbolFn make_jump_symbol(const TimeChangeParams& p);

// Analytic raw moments of one-step log-returns.
MomentSet tc_moments(const TimeChangeParams& p, double dt);
MomentSet jd_theoretical_moments(const JumpDiffusionParams& p, double dt);

// Weight window for exponentially weighted L^p spaces containing the spread
/// payoff: eta1 > 0 and eta1 < -eta2 - norm_order.
bool weight_admissible(const std::array<double, 2>& eta, int norm_order);

// Continuity and Garding constants for the jump-diffusion symbol, verified on
// the sweep u in [-u_max, u_max]^2 with the given step.
CoercivityReport coercivity_report(const JumpDiffusionParams& p, double u_max = 50.0,
                                   double step = 1.0);

} // namespace cspread
