#include "cspread/models.hpp"

#include <cmath>

namespace cspread {

void JumpDiffusionParams::validate() const {
    if (sigma1 <= 0.0 || sigma2 <= 0.0) throw std::invalid_argument("jd params: sigma must be positive");
    if (sigJ1 <= 0.0 || sigJ2 <= 0.0 || sig01 <= 0.0 || sig02 <= 0.0)
        throw std::invalid_argument("jd params: jump stds must be positive");
    if (std::fabs(rho_B) >= 1.0 || std::fabs(rho_J) >= 1.0)
        throw std::invalid_argument("jd params: correlations must lie in (-1, 1)");
    if (lambda0 < 0.0 || lambda1 < 0.0 || lambda2 < 0.0)
        throw std::invalid_argument("jd params: intensities must be nonnegative");
    if (s0[0] <= 0.0 || s0[1] <= 0.0) throw std::invalid_argument("jd params: spot prices must be positive");
}

void TimeChangeParams::validate() const {
    if (alpha0 <= 0.0 || beta0 <= 0.0 || alpha1 <= 0.0 || beta1 <= 0.0 || alpha2 <= 0.0 || beta2 <= 0.0)
        throw std::invalid_argument("tc params: subordinator parameters must be positive");
    if (d1 < 0.0 || d2 < 0.0) throw std::invalid_argument("tc params: loadings must be nonnegative");
    if (sigr1 <= 0.0 || sigr2 <= 0.0) throw std::invalid_argument("tc params: vols must be positive");
    if (s0[0] <= 0.0 || s0[1] <= 0.0) throw std::invalid_argument("tc params: spot prices must be positive");
}

bool TimeChangeParams::rn_feasible() const {
    double w1 = mu1 + 0.5 * sigr1 * sigr1;
    double w2 = mu2 + 0.5 * sigr2 * sigr2;
    return w1 > 0.0 && w1 < std::min(beta0, beta1) && w2 > 0.0 && w2 < std::min(beta0, beta2);
}

void MomentSet::validate() const {
    if (dt <= 0.0) throw std::invalid_argument("moment set: dt must be positive");
    for (int j = 0; j < 2; ++j)
        if (m2[j] < m1[j] * m1[j]) throw std::invalid_argument("moment set: m2 < m1^2");
    if (std::fabs(corr) > 1.0) throw std::invalid_argument("moment set: |corr| > 1");
}

std::array<double, 2> merton_rn_drift(const JumpDiffusionParams& p) {
    p.validate();
    double k1 = std::exp(p.muJ1 + 0.5 * p.sigJ1 * p.sigJ1) - 1.0;
    double k2 = std::exp(p.muJ2 + 0.5 * p.sigJ2 * p.sigJ2) - 1.0;
    double k01 = std::exp(p.mu01 + 0.5 * p.sig01 * p.sig01) - 1.0;
    double k02 = std::exp(p.mu02 + 0.5 * p.sig02 * p.sig02) - 1.0;
    return {p.r - 0.5 * p.sigma1 * p.sigma1 - p.lambda1 * k1 - p.lambda0 * k01,
            p.r - 0.5 * p.sigma2 * p.sigma2 - p.lambda2 * k2 - p.lambda0 * k02};
}

namespace {

const cplx I(0.0, 1.0);

cplx gaussian_cf_1d(cplx u, double mu, double sig) {
    return std::exp(I * mu * u - 0.5 * sig * sig * u * u);
}

void check_finite(cplx v, const char* who) {
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
        throw std::overflow_error(std::string(who) + ": exponent overflow (argument out of range)");
}

} // namespace

cplx merton_char_exponent(const JumpDiffusionParams& p, cplx u1, cplx u2) {
    auto bq = merton_rn_drift(p);
    auto S = p.sigma_B();
    cplx quad = S[0][0] * u1 * u1 + 2.0 * S[0][1] * u1 * u2 + S[1][1] * u2 * u2;
    cplx psi = I * (bq[0] * u1 + bq[1] * u2) - 0.5 * quad;
    if (p.lambda1 > 0.0) psi += p.lambda1 * (gaussian_cf_1d(u1, p.muJ1, p.sigJ1) - 1.0);
    if (p.lambda2 > 0.0) psi += p.lambda2 * (gaussian_cf_1d(u2, p.muJ2, p.sigJ2) - 1.0);
    if (p.lambda0 > 0.0) {
        cplx q0 = p.sig01 * p.sig01 * u1 * u1 + 2.0 * p.rho_J * p.sig01 * p.sig02 * u1 * u2 +
                  p.sig02 * p.sig02 * u2 * u2;
        psi += p.lambda0 * (std::exp(I * (p.mu01 * u1 + p.mu02 * u2) - 0.5 * q0) - 1.0);
    }
    check_finite(psi, "merton_char_exponent");
    return psi;
}

cplx gamma_char_exponent(const TimeChangeParams& p, cplx u1, cplx u2) {
    p.validate();
    cplx zeta1 = u1 * p.mu1 + 0.5 * I * p.sigr1 * p.sigr1 * u1 * u1;
    cplx zeta2 = u2 * p.mu2 + 0.5 * I * p.sigr2 * p.sigr2 * u2 * u2;
    cplx z[3] = {zeta1 + zeta2, p.d1 * zeta1, p.d2 * zeta2};
    double alpha[3] = {p.alpha0, p.alpha1, p.alpha2};
    double beta[3] = {p.beta0, p.beta1, p.beta2};
    cplx psi(0.0, 0.0);
    for (int l = 0; l < 3; ++l) {
        cplx arg = 1.0 - I * z[l] / beta[l];
        if (arg.real() <= 0.0)
            throw std::domain_error("gamma_char_exponent: log branch violation");
        psi -= alpha[l] * std::log(arg);
    }
    check_finite(psi, "gamma_char_exponent");
    return psi;
}

cplx merton_jump_symbol(const JumpDiffusionParams& p, double xi1, double xi2) {
    cplx u1(xi1, 0.0), u2(xi2, 0.0);
    cplx jump(0.0, 0.0);
    if (p.lambda1 > 0.0) jump += p.lambda1 * (gaussian_cf_1d(u1, p.muJ1, p.sigJ1) - 1.0);
    if (p.lambda2 > 0.0) jump += p.lambda2 * (gaussian_cf_1d(u2, p.muJ2, p.sigJ2) - 1.0);
    if (p.lambda0 > 0.0) {
        cplx q0 = p.sig01 * p.sig01 * u1 * u1 + 2.0 * p.rho_J * p.sig01 * p.sig02 * u1 * u2 +
                  p.sig02 * p.sig02 * u2 * u2;
        jump += p.lambda0 * (std::exp(I * (p.mu01 * u1 + p.mu02 * u2) - 0.5 * q0) - 1.0);
    }
    return -jump;
}

cplx gamma_jump_symbol(const TimeChangeParams& p, double xi1, double xi2) {
    return -gamma_char_exponent(p, cplx(xi1, 0.0), cplx(xi2, 0.0));
}

SymbolFn make_jump_symbol(const JumpDiffusionParams& p) {
    p.validate();
    JumpDiffusionParams q = p;
    return [q](double xi1, double xi2) { return merton_jump_symbol(q, xi1, xi2); };
}

SymbolFn make_jump_symbol(const TimeChangeParams& p) {
    p.validate();
    // flattened closure: the assembly quadrature calls this ~1e8 times
    const double mu1 = p.mu1, mu2 = p.mu2;
    const double v1 = 0.5 * p.sigr1 * p.sigr1, v2 = 0.5 * p.sigr2 * p.sigr2;
    const double d1 = p.d1, d2 = p.d2;
    const double a0 = p.alpha0, a1 = p.alpha1, a2 = p.alpha2;
    const double ib0 = 1.0 / p.beta0, ib1 = 1.0 / p.beta1, ib2 = 1.0 / p.beta2;
    return [=](double xi1, double xi2) -> cplx {
        // zeta_j = xi_j mu_j + i v_j xi_j^2; -i zeta = v xi^2 - i xi mu
        cplx miz1(v1 * xi1 * xi1, -mu1 * xi1);
        cplx miz2(v2 * xi2 * xi2, -mu2 * xi2);
        cplx psi = -a0 * std::log(1.0 + (miz1 + miz2) * ib0)
                 - a1 * std::log(1.0 + d1 * miz1 * ib1)
                 - a2 * std::log(1.0 + d2 * miz2 * ib2);
        return -psi;
    };
}

namespace {

// E_{j,k} = prod_{l<k} (alpha0 dt + l) / beta0^k + d_j^k prod_{l<k} (alpha_j dt + l) / beta_j^k
double subordinator_Ejk(double a0, double b0, double aj, double bj, double dj, double dt, int k) {
    double p0 = 1.0, pj = 1.0;
    for (int l = 0; l < k; ++l) {
        p0 *= (a0 * dt + l) / b0;
        pj *= (aj * dt + l) / bj;
    }
    return p0 + std::pow(dj, k) * pj;
}

} // namespace

MomentSet tc_moments(const TimeChangeParams& p, double dt) {
    p.validate();
    if (dt <= 0.0) throw std::invalid_argument("tc_moments: dt must be positive");
    MomentSet ms;
    ms.dt = dt;
    const double mu[2] = {p.mu1, p.mu2};
    const double s2[2] = {p.sigr1 * p.sigr1, p.sigr2 * p.sigr2};
    const double aj[2] = {p.alpha1, p.alpha2};
    const double bj[2] = {p.beta1, p.beta2};
    const double dj[2] = {p.d1, p.d2};
    for (int j = 0; j < 2; ++j) {
        double E1 = subordinator_Ejk(p.alpha0, p.beta0, aj[j], bj[j], dj[j], dt, 1);
        double E2 = subordinator_Ejk(p.alpha0, p.beta0, aj[j], bj[j], dj[j], dt, 2);
        double E3 = subordinator_Ejk(p.alpha0, p.beta0, aj[j], bj[j], dj[j], dt, 3);
        double E4 = subordinator_Ejk(p.alpha0, p.beta0, aj[j], bj[j], dj[j], dt, 4);
        ms.m1[j] = mu[j] * E1;
        ms.m2[j] = mu[j] * mu[j] * E2 + s2[j] * E1;
        ms.m3[j] = mu[j] * mu[j] * mu[j] * E3 + 3.0 * mu[j] * s2[j] * E2;
        ms.m4[j] = std::pow(mu[j], 4) * E4 + 6.0 * mu[j] * mu[j] * s2[j] * E3 + 3.0 * s2[j] * s2[j] * E2;
    }
    double EL0sq = p.alpha0 * dt * (p.alpha0 * dt + 1.0) / (p.beta0 * p.beta0);
    ms.m12 = p.mu1 * p.mu2 * EL0sq;
    double var1 = ms.m2[0] - ms.m1[0] * ms.m1[0];
    double var2 = ms.m2[1] - ms.m1[1] * ms.m1[1];
    ms.corr = (var1 > 0.0 && var2 > 0.0)
                  ? (ms.m12 - ms.m1[0] * ms.m1[1]) / std::sqrt(var1 * var2)
                  : 0.0;
    return ms;
}

MomentSet jd_theoretical_moments(const JumpDiffusionParams& p, double dt) {
    p.validate();
    if (dt <= 0.0) throw std::invalid_argument("jd_theoretical_moments: dt must be positive");
    auto bq = merton_rn_drift(p);
    MomentSet ms;
    ms.dt = dt;
    const double lamj[2] = {p.lambda1, p.lambda2};
    const double muj[2] = {p.muJ1, p.muJ2};
    const double sgj[2] = {p.sigJ1, p.sigJ2};
    const double mu0[2] = {p.mu01, p.mu02};
    const double sg0[2] = {p.sig01, p.sig02};
    const double sig[2] = {p.sigma1, p.sigma2};
    double k2r[2];
    for (int j = 0; j < 2; ++j) {
        double k1 = bq[j] + lamj[j] * muj[j] + p.lambda0 * mu0[j];
        double k2 = sig[j] * sig[j] + lamj[j] * (sgj[j] * sgj[j] + muj[j] * muj[j])
                  + p.lambda0 * (sg0[j] * sg0[j] + mu0[j] * mu0[j]);
        double k3 = lamj[j] * muj[j] * (muj[j] * muj[j] + 3.0 * sgj[j] * sgj[j])
                  + p.lambda0 * mu0[j] * (mu0[j] * mu0[j] + 3.0 * sg0[j] * sg0[j]);
        double k4 = lamj[j] * (std::pow(muj[j], 4) + 6.0 * muj[j] * muj[j] * sgj[j] * sgj[j]
                               + 3.0 * std::pow(sgj[j], 4))
                  + p.lambda0 * (std::pow(mu0[j], 4) + 6.0 * mu0[j] * mu0[j] * sg0[j] * sg0[j]
                                 + 3.0 * std::pow(sg0[j], 4));
        double c1 = k1 * dt, c2 = k2 * dt, c3 = k3 * dt, c4 = k4 * dt;
        ms.m1[j] = c1;
        ms.m2[j] = c2 + c1 * c1;
        ms.m3[j] = c3 + 3.0 * c2 * c1 + c1 * c1 * c1;
        ms.m4[j] = c4 + 3.0 * c2 * c2 + 4.0 * c3 * c1 + 6.0 * c2 * c1 * c1 + std::pow(c1, 4);
        k2r[j] = k2;
    }
    double cov_rate = p.rho_B * p.sigma1 * p.sigma2
                    + p.lambda0 * (p.rho_J * p.sig01 * p.sig02 + p.mu01 * p.mu02);
    ms.m12 = cov_rate * dt + ms.m1[0] * ms.m1[1];
    ms.corr = cov_rate / std::sqrt(k2r[0] * k2r[1]);
    return ms;
}

bool weight_admissible(const std::array<double, 2>& eta, int norm_order) {
    if (norm_order != 1 && norm_order != 2)
        throw std::invalid_argument("weight_admissible: norm order must be 1 or 2");
    return eta[0] > 0.0 && eta[0] < -eta[1] - norm_order;
}

CoercivityReport coercivity_report(const JumpDiffusionParams& p, double u_max, double step) {
    p.validate();
    if (u_max <= 0.0 || step <= 0.0)
        throw std::invalid_argument("coercivity_report: bad sweep parameters");
    auto S = p.sigma_B();
    double tr = S[0][0] + S[1][1];
    double det = S[0][0] * S[1][1] - S[0][1] * S[1][0];
    double disc = std::sqrt(std::max(0.0, 0.25 * tr * tr - det));
    CoercivityReport rep;
    rep.m_eig = 0.5 * tr - disc;
    rep.M_eig = 0.5 * tr + disc;
    auto bq = merton_rn_drift(p);
    double bnorm = std::hypot(bq[0], bq[1]);
    double lam_sum = p.lambda0 + p.lambda1 + p.lambda2;
    rep.C1 = std::max({bnorm, 0.25 * rep.M_eig, 2.0 * lam_sum});
    rep.C2 = 0.5 * rep.m_eig;
    rep.C3 = std::max(2.0 * lam_sum + 0.5 * rep.m_eig, std::sqrt(2.0 * rep.m_eig));

    bool ok = true;
    int steps = static_cast<int>(std::floor(2.0 * u_max / step)) + 1;
    for (int i = 0; i < steps && ok; ++i) {
        double u1 = -u_max + i * step;
        for (int k = 0; k < steps; ++k) {
            double u2 = -u_max + k * step;
            cplx A = -merton_char_exponent(p, cplx(u1, 0.0), cplx(u2, 0.0));
            double nu = std::hypot(u1, u2);
            double g = 1.0 + nu;
            if (std::abs(A) > rep.C1 * g * g + 1e-9 ||
                A.real() < rep.C2 * g * g - rep.C3 * g - 1e-9) {
                ok = false;
                break;
            }
        }
    }
    rep.holds = ok;
    return rep;
}

} // namespace cspread
