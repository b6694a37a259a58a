#include "doctest.h"

#include <cmath>
#include <random>
#include <stdexcept>

#include "cspread/models.hpp"

using namespace cspread;

namespace {

JumpDiffusionParams crude_product_jd() {
    JumpDiffusionParams p;
    p.r = 0.02;
    p.sigma1 = 0.7025;
    p.sigma2 = 0.5356;
    p.rho_B = 0.5364;
    p.lambda0 = 3.0;
    p.lambda1 = 2.0;
    p.lambda2 = 2.0;
    p.muJ1 = 0.0;
    p.muJ2 = 0.0;
    p.sigJ1 = 0.2808;
    p.sigJ2 = 0.3528;
    p.mu01 = -0.0775;
    p.mu02 = -0.0620;
    p.sig01 = 0.02;
    p.sig02 = 0.01;
    p.rho_J = 0.30;
    p.s0 = {100.0, 2.0};
    return p;
}

TimeChangeParams crude_product_tc() {
    TimeChangeParams p;
    p.r = 0.02;
    p.alpha0 = 0.5;
    p.beta0 = 0.5;
    p.alpha1 = 0.7;
    p.beta1 = 0.7;
    p.alpha2 = 0.8;
    p.beta2 = 0.8;
    p.d1 = 1.0;
    p.d2 = 1.0;
    p.mu1 = -0.0673;
    p.mu2 = -0.050701;
    p.sigr1 = 0.4633;
    p.sigr2 = 0.2236;
    p.s0 = {100.0, 2.0};
    return p;
}

TimeChangeParams rate_consistent_tc() {
    TimeChangeParams p = crude_product_tc();
    p.mu1 = -0.0974086986767;
    p.mu2 = -0.0150793383635;
    return p;
}

} // namespace

TEST_SUITE("models") {

TEST_CASE("risk-neutral drift, frozen values") {
    auto b = merton_rn_drift(crude_product_jd());
    CHECK(b[0] == doctest::Approx(-0.084013055291951051).epsilon(1e-13));
    CHECK(b[1] == doctest::Approx(-0.071645838153363879).epsilon(1e-13));
}

TEST_CASE("jump-diffusion exponent is a martingale exponent") {
    JumpDiffusionParams p = crude_product_jd();
    const cplx mi(0.0, -1.0), z(0.0, 0.0);
    CHECK(std::abs(merton_char_exponent(p, mi, z) - cplx(p.r, 0.0)) <= 1e-12);
    CHECK(std::abs(merton_char_exponent(p, z, mi) - cplx(p.r, 0.0)) <= 1e-12);
    CHECK(std::abs(merton_char_exponent(p, z, z)) <= 1e-15);

    // conjugate symmetry on the real axis
    cplx a = merton_char_exponent(p, cplx(1.3, 0.0), cplx(-0.7, 0.0));
    cplx bb = merton_char_exponent(p, cplx(-1.3, 0.0), cplx(0.7, 0.0));
    CHECK(std::abs(a - std::conj(bb)) <= 1e-13);
}

TEST_CASE("martingale identity survives parameter fuzz") {
    std::mt19937_64 rng(555);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int k = 0; k < 5; ++k) {
        JumpDiffusionParams p;
        p.r = 0.05 * u(rng);
        p.sigma1 = 0.2 + 0.6 * u(rng);
        p.sigma2 = 0.2 + 0.6 * u(rng);
        p.rho_B = -0.8 + 1.6 * u(rng);
        p.lambda0 = 4.0 * u(rng);
        p.lambda1 = 4.0 * u(rng);
        p.lambda2 = 4.0 * u(rng);
        p.muJ1 = -0.2 + 0.4 * u(rng);
        p.muJ2 = -0.2 + 0.4 * u(rng);
        p.sigJ1 = 0.05 + 0.3 * u(rng);
        p.sigJ2 = 0.05 + 0.3 * u(rng);
        p.mu01 = -0.1 + 0.2 * u(rng);
        p.mu02 = -0.1 + 0.2 * u(rng);
        p.sig01 = 0.01 + 0.05 * u(rng);
        p.sig02 = 0.01 + 0.05 * u(rng);
        p.rho_J = -0.5 + u(rng);
        const cplx mi(0.0, -1.0), z(0.0, 0.0);
        CHECK(std::abs(merton_char_exponent(p, mi, z) - cplx(p.r, 0.0)) <= 1e-12);
        CHECK(std::abs(merton_char_exponent(p, z, mi) - cplx(p.r, 0.0)) <= 1e-12);
    }
}

TEST_CASE("time-change exponent, frozen drift-identity values") {
    TimeChangeParams p = crude_product_tc();
    const cplx mi(0.0, -1.0), z(0.0, 0.0);
    // as printed, the example parameters do NOT satisfy the identity; the
    // residual itself is the frozen regression value
    cplx l1 = gamma_char_exponent(p, mi, z);
    cplx l2 = gamma_char_exponent(p, z, mi);
    CHECK(l1.real() == doctest::Approx(0.0829295051814).epsilon(1e-9));
    CHECK(std::fabs(l1.imag()) <= 1e-12);
    CHECK(l2.real() == doctest::Approx(-0.0503619700655).epsilon(1e-9));
    CHECK(std::abs(gamma_char_exponent(p, z, z)) <= 1e-15);
    CHECK_FALSE(p.rn_feasible());

    TimeChangeParams q = rate_consistent_tc();
    CHECK(std::abs(gamma_char_exponent(q, mi, z) - cplx(q.r, 0.0)) <= 1e-10);
    CHECK(std::abs(gamma_char_exponent(q, z, mi) - cplx(q.r, 0.0)) <= 1e-10);
    CHECK(q.rn_feasible());
}

TEST_CASE("time-change exponent branch guard") {
    TimeChangeParams p = crude_product_tc();
    // at u1 = -3i the log argument crosses the branch cut
    CHECK_THROWS_AS(gamma_char_exponent(p, cplx(0.0, -3.0), cplx(0.0, 0.0)),
                    std::domain_error);
    // real arguments always stay on the principal branch
    CHECK_NOTHROW(gamma_char_exponent(p, cplx(40.0, 0.0), cplx(-25.0, 0.0)));
}

TEST_CASE("time-change moments, frozen subordinator values") {
    const double dt = 1.0 / 310.0;
    TimeChangeParams p = crude_product_tc();
    p.mu1 = 1.0;
    p.sigr1 = 0.5;
    MomentSet ms = tc_moments(p, dt);
    // m1 = mu * E1 and m2 = mu^2 E2 + sigma^2 E1 expose the raw moments of
    // the composite clock R = L0 + d L1
    double E1 = ms.m1[0];
    double E2 = ms.m2[0] - 0.25 * E1;
    CHECK(E1 == doctest::Approx(0.00645161290323).epsilon(1e-10));
    CHECK(E2 == doctest::Approx(0.0110807194886).epsilon(1e-9));

    // factor-3 fourth moment at zero drift: m4 = 3 sigma^4 E2
    TimeChangeParams pz = crude_product_tc();
    pz.mu1 = 0.0;
    pz.sigr1 = 0.7;
    MomentSet mz = tc_moments(pz, dt);
    CHECK(mz.m3[0] == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(mz.m4[0] ==
          doctest::Approx(3.0 * std::pow(0.7, 4) * E2).epsilon(1e-9));

    MomentSet full = tc_moments(crude_product_tc(), dt);
    full.validate();
    CHECK(std::fabs(full.corr) <= 1.0);
    CHECK(full.m2[0] > full.m1[0] * full.m1[0]);
}

TEST_CASE("jump-diffusion moments, frozen rate values") {
    const double dt = 1.0 / 310.0;
    MomentSet ms = jd_theoretical_moments(crude_product_jd(), dt);
    double var1 = (ms.m2[0] - ms.m1[0] * ms.m1[0]) / dt;
    double var2 = (ms.m2[1] - ms.m1[1] * ms.m1[1]) / dt;
    CHECK(var1 == doctest::Approx(0.670422).epsilon(1e-5));
    CHECK(var2 == doctest::Approx(0.547636).epsilon(1e-5));
    CHECK(ms.corr == doctest::Approx(0.35717267).epsilon(1e-6));
    ms.validate();
}

TEST_CASE("parameter and moment validation guards") {
    JumpDiffusionParams p = crude_product_jd();
    CHECK_NOTHROW(p.validate());
    p.sigma1 = 0.0;
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
    p = crude_product_jd();
    p.rho_B = 1.0;
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
    p = crude_product_jd();
    p.lambda0 = -0.1;
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);

    TimeChangeParams t = crude_product_tc();
    CHECK_NOTHROW(t.validate());
    t.alpha0 = 0.0;
    CHECK_THROWS_AS(t.validate(), std::invalid_argument);
    t = crude_product_tc();
    t.sigr2 = 0.0;
    CHECK_THROWS_AS(t.validate(), std::invalid_argument);

    MomentSet ms;
    ms.dt = 1.0 / 310.0;
    ms.m1 = {0.1, 0.0};
    ms.m2 = {0.0, 0.0}; // m2 < m1^2
    CHECK_THROWS_AS(ms.validate(), std::invalid_argument);
}

TEST_CASE("coercivity constants for the example diffusion") {
    CoercivityReport cr = coercivity_report(crude_product_jd());
    CHECK(cr.holds);
    CHECK(cr.m_eig == doctest::Approx(0.1634526643).epsilon(1e-8));
    CHECK(cr.M_eig == doctest::Approx(0.6169209457).epsilon(1e-8));
    CHECK(cr.C2 == doctest::Approx(0.5 * cr.m_eig).epsilon(1e-12));
    CHECK(cr.C1 >= cr.M_eig / 4.0);
    CHECK(cr.C3 > 0.0);
}

TEST_CASE("weight admissibility truth table") {
    CHECK(weight_admissible({0.5, -3.0}, 2));
    CHECK_FALSE(weight_admissible({-0.1, -3.0}, 2));
    CHECK_FALSE(weight_admissible({1.5, -3.0}, 2));
    CHECK(weight_admissible({1.0, -3.0}, 1));
    CHECK_FALSE(weight_admissible({1.0, 1.0}, 1));
    CHECK_FALSE(weight_admissible({3.0, -3.0}, 1));
    CHECK_FALSE(weight_admissible({2.0, -3.0}, 1));
}

} // TEST_SUITE
