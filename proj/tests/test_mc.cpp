#include "doctest.h"

#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

#include "cspread/mc.hpp"
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

struct CfSample {
    cplx mean;
    double se_re, se_im;
};

CfSample empirical_cf(const std::vector<std::array<double, 2>>& ys, double u1, double u2) {
    double sr = 0.0, si = 0.0, srr = 0.0, sii = 0.0;
    for (const auto& y : ys) {
        double ph = u1 * y[0] + u2 * y[1];
        double c = std::cos(ph), s = std::sin(ph);
        sr += c;
        si += s;
        srr += c * c;
        sii += s * s;
    }
    double n = static_cast<double>(ys.size());
    CfSample out;
    out.mean = cplx(sr / n, si / n);
    out.se_re = std::sqrt(std::max(0.0, srr / n - (sr / n) * (sr / n)) / n);
    out.se_im = std::sqrt(std::max(0.0, sii / n - (si / n) * (si / n)) / n);
    return out;
}

struct MeanSe {
    double mean, se;
};

template <class F>
MeanSe sample_stat(const std::vector<std::array<double, 2>>& ys, F f) {
    double s = 0.0, ss = 0.0;
    for (const auto& y : ys) {
        double v = f(y);
        s += v;
        ss += v * v;
    }
    double n = static_cast<double>(ys.size());
    double m = s / n;
    return {m, std::sqrt(std::max(0.0, ss / n - m * m) / n)};
}

} // namespace

TEST_SUITE("mc") {

TEST_CASE("jump-diffusion samples match the characteristic exponent") {
    JumpDiffusionParams p = crude_product_jd();
    const double T = 0.5;
    auto ys = simulate_jd(p, T, 1, 200000, 20240501);
    for (auto [u1, u2] : {std::pair{1.0, 0.0}, {0.0, 1.0}, {1.0, -1.0}, {0.5, 0.7}, {3.0, 0.0},
                          {0.0, 3.0}}) {
        cplx theory = std::exp(T * merton_char_exponent(p, cplx(u1, 0.0), cplx(u2, 0.0)));
        CfSample got = empirical_cf(ys, u1, u2);
        CHECK(std::fabs(got.mean.real() - theory.real()) <= 3.5 * got.se_re);
        CHECK(std::fabs(got.mean.imag() - theory.imag()) <= 3.5 * got.se_im);
    }
}

TEST_CASE("time-change samples match the characteristic exponent") {
    TimeChangeParams p = crude_product_tc();
    const double T = 0.5;
    auto ys = simulate_tc(p, T, 1, 200000, 77001);
    for (auto [u1, u2] : {std::pair{1.0, 0.0}, {0.0, 1.0}, {1.0, -1.0}, {0.5, 0.7}}) {
        cplx theory = std::exp(T * gamma_char_exponent(p, cplx(u1, 0.0), cplx(u2, 0.0)));
        CfSample got = empirical_cf(ys, u1, u2);
        CHECK(std::fabs(got.mean.real() - theory.real()) <= 3.5 * got.se_re);
        CHECK(std::fabs(got.mean.imag() - theory.imag()) <= 3.5 * got.se_im);
    }
}

TEST_CASE("discounted exponentials are martingales") {
    const double T = 0.5;
    double target = std::exp(0.02 * T);

    auto jd = simulate_jd(crude_product_jd(), T, 1, 400000, 11);
    for (int j : {0, 1}) {
        auto st = sample_stat(jd, [j](const std::array<double, 2>& y) { return std::exp(y[j]); });
        CHECK(std::fabs(st.mean - target) <= 4.0 * st.se);
    }

    auto tc = simulate_tc(rate_consistent_tc(), T, 1, 400000, 12);
    for (int j : {0, 1}) {
        auto st = sample_stat(tc, [j](const std::array<double, 2>& y) { return std::exp(y[j]); });
        CHECK(std::fabs(st.mean - target) <= 4.0 * st.se);
    }
}

TEST_CASE("time-change one-step moments match the closed forms") {
    TimeChangeParams p = crude_product_tc();
    const double dt = 1.0 / 310.0;
    MomentSet ms = tc_moments(p, dt);
    auto ys = simulate_tc(p, dt, 1, 400000, 314159);

    for (int j : {0, 1}) {
        double th[4] = {ms.m1[j], ms.m2[j], ms.m3[j], ms.m4[j]};
        for (int k = 1; k <= 4; ++k) {
            auto st = sample_stat(ys, [j, k](const std::array<double, 2>& y) {
                return std::pow(y[j], k);
            });
            CAPTURE(j);
            CAPTURE(k);
            CHECK(std::fabs(st.mean - th[k - 1]) <= 4.0 * st.se);
        }
    }
    auto cross = sample_stat(ys, [](const std::array<double, 2>& y) { return y[0] * y[1]; });
    CHECK(std::fabs(cross.mean - ms.m12) <= 4.0 * cross.se);

    // the mixing of the gamma clock makes one-step returns leptokurtic
    for (int j : {0, 1}) {
        double v = ms.m2[j] - ms.m1[j] * ms.m1[j];
        double m4c = ms.m4[j] - 4.0 * ms.m3[j] * ms.m1[j] + 6.0 * ms.m2[j] * ms.m1[j] * ms.m1[j] -
                     3.0 * std::pow(ms.m1[j], 4);
        CHECK(m4c / (v * v) > 3.5);
    }
}

TEST_CASE("simulation argument and reproducibility contract") {
    JumpDiffusionParams p = crude_product_jd();
    CHECK_THROWS_AS(simulate_jd(p, 0.5, 0, 10, 1), std::invalid_argument);
    CHECK_THROWS_AS(simulate_jd(p, -0.5, 4, 10, 1), std::invalid_argument);

    auto a = simulate_jd(p, 0.25, 3, 257, 99);
    auto b = simulate_jd(p, 0.25, 3, 257, 99);
    auto c = simulate_jd(p, 0.25, 3, 257, 100);
    REQUIRE(a.size() == 257);
    CHECK(a == b);
    CHECK(a != c);

    std::vector<double> traj;
    auto d = simulate_jd(p, 0.25, 3, 257, 99, &traj);
    CHECK(d == a); // recording trajectories must not perturb the draws
    REQUIRE(traj.size() == 257 * 4 * 2);
    for (std::size_t i = 0; i < d.size(); ++i) {
        CHECK(traj[(i * 4 + 0) * 2] == 0.0);
        CHECK(traj[(i * 4 + 0) * 2 + 1] == 0.0);
        CHECK(traj[(i * 4 + 3) * 2] == d[i][0]);
        CHECK(traj[(i * 4 + 3) * 2 + 1] == d[i][1]);
    }
}

TEST_CASE("price estimates: bounds, monotonicity, error scaling") {
    JumpDiffusionParams p = crude_product_jd();
    Contract base;
    base.T = 0.5;

    McEstimate e1 = mc_price(p, base, 100000, 7);
    McEstimate e2 = mc_price(p, base, 100000, 7);
    CHECK(e1.value == e2.value);
    CHECK(e1.std_error == e2.std_error);
    CHECK(e1.n_paths == 100000);
    CHECK(e1.value > 0.0);
    CHECK(e1.value < base.s0[1]);

    CHECK(mc_price(p, base, 99999, 5).n_paths == 100000);

    Contract lo = base, hi = base;
    lo.K = 0.8;
    hi.K = 1.2;
    McEstimate plo = mc_price(p, lo, 100000, 7);
    McEstimate phi = mc_price(p, hi, 100000, 7);
    CHECK(plo.value >= e1.value);
    CHECK(e1.value >= phi.value);

    McEstimate coarse = mc_price(p, base, 10000, 3);
    McEstimate fine = mc_price(p, base, 1000000, 3);
    double ratio = coarse.std_error / fine.std_error;
    CHECK(ratio >= 5.0);
    CHECK(ratio <= 20.0);

    TimeChangeParams q = rate_consistent_tc();
    McEstimate tc = mc_price(q, base, 100000, 9);
    CHECK(tc.value > 0.0);
    CHECK(tc.value < base.s0[1]);
}

} // TEST_SUITE
