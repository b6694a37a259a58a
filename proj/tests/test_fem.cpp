#include "doctest.h"

#include <array>
#include <cmath>
#include <vector>

#include "cspread/fem.hpp"
#include "cspread/types.hpp"

using namespace cspread;

namespace {

// 6-point Gauss-Legendre on [a, b]
double gauss6(const std::function<double(double)>& f, double a, double b) {
    static const double xs[3] = {0.238619186083196909, 0.661209386466264514,
                                 0.932469514203152028};
    static const double ws[3] = {0.467913934572691047, 0.360761573048138608,
                                 0.171324492379170345};
    double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    double s = 0.0;
    for (int i = 0; i < 3; ++i)
        s += ws[i] * (f(mid - half * xs[i]) + f(mid + half * xs[i]));
    return s * half;
}

// integral over the union of unit cells [-2, 2], exact for piecewise
// polynomials with integer knots up to degree 11
double cellwise(const std::function<double(double)>& f, int lo = -5, int hi = 5) {
    double s = 0.0;
    for (int k = lo; k < hi; ++k) s += gauss6(f, k, k + 1);
    return s;
}

double cellwise2d(const std::function<double(double, double)>& f) {
    double s = 0.0;
    for (int k1 = -5; k1 < 5; ++k1)
        for (int k2 = -5; k2 < 5; ++k2) {
            auto inner = [&](double t2) {
                return gauss6([&](double t1) { return f(t1, t2); }, k1, k1 + 1);
            };
            s += gauss6(inner, k2, k2 + 1);
        }
    return s;
}

} // namespace

TEST_SUITE("fem") {

TEST_CASE("spline point values") {
    CHECK(s3(0.0) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(s3(1.0) == doctest::Approx(0.25).epsilon(1e-15));
    CHECK(s3(-1.0) == doctest::Approx(0.25).epsilon(1e-15));
    CHECK(s3(0.5) == doctest::Approx(23.0 / 32.0).epsilon(1e-15));
    CHECK(s3(2.0) == 0.0);
    CHECK(s3(-2.0) == 0.0);
    CHECK(s3(2.7) == 0.0);
    CHECK(s3_prime(0.0) == doctest::Approx(0.0));
    CHECK(s3_prime(1.0) == doctest::Approx(-0.75).epsilon(1e-14));
    CHECK(s3_prime(0.5) == doctest::Approx(-15.0 / 16.0).epsilon(1e-14));
    CHECK(s3_prime(-0.5) == doctest::Approx(15.0 / 16.0).epsilon(1e-14));
    CHECK(s3_prime(2.5) == 0.0);
}

TEST_CASE("spline integral and transform") {
    double total = cellwise([](double t) { return s3(t); });
    CHECK(total == doctest::Approx(1.5).epsilon(1e-14));

    CHECK(s3_hat(0.0) == doctest::Approx(1.5).epsilon(1e-14));
    CHECK(s3_hat(1.0) == doctest::Approx(1.2679318199408962302).epsilon(1e-14));
    CHECK(s3_hat(2.5) == doctest::Approx(0.49829657453959381431).epsilon(1e-14));
    CHECK(s3_hat(3.141592653589793) == doctest::Approx(0.24638357411242404454).epsilon(1e-13));

    // transform equals the straight oscillatory integral of the spline
    // (1/16-width panels so the quadrature resolves the oscillation)
    for (double w : {0.7, 1.9}) {
        double direct = 0.0;
        for (int cell = -32; cell < 32; ++cell)
            direct += gauss6([&](double t) { return s3(t) * std::cos(w * t); }, cell / 16.0,
                             (cell + 1) / 16.0);
        CHECK(s3_hat(w) == doctest::Approx(direct).epsilon(1e-12));
    }

    CHECK(phi0_hat(0.0, 0.0, 1.0) == doctest::Approx(2.25).epsilon(1e-14));
    CHECK(phi0_hat(1.0, 2.5, 0.5) ==
          doctest::Approx(0.25 * s3_hat(0.5) * s3_hat(1.25)).epsilon(1e-14));
}

TEST_CASE("overlap sequences match exact rationals") {
    auto ss = spline_overlap_ss();
    CHECK(ss[0] == doctest::Approx(151.0 / 140.0).epsilon(1e-14));
    CHECK(ss[1] == doctest::Approx(1191.0 / 2240.0).epsilon(1e-14));
    CHECK(ss[2] == doctest::Approx(3.0 / 56.0).epsilon(1e-14));
    CHECK(ss[3] == doctest::Approx(1.0 / 2240.0).epsilon(1e-12));

    auto dd = spline_overlap_dd();
    CHECK(dd[0] == doctest::Approx(1.5).epsilon(1e-14));
    CHECK(dd[1] == doctest::Approx(-9.0 / 32.0).epsilon(1e-14));
    CHECK(dd[2] == doctest::Approx(-9.0 / 20.0).epsilon(1e-14));
    CHECK(dd[3] == doctest::Approx(-3.0 / 160.0).epsilon(1e-13));

    CHECK(spline_overlap_ds(0) == doctest::Approx(0.0));
    CHECK(spline_overlap_ds(1) == doctest::Approx(-49.0 / 64.0).epsilon(1e-14));
    CHECK(spline_overlap_ds(-1) == doctest::Approx(49.0 / 64.0).epsilon(1e-14));
    CHECK(spline_overlap_ds(2) == doctest::Approx(-7.0 / 40.0).epsilon(1e-14));
    CHECK(spline_overlap_ds(3) == doctest::Approx(-1.0 / 320.0).epsilon(1e-12));

    // and match direct quadrature of the definitions
    for (int d = 0; d <= 3; ++d) {
        double qss = cellwise([&](double t) { return s3(t) * s3(t - d); });
        double qdd = cellwise([&](double t) { return s3_prime(t) * s3_prime(t - d); });
        double qds = cellwise([&](double t) { return s3_prime(t) * s3(t - d); });
        CHECK(ss[d] == doctest::Approx(qss).epsilon(1e-13));
        CHECK(dd[d] == doctest::Approx(qdd).epsilon(1e-13));
        CHECK(spline_overlap_ds(d) == doctest::Approx(qds).epsilon(1e-12));
    }
}

TEST_CASE("mass generating array vs 2d quadrature") {
    for (int level : {2, 3}) {
        Grid2D grid(8.0, level, -4.0);
        GeneratingArray g = mass_generating(grid, 3);
        double h = grid.h;
        double worst = 0.0, scale = 0.0;
        for (int p = -3; p <= 3; ++p)
            for (int q = -3; q <= 3; ++q) {
                double exact = h * h * cellwise2d([&](double t1, double t2) {
                                   return s3(t1) * s3(t2) * s3(t1 - q) * s3(t2 - p);
                               });
                worst = std::max(worst, std::fabs(g.at(p, q) - exact));
                scale = std::max(scale, std::fabs(exact));
            }
        CHECK(worst <= 1e-13 * scale);
        CHECK(g.get(4, 0) == 0.0);
        CHECK(g.get(0, -4) == 0.0);
    }
}

TEST_CASE("stiffness generating array vs 2d quadrature") {
    std::array<std::array<double, 2>, 2> Sigma{
        {{0.49350625, 0.20183396}, {0.20183396, 0.28686736}}};
    std::array<double, 2> b{-0.0840130552919510, -0.0716458381533638};
    for (int level : {2, 3}) {
        Grid2D grid(8.0, level, -4.0);
        GeneratingArray g = bs_stiffness_generating(grid, Sigma, b, 3);
        double h = grid.h;
        double worst = 0.0, scale = 0.0;
        for (int p = -3; p <= 3; ++p)
            for (int q = -3; q <= 3; ++q) {
                // trial u centered at 0, test w offset by (h q, h p); the
                // drift enters as -(b . grad u, w)
                double exact = cellwise2d([&](double t1, double t2) {
                    double u1 = s3_prime(t1) * s3(t2);
                    double u2 = s3(t1) * s3_prime(t2);
                    double w = s3(t1 - q) * s3(t2 - p);
                    double w1 = s3_prime(t1 - q) * s3(t2 - p);
                    double w2 = s3(t1 - q) * s3_prime(t2 - p);
                    double diff = 0.5 * (Sigma[0][0] * u1 * w1 + Sigma[0][1] * u1 * w2 +
                                         Sigma[1][0] * u2 * w1 + Sigma[1][1] * u2 * w2);
                    double drift = -h * (b[0] * u1 + b[1] * u2) * w;
                    return diff + drift;
                });
                worst = std::max(worst, std::fabs(g.at(p, q) - exact));
                scale = std::max(scale, std::fabs(exact));
            }
        CHECK(worst <= 1e-13 * scale);
    }
}

TEST_CASE("payoff") {
    PayoffParams pp{1.0, 1.0 / 42.0, 100.0, 2.0};
    CHECK(spread_payoff(pp, 0.0, 0.0) == 0.0);
    // at x2 = 0.5 the spread is slightly negative, so the option clamps to 0
    CHECK(spread_payoff(pp, 0.0, 0.5) == 0.0);
    double v = 2.0 * std::exp(0.6) - (100.0 / 42.0) - 1.0;
    CHECK(spread_payoff(pp, 0.0, 0.6) == doctest::Approx(v).epsilon(1e-15));
    CHECK(spread_payoff(pp, 1.0, -1.0) == 0.0);
    PayoffParams zero_k{0.0, 0.5, 1.0, 1.0};
    CHECK(spread_payoff(zero_k, 0.0, 0.0) == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("extended lattice layout") {
    Grid2D grid(8.0, 3, -4.0);
    ExtendedLattice lat = extended_lattice(grid);
    CHECK(lat.j_min == -3);
    CHECK(lat.j_max == 11);
    CHECK(lat.count() == 15);
    CHECK(lat.node(0) == doctest::Approx(-4.0));
    CHECK(lat.node(8) == doctest::Approx(4.0));
    CHECK(lat.h == doctest::Approx(grid.h));
}

TEST_CASE("interpolation collocates lattice nodes") {
    Grid2D grid(8.0, 4, -4.0);
    ExtendedLattice lat = extended_lattice(grid);
    auto f = [](double x1, double x2) {
        return std::exp(0.3 * x1 - 0.2 * x2) + 0.1 * x1 * x2;
    };
    std::vector<double> c = interpolate_on_lattice(lat, f);
    REQUIRE(c.size() == static_cast<std::size_t>(lat.count()) * lat.count());
    for (int j2 = lat.j_min; j2 <= lat.j_max; j2 += 3)
        for (int j1 = lat.j_min; j1 <= lat.j_max; j1 += 2) {
            double x1 = lat.node(j1), x2 = lat.node(j2);
            CHECK(spline_eval(lat, c, x1, x2) == doctest::Approx(f(x1, x2)).epsilon(1e-12));
        }
    // interior off-node accuracy for the smooth function
    for (double x1 : {-1.3, 0.17, 2.05})
        for (double x2 : {-0.9, 1.44}) {
            CHECK(spline_eval(lat, c, x1, x2) ==
                  doctest::Approx(f(x1, x2)).epsilon(2e-4));
        }
}

TEST_CASE("payoff interpolation is node exact") {
    Grid2D grid(8.0, 4, -4.0);
    ExtendedLattice lat = extended_lattice(grid);
    PayoffParams pp{1.0, 1.0 / 42.0, 100.0, 2.0};
    std::vector<double> psi = interpolate_psi(lat, pp);
    for (int j2 = lat.j_min; j2 <= lat.j_max; ++j2)
        for (int j1 = lat.j_min; j1 <= lat.j_max; ++j1) {
            double x1 = lat.node(j1), x2 = lat.node(j2);
            double got = spline_eval(lat, psi, x1, x2);
            CHECK(got == doctest::Approx(spread_payoff(pp, x1, x2)).epsilon(1e-11));
        }
}

TEST_CASE("interior spline evaluation indexing") {
    Grid2D grid(8.0, 3, -4.0);
    std::vector<double> c(grid.size(), 0.0);
    int j1 = 4, j2 = 3;
    c[grid.index(j1, j2)] = 1.0;
    double xc1 = grid.node1(j1), xc2 = grid.node2(j2);
    for (double dx1 : {-0.7, 0.0, 0.4})
        for (double dx2 : {-0.3, 0.9}) {
            double expect = s3(dx1 / grid.h) * s3(dx2 / grid.h);
            CHECK(spline_eval_interior(grid, c, xc1 + dx1, xc2 + dx2) ==
                  doctest::Approx(expect).epsilon(1e-14));
        }
}

TEST_CASE("grid and generating array guards") {
    CHECK_THROWS_AS(Grid2D(8.0, 1, -4.0), std::invalid_argument);
    CHECK_THROWS_AS(Grid2D(-1.0, 4, 0.0), std::invalid_argument);
    Grid2D grid(8.0, 2, -4.0);
    CHECK(grid.n_int == 3);
    CHECK(grid.index(1, 1) == 0);
    CHECK(grid.index(3, 3) == 8);
    CHECK(grid.index(2, 1) == 1);
    CHECK_THROWS_AS(grid.index(0, 1), std::invalid_argument);
    CHECK_THROWS_AS(grid.index(1, 4), std::invalid_argument);

    GeneratingArray g(2, 3);
    g.at(1, -2) = 5.0;
    CHECK(g.get(1, -2) == 5.0);
    CHECK(g.get(2, 0) == 0.0);
    CHECK_THROWS_AS(g.at(2, 0), std::invalid_argument);
    GeneratingArray big(4, 4);
    big.at(3, 3) = 7.0;
    big.at(1, -1) = 2.0;
    GeneratingArray small = big.crop(2, 2);
    CHECK(small.at(1, -1) == 2.0);
    CHECK(small.get(3, 3) == 0.0);
}

} // TEST_SUITE
