#include "cspread/fem.hpp"

#include <cmath>

namespace cspread {

double s3(double x) {
    double a = std::fabs(x);
    if (a >= 2.0) return 0.0;
    if (a >= 1.0) {
        double t = 2.0 - a;
        return 0.25 * t * t * t;
    }
    return 0.25 * (3.0 * a * a * a - 6.0 * a * a + 4.0);
}

double s3_prime(double x) {
    double a = std::fabs(x);
    double s = x < 0.0 ? -1.0 : 1.0;
    if (a >= 2.0) return 0.0;
    if (a >= 1.0) {
        double t = 2.0 - a;
        return s * (-0.75) * t * t;
    }
    return s * 0.25 * (9.0 * a * a - 12.0 * a);
}

double s3_hat(double w) {
    double a = std::fabs(w);
    if (a < 1e-4) {
        // 24 sin^4(w/2)/w^4 = 3/2 - w^2/4 + ... (series keeps full precision near 0)
        double w2 = w * w;
        return 1.5 - 0.25 * w2 + w2 * w2 * (17.0 / 960.0);
    }
    double s = std::sin(0.5 * w);
    double s2 = s * s;
    return 24.0 * s2 * s2 / (w * w * w * w);
}

double phi0_hat(double xi1, double xi2, double h) {
    if (h <= 0.0) throw std::invalid_argument("phi0_hat: h must be positive");
    return h * h * s3_hat(h * xi1) * s3_hat(h * xi2);
}

namespace {

// 4-point Gauss-Legendre on [0, 1]
constexpr double GP[4] = {0.06943184420297371239, 0.33000947820757186760,
                          0.66999052179242813240, 0.93056815579702628761};
constexpr double GW[4] = {0.17392742256872692869, 0.32607257743127307131,
                          0.32607257743127307131, 0.17392742256872692869};

template <typename F, typename G>
double overlap(F f, G g, int d) {
    // int f(t) g(t - d) dt over the common support, cells of unit width
    int lo = std::max(-2, d - 2);
    int hi = std::min(2, d + 2);
    double acc = 0.0;
    for (int k = lo; k < hi; ++k)
        for (int i = 0; i < 4; ++i) {
            double t = k + GP[i];
            acc += GW[i] * f(t) * g(t - d);
        }
    return acc;
}

} // namespace

std::array<double, 4> spline_overlap_ss() {
    std::array<double, 4> r{};
    for (int d = 0; d < 4; ++d) r[d] = overlap(s3, s3, d);
    return r;
}

std::array<double, 4> spline_overlap_dd() {
    std::array<double, 4> r{};
    for (int d = 0; d < 4; ++d) r[d] = overlap(s3_prime, s3_prime, d);
    return r;
}

double spline_overlap_ds(int d) {
    if (d < -3 || d > 3) return 0.0;
    return overlap(s3_prime, s3, d);
}

GeneratingArray mass_generating(const Grid2D& grid, int reach) {
    if (reach < 0) reach = grid.n_int - 1;
    auto ss = spline_overlap_ss();
    GeneratingArray g(reach + 1, reach + 1);
    double h2 = grid.h * grid.h;
    for (int p = -reach; p <= reach; ++p) {
        int ap = std::abs(p);
        if (ap > 3) continue;
        for (int q = -reach; q <= reach; ++q) {
            int aq = std::abs(q);
            if (aq > 3) continue;
            g.at(p, q) = h2 * ss[aq] * ss[ap];
        }
    }
    return g;
}

GeneratingArray bs_stiffness_generating(const Grid2D& grid,
                                        const std::array<std::array<double, 2>, 2>& Sigma,
                                        const std::array<double, 2>& b, int reach) {
    if (reach < 0) reach = grid.n_int - 1;
    double s11 = Sigma[0][0], s22 = Sigma[1][1];
    double s12 = 0.5 * (Sigma[0][1] + Sigma[1][0]);
    if (s11 <= 0.0 || s22 <= 0.0 || s11 * s22 - s12 * s12 <= 0.0)
        throw std::invalid_argument("bs_stiffness_generating: Sigma must be SPD");

    auto ss = spline_overlap_ss();
    auto dd = spline_overlap_dd();
    auto ds = [](int d) { return spline_overlap_ds(d); };

    GeneratingArray g(reach + 1, reach + 1);
    double h = grid.h;
    for (int p = -reach; p <= reach; ++p) {
        int ap = std::abs(p);
        if (ap > 3) continue;
        for (int q = -reach; q <= reach; ++q) {
            int aq = std::abs(q);
            if (aq > 3) continue;
            // q is the x1 difference, p the x2 difference
            double diff = 0.5 * s11 * dd[aq] * ss[ap] + 0.5 * s22 * ss[aq] * dd[ap]
                        - s12 * ds(q) * ds(p);
            double drift = -h * (b[0] * ds(q) * ss[ap] + b[1] * ss[aq] * ds(p));
            g.at(p, q) = diff + drift;
        }
    }
    return g;
}

ExtendedLattice extended_lattice(const Grid2D& grid, int pad) {
    ExtendedLattice lat;
    lat.h = grid.h;
    lat.x_lo = grid.x_lo;
    lat.j_min = -pad;
    lat.j_max = (grid.n_int + 1) + pad;
    return lat;
}

namespace {

// Thomas solve of the collocation tridiagonal (1/4, 1, 1/4); coefficients
// outside the lattice are taken as zero, so no boundary modification.
void collocation_solve_inplace(std::vector<double>& rhs) {
    int n = static_cast<int>(rhs.size());
    std::vector<double> diag(n, 1.0);
    for (int i = 1; i < n; ++i) {
        double w = 0.25 / diag[i - 1];
        diag[i] -= w * 0.25;
        rhs[i] -= w * rhs[i - 1];
    }
    rhs[n - 1] /= diag[n - 1];
    for (int i = n - 2; i >= 0; --i) rhs[i] = (rhs[i] - 0.25 * rhs[i + 1]) / diag[i];
}

} // namespace

std::vector<double> interpolate_on_lattice(const ExtendedLattice& lat,
                                           const std::function<double(double, double)>& f) {
    int n = lat.count();
    std::vector<double> c(static_cast<std::size_t>(n) * n);
    for (int a2 = 0; a2 < n; ++a2)
        for (int a1 = 0; a1 < n; ++a1)
            c[static_cast<std::size_t>(a2) * n + a1] =
                f(lat.node(lat.j_min + a1), lat.node(lat.j_min + a2));

    std::vector<double> line(n);
    for (int a2 = 0; a2 < n; ++a2) { // along x1
        for (int a1 = 0; a1 < n; ++a1) line[a1] = c[static_cast<std::size_t>(a2) * n + a1];
        collocation_solve_inplace(line);
        for (int a1 = 0; a1 < n; ++a1) c[static_cast<std::size_t>(a2) * n + a1] = line[a1];
    }
    for (int a1 = 0; a1 < n; ++a1) { // along x2
        for (int a2 = 0; a2 < n; ++a2) line[a2] = c[static_cast<std::size_t>(a2) * n + a1];
        collocation_solve_inplace(line);
        for (int a2 = 0; a2 < n; ++a2) c[static_cast<std::size_t>(a2) * n + a1] = line[a2];
    }
    return c;
}

std::vector<double> interpolate_psi(const ExtendedLattice& lat, const PayoffParams& pp) {
    return interpolate_on_lattice(
        lat, [&pp](double x1, double x2) { return spread_payoff(pp, x1, x2); });
}

double spline_eval(const ExtendedLattice& lat, const std::vector<double>& coef,
                   double x1, double x2) {
    int n = lat.count();
    double t1 = (x1 - lat.x_lo) / lat.h;
    double t2 = (x2 - lat.x_lo) / lat.h;
    int lo1 = static_cast<int>(std::ceil(t1 - 2.0));
    int lo2 = static_cast<int>(std::ceil(t2 - 2.0));
    double acc = 0.0;
    for (int j2 = lo2; j2 < lo2 + 4; ++j2) {
        if (j2 < lat.j_min || j2 > lat.j_max) continue;
        double w2 = s3(t2 - j2);
        if (w2 == 0.0) continue;
        for (int j1 = lo1; j1 < lo1 + 4; ++j1) {
            if (j1 < lat.j_min || j1 > lat.j_max) continue;
            double w1 = s3(t1 - j1);
            if (w1 == 0.0) continue;
            acc += coef[static_cast<std::size_t>(j2 - lat.j_min) * n + (j1 - lat.j_min)] * w1 * w2;
        }
    }
    return acc;
}

double spline_eval_interior(const Grid2D& grid, const std::vector<double>& coef,
                            double x1, double x2) {
    double t1 = (x1 - grid.x_lo) / grid.h;
    double t2 = (x2 - grid.x_lo) / grid.h;
    int lo1 = static_cast<int>(std::ceil(t1 - 2.0));
    int lo2 = static_cast<int>(std::ceil(t2 - 2.0));
    double acc = 0.0;
    for (int j2 = lo2; j2 < lo2 + 4; ++j2) {
        if (j2 < 1 || j2 > grid.n_int) continue;
        double w2 = s3(t2 - j2);
        if (w2 == 0.0) continue;
        for (int j1 = lo1; j1 < lo1 + 4; ++j1) {
            if (j1 < 1 || j1 > grid.n_int) continue;
            double w1 = s3(t1 - j1);
            if (w1 == 0.0) continue;
            acc += coef[static_cast<std::size_t>(j2 - 1) * grid.n_int + (j1 - 1)] * w1 * w2;
        }
    }
    return acc;
}

} // namespace cspread
