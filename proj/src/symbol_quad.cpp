#include "cspread/symbol_quad.hpp"
#include "cspread/fem.hpp"
#include "cspread/fft2.hpp"

#include <cmath>
#include <string>

namespace cspread {

int default_fft_size(int reach) {
    int p = 2;
    while (p < 2 * reach + 2) p <<= 1;
    return p;
}

GeneratingArray jump_generating(const Grid2D& grid, const SymbolFn& symbol,
                                const SymbolQuadConfig& quad, int reach,
                                JumpAssemblyDiag* diag) {
    if (reach < 0) reach = grid.n_int - 1;
    const int P = quad.fft_size > 0 ? quad.fft_size : default_fft_size(reach);
    if (P < 2 || (P & (P - 1)) != 0)
        throw std::invalid_argument("jump_generating: fft_size must be a power of two");
    if (quad.radius_pi < 1)
        throw std::invalid_argument("jump_generating: radius must be at least pi");
    if (P < 2 * reach + 2)
        throw std::invalid_argument(
            "jump_generating: fft_size too small for the node-difference lattice (aliasing)");

    const int ns = quad.radius_pi * P;
    const double dz = 2.0 * M_PI / P;
    const double zlo = -M_PI * quad.radius_pi + 0.5 * dz;
    const double h = grid.h;

    std::vector<double> w(ns), zx(ns);
    for (int t = 0; t < ns; ++t) {
        double z = zlo + t * dz;
        double sh = s3_hat(z);
        w[t] = sh * sh;
        zx[t] = z / h;
    }

    std::vector<cplx> fold(static_cast<std::size_t>(P) * P, cplx(0.0, 0.0));
    double edge_max = 0.0;
    for (int t2 = 0; t2 < ns; ++t2) {
        cplx* row = fold.data() + static_cast<std::size_t>(t2 % P) * P;
        double w2 = w[t2];
        double x2 = zx[t2];
        bool edge2 = (t2 == 0 || t2 == ns - 1);
        for (int t1 = 0; t1 < ns; ++t1) {
            cplx v = symbol(zx[t1], x2);
            if (edge2 || t1 == 0 || t1 == ns - 1)
                edge_max = std::max(edge_max, std::abs(v));
            row[t1 % P] += (w[t1] * w2) * v;
        }
    }

    std::vector<cplx> freq(fold.size());
    fft2_backward(P, P, fold.data(), freq.data());

    const double scale = h * h * dz * dz / (4.0 * M_PI * M_PI);
    std::vector<cplx> pref(2 * reach + 1);
    for (int d = -reach; d <= reach; ++d)
        pref[d + reach] = std::exp(cplx(0.0, zlo * d));

    GeneratingArray g(reach + 1, reach + 1);
    double max_abs = 0.0, max_imag = 0.0;
    std::vector<cplx> raw(static_cast<std::size_t>(2 * reach + 1) * (2 * reach + 1));
    for (int p = -reach; p <= reach; ++p) {
        int k2 = ((p % P) + P) % P;
        for (int q = -reach; q <= reach; ++q) {
            int k1 = ((q % P) + P) % P;
            cplx v = scale * pref[p + reach] * pref[q + reach] *
                     freq[static_cast<std::size_t>(k2) * P + k1];
            raw[static_cast<std::size_t>(p + reach) * (2 * reach + 1) + (q + reach)] = v;
            max_abs = std::max(max_abs, std::abs(v));
            max_imag = std::max(max_imag, std::fabs(v.imag()));
        }
    }
    if (max_abs > 0.0 && max_imag > 1e-10 * max_abs)
        throw std::runtime_error(
            "jump_generating: imaginary residue " + std::to_string(max_imag) +
            " exceeds 1e-10 * " + std::to_string(max_abs) +
            " (symbol sign/convention inconsistency)");
    for (int p = -reach; p <= reach; ++p)
        for (int q = -reach; q <= reach; ++q)
            g.at(p, q) = raw[static_cast<std::size_t>(p + reach) * (2 * reach + 1) + (q + reach)].real();

    if (diag) {
        // |s3_hat|^2 <= 576/z^8 outside the sampled square; one-axis tail times
        // the full-line mass of the other axis, plus the corner patch
        double Rpi = M_PI * quad.radius_pi;
        double B1 = 2.0 * 576.0 / (7.0 * std::pow(Rpi, 7));
        double S_full = 0.0;
        for (int t = 0; t < ns; ++t) S_full += w[t] * dz;
        diag->tail_bound = edge_max * (2.0 * B1 * S_full + B1 * B1) * h * h / (4.0 * M_PI * M_PI);
        diag->imag_residue = max_imag;
        diag->max_entry = max_abs;
    }
    return g;
}

namespace {

struct Quad1D {
    const std::function<cplx(double)>& f;
    int max_depth;

    static cplx simpson(double a, double b, cplx fa, cplx fm, cplx fb) {
        return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    }

    cplx recurse(double a, double b, cplx fa, cplx fm, cplx fb, cplx whole, double tol,
                 int depth, double* worst) const {
        double m = 0.5 * (a + b);
        double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
        cplx flm = f(lm), frm = f(rm);
        cplx left = simpson(a, m, fa, flm, fm);
        cplx right = simpson(m, b, fm, frm, fb);
        cplx delta = left + right - whole;
        if (std::abs(delta) <= 15.0 * tol || depth >= max_depth) {
            if (depth >= max_depth && worst)
                *worst = std::max(*worst, std::abs(delta) / 15.0);
            return left + right + delta / 15.0;
        }
        return recurse(a, m, fa, flm, fm, left, 0.5 * tol, depth + 1, worst) +
               recurse(m, b, fm, frm, fb, right, 0.5 * tol, depth + 1, worst);
    }

    cplx integrate(double a, double b, double tol, double* worst) const {
        double m = 0.5 * (a + b);
        cplx fa = f(a), fm = f(m), fb = f(b);
        return recurse(a, b, fa, fm, fb, simpson(a, b, fa, fm, fb), tol, 0, worst);
    }
};

cplx adaptive_1d(const std::function<cplx(double)>& f, double a, double b, double tol_total,
                 double* worst) {
    // integrate panel-by-panel over pi-wide panels so oscillations are resolved
    Quad1D q{f, 24};
    cplx acc(0.0, 0.0);
    int panels = std::max(2, static_cast<int>(std::ceil((b - a) / M_PI)));
    double step = (b - a) / panels;
    double per = tol_total / panels;
    for (int k = 0; k < panels; ++k)
        acc += q.integrate(a + k * step, a + (k + 1) * step, per, worst);
    return acc;
}

} // namespace

cplx jump_entry_adaptive(const Grid2D& grid, const SymbolFn& symbol, int dq, int dp,
                         double abs_tol, double radius_pi) {
    const double h = grid.h;
    const double R = radius_pi * M_PI;
    double worst = 0.0;
    auto outer = [&](double z2) -> cplx {
        double w2 = s3_hat(z2);
        w2 *= w2;
        if (w2 == 0.0) return cplx(0.0, 0.0);
        auto inner = [&](double z1) -> cplx {
            double w1 = s3_hat(z1);
            w1 *= w1;
            return symbol(z1 / h, z2 / h) * (w1 * w2) *
                   std::exp(cplx(0.0, z1 * dq + z2 * dp));
        };
        return adaptive_1d(inner, -R, R, abs_tol * 0.02, &worst);
    };
    cplx val = adaptive_1d(outer, -R, R, abs_tol * 0.5, &worst);
    if (worst > abs_tol)
        throw std::runtime_error("jump_entry_adaptive: quadrature failed to converge, worst cell " +
                                 std::to_string(worst));
    return val * (h * h / (4.0 * M_PI * M_PI));
}

cplx jump_entry_panels(const Grid2D& grid, const SymbolFn& symbol, int dq, int dp,
                       double radius_pi, int panels_per_pi) {
    // tensor 12-point Gauss-Legendre on pi/panels_per_pi panels
    static const double gp[6] = {0.03376524289842399, 0.16939530676686774, 0.38069040695840155,
                                 0.61930959304159845, 0.83060469323313226, 0.96623475710157601};
    static const double gw[6] = {0.08566224618958517, 0.18038078652406930, 0.23395696728634552,
                                 0.23395696728634552, 0.18038078652406930, 0.08566224618958517};
    const double h = grid.h;
    const int panels = static_cast<int>(std::lround(2.0 * radius_pi * panels_per_pi));
    const double a = -radius_pi * M_PI;
    const double step = 2.0 * radius_pi * M_PI / panels;

    std::vector<double> nodes(static_cast<std::size_t>(panels) * 6);
    std::vector<double> wts(nodes.size());
    for (int k = 0; k < panels; ++k)
        for (int i = 0; i < 6; ++i) {
            nodes[k * 6 + i] = a + (k + gp[i]) * step;
            wts[k * 6 + i] = gw[i] * step;
        }
    cplx acc(0.0, 0.0);
    for (std::size_t i2 = 0; i2 < nodes.size(); ++i2) {
        double z2 = nodes[i2];
        double w2 = s3_hat(z2);
        w2 *= w2;
        cplx rowacc(0.0, 0.0);
        for (std::size_t i1 = 0; i1 < nodes.size(); ++i1) {
            double z1 = nodes[i1];
            double w1 = s3_hat(z1);
            w1 *= w1;
            rowacc += wts[i1] * (w1 * w2) * symbol(z1 / h, z2 / h) *
                      std::exp(cplx(0.0, z1 * dq + z2 * dp));
        }
        acc += wts[i2] * rowacc;
    }
    return acc * (h * h / (4.0 * M_PI * M_PI));
}

GeneratingArray jump_generating_direct(const Grid2D& grid, const SymbolFn& symbol, int reach,
                                       double abs_tol, double radius_pi) {
    if (grid.n_int > 8)
        throw std::invalid_argument("jump_generating_direct: grid too large for the oracle path");
    if (reach < 0) reach = grid.n_int - 1;
    GeneratingArray g(reach + 1, reach + 1);
    double max_abs = 0.0, max_imag = 0.0;
    for (int p = -reach; p <= reach; ++p)
        for (int q = -reach; q <= reach; ++q) {
            cplx v = jump_entry_adaptive(grid, symbol, q, p, abs_tol, radius_pi);
            g.at(p, q) = v.real();
            max_abs = std::max(max_abs, std::abs(v));
            max_imag = std::max(max_imag, std::fabs(v.imag()));
        }
    if (max_abs > 0.0 && max_imag > 1e-7 * max_abs)
        throw std::runtime_error("jump_generating_direct: imaginary residue too large");
    return g;
}

} // namespace cspread
