#include "cspread/pricer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>
#include <string>

#include "cspread/fft2.hpp"

namespace cspread {

void SchemeConfig::validate() const {
    if (!(theta >= 0.0 && theta <= 1.0))
        throw std::invalid_argument("SchemeConfig: theta must lie in [0, 1]");
    if (time_steps < -1) throw std::invalid_argument("SchemeConfig: bad time_steps");
    if (domain_length <= 0.0) throw std::invalid_argument("SchemeConfig: bad domain length");
    if (level < 2) throw std::invalid_argument("SchemeConfig: level must be at least 2");
    if (omega <= 0.0 || x_lo >= -omega || x_lo + domain_length <= omega)
        throw std::invalid_argument(
            "SchemeConfig: effective domain must sit strictly inside the outer square");
    if (solver_tol <= 0.0 || solver_maxit < 1)
        throw std::invalid_argument("SchemeConfig: bad solver settings");
}

namespace {

AssembledSystem assemble_core(const SymbolFn& jump_symbol, bool has_local_part,
                              const std::array<std::array<double, 2>, 2>& Sigma,
                              const std::array<double, 2>& b, double r, const Contract& contract,
                              const SchemeConfig& cfg) {
    cfg.validate();
    contract.validate();

    AssembledSystem sys;
    sys.grid = cfg.make_grid();
    sys.r = r;
    const Grid2D& grid = sys.grid;
    const int n = grid.n_int;
    const int D = n + 3; // largest node difference against the extended lattice

    GeneratingArray jump_ext =
        jump_generating(grid, jump_symbol, cfg.quad, D, &sys.jump_diag);

    sys.Mgen = mass_generating(grid);
    sys.Agen = has_local_part ? bs_stiffness_generating(grid, Sigma, b)
                              : GeneratingArray(n, n);
    sys.Jgen = jump_ext.crop(n, n);

    sys.lat = extended_lattice(grid);
    sys.psi = interpolate_psi(
        sys.lat, PayoffParams{contract.K, contract.c, contract.s0[0], contract.s0[1]});

    // load vector F_k = -sum_j G(k - j) psi_j over the extended lattice, with
    // G the whole operator band; computed as one zero-padded 2D circular
    // convolution
    GeneratingArray local_op = has_local_part ? bs_stiffness_generating(grid, Sigma, b, 3)
                                              : GeneratingArray(4, 4);
    GeneratingArray local_mass = mass_generating(grid, 3);
    local_op.axpy(r, local_mass);

    const int S = sys.lat.count();
    const int E = next_pow2(S + 2 * D);
    std::vector<cplx> gbuf(static_cast<std::size_t>(E) * E, cplx(0.0, 0.0));
    std::vector<cplx> pbuf(static_cast<std::size_t>(E) * E, cplx(0.0, 0.0));
    for (int p = -D; p <= D; ++p)
        for (int q = -D; q <= D; ++q) {
            double v = jump_ext.at(p, q) + local_op.get(p, q);
            gbuf[static_cast<std::size_t>(p + D) * E + (q + D)] = v;
        }
    for (int a2 = 0; a2 < S; ++a2)
        for (int a1 = 0; a1 < S; ++a1)
            pbuf[static_cast<std::size_t>(a2) * E + a1] =
                sys.psi[static_cast<std::size_t>(a2) * S + a1];

    std::vector<cplx> gf(gbuf.size()), pf(pbuf.size());
    fft2_forward(E, E, gbuf.data(), gf.data());
    fft2_forward(E, E, pbuf.data(), pf.data());
    for (std::size_t i = 0; i < gf.size(); ++i) gf[i] *= pf[i];
    fft2_backward(E, E, gf.data(), pf.data());
    const double scale = 1.0 / (static_cast<double>(E) * E);

    sys.F.assign(grid.size(), 0.0);
    const int pad = -sys.lat.j_min;
    for (int k2 = 1; k2 <= n; ++k2)
        for (int k1 = 1; k1 <= n; ++k1) {
            std::size_t src =
                static_cast<std::size_t>(k2 + pad + D) * E + (k1 + pad + D);
            sys.F[grid.index(k1, k2)] = -pf[src].real() * scale;
        }
    return sys;
}

} // namespace

AssembledSystem assemble(const JumpDiffusionParams& p, const Contract& contract,
                         const SchemeConfig& cfg) {
    p.validate();
    return assemble_core(make_jump_symbol(p), true, p.sigma_B(), merton_rn_drift(p), p.r,
                         contract, cfg);
}

AssembledSystem assemble(const TimeChangeParams& p, const Contract& contract,
                         const SchemeConfig& cfg) {
    p.validate();
    return assemble_core(make_jump_symbol(p), false, {}, {}, p.r, contract, cfg);
}

PriceSurface evolve(const AssembledSystem& sys, const Contract& contract, const SchemeConfig& cfg) {
    cfg.validate();
    contract.validate();
    const int M = cfg.steps();
    const std::size_t sz = sys.grid.size();

    PriceSurface out;
    out.grid = sys.grid;
    out.contract = contract;
    out.r = sys.r;
    out.theta = cfg.theta;
    out.omega = cfg.omega;
    out.lat = sys.lat;
    out.psi = sys.psi;

    std::vector<double> U(sz, 0.0);
    out.times.push_back(0.0);
    out.coefs.push_back(U);
    if (M == 0) return out;

    int stride = 1;
    if (cfg.snapshots == SchemeConfig::Snapshots::final_only)
        stride = M;
    else if (cfg.snapshots == SchemeConfig::Snapshots::automatic && M > 128)
        stride = (M + 127) / 128;

    const double dt = contract.T / M;
    GeneratingArray B = sys.Agen;
    B.axpy(1.0, sys.Jgen);
    B.axpy(sys.r, sys.Mgen);
    GeneratingArray gl = sys.Mgen;
    gl.axpy(dt * cfg.theta, B);
    GeneratingArray gr = sys.Mgen;
    gr.axpy(-dt * (1.0 - cfg.theta), B);

    BTTBMatrix TL(std::move(gl)), TR(std::move(gr));
    BCCBPreconditioner P = optimal_bccb(TL);
    LinOp apply_left = [&TL](const std::vector<double>& x) { return matvec(TL, x); };

    std::vector<double> Fdt(sz);
    for (std::size_t i = 0; i < sz; ++i) Fdt[i] = dt * sys.F[i];

    double iter_sum = 0.0;
    for (int k = 0; k < M; ++k) {
        std::vector<double> rhs = matvec(TR, U);
        for (std::size_t i = 0; i < sz; ++i) rhs[i] += Fdt[i];
        auto [x, stats] = bicgstab(apply_left, &P, rhs, cfg.solver_tol, cfg.solver_maxit, &U);
        if (!stats.converged)
            throw std::runtime_error("evolve: solver did not converge at step " +
                                     std::to_string(k + 1) + " (relative residual " +
                                     std::to_string(stats.rel_residual) + ")");
        U = std::move(x);
        iter_sum += stats.iterations;
        if ((k + 1) % stride == 0 || k + 1 == M) {
            out.times.push_back((k + 1) * dt);
            out.coefs.push_back(U);
        }
    }
    out.mean_iterations = iter_sum / M;
    return out;
}

double price_at(const PriceSurface& surf, double tau, double S1, double S2) {
    if (S1 <= 0.0 || S2 <= 0.0) throw std::domain_error("price_at: spot prices must be positive");
    const double x1 = std::log(S1 / surf.contract.s0[0]);
    const double x2 = std::log(S2 / surf.contract.s0[1]);
    const double w = surf.omega;
    if (std::fabs(x1) > w || std::fabs(x2) > w)
        throw std::domain_error("price_at: log-moneyness outside the effective domain");
    const double T = surf.times.back();
    if (tau < -1e-12 || tau > T + 1e-12)
        throw std::domain_error("price_at: tau outside the computed horizon");
    tau = std::min(std::max(tau, 0.0), T);

    double v;
    auto it = std::lower_bound(surf.times.begin(), surf.times.end(), tau);
    std::size_t hi = static_cast<std::size_t>(it - surf.times.begin());
    if (hi < surf.times.size() && std::fabs(surf.times[hi] - tau) < 1e-14) {
        v = spline_eval_interior(surf.grid, surf.coefs[hi], x1, x2);
    } else {
        std::size_t lo = hi - 1;
        double t0 = surf.times[lo], t1 = surf.times[hi];
        double a = (tau - t0) / (t1 - t0);
        v = (1.0 - a) * spline_eval_interior(surf.grid, surf.coefs[lo], x1, x2) +
            a * spline_eval_interior(surf.grid, surf.coefs[hi], x1, x2);
    }
    return v + spline_eval(surf.lat, surf.psi, x1, x2);
}

namespace {

struct LevelRun {
    PriceSurface surf;
    double seconds = 0.0;
};

template <class Params>
LevelRun run_level(const Params& p, const Contract& contract, SchemeConfig cfg, int level) {
    cfg.level = level;
    cfg.time_steps = -1;
    cfg.snapshots = SchemeConfig::Snapshots::final_only;
    auto t0 = std::chrono::steady_clock::now();
    AssembledSystem sys = assemble(p, contract, cfg);
    LevelRun run;
    run.surf = evolve(sys, contract, cfg);
    run.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return run;
}

// relative L2 distance between the marched final-time solutions of two
// levels, quadrature on the 2x2 Gauss points of every coarse cell fully
// inside [-omega, omega]^2
std::pair<double, double> l2_error(const PriceSurface& coarse, const PriceSurface& ref,
                                   double omega) {
    const Grid2D& g = coarse.grid;
    const double off = 0.5 / std::sqrt(3.0);
    const std::vector<double>& uc = coarse.coefs.back();
    const std::vector<double>& ur = ref.coefs.back();
    int cells = g.n_int + 1;
    double err2 = 0.0, nrm2 = 0.0;
    double wq = 0.25 * g.h * g.h;
    for (int i2 = 0; i2 < cells; ++i2) {
        double a2 = g.x_lo + i2 * g.h;
        if (a2 < -omega || a2 + g.h > omega) continue;
        for (int i1 = 0; i1 < cells; ++i1) {
            double a1 = g.x_lo + i1 * g.h;
            if (a1 < -omega || a1 + g.h > omega) continue;
            for (int q2 = 0; q2 < 2; ++q2) {
                double x2 = a2 + g.h * (0.5 + (q2 ? off : -off));
                for (int q1 = 0; q1 < 2; ++q1) {
                    double x1 = a1 + g.h * (0.5 + (q1 ? off : -off));
                    double vc = spline_eval_interior(g, uc, x1, x2);
                    double vr = spline_eval_interior(ref.grid, ur, x1, x2);
                    double d = vc - vr;
                    err2 += wq * d * d;
                    nrm2 += wq * vr * vr;
                }
            }
        }
    }
    return {std::sqrt(err2), std::sqrt(nrm2)};
}

template <class Params>
ErrorTable study_impl(const Params& p, const Contract& contract, const std::vector<int>& levels,
                      int ref_level, const SchemeConfig& base) {
    if (levels.empty()) throw std::invalid_argument("convergence_study: no levels given");
    for (int N : levels)
        if (N > ref_level)
            throw std::invalid_argument("convergence_study: level beyond the reference");

    ErrorTable table;
    table.ref_level = ref_level;
    LevelRun ref = run_level(p, contract, base, ref_level);

    double slx = 0.0, sly = 0.0, slxx = 0.0, slxy = 0.0;
    int fit_count = 0;
    for (int N : levels) {
        LevelRun run = (N == ref_level) ? ref : run_level(p, contract, base, N);
        auto [err, nrm] = l2_error(run.surf, ref.surf, base.omega);
        ErrorRow row;
        row.level = N;
        row.rel_l2_error = nrm > 0.0 ? err / nrm : 0.0;
        row.mean_iterations = run.surf.mean_iterations;
        row.seconds = run.seconds;
        table.rows.push_back(row);
        if (row.rel_l2_error > 0.0) {
            double lx = std::log(run.surf.grid.h);
            double ly = std::log(row.rel_l2_error);
            slx += lx;
            sly += ly;
            slxx += lx * lx;
            slxy += lx * ly;
            ++fit_count;
        }
    }
    if (fit_count >= 2) {
        double denom = fit_count * slxx - slx * slx;
        if (denom > 0.0) table.fitted_rate = (fit_count * slxy - slx * sly) / denom;
    }
    return table;
}

} // namespace

ErrorTable convergence_study(const JumpDiffusionParams& p, const Contract& contract,
                             const std::vector<int>& levels, int ref_level,
                             const SchemeConfig& base) {
    return study_impl(p, contract, levels, ref_level, base);
}

ErrorTable convergence_study(const TimeChangeParams& p, const Contract& contract,
                             const std::vector<int>& levels, int ref_level,
                             const SchemeConfig& base) {
    return study_impl(p, contract, levels, ref_level, base);
}

} // namespace cspread
