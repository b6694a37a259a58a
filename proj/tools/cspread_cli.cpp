#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "cspread/calibration.hpp"
#include "cspread/config.hpp"
#include "cspread/fem.hpp"
#include "cspread/mc.hpp"
#include "cspread/models.hpp"
#include "cspread/pricer.hpp"
#include "cspread/symbol_quad.hpp"

using namespace cspread;

namespace {

struct ModelChoice {
    bool merton = true;
    JumpDiffusionParams jd;
    TimeChangeParams tc;
    double r() const { return merton ? jd.r : tc.r; }
    std::array<double, 2> s0() const { return merton ? jd.s0 : tc.s0; }
};

ModelChoice resolve_model(const Config& cfg, const std::string& flag) {
    std::string type = flag.empty() ? cfg.get_string("model", "type") : flag;
    ModelChoice mc;
    if (type == "merton") {
        mc.merton = true;
        mc.jd = jd_params_from_config(cfg);
    } else if (type == "gamma-tc") {
        mc.merton = false;
        mc.tc = tc_params_from_config(cfg);
    } else {
        throw std::runtime_error("unknown model type '" + type +
                                 "' (expected merton or gamma-tc)");
    }
    return mc;
}

std::vector<int> parse_levels(const std::string& spec) {
    std::vector<int> out;
    std::stringstream ss(spec);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        if (tok.empty()) continue;
        out.push_back(std::stoi(tok));
    }
    if (out.empty()) throw std::runtime_error("--levels: no levels parsed from '" + spec + "'");
    return out;
}

std::ofstream open_csv(const std::string& path, const Config& cfg, const std::string& command) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open output file " + path);
    out << "# cspread " << command << "\n";
    for (const auto& line : cfg.echo_lines()) out << line << "\n";
    out.precision(17);
    return out;
}

int run_price(const std::string& config_path, const std::string& model_flag,
              const std::string& out_path) {
    Config cfg = Config::load(config_path);
    ModelChoice mdl = resolve_model(cfg, model_flag);
    Contract base = contract_from_config(cfg, mdl.s0());
    SchemeConfig sc = scheme_from_config(cfg);
    sc.snapshots = SchemeConfig::Snapshots::automatic;

    const double mult[5] = {0.8, 0.9, 1.0, 1.1, 1.2};
    const double mats[5] = {1.0 / 12.0, 0.25, 0.5, 0.75, 1.0};

    struct Row {
        double K, T, price, iters;
    };
    std::vector<Row> rows;
    for (double m : mult) {
        Contract c = base;
        c.K = base.K * m;
        c.T = mats[4];
        AssembledSystem sys = mdl.merton ? assemble(mdl.jd, c, sc) : assemble(mdl.tc, c, sc);
        PriceSurface surf = evolve(sys, c, sc);
        for (double T : mats)
            rows.push_back({c.K, T, price_at(surf, T, base.s0[0], base.s0[1]),
                            surf.mean_iterations});
    }

    std::printf("%10s %10s %14s %8s\n", "strike", "maturity", "price", "iters");
    for (const auto& r : rows)
        std::printf("%10.4f %10.6f %14.8f %8.2f\n", r.K, r.T, r.price, r.iters);

    if (!out_path.empty()) {
        std::ofstream out = open_csv(out_path, cfg, "price");
        out << "strike,maturity,price,mean_iterations\n";
        for (const auto& r : rows)
            out << r.K << "," << r.T << "," << r.price << "," << r.iters << "\n";
        std::printf("wrote %s\n", out_path.c_str());
    }
    return 0;
}

int run_converge(const std::string& config_path, const std::string& model_flag,
                 const std::string& out_path, const std::string& levels_spec, int ref_level) {
    Config cfg = Config::load(config_path);
    ModelChoice mdl = resolve_model(cfg, model_flag);
    Contract contract = contract_from_config(cfg, mdl.s0());
    SchemeConfig sc = scheme_from_config(cfg);
    std::vector<int> levels = parse_levels(levels_spec);

    ErrorTable table = mdl.merton
                           ? convergence_study(mdl.jd, contract, levels, ref_level, sc)
                           : convergence_study(mdl.tc, contract, levels, ref_level, sc);

    std::printf("%6s %12s %14s %8s %9s\n", "level", "h", "rel_l2_err", "iters", "seconds");
    for (const auto& r : table.rows)
        std::printf("%6d %12.6e %14.6e %8.2f %9.2f\n", r.level,
                    sc.domain_length / (1 << r.level), r.rel_l2_error, r.mean_iterations,
                    r.seconds);
    std::printf("fitted rate: %.4f (reference level %d)\n", table.fitted_rate, table.ref_level);

    if (!out_path.empty()) {
        std::ofstream out = open_csv(out_path, cfg, "converge");
        out << "level,h,rel_l2_error,mean_iterations,seconds\n";
        for (const auto& r : table.rows)
            out << r.level << "," << sc.domain_length / (1 << r.level) << "," << r.rel_l2_error
                << "," << r.mean_iterations << "," << r.seconds << "\n";
        out << "# fitted_rate = " << table.fitted_rate << "\n";
        out << "# ref_level = " << table.ref_level << "\n";
        std::printf("wrote %s\n", out_path.c_str());
    }
    return 0;
}

int run_calibrate(const std::string& config_path, const std::string& model_flag,
                  const std::string& out_path, const std::string& data_path) {
    Config cfg = config_path.empty() ? Config() : Config::load(config_path);
    std::string type = model_flag;
    if (type.empty()) type = cfg.get_string("model", "type", "merton");

    PriceSeries series = load_price_series(data_path);
    SampleMoments mom = sample_moments(series);
    std::array<double, 2> last_spot{series.price1.back(), series.price2.back()};

    std::printf("loaded %zu prices (%zu dropped), %zu returns, dt = %.8f\n", series.size(),
                series.dropped_rows, mom.n_obs, mom.dt);
    for (int j = 0; j < 2; ++j)
        std::printf("  asset %d: mean %.6g  std %.6g  skew %.4f  kurt %.4f\n", j + 1,
                    mom.mean[j], mom.stdev[j], mom.skew[j], mom.kurt[j]);
    std::printf("  correlation %.6f\n", mom.corr);

    std::vector<std::pair<std::string, double>> report;
    double residual = 0.0, violation = 0.0;
    bool converged = false;

    if (type == "merton") {
        JumpDiffusionParams fixed;
        if (cfg.has("model", "r")) {
            fixed = jd_params_from_config(cfg);
        } else {
            fixed.r = 0.02;
            fixed.lambda0 = 3.0;
            fixed.lambda1 = 2.0;
            fixed.lambda2 = 2.0;
            fixed.rho_J = 0.30;
            fixed.sigma1 = fixed.sigma2 = 0.5;
            fixed.sigJ1 = fixed.sigJ2 = 0.1;
            fixed.sig01 = 0.02;
            fixed.sig02 = 0.01;
        }
        fixed.s0 = last_spot;
        JdCalibration res = calibrate_jd(mom, fixed);
        const JumpDiffusionParams& p = res.params;
        report = {{"r", p.r},         {"sigma1", p.sigma1}, {"sigma2", p.sigma2},
                  {"rho_B", p.rho_B}, {"lambda0", p.lambda0}, {"lambda1", p.lambda1},
                  {"lambda2", p.lambda2}, {"muJ1", p.muJ1}, {"muJ2", p.muJ2},
                  {"sigJ1", p.sigJ1}, {"sigJ2", p.sigJ2},   {"mu01", p.mu01},
                  {"mu02", p.mu02},   {"sig01", p.sig01},   {"sig02", p.sig02},
                  {"rho_J", p.rho_J}, {"s01", p.s0[0]},     {"s02", p.s0[1]}};
        residual = res.residual;
        violation = res.constraint_violation;
        converged = res.converged;
    } else if (type == "gamma-tc") {
        TimeChangeParams fixed;
        if (cfg.has("model", "r")) {
            fixed.r = cfg.get_double("model", "r");
            fixed.d1 = cfg.get_double("model", "d1", 1.0);
            fixed.d2 = cfg.get_double("model", "d2", 1.0);
        } else {
            fixed.r = 0.02;
        }
        fixed.s0 = last_spot;
        TcCalibration res = calibrate_tc(mom, fixed);
        const TimeChangeParams& p = res.params;
        report = {{"r", p.r},         {"alpha0", p.alpha0}, {"beta0", p.beta0},
                  {"alpha1", p.alpha1}, {"beta1", p.beta1}, {"alpha2", p.alpha2},
                  {"beta2", p.beta2}, {"d1", p.d1},         {"d2", p.d2},
                  {"mu1", p.mu1},     {"mu2", p.mu2},       {"sigr1", p.sigr1},
                  {"sigr2", p.sigr2}, {"s01", p.s0[0]},     {"s02", p.s0[1]}};
        residual = res.residual;
        violation = res.constraint_violation;
        converged = res.converged;
    } else {
        throw std::runtime_error("unknown model type '" + type + "'");
    }

    std::printf("\ncalibrated %s parameters:\n", type.c_str());
    for (const auto& [k, v] : report) std::printf("  %-8s = %.10g\n", k.c_str(), v);
    std::printf("residual %.6e, martingale violation %.3e, converged %s\n", residual, violation,
                converged ? "yes" : "no");

    if (!out_path.empty()) {
        std::ofstream out = open_csv(out_path, cfg, "calibrate --model " + type);
        out << "# data = " << data_path << "\n";
        out << "# returns = " << mom.n_obs << "\n";
        for (int j = 0; j < 2; ++j)
            out << "# sample.asset" << j + 1 << " mean=" << mom.mean[j]
                << " std=" << mom.stdev[j] << " skew=" << mom.skew[j] << " kurt=" << mom.kurt[j]
                << "\n";
        out << "# sample.corr = " << mom.corr << "\n";
        out << "parameter,value\n";
        for (const auto& [k, v] : report) out << k << "," << v << "\n";
        out << "residual," << residual << "\n";
        out << "martingale_violation," << violation << "\n";
        out << "converged," << (converged ? 1 : 0) << "\n";
        std::printf("wrote %s\n", out_path.c_str());
    }
    return 0;
}

int run_simulate(const std::string& config_path, const std::string& model_flag,
                 const std::string& out_path, std::size_t n_paths, std::uint64_t seed,
                 int steps) {
    Config cfg = Config::load(config_path);
    ModelChoice mdl = resolve_model(cfg, model_flag);
    Contract contract = contract_from_config(cfg, mdl.s0());

    McEstimate est = mdl.merton ? mc_price(mdl.jd, contract, n_paths, seed)
                                : mc_price(mdl.tc, contract, n_paths, seed);
    std::printf("mc price = %.8f  (std error %.3e, %zu paths, seed %llu)\n", est.value,
                est.std_error, est.n_paths, static_cast<unsigned long long>(seed));

    if (!out_path.empty()) {
        std::size_t n_traj = std::min<std::size_t>(n_paths, 8);
        std::vector<double> traj;
        if (mdl.merton)
            simulate_jd(mdl.jd, contract.T, steps, n_traj, seed, &traj);
        else
            simulate_tc(mdl.tc, contract.T, steps, n_traj, seed, &traj);

        std::ofstream out = open_csv(out_path, cfg, "simulate");
        out << "# mc_price = " << est.value << "\n";
        out << "# std_error = " << est.std_error << "\n";
        out << "# n_paths = " << est.n_paths << "\n";
        out << "# seed = " << seed << "\n";
        out << "path,step,time,y1,y2,s1,s2\n";
        const double dt = contract.T / steps;
        const auto s0 = mdl.s0();
        for (std::size_t p = 0; p < n_traj; ++p)
            for (int k = 0; k <= steps; ++k) {
                double y1 = traj[(p * (steps + 1) + k) * 2 + 0];
                double y2 = traj[(p * (steps + 1) + k) * 2 + 1];
                out << p << "," << k << "," << k * dt << "," << y1 << "," << y2 << ","
                    << s0[0] * std::exp(y1) << "," << s0[1] * std::exp(y2) << "\n";
            }
        std::printf("wrote %zu sample trajectories to %s\n", n_traj, out_path.c_str());
    }
    return 0;
}

bool report(bool ok, const std::string& name, const std::string& detail) {
    std::printf("%s  %-28s %s\n", ok ? "PASS" : "FAIL", name.c_str(), detail.c_str());
    return ok;
}

int run_selftest(const std::string& config_path, const std::string& model_flag) {
    Config cfg = Config::load(config_path);
    ModelChoice mdl = resolve_model(cfg, model_flag);
    SchemeConfig sc = scheme_from_config(cfg);
    bool all = true;
    char buf[256];

    // risk-neutral drift: the exponent at -i e_j must return the rate
    const cplx mi(0.0, -1.0), zero(0.0, 0.0);
    double res1, res2;
    if (mdl.merton) {
        res1 = std::abs(merton_char_exponent(mdl.jd, mi, zero) - cplx(mdl.jd.r, 0));
        res2 = std::abs(merton_char_exponent(mdl.jd, zero, mi) - cplx(mdl.jd.r, 0));
    } else {
        res1 = std::abs(gamma_char_exponent(mdl.tc, mi, zero) - cplx(mdl.tc.r, 0));
        res2 = std::abs(gamma_char_exponent(mdl.tc, zero, mi) - cplx(mdl.tc.r, 0));
    }
    std::snprintf(buf, sizeof buf, "residuals %.3e, %.3e", res1, res2);
    all &= report(res1 < 1e-8 && res2 < 1e-8, "martingale identity", buf);

    if (mdl.merton) {
        CoercivityReport cr = coercivity_report(mdl.jd);
        std::snprintf(buf, sizeof buf, "C1=%.4g C2=%.4g C3=%.4g (eigs %.4g, %.4g)", cr.C1, cr.C2,
                      cr.C3, cr.m_eig, cr.M_eig);
        all &= report(cr.holds, "sector bounds", buf);
    } else {
        bool feas = mdl.tc.rn_feasible();
        double w1 = mdl.tc.mu1 + 0.5 * mdl.tc.sigr1 * mdl.tc.sigr1;
        double w2 = mdl.tc.mu2 + 0.5 * mdl.tc.sigr2 * mdl.tc.sigr2;
        std::snprintf(buf, sizeof buf, "drift arguments %.6f, %.6f", w1, w2);
        all &= report(feas, "drift-argument window", buf);
    }

    {
        std::array<double, 2> eta{1.0, -3.0};
        bool ok = weight_admissible(eta, 1) && !weight_admissible({1.0, 1.0}, 1) &&
                  !weight_admissible({3.0, -3.0}, 1);
        all &= report(ok, "weight admissibility", "eta=(1,-3) in, (1,1) and (3,-3) out");
    }

    // cross-check the FFT quadrature against Gauss panels on a small grid
    {
        Grid2D grid(sc.domain_length, 3, sc.x_lo);
        SymbolFn symbol = mdl.merton ? make_jump_symbol(mdl.jd) : make_jump_symbol(mdl.tc);
        GeneratingArray fft_gen = jump_generating(grid, symbol, sc.quad, 3);
        double worst = 0.0;
        double scale = 0.0;
        for (int p = -3; p <= 3; ++p)
            for (int q = -3; q <= 3; ++q) scale = std::max(scale, std::fabs(fft_gen.at(p, q)));
        const int probes[4][2] = {{0, 0}, {1, 0}, {2, 1}, {3, 3}};
        for (const auto& pr : probes) {
            double direct = jump_entry_panels(grid, symbol, pr[1], pr[0],
                                              static_cast<double>(sc.quad.radius_pi))
                                .real();
            worst = std::max(worst, std::fabs(fft_gen.at(pr[0], pr[1]) - direct));
        }
        std::snprintf(buf, sizeof buf, "max abs diff %.3e (scale %.3e)", worst, scale);
        all &= report(worst < 1e-6 * scale, "quadrature cross-check", buf);
    }

    // end-to-end smoke: coarse assemble + short march, price near the money
    {
        Contract c = contract_from_config(cfg, mdl.s0());
        SchemeConfig small = sc;
        small.level = 4;
        small.time_steps = 16;
        small.snapshots = SchemeConfig::Snapshots::final_only;
        AssembledSystem sys = mdl.merton ? assemble(mdl.jd, c, small) : assemble(mdl.tc, c, small);
        PriceSurface surf = evolve(sys, c, small);
        double price = price_at(surf, c.T, c.s0[0], c.s0[1]);
        std::snprintf(buf, sizeof buf, "price %.6f, mean iterations %.2f", price,
                      surf.mean_iterations);
        all &= report(std::isfinite(price) && price > -0.01 && price < c.s0[1] &&
                          surf.mean_iterations < 100.0,
                      "coarse-march smoke", buf);
    }

    std::printf("%s\n", all ? "selftest: all checks passed" : "selftest: FAILURES above");
    return all ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"crack-spread option pricer (bivariate Levy models, FEM/FFT)"};
    app.require_subcommand(1);

    std::string config_path, out_path, model_flag, levels_spec = "4,5,6", data_path;
    std::uint64_t seed = 42;
    std::size_t n_paths = 200000;
    int ref_level = 7, steps = 64;

    auto add_common = [&](CLI::App* sub, bool need_config) {
        auto* c = sub->add_option("--config", config_path, "INI config file");
        if (need_config) c->required();
        sub->add_option("--out", out_path, "CSV output path");
        sub->add_option("--model", model_flag, "model type: merton or gamma-tc")
            ->check(CLI::IsMember({"merton", "gamma-tc"}));
    };

    auto* price = app.add_subcommand("price", "price a strike/maturity grid");
    add_common(price, true);

    auto* converge = app.add_subcommand("converge", "self-convergence study");
    add_common(converge, true);
    converge->add_option("--levels", levels_spec, "comma-separated mesh levels");
    converge->add_option("--ref", ref_level, "reference mesh level");

    auto* calibrate = app.add_subcommand("calibrate", "moment-match parameters to a price series");
    add_common(calibrate, false);
    calibrate->add_option("--data", data_path, "CSV price series (date,asset1,asset2)")
        ->required();

    auto* simulate = app.add_subcommand("simulate", "Monte Carlo price and sample paths");
    add_common(simulate, true);
    simulate->add_option("--paths", n_paths, "number of Monte Carlo paths");
    simulate->add_option("--seed", seed, "RNG seed");
    simulate->add_option("--steps", steps, "time steps per sample trajectory");

    auto* selftest = app.add_subcommand("selftest", "model and discretization health checks");
    add_common(selftest, true);

    CLI11_PARSE(app, argc, argv);

    try {
        if (price->parsed()) return run_price(config_path, model_flag, out_path);
        if (converge->parsed())
            return run_converge(config_path, model_flag, out_path, levels_spec, ref_level);
        if (calibrate->parsed())
            return run_calibrate(config_path, model_flag, out_path, data_path);
        if (simulate->parsed())
            return run_simulate(config_path, model_flag, out_path, n_paths, seed, steps);
        if (selftest->parsed()) return run_selftest(config_path, model_flag);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 0;
}
