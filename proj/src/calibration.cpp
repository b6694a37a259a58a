#include "cspread/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <stdexcept>

namespace cspread {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::stringstream ss(line);
    while (std::getline(ss, cell, ',')) {
        while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ')) cell.pop_back();
        std::size_t b = cell.find_first_not_of(' ');
        out.push_back(b == std::string::npos ? std::string() : cell.substr(b));
    }
    return out;
}

} // namespace

PriceSeries load_price_series(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("load_price_series: cannot open " + path);
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("load_price_series: empty file " + path);
    auto header = split_csv_line(line);
    if (header.size() != 3 || header[0] != "date")
        throw std::runtime_error("load_price_series: expected header date,<asset1>,<asset2>");

    PriceSeries series;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line == "\r") continue;
        auto cells = split_csv_line(line);
        if (cells.size() != 3)
            throw std::runtime_error("load_price_series: malformed row at line " +
                                     std::to_string(lineno));
        double p1, p2;
        try {
            std::size_t used1 = 0, used2 = 0;
            p1 = std::stod(cells[1], &used1);
            p2 = std::stod(cells[2], &used2);
            if (used1 != cells[1].size() || used2 != cells[2].size())
                throw std::invalid_argument("trailing characters");
        } catch (const std::exception&) {
            throw std::runtime_error("load_price_series: bad number at line " +
                                     std::to_string(lineno));
        }
        if (p1 <= 0.0 || p2 <= 0.0) {
            ++series.dropped_rows;
            continue;
        }
        series.dates.push_back(cells[0]);
        series.price1.push_back(p1);
        series.price2.push_back(p2);
    }
    return series;
}

void SampleMoments::validate() const {
    if (dt <= 0.0) throw std::invalid_argument("sample moments: dt must be positive");
    for (int j = 0; j < 2; ++j) {
        if (!(stdev[j] > 0.0)) throw std::invalid_argument("sample moments: zero dispersion");
        if (kurt[j] < 1.0 + skew[j] * skew[j] - 1e-9)
            throw std::invalid_argument("sample moments: impossible kurtosis");
    }
    if (std::fabs(corr) > 1.0) throw std::invalid_argument("sample moments: |corr| > 1");
}

SampleMoments sample_moments(const PriceSeries& series) {
    const std::size_t np = series.size();
    if (series.price2.size() != np || (!series.dates.empty() && series.dates.size() != np))
        throw std::invalid_argument("sample_moments: misaligned series");
    if (np < 31) throw std::invalid_argument("sample_moments: need at least 30 observations");
    const std::size_t n = np - 1;

    std::array<std::vector<double>, 2> d;
    d[0].resize(n);
    d[1].resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        d[0][i] = std::log(series.price1[i + 1] / series.price1[i]);
        d[1][i] = std::log(series.price2[i + 1] / series.price2[i]);
    }

    SampleMoments mom;
    mom.dt = series.dt;
    mom.n_obs = n;
    for (int j = 0; j < 2; ++j) {
        double s1 = 0, s2 = 0, s3 = 0, s4 = 0;
        for (double v : d[j]) {
            s1 += v;
            s2 += v * v;
            s3 += v * v * v;
            s4 += v * v * v * v;
        }
        mom.m1[j] = s1 / n;
        mom.m2[j] = s2 / n;
        mom.m3[j] = s3 / n;
        mom.m4[j] = s4 / n;
        mom.mean[j] = mom.m1[j];
        double c2 = 0, c3 = 0, c4 = 0;
        for (double v : d[j]) {
            double e = v - mom.mean[j];
            c2 += e * e;
            c3 += e * e * e;
            c4 += e * e * e * e;
        }
        double var_n = c2 / n;
        mom.stdev[j] = std::sqrt(c2 / (n - 1));
        if (var_n > 0.0) {
            mom.skew[j] = (c3 / n) / std::pow(var_n, 1.5);
            mom.kurt[j] = (c4 / n) / (var_n * var_n);
        }
    }
    double cc = 0.0, cross_raw = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        cc += (d[0][i] - mom.mean[0]) * (d[1][i] - mom.mean[1]);
        cross_raw += d[0][i] * d[1][i];
    }
    mom.m12 = cross_raw / n;
    double denom = 0.0;
    {
        double a = 0.0, b = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            a += (d[0][i] - mom.mean[0]) * (d[0][i] - mom.mean[0]);
            b += (d[1][i] - mom.mean[1]) * (d[1][i] - mom.mean[1]);
        }
        denom = std::sqrt(a * b);
    }
    mom.corr = denom > 0.0 ? cc / denom : 0.0;
    mom.validate();
    return mom;
}

SampleMoments moments_from_model(const MomentSet& ms) {
    ms.validate();
    SampleMoments mom;
    mom.dt = ms.dt;
    mom.m1 = ms.m1;
    mom.m2 = ms.m2;
    mom.m3 = ms.m3;
    mom.m4 = ms.m4;
    mom.m12 = ms.m12;
    mom.corr = ms.corr;
    for (int j = 0; j < 2; ++j) {
        mom.mean[j] = ms.m1[j];
        double var = ms.m2[j] - ms.m1[j] * ms.m1[j];
        mom.stdev[j] = std::sqrt(std::max(var, 0.0));
        if (var > 0.0) {
            double m1 = ms.m1[j];
            double c3 = ms.m3[j] - 3.0 * m1 * ms.m2[j] + 2.0 * m1 * m1 * m1;
            double c4 = ms.m4[j] - 4.0 * m1 * ms.m3[j] + 6.0 * m1 * m1 * ms.m2[j] -
                        3.0 * m1 * m1 * m1 * m1;
            mom.skew[j] = c3 / std::pow(var, 1.5);
            mom.kurt[j] = c4 / (var * var);
        }
    }
    return mom;
}

namespace {

// ---- deterministic Nelder-Mead with box projection ----

struct NmOutcome {
    std::vector<double> x;
    double f = 1e300;
    bool by_ftol = false;
};

std::vector<double> clamp_box(std::vector<double> x, const std::vector<double>& lo,
                              const std::vector<double>& hi) {
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = std::min(std::max(x[i], lo[i]), hi[i]);
    return x;
}

NmOutcome nelder_mead(const std::function<double(const std::vector<double>&)>& fn,
                      const std::vector<double>& start, const std::vector<double>& lo,
                      const std::vector<double>& hi, double ftol, int max_evals,
                      double step_frac = 0.05) {
    const std::size_t n = start.size();
    int evals = 0;
    auto eval = [&](const std::vector<double>& x) {
        ++evals;
        std::vector<double> xc = clamp_box(x, lo, hi);
        double pen = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double g = x[i] - xc[i];
            pen += g * g;
        }
        double f;
        try {
            f = fn(xc);
        } catch (const std::exception&) {
            f = 1e100;
        }
        if (!std::isfinite(f)) f = 1e100;
        return f + 1e6 * pen;
    };

    struct Vertex {
        std::vector<double> x;
        double f;
    };
    std::vector<Vertex> simplex;
    simplex.reserve(n + 1);
    std::vector<double> x0 = clamp_box(start, lo, hi);
    simplex.push_back({x0, eval(x0)});
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<double> xi = x0;
        double step = std::max(step_frac * (hi[i] - lo[i]), 1e-7);
        if (xi[i] + step > hi[i]) step = -step;
        xi[i] += step;
        simplex.push_back({xi, eval(xi)});
    }

    auto order = [&]() {
        std::stable_sort(simplex.begin(), simplex.end(),
                         [](const Vertex& a, const Vertex& b) { return a.f < b.f; });
    };
    order();

    while (evals < max_evals) {
        if (simplex.back().f - simplex.front().f <=
            ftol * (std::fabs(simplex.front().f) + ftol)) {
            NmOutcome out{simplex.front().x, simplex.front().f, true};
            return out;
        }
        std::vector<double> cen(n, 0.0);
        for (std::size_t v = 0; v < n; ++v)
            for (std::size_t i = 0; i < n; ++i) cen[i] += simplex[v].x[i] / n;
        const Vertex& worst = simplex.back();

        std::vector<double> xr(n);
        for (std::size_t i = 0; i < n; ++i) xr[i] = cen[i] + (cen[i] - worst.x[i]);
        double fr = eval(xr);
        if (fr < simplex.front().f) {
            std::vector<double> xe(n);
            for (std::size_t i = 0; i < n; ++i) xe[i] = cen[i] + 2.0 * (cen[i] - worst.x[i]);
            double fe = eval(xe);
            if (fe < fr)
                simplex.back() = {xe, fe};
            else
                simplex.back() = {xr, fr};
        } else if (fr < simplex[n - 1].f) {
            simplex.back() = {xr, fr};
        } else {
            bool outside = fr < worst.f;
            std::vector<double> xc(n);
            if (outside)
                for (std::size_t i = 0; i < n; ++i) xc[i] = cen[i] + 0.5 * (xr[i] - cen[i]);
            else
                for (std::size_t i = 0; i < n; ++i) xc[i] = cen[i] + 0.5 * (worst.x[i] - cen[i]);
            double fc = eval(xc);
            if (fc < (outside ? fr : worst.f)) {
                simplex.back() = {xc, fc};
            } else {
                for (std::size_t v = 1; v <= n; ++v) {
                    for (std::size_t i = 0; i < n; ++i)
                        simplex[v].x[i] =
                            simplex[0].x[i] + 0.5 * (simplex[v].x[i] - simplex[0].x[i]);
                    simplex[v].f = eval(simplex[v].x);
                }
            }
        }
        order();
    }
    return {simplex.front().x, simplex.front().f, false};
}

// pick the better outcome with a tolerance margin; ties keep the earlier start
bool improves(double cand, double best) { return cand < best - 1e-10; }

// a collapsed simplex can satisfy the f-spread test away from a minimizer;
// restarting with a small fresh simplex around the incumbent repairs that
NmOutcome nm_polished(const std::function<double(const std::vector<double>&)>& fn,
                      const std::vector<double>& start, const std::vector<double>& lo,
                      const std::vector<double>& hi, double ftol, int max_evals) {
    NmOutcome out = nelder_mead(fn, start, lo, hi, ftol, max_evals);
    for (int round = 0; round < 6; ++round) {
        NmOutcome again = nelder_mead(fn, out.x, lo, hi, ftol, max_evals, 0.002);
        if (!(again.f < out.f)) {
            // a restart that stalls at the incumbent by the f-spread test
            // certifies convergence even if an earlier round ran out of evals
            out.by_ftol = out.by_ftol || again.by_ftol;
            break;
        }
        bool meaningful = out.f - again.f > 1e-14 * (1.0 + std::fabs(out.f));
        if (!meaningful) again.by_ftol = again.by_ftol || out.by_ftol;
        out = again;
        if (!meaningful) break;
    }
    return out;
}

// ---- jump-diffusion calibration ----

using JdField = double JumpDiffusionParams::*;

const std::map<std::string, JdField>& jd_field_map() {
    static const std::map<std::string, JdField> m = {
        {"r", &JumpDiffusionParams::r},           {"sigma1", &JumpDiffusionParams::sigma1},
        {"sigma2", &JumpDiffusionParams::sigma2}, {"rho_B", &JumpDiffusionParams::rho_B},
        {"lambda0", &JumpDiffusionParams::lambda0}, {"lambda1", &JumpDiffusionParams::lambda1},
        {"lambda2", &JumpDiffusionParams::lambda2}, {"muJ1", &JumpDiffusionParams::muJ1},
        {"muJ2", &JumpDiffusionParams::muJ2},     {"sigJ1", &JumpDiffusionParams::sigJ1},
        {"sigJ2", &JumpDiffusionParams::sigJ2},   {"mu01", &JumpDiffusionParams::mu01},
        {"mu02", &JumpDiffusionParams::mu02},     {"sig01", &JumpDiffusionParams::sig01},
        {"sig02", &JumpDiffusionParams::sig02},   {"rho_J", &JumpDiffusionParams::rho_J}};
    return m;
}

std::pair<double, double> jd_field_box(const std::string& name) {
    if (name == "sigma1" || name == "sigma2") return {1e-4, 5.0};
    if (name == "rho_B" || name == "rho_J") return {-0.999, 0.999};
    if (name == "lambda0" || name == "lambda1" || name == "lambda2") return {0.0, 50.0};
    if (name == "muJ1" || name == "muJ2" || name == "mu01" || name == "mu02") return {-2.0, 2.0};
    if (name == "sigJ1" || name == "sigJ2") return {1e-6, 3.0};
    if (name == "sig01" || name == "sig02") return {1e-6, 2.0};
    if (name == "r") return {-1.0, 1.0};
    throw std::invalid_argument("calibrate_jd: unknown field " + name);
}

} // namespace

const std::vector<std::string> kJdDefaultFree = {"sigma1", "sigma2", "rho_B", "mu01",
                                                 "mu02",   "sigJ1",  "sigJ2"};

JdCalibration calibrate_jd(const SampleMoments& mom, const JumpDiffusionParams& fixed,
                           const std::vector<std::string>& free_fields) {
    mom.validate();
    if (free_fields.empty()) throw std::invalid_argument("calibrate_jd: no free fields");

    std::vector<JdField> ptrs;
    std::vector<double> lo, hi;
    for (const auto& name : free_fields) {
        auto it = jd_field_map().find(name);
        if (it == jd_field_map().end())
            throw std::invalid_argument("calibrate_jd: unknown field " + name);
        ptrs.push_back(it->second);
        auto box = jd_field_box(name);
        lo.push_back(box.first);
        hi.push_back(box.second);
    }

    const double dt = mom.dt;
    const std::array<double, 2> t_mean{mom.mean[0] / dt, mom.mean[1] / dt};
    const std::array<double, 2> t_var{mom.stdev[0] * mom.stdev[0] / dt,
                                      mom.stdev[1] * mom.stdev[1] / dt};
    const double t_corr = mom.corr;

    auto make_params = [&](const std::vector<double>& x) {
        JumpDiffusionParams p = fixed;
        for (std::size_t i = 0; i < ptrs.size(); ++i) p.*ptrs[i] = x[i];
        return p;
    };
    auto objective = [&](const std::vector<double>& x) {
        JumpDiffusionParams p = make_params(x);
        MomentSet ms = jd_theoretical_moments(p, dt);
        double obj = 0.0;
        for (int j = 0; j < 2; ++j) {
            double e_mean = (ms.m1[j] / dt - t_mean[j]) / std::max(std::fabs(t_mean[j]), 0.05);
            double var_rate = (ms.m2[j] - ms.m1[j] * ms.m1[j]) / dt;
            double e_var = (var_rate - t_var[j]) / std::max(t_var[j], 0.01);
            obj += e_mean * e_mean + e_var * e_var;
        }
        double e_corr = (ms.corr - t_corr) / std::max(std::fabs(t_corr), 0.1);
        return obj + e_corr * e_corr;
    };

    // start 0: moment-implied heuristic with free jump sizes muted
    JumpDiffusionParams p0 = fixed;
    for (std::size_t i = 0; i < ptrs.size(); ++i)
        p0.*ptrs[i] = (free_fields[i].rfind("sig", 0) == 0) ? 1e-6 : 0.0;
    std::array<double, 2> var_jumps{
        p0.lambda1 * (p0.sigJ1 * p0.sigJ1 + p0.muJ1 * p0.muJ1) +
            p0.lambda0 * (p0.sig01 * p0.sig01 + p0.mu01 * p0.mu01),
        p0.lambda2 * (p0.sigJ2 * p0.sigJ2 + p0.muJ2 * p0.muJ2) +
            p0.lambda0 * (p0.sig02 * p0.sig02 + p0.mu02 * p0.mu02)};
    std::array<double, 2> sig_guess{std::sqrt(std::max(t_var[0] - var_jumps[0], 1e-4)),
                                    std::sqrt(std::max(t_var[1] - var_jumps[1], 1e-4))};
    std::vector<double> start0;
    for (std::size_t i = 0; i < ptrs.size(); ++i) {
        const std::string& name = free_fields[i];
        double v;
        if (name == "sigma1")
            v = sig_guess[0];
        else if (name == "sigma2")
            v = sig_guess[1];
        else if (name == "rho_B")
            v = std::min(std::max(t_corr, -0.95), 0.95);
        else if (name == "mu01" && fixed.lambda0 > 0.0)
            v = (t_mean[0] - (fixed.r - 0.5 * sig_guess[0] * sig_guess[0])) / fixed.lambda0;
        else if (name == "mu02" && fixed.lambda0 > 0.0)
            v = (t_mean[1] - (fixed.r - 0.5 * sig_guess[1] * sig_guess[1])) / fixed.lambda0;
        else if (name == "sigJ1" || name == "sigJ2")
            v = 0.1;
        else if (name == "sig01" || name == "sig02")
            v = 0.05;
        else if (name.rfind("lambda", 0) == 0)
            v = 1.0;
        else
            v = 0.0;
        start0.push_back(std::min(std::max(v, lo[i]), hi[i]));
    }

    std::vector<std::vector<double>> starts{start0};
    std::mt19937_64 rng(0xca11b5eedULL);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    while (starts.size() < 16) {
        std::vector<double> s(ptrs.size());
        for (std::size_t i = 0; i < ptrs.size(); ++i) s[i] = lo[i] + unif(rng) * (hi[i] - lo[i]);
        starts.push_back(std::move(s));
    }

    JdCalibration result;
    NmOutcome best;
    for (std::size_t k = 0; k < starts.size(); ++k) {
        NmOutcome out = nm_polished(objective, starts[k], lo, hi, 1e-16, 20000);
        if (improves(out.f, best.f)) {
            best = out;
            result.best_start = static_cast<int>(k);
        }
    }
    result.params = make_params(clamp_box(best.x, lo, hi));
    result.params.validate();
    result.residual = std::sqrt(std::max(best.f, 0.0));
    result.converged = best.by_ftol;
    double v1 = std::abs(merton_char_exponent(result.params, cplx(0.0, -1.0), cplx(0.0, 0.0)) -
                         cplx(result.params.r, 0.0));
    double v2 = std::abs(merton_char_exponent(result.params, cplx(0.0, 0.0), cplx(0.0, -1.0)) -
                         cplx(result.params.r, 0.0));
    result.constraint_violation = std::max(v1, v2);
    return result;
}

namespace {

// ---- time-changed model calibration ----

// risk-neutral left side as a function of the candidate drift argument w:
//   -a0 log(1 - w/b0) - aj log(1 - d w/bj)
double tc_rn_lhs(double a0, double b0, double aj, double bj, double d, double w) {
    return -a0 * std::log1p(-w / b0) - aj * std::log1p(-d * w / bj);
}

// unique root of tc_rn_lhs = r on (0, min(b0, bj/d)); the left side is 0 at
// w = 0, strictly increasing, and unbounded at the right end
double tc_rn_root(double a0, double b0, double aj, double bj, double d, double r) {
    double wmax = b0;
    if (d > 0.0) wmax = std::min(wmax, bj / d);
    double lo = 0.0, hi = wmax * (1.0 - 1e-12);
    if (r <= 0.0) return 0.0;
    for (int it = 0; it < 100; ++it) {
        double mid = 0.5 * (lo + hi);
        if (tc_rn_lhs(a0, b0, aj, bj, d, mid) < r)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

struct TcStep1Targets {
    double g1, g2, g3, g4;
    double s1, s2, s3, s4;
    double dt, r, d1;
};

// step-1 parameter block from the ratio parametrization, with sigma_r1^2
// eliminated through the risk-neutral constraint; x = (x1, x2, x3, x4, mu1)
struct TcStep1Point {
    double a0, b0, a1, b1, mu1, sig2;
    bool feasible;
};

TcStep1Point tc_step1_point(const std::vector<double>& x, double d1, double r) {
    TcStep1Point pt{};
    pt.a0 = x[0] / x[2];
    pt.b0 = 1.0 / x[2];
    pt.a1 = x[1] / x[3];
    pt.b1 = 1.0 / x[3];
    pt.mu1 = x[4];
    double w = tc_rn_root(pt.a0, pt.b0, pt.a1, pt.b1, d1, r);
    pt.sig2 = 2.0 * (w - pt.mu1);
    pt.feasible = pt.sig2 > 1e-10;
    return pt;
}

double subordinator_moment(double a0, double b0, double aj, double bj, double d, double dt,
                           int k) {
    double c = 1.0, s = 1.0;
    for (int l = 0; l < k; ++l) {
        c *= (a0 * dt + l) / b0;
        s *= (aj * dt + l) / bj;
    }
    return c + std::pow(d, k) * s;
}

double tc_step1_objective(const std::vector<double>& x, const TcStep1Targets& t) {
    TcStep1Point pt = tc_step1_point(x, t.d1, t.r);
    if (!pt.feasible) return 1e8 * (1.0 + std::fabs(pt.sig2));
    double E1 = subordinator_moment(pt.a0, pt.b0, pt.a1, pt.b1, t.d1, t.dt, 1);
    double E2 = subordinator_moment(pt.a0, pt.b0, pt.a1, pt.b1, t.d1, t.dt, 2);
    double E3 = subordinator_moment(pt.a0, pt.b0, pt.a1, pt.b1, t.d1, t.dt, 3);
    double E4 = subordinator_moment(pt.a0, pt.b0, pt.a1, pt.b1, t.d1, t.dt, 4);
    double mu = pt.mu1, s2 = pt.sig2;
    double m1 = mu * E1;
    double m2 = mu * mu * E2 + s2 * E1;
    double m3 = mu * mu * mu * E3 + 3.0 * mu * s2 * E2;
    double m4 = std::pow(mu, 4) * E4 + 6.0 * mu * mu * s2 * E3 + 3.0 * s2 * s2 * E2;
    double e1 = (m1 - t.g1) / t.s1;
    double e2 = (m2 - t.g2) / t.s2;
    double e3 = (m3 - t.g3) / t.s3;
    double e4 = (m4 - t.g4) / t.s4;
    return e1 * e1 + e2 * e2 + e3 * e3 + e4 * e4;
}

} // namespace

TcCalibration calibrate_tc(const SampleMoments& mom, const TimeChangeParams& fixed) {
    mom.validate();
    const double dt = mom.dt;
    const double r = fixed.r;

    TcStep1Targets t1{};
    t1.g1 = mom.m1[0];
    t1.g2 = mom.m2[0];
    t1.g3 = mom.m3[0];
    t1.g4 = mom.m4[0];
    t1.s1 = std::max(std::fabs(t1.g1), 1e-5);
    t1.s2 = std::max(std::fabs(t1.g2), 1e-6);
    t1.s3 = std::max(std::fabs(t1.g3), 1e-7);
    t1.s4 = std::max(std::fabs(t1.g4), 1e-8);
    t1.dt = dt;
    t1.r = r;
    t1.d1 = fixed.d1;

    const std::vector<double> lo1{1e-3, 1e-3, 1e-3, 1e-3, -3.0};
    const std::vector<double> hi1{50.0, 50.0, 50.0, 50.0, 3.0};
    auto obj1 = [&](const std::vector<double>& x) { return tc_step1_objective(x, t1); };

    // phase A: unit-mean time change per unit calendar time (x1 = x2 = 1),
    // scanning the rate scales
    const double mu_scale = dt * (1.0 + t1.d1);
    const double mu_heur = t1.g1 / std::max(mu_scale, 1e-12);
    const double grid[4] = {0.5, 1.0, 2.0, 4.0};
    NmOutcome bestA;
    for (double x3 : grid)
        for (double x4 : grid) {
            auto objA = [&](const std::vector<double>& y) {
                return obj1({1.0, 1.0, y[0], y[1], y[2]});
            };
            NmOutcome out = nm_polished(objA, {x3, x4, mu_heur}, {1e-3, 1e-3, -3.0},
                                        {50.0, 50.0, 3.0}, 1e-16, 8000);
            if (improves(out.f, bestA.f)) bestA = out;
        }

    // phase B: full five-parameter polish, multi-start
    std::vector<std::vector<double>> starts1;
    starts1.push_back({1.0, 1.0, bestA.x[0], bestA.x[1], bestA.x[2]});
    std::mt19937_64 rng(0xca11b5eedULL);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    while (starts1.size() < 16) {
        std::vector<double> s(5);
        // geometric sampling for the positive scales, uniform for mu
        for (int i = 0; i < 4; ++i) s[i] = std::exp(std::log(0.05) + unif(rng) * std::log(400.0));
        s[4] = -1.0 + 2.0 * unif(rng);
        starts1.push_back(std::move(s));
    }
    TcCalibration result;
    NmOutcome best1;
    for (std::size_t k = 0; k < starts1.size(); ++k) {
        NmOutcome out = nm_polished(obj1, starts1[k], lo1, hi1, 1e-16, 30000);
        if (improves(out.f, best1.f)) {
            best1 = out;
            result.best_start = static_cast<int>(k);
        }
    }
    TcStep1Point p1 = tc_step1_point(clamp_box(best1.x, lo1, hi1), t1.d1, r);
    if (!p1.feasible)
        throw std::runtime_error("calibrate_tc: step 1 found no feasible drift argument");
    result.step_residual[0] = std::sqrt(std::max(best1.f, 0.0));

    // Asset 1 alone cannot tell the common clock from its own: with
    // T1 = L0 + d1 L1 the two gamma factors enter symmetrically (up to the
    // d1 rescaling), so the relabeled optimum fits step 1 equally well. Step
    // 2 is overdetermined (five equations, three unknowns) and the cross /
    // asset-2 moments break the tie; run it for both labelings and keep the
    // better combined fit.
    std::vector<TcStep1Point> candidates{p1};
    if (t1.d1 > 0.0) {
        TcStep1Point sw = p1; // same asset-1 law, same mu1 and sigma_r1
        sw.a0 = p1.a1;
        sw.b0 = p1.b1 / t1.d1;
        sw.a1 = p1.a0;
        sw.b1 = t1.d1 * p1.b0;
        candidates.push_back(sw);
    }

    // ---- step 2: asset 2 given the common subordinator ----
    const double g12 = mom.m12;
    const double g1b = mom.m1[1];
    const double g2b = mom.m2[1];
    const double g3b = mom.m3[1];
    const double g4b = mom.m4[1];
    const double s12 = std::max(std::fabs(g12), 1e-8);
    const double s1b = std::max(std::fabs(g1b), 1e-5);
    const double s2b = std::max(std::fabs(g2b), 1e-6);
    const double s3b = std::max(std::fabs(g3b), 1e-7);
    const double s4b = std::max(std::fabs(g4b), 1e-8);
    const double d2 = fixed.d2;
    const std::vector<double> lo2{1e-3, 1e-3, -3.0};
    const std::vector<double> hi2{50.0, 50.0, 3.0};

    // x = (alpha2/beta2, 1/beta2, mu2), sigma_r2^2 eliminated as in step 1
    auto run_step2 = [&](const TcStep1Point& c) {
        const double EL0sq = c.a0 * dt * (c.a0 * dt + 1.0) / (c.b0 * c.b0);
        auto obj2 = [&, EL0sq](const std::vector<double>& x) {
            double a2 = x[0] / x[1];
            double b2 = 1.0 / x[1];
            double mu2 = x[2];
            double w = tc_rn_root(c.a0, c.b0, a2, b2, d2, r);
            double sig2 = 2.0 * (w - mu2);
            if (sig2 <= 1e-10) return 1e8 * (1.0 + std::fabs(sig2));
            double E1 = subordinator_moment(c.a0, c.b0, a2, b2, d2, dt, 1);
            double E2 = subordinator_moment(c.a0, c.b0, a2, b2, d2, dt, 2);
            double E3 = subordinator_moment(c.a0, c.b0, a2, b2, d2, dt, 3);
            double E4 = subordinator_moment(c.a0, c.b0, a2, b2, d2, dt, 4);
            double m1 = mu2 * E1;
            double m2 = mu2 * mu2 * E2 + sig2 * E1;
            double m3 = mu2 * mu2 * mu2 * E3 + 3.0 * mu2 * sig2 * E2;
            double m4 = std::pow(mu2, 4) * E4 + 6.0 * mu2 * mu2 * sig2 * E3 +
                        3.0 * sig2 * sig2 * E2;
            double m12 = c.mu1 * mu2 * EL0sq;
            double e1 = (m12 - g12) / s12;
            double e2 = (m1 - g1b) / s1b;
            double e3 = (m2 - g2b) / s2b;
            double e4 = (m3 - g3b) / s3b;
            double e5 = (m4 - g4b) / s4b;
            return e1 * e1 + e2 * e2 + e3 * e3 + e4 * e4 + e5 * e5;
        };

        double mu2_guess = std::fabs(c.mu1 * EL0sq) > 1e-14 ? g12 / (c.mu1 * EL0sq) : 0.0;
        double ratio2_guess = 1.0;
        if (d2 > 0.0 && std::fabs(mu2_guess) > 1e-12) {
            ratio2_guess = (g1b / mu2_guess / dt - c.a0 / c.b0) / d2;
            ratio2_guess = std::min(std::max(ratio2_guess, 1e-3), 50.0);
        }
        mu2_guess = std::min(std::max(mu2_guess, -3.0), 3.0);

        std::vector<std::vector<double>> starts2;
        for (double x4 : grid)
            for (double ratio : {ratio2_guess, 1.0})
                for (double mu2 : {mu2_guess, 0.0})
                    starts2.push_back({ratio, x4, mu2});
        NmOutcome best2;
        for (const auto& s : starts2) {
            NmOutcome out = nm_polished(obj2, s, lo2, hi2, 1e-16, 20000);
            if (improves(out.f, best2.f)) best2 = out;
        }
        return best2;
    };

    NmOutcome best2;
    std::size_t chosen = 0;
    for (std::size_t k = 0; k < candidates.size(); ++k) {
        NmOutcome out = run_step2(candidates[k]);
        if (improves(out.f, best2.f)) {
            best2 = out;
            chosen = k;
        }
    }
    const TcStep1Point& pc = candidates[chosen];
    std::vector<double> x2 = clamp_box(best2.x, lo2, hi2);
    result.step_residual[1] = std::sqrt(std::max(best2.f, 0.0));

    TimeChangeParams p = fixed;
    p.alpha0 = pc.a0;
    p.beta0 = pc.b0;
    p.alpha1 = pc.a1;
    p.beta1 = pc.b1;
    p.mu1 = pc.mu1;
    p.sigr1 = std::sqrt(pc.sig2);
    p.alpha2 = x2[0] / x2[1];
    p.beta2 = 1.0 / x2[1];
    p.mu2 = x2[2];
    double w2 = tc_rn_root(pc.a0, pc.b0, p.alpha2, p.beta2, d2, r);
    double sig2b = 2.0 * (w2 - p.mu2);
    if (sig2b <= 0.0)
        throw std::runtime_error("calibrate_tc: step 2 found no feasible drift argument");
    p.sigr2 = std::sqrt(sig2b);
    p.validate();

    result.params = p;
    result.residual = std::sqrt(result.step_residual[0] * result.step_residual[0] +
                                result.step_residual[1] * result.step_residual[1]);
    result.converged = best1.by_ftol && best2.by_ftol;
    double v1 = std::abs(gamma_char_exponent(p, cplx(0.0, -1.0), cplx(0.0, 0.0)) - cplx(r, 0.0));
    double v2 = std::abs(gamma_char_exponent(p, cplx(0.0, 0.0), cplx(0.0, -1.0)) - cplx(r, 0.0));
    result.constraint_violation = std::max(v1, v2);
    return result;
}

} // namespace cspread
