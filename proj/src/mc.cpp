#include "cspread/mc.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace cspread {

namespace {

constexpr std::size_t kBlockPaths = 65536;

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

// independent, reproducible stream per block of paths
std::mt19937_64 block_rng(std::uint64_t seed, std::uint64_t block) {
    return std::mt19937_64(splitmix64(seed + 0x9e3779b97f4a7c15ull * (block + 1)));
}

int poisson_count(std::mt19937_64& g, double mean) {
    if (mean <= 0.0) return 0;
    std::poisson_distribution<int> d(mean);
    return d(g);
}

double gamma_draw(std::mt19937_64& g, double shape, double rate) {
    std::gamma_distribution<double> d(shape, 1.0 / rate);
    return d(g);
}

struct JdDraw {
    int n0, n1, n2;
    double zb1, zb2, zi1, zi2, zc1, zc2;
};

struct JdStepper {
    double dt, sdt;
    std::array<double, 2> b;
    const JumpDiffusionParams& p;
    double rc_B, rc_J;
    std::normal_distribution<double> nd;

    JdStepper(const JumpDiffusionParams& p_, double dt_)
        : dt(dt_), sdt(std::sqrt(dt_)), b(merton_rn_drift(p_)), p(p_),
          rc_B(std::sqrt(1.0 - p_.rho_B * p_.rho_B)), rc_J(std::sqrt(1.0 - p_.rho_J * p_.rho_J)) {}

    JdDraw draw(std::mt19937_64& g) {
        JdDraw d;
        d.n0 = poisson_count(g, p.lambda0 * dt);
        d.n1 = poisson_count(g, p.lambda1 * dt);
        d.n2 = poisson_count(g, p.lambda2 * dt);
        d.zb1 = nd(g);
        d.zb2 = nd(g);
        d.zi1 = nd(g);
        d.zi2 = nd(g);
        d.zc1 = nd(g);
        d.zc2 = nd(g);
        return d;
    }

    // flip < 0 mirrors every Gaussian while keeping the jump counts
    std::array<double, 2> increment(const JdDraw& d, double flip) const {
        double sq0 = std::sqrt(static_cast<double>(d.n0));
        double sq1 = std::sqrt(static_cast<double>(d.n1));
        double sq2 = std::sqrt(static_cast<double>(d.n2));
        double dy1 = b[0] * dt + p.sigma1 * sdt * flip * d.zb1 + p.muJ1 * d.n1 +
                     p.sigJ1 * sq1 * flip * d.zi1 + p.mu01 * d.n0 + p.sig01 * sq0 * flip * d.zc1;
        double dy2 = b[1] * dt + p.sigma2 * sdt * flip * (p.rho_B * d.zb1 + rc_B * d.zb2) +
                     p.muJ2 * d.n2 + p.sigJ2 * sq2 * flip * d.zi2 + p.mu02 * d.n0 +
                     p.sig02 * sq0 * flip * (p.rho_J * d.zc1 + rc_J * d.zc2);
        return {dy1, dy2};
    }
};

struct TcDraw {
    double l0, l1, l2;
    double z1, z2;
};

struct TcStepper {
    double dt;
    const TimeChangeParams& p;
    std::normal_distribution<double> nd;

    TcStepper(const TimeChangeParams& p_, double dt_) : dt(dt_), p(p_) {}

    TcDraw draw(std::mt19937_64& g) {
        TcDraw d;
        d.l0 = gamma_draw(g, p.alpha0 * dt, p.beta0);
        d.l1 = gamma_draw(g, p.alpha1 * dt, p.beta1);
        d.l2 = gamma_draw(g, p.alpha2 * dt, p.beta2);
        d.z1 = nd(g);
        d.z2 = nd(g);
        return d;
    }

    std::array<double, 2> increment(const TcDraw& d, double flip) const {
        double r1 = d.l0 + p.d1 * d.l1;
        double r2 = d.l0 + p.d2 * d.l2;
        double dy1 = p.mu1 * r1 + p.sigr1 * std::sqrt(r1) * flip * d.z1;
        double dy2 = p.mu2 * r2 + p.sigr2 * std::sqrt(r2) * flip * d.z2;
        return {dy1, dy2};
    }
};

void check_sim_args(double T, int steps) {
    if (steps < 1) throw std::invalid_argument("simulate: steps must be at least 1");
    if (T <= 0.0) throw std::invalid_argument("simulate: T must be positive");
}

template <class Stepper>
std::vector<std::array<double, 2>> simulate_impl(Stepper& st, int steps, std::size_t n_paths,
                                                 std::uint64_t seed, std::vector<double>* paths) {
    std::vector<std::array<double, 2>> out(n_paths);
    if (paths) paths->assign(n_paths * static_cast<std::size_t>(steps + 1) * 2, 0.0);
    for (std::size_t base = 0; base < n_paths; base += kBlockPaths) {
        auto rng = block_rng(seed, base / kBlockPaths);
        std::size_t hi = std::min(n_paths, base + kBlockPaths);
        for (std::size_t i = base; i < hi; ++i) {
            double y1 = 0.0, y2 = 0.0;
            for (int k = 0; k < steps; ++k) {
                auto d = st.draw(rng);
                auto dy = st.increment(d, 1.0);
                y1 += dy[0];
                y2 += dy[1];
                if (paths) {
                    std::size_t row = (i * (steps + 1) + (k + 1)) * 2;
                    (*paths)[row] = y1;
                    (*paths)[row + 1] = y2;
                }
            }
            out[i] = {y1, y2};
        }
    }
    return out;
}

template <class Stepper>
McEstimate mc_price_impl(Stepper& st, double r, const Contract& contract, std::size_t n_paths,
                         std::uint64_t seed) {
    const std::size_t pairs = (n_paths + 1) / 2;
    const std::size_t block_pairs = kBlockPaths / 2;
    const double disc = std::exp(-r * contract.T);
    auto payoff = [&](const std::array<double, 2>& y) {
        double v = contract.s0[1] * std::exp(y[1]) - contract.c * contract.s0[0] * std::exp(y[0]) -
                   contract.K;
        return v > 0.0 ? v : 0.0;
    };
    double sum = 0.0, sumsq = 0.0;
    for (std::size_t base = 0; base < pairs; base += block_pairs) {
        auto rng = block_rng(seed, base / block_pairs);
        std::size_t hi = std::min(pairs, base + block_pairs);
        double bsum = 0.0, bsumsq = 0.0;
        for (std::size_t i = base; i < hi; ++i) {
            auto d = st.draw(rng);
            double sample = 0.5 * (payoff(st.increment(d, 1.0)) + payoff(st.increment(d, -1.0)));
            bsum += sample;
            bsumsq += sample * sample;
        }
        sum += bsum;
        sumsq += bsumsq;
    }
    McEstimate est;
    est.n_paths = 2 * pairs;
    double mean = sum / pairs;
    est.value = disc * mean;
    if (pairs > 1) {
        double var = (sumsq - pairs * mean * mean) / (pairs - 1);
        if (var < 0.0) var = 0.0;
        est.std_error = disc * std::sqrt(var / pairs);
    }
    return est;
}

} // namespace

std::vector<std::array<double, 2>> simulate_jd(const JumpDiffusionParams& p, double T, int steps,
                                               std::size_t n_paths, std::uint64_t seed,
                                               std::vector<double>* paths) {
    p.validate();
    check_sim_args(T, steps);
    JdStepper st(p, T / steps);
    return simulate_impl(st, steps, n_paths, seed, paths);
}

std::vector<std::array<double, 2>> simulate_tc(const TimeChangeParams& p, double T, int steps,
                                               std::size_t n_paths, std::uint64_t seed,
                                               std::vector<double>* paths) {
    p.validate();
    check_sim_args(T, steps);
    TcStepper st(p, T / steps);
    return simulate_impl(st, steps, n_paths, seed, paths);
}

McEstimate mc_price(const JumpDiffusionParams& p, const Contract& contract, std::size_t n_paths,
                    std::uint64_t seed) {
    p.validate();
    contract.validate();
    JdStepper st(p, contract.T);
    return mc_price_impl(st, p.r, contract, n_paths, seed);
}

McEstimate mc_price(const TimeChangeParams& p, const Contract& contract, std::size_t n_paths,
                    std::uint64_t seed) {
    p.validate();
    contract.validate();
    TcStepper st(p, contract.T);
    return mc_price_impl(st, p.r, contract, n_paths, seed);
}

} // namespace cspread
