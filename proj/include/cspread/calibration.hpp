#pragma once

#include <array>
#include <string>
#include <vector>

#include "cspread/models.hpp"

namespace cspread {

// Two aligned daily price series; rows with a non-positive price are dropped
// on load and counted. One year is 310 trading days.
struct PriceSeries {
    std::vector<std::string> dates;
    std::vector<double> price1;
    std::vector<double> price2;
    double dt = 1.0 / 310.0;
    std::size_t dropped_rows = 0;

    std::size_t size() const { return price1.size(); }
};

// CSV with header date,<name1>,<name2>, one row per trading day.
PriceSeries load_price_series(const std::string& path);

struct SampleMoments {
    std::array<double, 2> mean{}, stdev{}, skew{}, kurt{};
    std::array<double, 2> m1{}, m2{}, m3{}, m4{}; // raw moments of log-returns
    double m12 = 0.0;                             // raw cross moment
    double corr = 0.0;
    double dt = 1.0 / 310.0;
    std::size_t n_obs = 0;

    void validate() const;
};

SampleMoments sample_moments(const PriceSeries& series);

// Model-implied population analogue, for synthetic round trips.
SampleMoments moments_from_model(const MomentSet& ms);

struct JdCalibration {
    JumpDiffusionParams params;
    double residual = 0.0;             // scaled moment residual at the optimum
    double constraint_violation = 0.0; // max_j |Psi(-i e_j) - r|
    int best_start = -1;
    bool converged = false;
};

extern const std::vector<std::string> kJdDefaultFree;

// GMM fit of the jump-diffusion model to mean/variance/correlation targets.
// Fields not named in free_fields are copied from `fixed`; the risk-neutral
// constraints hold identically because the drift is eliminated through them.
JdCalibration calibrate_jd(const SampleMoments& mom, const JumpDiffusionParams& fixed,
                           const std::vector<std::string>& free_fields = kJdDefaultFree);

struct TcCalibration {
    TimeChangeParams params;
    double residual = 0.0;
    double constraint_violation = 0.0;
    std::array<double, 2> step_residual{};
    int best_start = -1;
    bool converged = false;
};

// Two-step GMM fit of the time-changed model: step 1 matches asset-1 raw
// moments m1..m4 in the ratio parametrization (alpha0/beta0, alpha1/beta1,
// 1/beta0, 1/beta1, mu1) with sigma_r1^2 eliminated through the risk-neutral
// constraint; step 2 matches the cross moment and asset-2 m1, m2 the same
// way. `fixed` supplies r, d1, d2, s0. Multi-start, deterministic.
TcCalibration calibrate_tc(const SampleMoments& mom, const TimeChangeParams& fixed);

} // namespace cspread
