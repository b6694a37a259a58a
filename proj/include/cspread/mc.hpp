#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "cspread/models.hpp"
#include "cspread/types.hpp"

namespace cspread {

struct McEstimate {
    double value = 0.0;
    double std_error = 0.0;
    std::size_t n_paths = 0;
};

// Terminal joint log-returns (Y1, Y2) over [0, T], one row per path. Each of
// the `steps` increments is sampled exactly in law, so `steps` only matters
// when trajectories are requested: with `paths` non-null it receives the
// running log-returns on the uniform time grid, row-major
// [path][time 0..steps][component].
std::vector<std::array<double, 2>> simulate_jd(const JumpDiffusionParams& p, double T, int steps,
                                               std::size_t n_paths, std::uint64_t seed,
                                               std::vector<double>* paths = nullptr);

std::vector<std::array<double, 2>> simulate_tc(const TimeChangeParams& p, double T, int steps,
                                               std::size_t n_paths, std::uint64_t seed,
                                               std::vector<double>* paths = nullptr);

// Discounted mean payoff with standard error. Antithetic variates: each pair
// of paths shares its jump-count / subordinator draws and flips every
// Gaussian; the pair average is the unit for the standard error.
McEstimate mc_price(const JumpDiffusionParams& p, const Contract& contract, std::size_t n_paths,
                    std::uint64_t seed);
McEstimate mc_price(const TimeChangeParams& p, const Contract& contract, std::size_t n_paths,
                    std::uint64_t seed);

} // namespace cspread
