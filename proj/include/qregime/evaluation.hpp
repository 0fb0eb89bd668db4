#pragma once

#include <cstdint>
#include <vector>

#include "qregime/env.hpp"
#include "qregime/qnet.hpp"

namespace qregime {

struct RolloutResult {
    double accumulated_reward = 0.0; // undiscounted sum of environment rewards
    int steps_taken = 0;
    bool reached_terminal = false;
};

// One greedy episode from reset(start_seed), ending at a terminal state or
// the episode cap.
RolloutResult rollout_greedy(const Env& env, const QNetwork& net, std::span<const double> params,
                             std::uint64_t start_seed);

struct SweepPoint {
    double alpha = 0.0;
    double mean_reward = 0.0;
    double ci_half_width = 0.0;
    int n = 0;
    bool insufficient_n = false; // fewer than 2 samples; no interval
};

struct SweepResult {
    std::vector<SweepPoint> points;
};

// For each alpha: `repeats` independent Gaussian parameter perturbations,
// one greedy rollout each (all episodes start from rollout_seed), mean and
// 95% normal-approximation interval. alpha = 0 bypasses the perturbation.
// Perturbation seeds derive deterministically from (seed, alpha idx, repeat).
SweepResult robustness_sweep(const Env& env, const QNetwork& net, std::span<const double> params,
                             const std::vector<double>& alphas, int repeats, std::uint64_t seed,
                             std::uint64_t rollout_seed);

// {0} followed by 12 geometric points spanning [1e-4, 1e-1].
std::vector<double> default_alpha_grid();

struct MeanBand {
    std::vector<double> mean;
    std::vector<double> half_width;
    bool band_valid = false; // false when fewer than 2 trials
};

// Pointwise mean and 1.96 * s / sqrt(n) half-widths over aligned curves.
MeanBand aggregate_trials(const std::vector<std::vector<double>>& curves);

} // namespace qregime
