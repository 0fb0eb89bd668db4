#include "qregime/evaluation.hpp"

#include <cmath>
#include <stdexcept>

#include "qregime/gradients.hpp"

namespace qregime {

RolloutResult rollout_greedy(const Env& env, const QNetwork& net, std::span<const double> params,
                             std::uint64_t start_seed) {
    RolloutResult out;
    StateVec state = reset_seeded(env, start_seed);
    const int cap = env.spec().max_episode_steps;
    for (int t = 0; t < cap; ++t) {
        int action = greedy_action(net, params, state);
        StepResult r = env.step(state, action);
        out.accumulated_reward += r.reward;
        out.steps_taken += 1;
        if (r.terminal) {
            out.reached_terminal = true;
            break;
        }
        state = std::move(r.next);
    }
    return out;
}

namespace {
struct MeanStd {
    double mean = 0.0;
    double half_width = 0.0;
};

MeanStd normal_ci(const std::vector<double>& xs) {
    MeanStd out;
    const auto n = static_cast<double>(xs.size());
    for (double x : xs) out.mean += x;
    out.mean /= n;
    if (xs.size() >= 2) {
        double ss = 0.0;
        for (double x : xs) ss += (x - out.mean) * (x - out.mean);
        double s = std::sqrt(ss / (n - 1.0));
        out.half_width = 1.96 * s / std::sqrt(n);
    }
    return out;
}
} // namespace

SweepResult robustness_sweep(const Env& env, const QNetwork& net, std::span<const double> params,
                             const std::vector<double>& alphas, int repeats, std::uint64_t seed,
                             std::uint64_t rollout_seed) {
    if (alphas.empty()) throw std::invalid_argument("robustness_sweep: alphas must be non-empty");
    if (repeats < 1) throw std::invalid_argument("robustness_sweep: repeats must be >= 1");

    ParamVec base(params.begin(), params.end());
    SweepResult out;
    for (std::size_t ai = 0; ai < alphas.size(); ++ai) {
        const double alpha = alphas[ai];
        if (alpha < 0.0) throw std::invalid_argument("robustness_sweep: alpha must be >= 0");
        std::vector<double> rewards;
        rewards.reserve(static_cast<std::size_t>(repeats));
        for (int rep = 0; rep < repeats; ++rep) {
            ParamVec theta =
                alpha == 0.0
                    ? base
                    : perturb(base, alpha, mix_seed(mix_seed(seed, static_cast<std::uint64_t>(ai)),
                                                    static_cast<std::uint64_t>(rep)));
            rewards.push_back(rollout_greedy(env, net, theta, rollout_seed).accumulated_reward);
        }
        MeanStd stat = normal_ci(rewards);
        out.points.push_back({alpha, stat.mean, stat.half_width, repeats, repeats < 2});
    }
    return out;
}

std::vector<double> default_alpha_grid() {
    std::vector<double> out{0.0};
    const int n = 12;
    const double lo = 1e-4, hi = 1e-1;
    for (int i = 0; i < n; ++i)
        out.push_back(lo * std::pow(hi / lo, static_cast<double>(i) / (n - 1)));
    return out;
}

MeanBand aggregate_trials(const std::vector<std::vector<double>>& curves) {
    if (curves.empty()) throw std::invalid_argument("aggregate_trials: no curves");
    const std::size_t len = curves.front().size();
    for (const auto& c : curves)
        if (c.size() != len) throw std::invalid_argument("aggregate_trials: unequal curve lengths");

    MeanBand out;
    out.band_valid = curves.size() >= 2;
    out.mean.resize(len, 0.0);
    out.half_width.resize(len, 0.0);
    std::vector<double> point(curves.size());
    for (std::size_t i = 0; i < len; ++i) {
        for (std::size_t k = 0; k < curves.size(); ++k) point[k] = curves[k][i];
        MeanStd stat = normal_ci(point);
        out.mean[i] = stat.mean;
        out.half_width[i] = stat.half_width;
    }
    return out;
}

} // namespace qregime
