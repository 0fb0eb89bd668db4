#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "qregime/qnet.hpp"

namespace qregime {

// Step-decay schedule: lr(t) = lr0 * decay^floor(t / period).
struct Schedule {
    double lr0 = 1e-4;
    double decay = 1.0;
    int period = 3000;
};

double lr_at(const Schedule& schedule, long step);

struct AdamState {
    std::vector<double> m, v;
    long t = 0;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

AdamState make_adam(std::size_t n_params);

// Canonical bias-corrected Adam update, applied in place.
void adam_step(AdamState& state, ParamVec& params, std::span<const double> gradient, double lr);

} // namespace qregime
