#include "qregime/optimizer.hpp"

#include <cmath>
#include <stdexcept>

namespace qregime {

double lr_at(const Schedule& schedule, long step) {
    if (step < 0) throw std::invalid_argument("schedule step must be >= 0");
    if (schedule.period < 1) throw std::invalid_argument("schedule period must be positive");
    return schedule.lr0 * std::pow(schedule.decay, static_cast<double>(step / schedule.period));
}

AdamState make_adam(std::size_t n_params) {
    AdamState s;
    s.m.assign(n_params, 0.0);
    s.v.assign(n_params, 0.0);
    return s;
}

void adam_step(AdamState& state, ParamVec& params, std::span<const double> gradient, double lr) {
    const std::size_t n = params.size();
    if (state.m.size() != n || state.v.size() != n || gradient.size() != n)
        throw std::invalid_argument("adam_step: shape mismatch");
    state.t += 1;
    const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.t));
    const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.t));
    for (std::size_t i = 0; i < n; ++i) {
        const double g = gradient[i];
        state.m[i] = state.beta1 * state.m[i] + (1.0 - state.beta1) * g;
        state.v[i] = state.beta2 * state.v[i] + (1.0 - state.beta2) * g * g;
        const double m_hat = state.m[i] / bc1;
        const double v_hat = state.v[i] / bc2;
        params[i] -= lr * m_hat / (std::sqrt(v_hat) + state.epsilon);
    }
}

} // namespace qregime
