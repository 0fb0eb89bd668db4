#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "qregime/dataset.hpp"
#include "qregime/qnet.hpp"
#include "qregime/rng.hpp"

namespace qregime::testing {

// Plain-loop forward pass, written independently of QNetwork's Eigen path;
// doubles as the reference when checking the library's forward.
inline std::vector<double> manual_forward(const NetShape& shape, const ParamVec& params,
                                          const std::vector<double>& state) {
    auto dims = shape.dims();
    QNetwork offsets(shape);
    std::vector<double> act = state;
    for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
        const auto in = static_cast<std::size_t>(dims[l]);
        const auto out = static_cast<std::size_t>(dims[l + 1]);
        const double* w = params.data() + offsets.weight_offset(static_cast<int>(l));
        const double* b = params.data() + offsets.bias_offset(static_cast<int>(l));
        std::vector<double> next(out, 0.0);
        for (std::size_t r = 0; r < out; ++r) {
            double z = b[r];
            for (std::size_t c = 0; c < in; ++c) z += w[r * in + c] * act[c];
            next[r] = (l + 2 < dims.size()) ? std::max(z, 0.0) : z;
        }
        act = std::move(next);
    }
    return act;
}

// Smallest |pre-activation| over every hidden unit for every listed state;
// used to keep finite-difference checks away from ReLU kinks.
inline double min_abs_preactivation(const NetShape& shape, const ParamVec& params,
                                    const std::vector<std::vector<double>>& states) {
    auto dims = shape.dims();
    QNetwork offsets(shape);
    double min_abs = 1e300;
    for (const auto& state : states) {
        std::vector<double> act = state;
        for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
            const auto in = static_cast<std::size_t>(dims[l]);
            const auto out = static_cast<std::size_t>(dims[l + 1]);
            const double* w = params.data() + offsets.weight_offset(static_cast<int>(l));
            const double* b = params.data() + offsets.bias_offset(static_cast<int>(l));
            std::vector<double> next(out, 0.0);
            for (std::size_t r = 0; r < out; ++r) {
                double z = b[r];
                for (std::size_t c = 0; c < in; ++c) z += w[r * in + c] * act[c];
                if (l + 2 < dims.size()) {
                    min_abs = std::min(min_abs, std::abs(z));
                    next[r] = std::max(z, 0.0);
                } else {
                    next[r] = z;
                }
            }
            act = std::move(next);
        }
    }
    return min_abs;
}

// Margin between the best and second-best Q over the given states; FD
// probes must not flip an argmax.
inline double min_argmax_margin(const NetShape& shape, const ParamVec& params,
                                const std::vector<std::vector<double>>& states) {
    double min_margin = 1e300;
    for (const auto& state : states) {
        auto q = manual_forward(shape, params, state);
        if (q.size() < 2) continue;
        std::vector<double> sorted = q;
        std::sort(sorted.begin(), sorted.end());
        min_margin = std::min(min_margin, sorted.back() - sorted[sorted.size() - 2]);
    }
    return min_margin;
}

inline std::vector<double> random_state(Rng& rng, int dim) {
    std::vector<double> s(static_cast<std::size_t>(dim));
    for (auto& v : s) v = rng.uniform(-1.0, 1.0);
    return s;
}

inline std::vector<Transition> random_batch(Rng& rng, int dim, int n_actions, int n) {
    std::vector<Transition> batch;
    for (int i = 0; i < n; ++i) {
        Transition t;
        t.state = random_state(rng, dim);
        t.next_state = random_state(rng, dim);
        t.action = rng.uniform_int(n_actions);
        t.reward = rng.uniform(-1.0, 1.0);
        t.next_is_terminal = rng.uniform() < 0.2;
        batch.push_back(std::move(t));
    }
    return batch;
}

// A single linear layer makes exact Q tables expressible: forward(one_hot(s))
// reads column s of the weight matrix.
inline ParamVec table_as_params(const QNetwork& net, const std::vector<std::vector<double>>& q) {
    // q[s][a] for input_dim states, output_dim actions
    const int in = net.shape().input_dim;
    const int out = net.shape().output_dim;
    ParamVec params(net.param_count(), 0.0);
    for (int a = 0; a < out; ++a)
        for (int s = 0; s < in; ++s)
            params[static_cast<std::size_t>(a * in + s)] = q[static_cast<std::size_t>(s)]
                                                            [static_cast<std::size_t>(a)];
    return params;
}

} // namespace qregime::testing
