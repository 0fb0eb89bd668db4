#pragma once

#include <span>
#include <string>
#include <vector>

#include "qregime/dataset.hpp"
#include "qregime/qnet.hpp"

namespace qregime {

// Semi updates only through the prediction Q(s,a); BackwardSemi only through
// the bootstrap term gamma * max_a' Q(s',a'); True is their sum and equals
// the exact gradient of the squared-residual loss.
enum class GradientMode { Semi, True, BackwardSemi };

std::string to_string(GradientMode mode);
GradientMode gradient_mode_from_string(const std::string& s); // "semi" | "true" | "backward-semi"

// Lowest-index maximizer of the Q outputs; ties break toward action 0.
int greedy_action(const QNetwork& net, std::span<const double> params,
                  std::span<const double> state);

// Mean squared residual (1/N) sum_i (Q(s_i,a_i) - r_i - gamma * max_a' Q(s'_i,a'))^2.
// Next-state values are always network-evaluated, including terminal states.
double bellman_loss(const QNetwork& net, std::span<const double> params,
                    std::span<const Transition> batch, double gamma);

ParamVec grad(GradientMode mode, const QNetwork& net, std::span<const double> params,
              std::span<const Transition> batch, double gamma);

// Loss and gradient from one evaluation of the batch; the training loop's
// entry point.
struct GradResult {
    double loss = 0.0;
    ParamVec gradient;
};
GradResult grad_with_loss(GradientMode mode, const QNetwork& net, std::span<const double> params,
                          std::span<const Transition> batch, double gamma);

// Central finite differences of bellman_loss per parameter; the independent
// check for the True mode. Only sensible on small networks.
ParamVec fd_gradient(const QNetwork& net, std::span<const double> params,
                     std::span<const Transition> batch, double gamma, double h);

} // namespace qregime
