#pragma once

#include <vector>

#include "qregime/env.hpp"

namespace qregime {

// Exact Q table over all grid states. Terminal rows are meaningful: value
// iteration pins them to 0 (optimal-control convention) while the
// certificate solves them from the pre-terminal equations, mirroring the
// network's unmasked bootstrap.
struct TabularQ {
    int n_states = 0;
    int n_actions = 4;
    std::vector<double> q; // row-major [state][action]

    double& at(int s, int a) { return q[static_cast<std::size_t>(s * n_actions + a)]; }
    double at(int s, int a) const { return q[static_cast<std::size_t>(s * n_actions + a)]; }
    double state_value(int s) const;
    int greedy(int s) const; // lowest-index maximizer
};

struct ValueIterationResult {
    TabularQ q;
    std::vector<int> policy;          // greedy action per state; -1 on terminal states
    std::vector<double> sweep_deltas; // sup-norm change per sweep
    int sweeps = 0;
};

// Synchronous Bellman optimality iteration with terminal values fixed at 0.
ValueIterationResult value_iteration(const GridLayout& layout, double gamma, double tol = 1e-12);

// Actions that are optimal within `tol` of the best Q value; used when
// grading a learned policy against the oracle so exact ties count either way.
std::vector<int> optimal_actions(const TabularQ& q, int state, double tol = 1e-9);

// Mean squared Bellman residual of a Q table over the Cartesian dataset of
// the layout, bootstrapping through the table's terminal entries.
double exact_residual(const TabularQ& q, const GridLayout& layout, double gamma);

// The constant table Q = r_s/(1-gamma) on non-terminal states with terminal
// entries solved so every residual vanishes. Zero loss, useless greedy
// policy: the analytic witness that a small residual does not imply a good
// policy.
TabularQ bad_regime_certificate(const GridLayout& layout, double gamma, double step_reward);

} // namespace qregime
