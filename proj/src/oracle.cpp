#include "qregime/oracle.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace qregime {

double TabularQ::state_value(int s) const {
    double best = at(s, 0);
    for (int a = 1; a < n_actions; ++a) best = std::max(best, at(s, a));
    return best;
}

int TabularQ::greedy(int s) const {
    int best = 0;
    for (int a = 1; a < n_actions; ++a)
        if (at(s, a) > at(s, best)) best = a;
    return best;
}

ValueIterationResult value_iteration(const GridLayout& layout, double gamma, double tol) {
    if (gamma < 0.0 || gamma >= 1.0)
        throw std::invalid_argument("value iteration requires gamma in [0, 1)");
    if (tol <= 0.0) throw std::invalid_argument("value iteration tolerance must be positive");
    layout.validate();

    const int n = layout.num_states();
    ValueIterationResult out;
    out.q.n_states = n;
    out.q.n_actions = 4;
    out.q.q.assign(static_cast<std::size_t>(n) * 4, 0.0);

    std::vector<double> v(static_cast<std::size_t>(n), 0.0);
    std::vector<double> next(v);
    while (true) {
        double delta = 0.0;
        for (int s = 0; s < n; ++s) {
            if (layout.is_terminal(s)) continue;
            double best = -std::numeric_limits<double>::infinity();
            for (int a = 0; a < 4; ++a) {
                GridStep step = grid_step(layout, s, a);
                double boot = step.terminal ? 0.0 : v[static_cast<std::size_t>(step.next_index)];
                double q = step.reward + gamma * boot;
                out.q.at(s, a) = q;
                best = std::max(best, q);
            }
            delta = std::max(delta, std::abs(best - v[static_cast<std::size_t>(s)]));
            next[static_cast<std::size_t>(s)] = best;
        }
        v = next;
        ++out.sweeps;
        out.sweep_deltas.push_back(delta);
        if (delta < tol) break;
        if (out.sweeps > 1000000)
            throw std::runtime_error("value iteration failed to converge");
    }

    out.policy.assign(static_cast<std::size_t>(n), -1);
    for (int s = 0; s < n; ++s)
        if (!layout.is_terminal(s)) out.policy[static_cast<std::size_t>(s)] = out.q.greedy(s);
    return out;
}

std::vector<int> optimal_actions(const TabularQ& q, int state, double tol) {
    double best = q.state_value(state);
    std::vector<int> out;
    for (int a = 0; a < q.n_actions; ++a)
        if (q.at(state, a) >= best - tol) out.push_back(a);
    return out;
}

double exact_residual(const TabularQ& q, const GridLayout& layout, double gamma) {
    if (q.n_states != layout.num_states() || q.n_actions != 4)
        throw std::invalid_argument("exact_residual: table does not match the layout");
    double sum = 0.0;
    long count = 0;
    for (int s = 0; s < layout.num_states(); ++s) {
        if (layout.is_terminal(s)) continue;
        for (int a = 0; a < 4; ++a) {
            GridStep step = grid_step(layout, s, a);
            double r = q.at(s, a) - step.reward - gamma * q.state_value(step.next_index);
            sum += r * r;
            ++count;
        }
    }
    return sum / static_cast<double>(count);
}

TabularQ bad_regime_certificate(const GridLayout& layout, double gamma, double step_reward) {
    layout.validate();
    if (gamma <= 0.0 || gamma >= 1.0)
        throw std::invalid_argument("certificate requires gamma in (0, 1)");
    const int n = layout.num_states();
    const double c = step_reward / (1.0 - gamma);

    TabularQ q;
    q.n_states = n;
    q.n_actions = 4;
    q.q.assign(static_cast<std::size_t>(n) * 4, c);

    // Terminal entries solve c = r_T + gamma * V(terminal) exactly, so
    // terminal-bound rows have zero residual as well.
    for (int s = 0; s < n; ++s) {
        if (!layout.is_terminal(s)) continue;
        double r_t = s == layout.goal ? 1.0 : -1.0;
        double v = (c - r_t) / gamma;
        for (int a = 0; a < 4; ++a) q.at(s, a) = v;
    }
    return q;
}

} // namespace qregime
