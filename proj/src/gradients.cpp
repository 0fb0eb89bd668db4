#include "qregime/gradients.hpp"

#include <stdexcept>

namespace qregime {

std::string to_string(GradientMode mode) {
    switch (mode) {
        case GradientMode::Semi: return "semi";
        case GradientMode::True: return "true";
        case GradientMode::BackwardSemi: return "backward-semi";
    }
    throw std::logic_error("unreachable gradient mode");
}

GradientMode gradient_mode_from_string(const std::string& s) {
    if (s == "semi" || s == "td") return GradientMode::Semi;
    if (s == "true" || s == "rg") return GradientMode::True;
    if (s == "backward-semi") return GradientMode::BackwardSemi;
    throw ConfigError("unknown gradient mode: " + s +
                      " (expected semi | true | backward-semi)");
}

namespace {

int argmax_lowest(const Eigen::MatrixXd& q, Eigen::Index col) {
    int best = 0;
    double best_q = q(0, col);
    for (Eigen::Index a = 1; a < q.rows(); ++a) {
        if (q(a, col) > best_q) {
            best_q = q(a, col);
            best = static_cast<int>(a);
        }
    }
    return best;
}

struct BatchMatrices {
    Eigen::MatrixXd states;
    Eigen::MatrixXd next_states;
    std::vector<int> actions;
    Eigen::VectorXd rewards;
};

BatchMatrices assemble(std::span<const Transition> batch, const QNetwork& net) {
    if (batch.empty()) throw std::invalid_argument("batch must be non-empty");
    const int dim = net.shape().input_dim;
    const auto n = static_cast<Eigen::Index>(batch.size());
    BatchMatrices m;
    m.states.resize(dim, n);
    m.next_states.resize(dim, n);
    m.actions.reserve(batch.size());
    m.rewards.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const Transition& t = batch[static_cast<std::size_t>(i)];
        if (static_cast<int>(t.state.size()) != dim ||
            static_cast<int>(t.next_state.size()) != dim)
            throw std::invalid_argument("transition state dimension does not match the network");
        if (t.action < 0 || t.action >= net.shape().output_dim)
            throw std::invalid_argument("transition action out of range");
        for (int r = 0; r < dim; ++r) {
            m.states(r, i) = t.state[static_cast<std::size_t>(r)];
            m.next_states(r, i) = t.next_state[static_cast<std::size_t>(r)];
        }
        m.actions.push_back(t.action);
        m.rewards(i) = t.reward;
    }
    return m;
}

struct Residuals {
    Eigen::VectorXd values;
    std::vector<int> greedy_next;
    double loss = 0.0;
};

Residuals residuals_from(const BatchMatrices& m, const Eigen::MatrixXd& q_s,
                         const Eigen::MatrixXd& q_n, double gamma) {
    const Eigen::Index n = q_s.cols();
    Residuals r;
    r.values.resize(n);
    r.greedy_next.reserve(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) {
        int a_star = argmax_lowest(q_n, i);
        r.greedy_next.push_back(a_star);
        r.values(i) = q_s(m.actions[static_cast<std::size_t>(i)], i) - m.rewards(i) -
                      gamma * q_n(a_star, i);
    }
    r.loss = r.values.squaredNorm() / static_cast<double>(n);
    return r;
}

} // namespace

int greedy_action(const QNetwork& net, std::span<const double> params,
                  std::span<const double> state) {
    auto q = net.forward(params, state);
    int best = 0;
    for (std::size_t a = 1; a < q.size(); ++a)
        if (q[a] > q[static_cast<std::size_t>(best)]) best = static_cast<int>(a);
    return best;
}

double bellman_loss(const QNetwork& net, std::span<const double> params,
                    std::span<const Transition> batch, double gamma) {
    BatchMatrices m = assemble(batch, net);
    Eigen::MatrixXd q_s = net.forward_batch(params, m.states);
    Eigen::MatrixXd q_n = net.forward_batch(params, m.next_states);
    return residuals_from(m, q_s, q_n, gamma).loss;
}

GradResult grad_with_loss(GradientMode mode, const QNetwork& net, std::span<const double> params,
                          std::span<const Transition> batch, double gamma) {
    BatchMatrices m = assemble(batch, net);
    const auto n = static_cast<Eigen::Index>(batch.size());
    const double scale = 2.0 / static_cast<double>(n);
    const int n_actions = net.shape().output_dim;

    QNetwork::ForwardTrace trace_s = net.forward_trace(params, m.states);
    QNetwork::ForwardTrace trace_n = net.forward_trace(params, m.next_states);
    Residuals res = residuals_from(m, trace_s.out, trace_n.out, gamma);

    GradResult out;
    out.loss = res.loss;

    // Prediction-side term: (2/N) sum res_i * dQ(s_i, a_i)
    auto semi_part = [&]() {
        Eigen::MatrixXd delta = Eigen::MatrixXd::Zero(n_actions, n);
        for (Eigen::Index i = 0; i < n; ++i)
            delta(m.actions[static_cast<std::size_t>(i)], i) = scale * res.values(i);
        return net.backward(params, trace_s, delta);
    };
    // Bootstrap-side term: (2/N) sum res_i * (-gamma) * dQ(s'_i, a*_i)
    auto bootstrap_part = [&]() {
        Eigen::MatrixXd delta = Eigen::MatrixXd::Zero(n_actions, n);
        for (Eigen::Index i = 0; i < n; ++i)
            delta(res.greedy_next[static_cast<std::size_t>(i)], i) =
                -gamma * scale * res.values(i);
        return net.backward(params, trace_n, delta);
    };

    switch (mode) {
        case GradientMode::Semi:
            out.gradient = semi_part();
            break;
        case GradientMode::BackwardSemi:
            out.gradient = bootstrap_part();
            break;
        case GradientMode::True: {
            out.gradient = semi_part();
            ParamVec boot = bootstrap_part();
            for (std::size_t j = 0; j < out.gradient.size(); ++j) out.gradient[j] += boot[j];
            break;
        }
    }
    return out;
}

ParamVec grad(GradientMode mode, const QNetwork& net, std::span<const double> params,
              std::span<const Transition> batch, double gamma) {
    return grad_with_loss(mode, net, params, batch, gamma).gradient;
}

ParamVec fd_gradient(const QNetwork& net, std::span<const double> params,
                     std::span<const Transition> batch, double gamma, double h) {
    if (h <= 0.0) throw std::invalid_argument("fd step size must be positive");
    ParamVec probe(params.begin(), params.end());
    ParamVec g(probe.size(), 0.0);
    for (std::size_t j = 0; j < probe.size(); ++j) {
        const double saved = probe[j];
        probe[j] = saved + h;
        double up = bellman_loss(net, probe, batch, gamma);
        probe[j] = saved - h;
        double down = bellman_loss(net, probe, batch, gamma);
        probe[j] = saved;
        g[j] = (up - down) / (2.0 * h);
    }
    return g;
}

} // namespace qregime
