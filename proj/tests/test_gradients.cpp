#include <doctest.h>

#include <cmath>

#include "qregime/gradients.hpp"
#include "test_helpers.hpp"

using namespace qregime;
using namespace qregime::testing;

namespace {

double inf_norm(const ParamVec& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

ParamVec diff(const ParamVec& a, const ParamVec& b) {
    ParamVec d(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i];
    return d;
}

} // namespace

TEST_CASE("mode names round-trip and reject junk") {
    CHECK(to_string(GradientMode::Semi) == "semi");
    CHECK(to_string(GradientMode::True) == "true");
    CHECK(to_string(GradientMode::BackwardSemi) == "backward-semi");
    CHECK(gradient_mode_from_string("semi") == GradientMode::Semi);
    CHECK(gradient_mode_from_string("true") == GradientMode::True);
    CHECK(gradient_mode_from_string("backward-semi") == GradientMode::BackwardSemi);
    CHECK_THROWS_AS(gradient_mode_from_string("sarsa"), ConfigError);
}

TEST_CASE("greedy action: tie-break and shift invariance") {
    QNetwork net({1, {}, 4});
    std::vector<double> state{0.0};

    auto with_outputs = [&](std::vector<double> outs) {
        ParamVec p(net.param_count(), 0.0); // weights 0, biases = outputs
        for (int a = 0; a < 4; ++a) p[net.bias_offset(0) + static_cast<std::size_t>(a)] = outs[a];
        return p;
    };
    CHECK(greedy_action(net, with_outputs({1, 1, 1, 1}), state) == 0);
    CHECK(greedy_action(net, with_outputs({1, 3, 2, 0}), state) == 1);
    CHECK(greedy_action(net, with_outputs({1 + 5.0, 3 + 5.0, 2 + 5.0, 0 + 5.0}), state) == 1);
}

TEST_CASE("bellman loss: zero network, single transition, gamma = 0") {
    QNetwork net({2, {3}, 2});
    ParamVec zeros(net.param_count(), 0.0);

    std::vector<Transition> zero_reward{{{1, 0}, 0, {0, 1}, 0.0, false},
                                        {{0, 1}, 1, {1, 0}, 0.0, true}};
    CHECK(bellman_loss(net, zeros, zero_reward, 0.95) == 0.0);

    std::vector<Transition> one{{{1, 0}, 0, {0, 1}, -0.01, false}};
    CHECK(bellman_loss(net, zeros, one, 0.95) == doctest::Approx(1e-4).epsilon(1e-12));

    // gamma = 0 reduces to squared regression onto the rewards
    Rng rng(4);
    ParamVec params = init_params(net.shape(), 4);
    auto batch = random_batch(rng, 2, 2, 8);
    double expect = 0.0;
    for (const auto& t : batch) {
        double q = manual_forward(net.shape(), params, t.state)[static_cast<std::size_t>(t.action)];
        expect += (q - t.reward) * (q - t.reward);
    }
    expect /= static_cast<double>(batch.size());
    CHECK(bellman_loss(net, params, batch, 0.0) == doctest::Approx(expect).epsilon(1e-12));

    CHECK_THROWS_AS(bellman_loss(net, zeros, std::vector<Transition>{}, 0.9),
                    std::invalid_argument);
}

TEST_CASE("decomposition: true = semi + backward-semi on random instances") {
    Rng rng(77);
    for (int i = 0; i < 20; ++i) {
        int dim = 2 + rng.uniform_int(4);
        int n_actions = 2 + rng.uniform_int(3);
        NetShape shape{dim, {2 + rng.uniform_int(6), 2 + rng.uniform_int(6)}, n_actions};
        QNetwork net(shape);
        ParamVec params = init_params(shape, rng.next_u64());
        auto batch = random_batch(rng, dim, n_actions, 1 + rng.uniform_int(12));
        double gamma = rng.uniform(0.0, 0.99);

        ParamVec g_true = grad(GradientMode::True, net, params, batch, gamma);
        ParamVec g_semi = grad(GradientMode::Semi, net, params, batch, gamma);
        ParamVec g_back = grad(GradientMode::BackwardSemi, net, params, batch, gamma);

        double err = 0.0;
        for (std::size_t j = 0; j < g_true.size(); ++j)
            err = std::max(err, std::abs(g_true[j] - g_semi[j] - g_back[j]));
        CHECK(err <= 1e-12 * (1.0 + inf_norm(g_true)));
    }
}

TEST_CASE("gamma = 0 collapses the estimators exactly") {
    Rng rng(31);
    for (int i = 0; i < 10; ++i) {
        NetShape shape{3, {5}, 3};
        QNetwork net(shape);
        ParamVec params = init_params(shape, rng.next_u64());
        auto batch = random_batch(rng, 3, 3, 6);

        ParamVec g_semi = grad(GradientMode::Semi, net, params, batch, 0.0);
        ParamVec g_true = grad(GradientMode::True, net, params, batch, 0.0);
        ParamVec g_back = grad(GradientMode::BackwardSemi, net, params, batch, 0.0);
        CHECK(g_semi == g_true);
        for (double g : g_back) CHECK(g == 0.0);
    }
}

TEST_CASE("zero residuals give exactly zero gradients in every mode") {
    QNetwork net({2, {4}, 2});
    ParamVec zeros(net.param_count(), 0.0);
    std::vector<Transition> batch{{{0.3, -0.2}, 0, {0.1, 0.9}, 0.0, false},
                                  {{-1, 1}, 1, {0.5, 0.5}, 0.0, true}};
    for (auto mode : {GradientMode::Semi, GradientMode::True, GradientMode::BackwardSemi}) {
        for (double g : grad(mode, net, zeros, batch, 0.9)) CHECK(g == 0.0);
    }
}

TEST_CASE("hand-worked single-linear-unit instance") {
    // Q(s) = w*s + b, one action. Transition s=1 -> s'=2, r=0, gamma=0.5.
    QNetwork net({1, {}, 1});
    ParamVec params{0.8, 0.1}; // w, b
    std::vector<Transition> batch{{{1.0}, 0, {2.0}, 0.0, false}};
    const double gamma = 0.5;
    const double q_s = 0.8 + 0.1, q_n = 1.6 + 0.1;
    const double res = q_s - gamma * q_n; // 0.9 - 0.85 = 0.05

    CHECK(bellman_loss(net, params, batch, gamma) == doctest::Approx(res * res).epsilon(1e-14));

    auto g_semi = grad(GradientMode::Semi, net, params, batch, gamma);
    CHECK(g_semi[0] == doctest::Approx(2 * res * 1.0).epsilon(1e-12)); // d/dw = s
    CHECK(g_semi[1] == doctest::Approx(2 * res * 1.0).epsilon(1e-12)); // d/db = 1

    auto g_back = grad(GradientMode::BackwardSemi, net, params, batch, gamma);
    CHECK(g_back[0] == doctest::Approx(2 * res * -gamma * 2.0).epsilon(1e-12)); // d/dw = s'
    CHECK(g_back[1] == doctest::Approx(2 * res * -gamma * 1.0).epsilon(1e-12));

    auto g_true = grad(GradientMode::True, net, params, batch, gamma);
    CHECK(g_true[0] == doctest::Approx(2 * res * (1.0 - gamma * 2.0)).epsilon(1e-12));
    CHECK(g_true[1] == doctest::Approx(2 * res * (1.0 - gamma * 1.0)).epsilon(1e-12));
}

TEST_CASE("batch linearity: union gradient is the size-weighted average") {
    NetShape shape{3, {4}, 2};
    QNetwork net(shape);
    ParamVec params = init_params(shape, 55);
    Rng rng(56);
    auto a = random_batch(rng, 3, 2, 5);
    auto b = random_batch(rng, 3, 2, 3);
    std::vector<Transition> both = a;
    both.insert(both.end(), b.begin(), b.end());

    ParamVec ga = grad(GradientMode::True, net, params, a, 0.9);
    ParamVec gb = grad(GradientMode::True, net, params, b, 0.9);
    ParamVec gu = grad(GradientMode::True, net, params, both, 0.9);
    for (std::size_t j = 0; j < gu.size(); ++j) {
        double expect = (5.0 * ga[j] + 3.0 * gb[j]) / 8.0;
        CHECK(gu[j] == doctest::Approx(expect).epsilon(1e-12));
    }
}

TEST_CASE("fd oracle: quadratic sanity and agreement with the true gradient") {
    // single linear unit: loss is quadratic in (w, b), FD is exact up to O(h^2)
    {
        QNetwork net({1, {}, 1});
        ParamVec params{0.8, 0.1};
        std::vector<Transition> batch{{{1.0}, 0, {2.0}, 0.3, false}};
        auto fd = fd_gradient(net, params, batch, 0.5, 1e-5);
        auto g = grad(GradientMode::True, net, params, batch, 0.5);
        CHECK(fd[0] == doctest::Approx(g[0]).epsilon(1e-8));
        CHECK(fd[1] == doctest::Approx(g[1]).epsilon(1e-8));
        CHECK_THROWS_AS(fd_gradient(net, params, batch, 0.5, 0.0), std::invalid_argument);
    }

    // random kink-free instances: fd matches true, not semi
    Rng rng(91);
    int tested = 0;
    for (std::uint64_t attempt = 0; tested < 5 && attempt < 200; ++attempt) {
        NetShape shape{3, {5, 4}, 3};
        QNetwork net(shape);
        ParamVec params = init_params(shape, 900 + attempt);
        auto batch = random_batch(rng, 3, 3, 6);

        std::vector<std::vector<double>> probes;
        for (const auto& t : batch) {
            probes.push_back(t.state);
            probes.push_back(t.next_state);
        }
        if (min_abs_preactivation(shape, params, probes) < 1e-3) continue;
        if (min_argmax_margin(shape, params, probes) < 1e-3) continue;
        ++tested;

        auto fd = fd_gradient(net, params, batch, 0.95, 1e-5);
        auto g_true = grad(GradientMode::True, net, params, batch, 0.95);
        double err = inf_norm(diff(fd, g_true));
        CHECK(err <= 1e-4 * std::max(1.0, inf_norm(g_true)));
    }
    CHECK(tested == 5);
}

TEST_CASE("fd oracle separates semi from the loss gradient") {
    // overlapping state/next-state pairs with nonzero residuals: the
    // bootstrap term cannot be ignored
    QNetwork net({2, {4}, 2});
    ParamVec params = init_params(net.shape(), 17);
    std::vector<Transition> batch{{{1.0, 0.0}, 0, {0.0, 1.0}, 1.0, false},
                                  {{0.0, 1.0}, 1, {1.0, 0.0}, 1.0, false}};
    auto fd = fd_gradient(net, params, batch, 0.95, 1e-5);
    auto g_semi = grad(GradientMode::Semi, net, params, batch, 0.95);
    CHECK(inf_norm(diff(fd, g_semi)) > 1e-6);
}
