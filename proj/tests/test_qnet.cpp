#include <doctest.h>

#include <cmath>

#include "qregime/qnet.hpp"
#include "test_helpers.hpp"

using namespace qregime;
using namespace qregime::testing;

TEST_CASE("parameter count follows the layer layout") {
    CHECK(param_count({3, {4}, 2}) == 3 * 4 + 4 + 4 * 2 + 2);
    CHECK(param_count({16, {64, 64}, 4}) == 16 * 64 + 64 + 64 * 64 + 64 + 64 * 4 + 4);
    CHECK(param_count({1, {}, 1}) == 2);
}

TEST_CASE("zero parameters give zero outputs everywhere") {
    QNetwork net({5, {7, 3}, 4});
    ParamVec zeros(net.param_count(), 0.0);
    Rng rng(3);
    for (int i = 0; i < 10; ++i) {
        auto q = net.forward(zeros, random_state(rng, 5));
        for (double v : q) CHECK(v == 0.0);
    }
}

TEST_CASE("forward matches an independent plain-loop evaluation") {
    NetShape shape{4, {6, 5}, 3};
    QNetwork net(shape);
    ParamVec params = init_params(shape, 11);
    Rng rng(12);
    for (int i = 0; i < 20; ++i) {
        auto s = random_state(rng, 4);
        auto a = net.forward(params, s);
        auto b = manual_forward(shape, params, s);
        REQUIRE(a.size() == b.size());
        for (std::size_t j = 0; j < a.size(); ++j) CHECK(a[j] == doctest::Approx(b[j]).epsilon(1e-14));
    }
}

TEST_CASE("scaling the final layer scales the outputs") {
    NetShape shape{3, {8}, 4};
    QNetwork net(shape);
    ParamVec params = init_params(shape, 5);
    Rng rng(6);
    auto s = random_state(rng, 3);
    auto base = net.forward(params, s);

    const double c = 2.5;
    ParamVec scaled = params;
    for (std::size_t i = net.weight_offset(1); i < net.param_count(); ++i) scaled[i] *= c;
    auto q = net.forward(scaled, s);
    for (std::size_t j = 0; j < q.size(); ++j) CHECK(q[j] == doctest::Approx(c * base[j]).epsilon(1e-12));

    // positive scaling keeps the argmax
    int base_best = 0, scaled_best = 0;
    for (std::size_t j = 1; j < q.size(); ++j) {
        if (base[j] > base[static_cast<std::size_t>(base_best)]) base_best = static_cast<int>(j);
        if (q[j] > q[static_cast<std::size_t>(scaled_best)]) scaled_best = static_cast<int>(j);
    }
    CHECK(base_best == scaled_best);
}

TEST_CASE("init is seed-deterministic with zero biases and sane scale") {
    NetShape shape{16, {64, 64}, 4};
    ParamVec a = init_params(shape, 1);
    ParamVec b = init_params(shape, 1);
    ParamVec c = init_params(shape, 2);
    CHECK(a == b);
    CHECK(a != c);

    QNetwork net(shape);
    for (std::size_t i = net.bias_offset(0); i < net.weight_offset(1); ++i) CHECK(a[i] == 0.0);

    // outputs stay O(1) on one-hot inputs at init
    for (int seed = 0; seed < 10; ++seed) {
        ParamVec p = init_params(shape, static_cast<std::uint64_t>(seed));
        for (int s = 0; s < 10; ++s) {
            std::vector<double> one_hot(16, 0.0);
            one_hot[static_cast<std::size_t>(s)] = 1.0;
            for (double v : net.forward(p, one_hot)) CHECK(std::abs(v) < 10.0);
        }
    }
}

TEST_CASE("backward_selected: zero upstream, additivity, finite differences") {
    NetShape shape{4, {6, 5}, 3};
    QNetwork net(shape);
    Rng rng(21);

    ParamVec params;
    std::vector<double> state;
    // sample away from ReLU kinks so the finite differences are clean
    for (int attempt = 0;; ++attempt) {
        REQUIRE(attempt < 100);
        params = init_params(shape, 100 + static_cast<std::uint64_t>(attempt));
        state = random_state(rng, 4);
        if (min_abs_preactivation(shape, params, {state}) > 1e-3) break;
    }

    auto zero = net.backward_selected(params, state, 1, 0.0);
    for (double g : zero) CHECK(g == 0.0);

    auto g1 = net.backward_selected(params, state, 2, 0.7);
    auto g2 = net.backward_selected(params, state, 2, 1.3);
    auto g3 = net.backward_selected(params, state, 2, 2.0);
    for (std::size_t i = 0; i < g1.size(); ++i)
        CHECK(g1[i] + g2[i] == doctest::Approx(g3[i]).epsilon(1e-12));

    // central differences of Q(state, action) per parameter
    const double h = 1e-5;
    const int action = 0;
    auto grad = net.backward_selected(params, state, action, 1.0);
    ParamVec probe = params;
    for (std::size_t j = 0; j < params.size(); ++j) {
        probe[j] = params[j] + h;
        double up = manual_forward(shape, probe, state)[action];
        probe[j] = params[j] - h;
        double down = manual_forward(shape, probe, state)[action];
        probe[j] = params[j];
        double fd = (up - down) / (2 * h);
        CHECK(grad[j] == doctest::Approx(fd).epsilon(1e-4));
    }
}

TEST_CASE("forward rejects dimension mismatches") {
    QNetwork net({4, {3}, 2});
    ParamVec params(net.param_count(), 0.0);
    CHECK_THROWS_AS(net.forward(params, std::vector<double>{1.0, 2.0}), std::invalid_argument);
    CHECK_THROWS_AS(net.forward(ParamVec(3, 0.0), std::vector<double>(4, 0.0)),
                    std::invalid_argument);
    CHECK_THROWS_AS(net.backward_selected(params, std::vector<double>(4, 0.0), 5, 1.0),
                    std::invalid_argument);
}

TEST_CASE("perturb: identity at zero, reproducibility, unit variance") {
    NetShape shape{50, {64, 64}, 10}; // ~11k parameters
    ParamVec params = init_params(shape, 8);

    CHECK(perturb(params, 0.0, 123) == params);
    CHECK(perturb(params, 0.1, 123) == perturb(params, 0.1, 123));
    CHECK(perturb(params, 0.1, 123) != perturb(params, 0.1, 124));
    CHECK_THROWS_AS(perturb(params, -0.5, 1), std::invalid_argument);

    // pooled draws across seeds pass a law-of-large-numbers variance check
    const double alpha = 0.25;
    double sum = 0.0, sum_sq = 0.0;
    std::size_t n = 0;
    for (std::uint64_t seed = 0; seed < 12; ++seed) {
        ParamVec p = perturb(params, alpha, seed);
        for (std::size_t i = 0; i < p.size(); ++i) {
            double z = (p[i] - params[i]) / alpha;
            sum += z;
            sum_sq += z * z;
            ++n;
        }
    }
    REQUIRE(n >= 100000);
    double mean = sum / static_cast<double>(n);
    double var = sum_sq / static_cast<double>(n) - mean * mean;
    CHECK(std::abs(var - 1.0) < 0.05);
    CHECK(std::abs(mean) < 0.02);
}
