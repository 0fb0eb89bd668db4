#include <doctest.h>

#include <cstdio>
#include <set>

#include "qregime/dataset.hpp"

using namespace qregime;

TEST_CASE("cartesian dataset covers every non-terminal pair exactly once") {
    Dataset ds = build_grid_cartesian(default_grid_layout());
    CHECK(ds.size() == 48); // 12 non-terminal states x 4 actions
    GridWorldEnv env;
    std::set<std::pair<int, int>> seen;
    for (const auto& t : ds.transitions) {
        auto key = std::make_pair(env.state_index(t.state), t.action);
        CHECK(seen.insert(key).second); // no duplicates
    }
    CHECK(seen.size() == 48);
    validate_dataset(env, ds);
}

TEST_CASE("cartesian dataset on a 2x2 grid with one goal") {
    GridLayout small;
    small.rows = 2;
    small.cols = 2;
    small.start = 0;
    small.goal = 3;
    small.traps = {};
    Dataset ds = build_grid_cartesian(small);
    CHECK(ds.size() == 12); // 3 non-terminal states x 4 actions
}

TEST_CASE("random play is seed-deterministic and starts off non-terminal states") {
    auto env = make_env("cartpole");
    Dataset a = sample_random_play(*env, 100, 5);
    Dataset b = sample_random_play(*env, 100, 5);
    CHECK(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a.transitions[i].state == b.transitions[i].state);
        CHECK(a.transitions[i].action == b.transitions[i].action);
        CHECK(a.transitions[i].reward == b.transitions[i].reward);
    }
    for (const auto& t : a.transitions) CHECK_FALSE(env->is_terminal_state(t.state));
    validate_dataset(*env, a);
    CHECK_THROWS_AS(sample_random_play(*env, 1, 0), std::invalid_argument);
}

TEST_CASE("episode cap truncation is not marked terminal") {
    auto env = make_env("mountaincar");
    // random play almost never reaches the flag; episodes run into the cap
    Dataset ds = sample_random_play(*env, 550, 1);
    CHECK(ds.size() == 500);
    CHECK_FALSE(ds.transitions.back().next_is_terminal);
}

TEST_CASE("cartpole random play matches the documented scale") {
    auto env = make_env("cartpole");
    Dataset ds = sample_random_play(*env, 100, 100);
    // episode lengths hover around 20 random steps; the reference protocol
    // collected 2184 transitions from 100 episodes
    CHECK(ds.size() > 1000);
    CHECK(ds.size() < 5000);
    int terminals = 0;
    for (const auto& t : ds.transitions)
        if (t.next_is_terminal) ++terminals;
    CHECK(terminals == 100); // every random cartpole episode ends by falling
}

TEST_CASE("replay buffer: fifo bound, sampling, and errors") {
    ReplayBuffer buf(3);
    Rng rng(1);
    CHECK_THROWS_AS(buf.sample(1, rng), std::runtime_error);

    auto tr = [](double tag) {
        return Transition{{tag}, 0, {tag + 0.5}, 0.0, false};
    };
    for (int i = 0; i < 4; ++i) buf.push(tr(i));
    CHECK(buf.size() == 3);
    CHECK(buf.contents().front().state[0] == 1.0); // oldest (0) evicted

    ReplayBuffer single(1);
    single.push(tr(42));
    auto got = single.sample(1, rng);
    CHECK(got.size() == 1);
    CHECK(got[0].state[0] == 42.0);

    // fixed seed stream -> identical batch sequences
    Rng r1(9), r2(9);
    auto s1 = buf.sample(8, r1);
    auto s2 = buf.sample(8, r2);
    for (std::size_t i = 0; i < s1.size(); ++i) CHECK(s1[i].state == s2[i].state);
}

TEST_CASE("dataset csv round-trips bit-exactly") {
    auto env = make_env("cartpole");
    Dataset ds = sample_random_play(*env, 31, 3);
    const std::string path = "test_dataset_roundtrip.csv";
    save_dataset_csv(ds, path);
    Dataset back = load_dataset_csv(path);

    CHECK(back.env_name == ds.env_name);
    CHECK(back.provenance.kind == "random-play");
    CHECK(back.provenance.seed == 31);
    CHECK(back.provenance.episodes == 3);
    REQUIRE(back.size() == ds.size());
    for (std::size_t i = 0; i < ds.size(); ++i) {
        CHECK(back.transitions[i].state == ds.transitions[i].state);
        CHECK(back.transitions[i].next_state == ds.transitions[i].next_state);
        CHECK(back.transitions[i].reward == ds.transitions[i].reward);
        CHECK(back.transitions[i].action == ds.transitions[i].action);
        CHECK(back.transitions[i].next_is_terminal == ds.transitions[i].next_is_terminal);
    }
    std::remove(path.c_str());
}
