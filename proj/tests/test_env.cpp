#include <doctest.h>

#include <cmath>

#include "qregime/env.hpp"

using namespace qregime;

TEST_CASE("grid step: boundary, goal, trap and step rewards") {
    GridLayout layout = default_grid_layout();

    // state 1 sits in the top row; Up bounces back and still costs a step
    GridStep up = grid_step(layout, 1, 0);
    CHECK(up.next_index == 1);
    CHECK(up.reward == -0.01);
    CHECK_FALSE(up.terminal);

    // state 2 is adjacent-left of the goal (index 3)
    GridStep goal = grid_step(layout, 2, 3);
    CHECK(goal.next_index == 3);
    CHECK(goal.reward == 1.0);
    CHECK(goal.terminal);

    // state 4 is adjacent-left of trap 5
    GridStep trap = grid_step(layout, 4, 3);
    CHECK(trap.next_index == 5);
    CHECK(trap.reward == -1.0);
    CHECK(trap.terminal);
}

TEST_CASE("grid step rejects terminal states and bad actions") {
    GridLayout layout = default_grid_layout();
    CHECK_THROWS_AS(grid_step(layout, 3, 0), std::invalid_argument);  // goal
    CHECK_THROWS_AS(grid_step(layout, 5, 0), std::invalid_argument);  // trap
    CHECK_THROWS_AS(grid_step(layout, 99, 0), std::invalid_argument); // off grid
    CHECK_THROWS_AS(grid_step(layout, 0, 4), std::invalid_argument);
}

TEST_CASE("grid closure and reward partition over all pairs") {
    GridLayout layout = default_grid_layout();
    for (int s = 0; s < layout.num_states(); ++s) {
        if (layout.is_terminal(s)) continue;
        for (int a = 0; a < 4; ++a) {
            GridStep r = grid_step(layout, s, a);
            CHECK(layout.in_grid(r.next_index));
            bool known = r.reward == -0.01 || r.reward == 1.0 || r.reward == -1.0;
            CHECK(known);
            CHECK(r.terminal == layout.is_terminal(r.next_index));
        }
    }
}

TEST_CASE("grid world env: one-hot reset and encoding round trip") {
    GridWorldEnv env;
    StateVec s = reset_seeded(env, 7);
    CHECK(s.size() == 16);
    CHECK(env.state_index(s) == 12);
    double sum = 0;
    for (double v : s) sum += v;
    CHECK(sum == 1.0);

    // step matches grid_step through the encoding
    StepResult r = env.step(s, 0); // Up from 12 -> 8
    CHECK(env.state_index(r.next) == 8);
    CHECK(r.reward == -0.01);
}

TEST_CASE("layout validation rejects malformed grids") {
    GridLayout bad = default_grid_layout();
    bad.start = 3; // the goal
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = default_grid_layout();
    bad.traps.insert(3);
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = default_grid_layout();
    bad.goal = 16;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("cartpole: upright rest state survives and earns +1") {
    CartPoleEnv env;
    StateVec rest{0, 0, 0, 0};
    for (int a = 0; a < 2; ++a) {
        StepResult r = env.step(rest, a);
        CHECK(r.reward == 1.0);
        CHECK_FALSE(r.terminal);
    }
}

TEST_CASE("cartpole: seeded reset is reproducible and in bounds") {
    CartPoleEnv env;
    StateVec a = reset_seeded(env, 100);
    StateVec b = reset_seeded(env, 100);
    CHECK(a == b);
    for (double v : a) {
        CHECK(v >= -0.05);
        CHECK(v < 0.05);
    }
    CHECK(reset_seeded(env, 100) != reset_seeded(env, 101));
}

TEST_CASE("cartpole: leaving the angle envelope terminates with -5") {
    CartPoleEnv env;
    // large angular velocity pushes theta past 12 degrees in one 0.02s step
    StateVec s{0, 0, 0.19, 12.0};
    StepResult r = env.step(s, 0);
    CHECK(r.terminal);
    CHECK(r.reward == -5.0);
    CHECK(env.is_terminal_state(r.next));
}

TEST_CASE("mountain car: goal crossing terminates with +1") {
    MountainCarEnv env;
    StateVec s{0.49, 0.07};
    StepResult r = env.step(s, 2);
    CHECK(r.next[0] >= 0.5);
    CHECK(r.terminal);
    CHECK(r.reward == 1.0);
}

TEST_CASE("mountain car: ordinary step costs -1 and clips speed") {
    MountainCarEnv env;
    StepResult r = env.step(StateVec{-0.5, 0.0}, 2);
    CHECK(r.reward == -1.0);
    CHECK_FALSE(r.terminal);
    CHECK(std::abs(r.next[1]) <= 0.07);
    StateVec init = reset_seeded(env, 42);
    CHECK(init[0] >= -0.6);
    CHECK(init[0] < -0.4);
    CHECK(init[1] == 0.0);
}

TEST_CASE("acrobot: observation stays on the unit circles") {
    AcrobotEnv env;
    StateVec s = reset_seeded(env, 9);
    CHECK(s.size() == 6);
    for (int t = 0; t < 50; ++t) {
        StepResult r = env.step(s, t % 3);
        CHECK(std::abs(r.next[0] * r.next[0] + r.next[1] * r.next[1] - 1.0) < 1e-12);
        CHECK(std::abs(r.next[2] * r.next[2] + r.next[3] * r.next[3] - 1.0) < 1e-12);
        CHECK(std::abs(r.next[4]) <= 4 * 3.14159265358979324);
        CHECK(std::abs(r.next[5]) <= 9 * 3.14159265358979324);
        if (r.terminal) {
            CHECK(r.reward == 0.0);
            break;
        }
        CHECK(r.reward == -1.0);
        s = r.next;
    }
}

TEST_CASE("acrobot: raised configuration is terminal") {
    AcrobotEnv env;
    // both links straight up: -cos(pi) - cos(pi) = 2 > 1
    StateVec up{std::cos(3.14159265358979), std::sin(3.14159265358979), 1.0, 0.0, 0.0, 0.0};
    CHECK(env.is_terminal_state(up));
    CHECK_THROWS_AS(env.step(up, 0), std::invalid_argument);
}

TEST_CASE("classic control steps are deterministic") {
    for (const char* name : {"cartpole", "mountaincar", "acrobot"}) {
        auto env = make_env(name);
        StateVec s = reset_seeded(*env, 5);
        StepResult a = env->step(s, 0);
        StepResult b = env->step(s, 0);
        CHECK(a.next == b.next);
        CHECK(a.reward == b.reward);
        CHECK(a.terminal == b.terminal);
    }
}

TEST_CASE("env factory: names, defaults, and the unknown-name error") {
    CHECK(make_env("gridworld")->spec().gamma == 0.95);
    CHECK(make_env("cartpole")->spec().gamma == 0.87);
    CHECK(make_env("mountaincar")->spec().gamma == 0.93);
    CHECK(make_env("acrobot")->spec().gamma == 0.98);
    CHECK(make_env("cartpole")->spec().kind == EnvKind::Survival);
    CHECK(make_env("mountaincar")->spec().kind == EnvKind::GoalSeeking);
    CHECK(make_env("cartpole", std::nullopt, 0.8)->spec().gamma == 0.8);
    CHECK_THROWS_AS(make_env("lunarlander"), ConfigError);
}
