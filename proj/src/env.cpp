#include "qregime/env.hpp"

#include <array>
#include <cmath>
#include <stdexcept>

namespace qregime {

namespace {
constexpr double kPi = 3.14159265358979323846;

double clip(double x, double lo, double hi) {
    return x < lo ? lo : (x > hi ? hi : x);
}

double wrap_angle(double x) {
    while (x > kPi) x -= 2.0 * kPi;
    while (x < -kPi) x += 2.0 * kPi;
    return x;
}
} // namespace

int GridLayout::num_nonterminal() const {
    int n = 0;
    for (int s = 0; s < num_states(); ++s)
        if (!is_terminal(s)) ++n;
    return n;
}

void GridLayout::validate() const {
    if (rows < 1 || cols < 1)
        throw std::invalid_argument("grid layout: rows and cols must be positive");
    if (!in_grid(start)) throw std::invalid_argument("grid layout: start outside the grid");
    // goal = -1 builds a goal-free grid (useful for cyclic test layouts)
    if (goal != -1 && !in_grid(goal))
        throw std::invalid_argument("grid layout: goal outside the grid");
    for (int t : traps)
        if (!in_grid(t)) throw std::invalid_argument("grid layout: trap outside the grid");
    if (goal != -1 && is_trap(goal))
        throw std::invalid_argument("grid layout: goal cannot be a trap");
    if (is_terminal(start))
        throw std::invalid_argument("grid layout: start must be non-terminal");
}

GridLayout default_grid_layout() { return GridLayout{}; }

GridStep grid_step(const GridLayout& layout, int state_index, int action) {
    if (!layout.in_grid(state_index))
        throw std::invalid_argument("grid_step: state index outside the grid");
    if (layout.is_terminal(state_index))
        throw std::invalid_argument("grid_step: called on a terminal state");
    if (action < 0 || action >= 4)
        throw std::invalid_argument("grid_step: action must be in [0, 4)");

    int r = state_index / layout.cols;
    int c = state_index % layout.cols;
    switch (action) {
        case 0: r -= 1; break; // Up
        case 1: r += 1; break; // Down
        case 2: c -= 1; break; // Left
        case 3: c += 1; break; // Right
    }
    int next = state_index;
    if (r >= 0 && r < layout.rows && c >= 0 && c < layout.cols)
        next = r * layout.cols + c;

    if (next == layout.goal) return {next, 1.0, true};
    if (layout.is_trap(next)) return {next, -1.0, true};
    return {next, -0.01, false};
}

// --- Grid World ---

GridWorldEnv::GridWorldEnv(GridLayout layout, std::optional<double> gamma_override)
    : layout_(std::move(layout)) {
    layout_.validate();
    spec_.name = "gridworld";
    spec_.kind = EnvKind::GoalSeeking;
    spec_.gamma = gamma_override.value_or(0.95);
    spec_.step_reward = -0.01;
    spec_.terminal_reward = 1.0; // goal; traps carry -1
    spec_.obs_dim = layout_.num_states();
    spec_.num_actions = 4;
    spec_.max_episode_steps = 100;
}

StateVec GridWorldEnv::one_hot(int state_index) const {
    StateVec v(static_cast<std::size_t>(layout_.num_states()), 0.0);
    v[static_cast<std::size_t>(state_index)] = 1.0;
    return v;
}

int GridWorldEnv::state_index(std::span<const double> state) const {
    if (static_cast<int>(state.size()) != layout_.num_states())
        throw std::invalid_argument("gridworld: state dimension mismatch");
    for (std::size_t i = 0; i < state.size(); ++i)
        if (state[i] == 1.0) return static_cast<int>(i);
    throw std::invalid_argument("gridworld: state is not a one-hot vector");
}

StateVec GridWorldEnv::reset(Rng&) const { return one_hot(layout_.start); }

StepResult GridWorldEnv::step(std::span<const double> state, int action) const {
    GridStep s = grid_step(layout_, state_index(state), action);
    return {one_hot(s.next_index), s.reward, s.terminal};
}

bool GridWorldEnv::is_terminal_state(std::span<const double> state) const {
    return layout_.is_terminal(state_index(state));
}

// --- Cart Pole ---
// Pole-on-cart constants from the classic control suite: gravity 9.8,
// cart mass 1.0, pole mass 0.1, half-length 0.5, force 10, Euler dt 0.02.

namespace cartpole {
constexpr double kGravity = 9.8;
constexpr double kMassCart = 1.0;
constexpr double kMassPole = 0.1;
constexpr double kTotalMass = kMassCart + kMassPole;
constexpr double kLength = 0.5;
constexpr double kPoleMassLength = kMassPole * kLength;
constexpr double kForceMag = 10.0;
constexpr double kTau = 0.02;
constexpr double kThetaThreshold = 12.0 * 2.0 * kPi / 360.0;
constexpr double kXThreshold = 2.4;

bool failed(double x, double theta) {
    return x < -kXThreshold || x > kXThreshold ||
           theta < -kThetaThreshold || theta > kThetaThreshold;
}
} // namespace cartpole

CartPoleEnv::CartPoleEnv(std::optional<double> gamma_override) {
    spec_.name = "cartpole";
    spec_.kind = EnvKind::Survival;
    spec_.gamma = gamma_override.value_or(0.87);
    spec_.step_reward = 1.0;
    spec_.terminal_reward = -5.0;
    spec_.obs_dim = 4;
    spec_.num_actions = 2;
    spec_.max_episode_steps = 200;
}

StateVec CartPoleEnv::reset(Rng& rng) const {
    StateVec s(4);
    for (auto& v : s) v = rng.uniform(-0.05, 0.05);
    return s;
}

StepResult CartPoleEnv::step(std::span<const double> state, int action) const {
    using namespace cartpole;
    if (state.size() != 4)
        throw std::invalid_argument("cartpole: state must have 4 components");
    if (action < 0 || action >= 2)
        throw std::invalid_argument("cartpole: action must be 0 or 1");
    double x = state[0], x_dot = state[1], theta = state[2], theta_dot = state[3];
    if (failed(x, theta))
        throw std::invalid_argument("cartpole: step called on a terminal state");

    double force = action == 1 ? kForceMag : -kForceMag;
    double cos_t = std::cos(theta);
    double sin_t = std::sin(theta);
    double temp = (force + kPoleMassLength * theta_dot * theta_dot * sin_t) / kTotalMass;
    double theta_acc = (kGravity * sin_t - cos_t * temp) /
                       (kLength * (4.0 / 3.0 - kMassPole * cos_t * cos_t / kTotalMass));
    double x_acc = temp - kPoleMassLength * theta_acc * cos_t / kTotalMass;

    x += kTau * x_dot;
    x_dot += kTau * x_acc;
    theta += kTau * theta_dot;
    theta_dot += kTau * theta_acc;

    bool done = failed(x, theta);
    return {{x, x_dot, theta, theta_dot}, done ? spec_.terminal_reward : spec_.step_reward, done};
}

bool CartPoleEnv::is_terminal_state(std::span<const double> state) const {
    return cartpole::failed(state[0], state[2]);
}

// --- Mountain Car ---

namespace mountaincar {
constexpr double kMinPosition = -1.2;
constexpr double kMaxPosition = 0.6;
constexpr double kMaxSpeed = 0.07;
constexpr double kGoalPosition = 0.5;
constexpr double kForce = 0.001;
constexpr double kGravity = 0.0025;
} // namespace mountaincar

MountainCarEnv::MountainCarEnv(std::optional<double> gamma_override) {
    spec_.name = "mountaincar";
    spec_.kind = EnvKind::GoalSeeking;
    spec_.gamma = gamma_override.value_or(0.93);
    spec_.step_reward = -1.0;
    spec_.terminal_reward = 1.0;
    spec_.obs_dim = 2;
    spec_.num_actions = 3;
    spec_.max_episode_steps = 500;
}

StateVec MountainCarEnv::reset(Rng& rng) const {
    return {rng.uniform(-0.6, -0.4), 0.0};
}

StepResult MountainCarEnv::step(std::span<const double> state, int action) const {
    using namespace mountaincar;
    if (state.size() != 2)
        throw std::invalid_argument("mountaincar: state must have 2 components");
    if (action < 0 || action >= 3)
        throw std::invalid_argument("mountaincar: action must be in [0, 3)");
    double position = state[0], velocity = state[1];
    if (position >= kGoalPosition)
        throw std::invalid_argument("mountaincar: step called on a terminal state");

    velocity += (action - 1) * kForce + std::cos(3.0 * position) * (-kGravity);
    velocity = clip(velocity, -kMaxSpeed, kMaxSpeed);
    position += velocity;
    position = clip(position, kMinPosition, kMaxPosition);
    if (position == kMinPosition && velocity < 0.0) velocity = 0.0;

    bool done = position >= kGoalPosition;
    return {{position, velocity}, done ? spec_.terminal_reward : spec_.step_reward, done};
}

bool MountainCarEnv::is_terminal_state(std::span<const double> state) const {
    return state[0] >= mountaincar::kGoalPosition;
}

// --- Acrobot ---
// Two-link pendulum with the standard "book" dynamics, one RK4 step of 0.2 s
// per action. Observation is [cos t1, sin t1, cos t2, sin t2, w1, w2].

namespace acrobot {
constexpr double kDt = 0.2;
constexpr double kLink1Length = 1.0;
constexpr double kLink1Mass = 1.0;
constexpr double kLink2Mass = 1.0;
constexpr double kLink1Com = 0.5;
constexpr double kLink2Com = 0.5;
constexpr double kLinkMoi = 1.0;
constexpr double kGravity = 9.8;
constexpr double kMaxVel1 = 4.0 * kPi;
constexpr double kMaxVel2 = 9.0 * kPi;

struct Deriv {
    double dtheta1, dtheta2, ddtheta1, ddtheta2;
};

Deriv dynamics(const std::array<double, 4>& s, double torque) {
    const double m1 = kLink1Mass, m2 = kLink2Mass;
    const double l1 = kLink1Length;
    const double lc1 = kLink1Com, lc2 = kLink2Com;
    const double i1 = kLinkMoi, i2 = kLinkMoi;
    const double g = kGravity;
    const double theta1 = s[0], theta2 = s[1], dtheta1 = s[2], dtheta2 = s[3];

    double d1 = m1 * lc1 * lc1 +
                m2 * (l1 * l1 + lc2 * lc2 + 2.0 * l1 * lc2 * std::cos(theta2)) + i1 + i2;
    double d2 = m2 * (lc2 * lc2 + l1 * lc2 * std::cos(theta2)) + i2;
    double phi2 = m2 * lc2 * g * std::cos(theta1 + theta2 - kPi / 2.0);
    double phi1 = -m2 * l1 * lc2 * dtheta2 * dtheta2 * std::sin(theta2) -
                  2.0 * m2 * l1 * lc2 * dtheta2 * dtheta1 * std::sin(theta2) +
                  (m1 * lc1 + m2 * l1) * g * std::cos(theta1 - kPi / 2.0) + phi2;
    double ddtheta2 =
        (torque + d2 / d1 * phi1 - m2 * l1 * lc2 * dtheta1 * dtheta1 * std::sin(theta2) - phi2) /
        (m2 * lc2 * lc2 + i2 - d2 * d2 / d1);
    double ddtheta1 = -(d2 * ddtheta2 + phi1) / d1;
    return {dtheta1, dtheta2, ddtheta1, ddtheta2};
}

std::array<double, 4> rk4_step(const std::array<double, 4>& s, double torque) {
    auto add = [](const std::array<double, 4>& a, const Deriv& k, double h) {
        return std::array<double, 4>{a[0] + h * k.dtheta1, a[1] + h * k.dtheta2,
                                     a[2] + h * k.ddtheta1, a[3] + h * k.ddtheta2};
    };
    Deriv k1 = dynamics(s, torque);
    Deriv k2 = dynamics(add(s, k1, kDt / 2.0), torque);
    Deriv k3 = dynamics(add(s, k2, kDt / 2.0), torque);
    Deriv k4 = dynamics(add(s, k3, kDt), torque);
    std::array<double, 4> out;
    const double h6 = kDt / 6.0;
    out[0] = s[0] + h6 * (k1.dtheta1 + 2.0 * k2.dtheta1 + 2.0 * k3.dtheta1 + k4.dtheta1);
    out[1] = s[1] + h6 * (k1.dtheta2 + 2.0 * k2.dtheta2 + 2.0 * k3.dtheta2 + k4.dtheta2);
    out[2] = s[2] + h6 * (k1.ddtheta1 + 2.0 * k2.ddtheta1 + 2.0 * k3.ddtheta1 + k4.ddtheta1);
    out[3] = s[3] + h6 * (k1.ddtheta2 + 2.0 * k2.ddtheta2 + 2.0 * k3.ddtheta2 + k4.ddtheta2);
    return out;
}

std::array<double, 4> decode(std::span<const double> obs) {
    return {std::atan2(obs[1], obs[0]), std::atan2(obs[3], obs[2]), obs[4], obs[5]};
}

StateVec encode(const std::array<double, 4>& s) {
    return {std::cos(s[0]), std::sin(s[0]), std::cos(s[1]), std::sin(s[1]), s[2], s[3]};
}

bool reached(const std::array<double, 4>& s) {
    return -std::cos(s[0]) - std::cos(s[1] + s[0]) > 1.0;
}
} // namespace acrobot

AcrobotEnv::AcrobotEnv(std::optional<double> gamma_override) {
    spec_.name = "acrobot";
    spec_.kind = EnvKind::GoalSeeking;
    spec_.gamma = gamma_override.value_or(0.98);
    spec_.step_reward = -1.0;
    spec_.terminal_reward = 0.0;
    spec_.obs_dim = 6;
    spec_.num_actions = 3;
    spec_.max_episode_steps = 500;
}

StateVec AcrobotEnv::reset(Rng& rng) const {
    std::array<double, 4> s;
    for (auto& v : s) v = rng.uniform(-0.1, 0.1);
    return acrobot::encode(s);
}

StepResult AcrobotEnv::step(std::span<const double> state, int action) const {
    using namespace acrobot;
    if (state.size() != 6)
        throw std::invalid_argument("acrobot: state must have 6 components");
    if (action < 0 || action >= 3)
        throw std::invalid_argument("acrobot: action must be in [0, 3)");
    auto s = decode(state);
    if (reached(s))
        throw std::invalid_argument("acrobot: step called on a terminal state");

    auto n = rk4_step(s, static_cast<double>(action - 1));
    n[0] = wrap_angle(n[0]);
    n[1] = wrap_angle(n[1]);
    n[2] = clip(n[2], -kMaxVel1, kMaxVel1);
    n[3] = clip(n[3], -kMaxVel2, kMaxVel2);

    bool done = reached(n);
    return {encode(n), done ? spec_.terminal_reward : spec_.step_reward, done};
}

bool AcrobotEnv::is_terminal_state(std::span<const double> state) const {
    return acrobot::reached(acrobot::decode(state));
}

// --- factory ---

std::unique_ptr<Env> make_env(const std::string& name, std::optional<GridLayout> layout,
                              std::optional<double> gamma_override) {
    if (name == "gridworld")
        return std::make_unique<GridWorldEnv>(layout.value_or(default_grid_layout()),
                                              gamma_override);
    if (name == "cartpole") return std::make_unique<CartPoleEnv>(gamma_override);
    if (name == "mountaincar") return std::make_unique<MountainCarEnv>(gamma_override);
    if (name == "acrobot") return std::make_unique<AcrobotEnv>(gamma_override);
    throw ConfigError("unknown environment: " + name);
}

StateVec reset_seeded(const Env& env, std::uint64_t seed) {
    Rng rng(seed);
    return env.reset(rng);
}

} // namespace qregime
