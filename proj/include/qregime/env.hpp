#pragma once

#include <memory>
#include <optional>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "qregime/rng.hpp"

namespace qregime {

using StateVec = std::vector<double>;

// Goal-seeking tasks end at a desirable terminal state; survival tasks must
// keep away from every terminal state. The distinction drives the regime
// classification rules.
enum class EnvKind { GoalSeeking, Survival };

struct EnvSpec {
    std::string name;
    EnvKind kind = EnvKind::GoalSeeking;
    double gamma = 0.95;
    double step_reward = 0.0;
    double terminal_reward = 0.0; // grid world uses per-terminal-class rewards instead
    int obs_dim = 0;
    int num_actions = 0;
    int max_episode_steps = 0;
};

struct StepResult {
    StateVec next;
    double reward = 0.0;
    bool terminal = false;
};

struct GridLayout {
    int rows = 4;
    int cols = 4;
    int start = 12;
    int goal = 3;
    std::set<int> traps = {5, 6, 9};

    int num_states() const { return rows * cols; }
    bool in_grid(int index) const { return index >= 0 && index < num_states(); }
    bool is_trap(int index) const { return traps.count(index) > 0; }
    bool is_terminal(int index) const { return index == goal || is_trap(index); }
    int num_nonterminal() const;
    void validate() const; // throws std::invalid_argument on a malformed layout
};

GridLayout default_grid_layout();

struct GridStep {
    int next_index;
    double reward;
    bool terminal;
};

// Actions: 0=Up, 1=Down, 2=Left, 3=Right. Moving off the grid keeps the
// current cell but still costs the step penalty. Must not be called on a
// terminal state.
GridStep grid_step(const GridLayout& layout, int state_index, int action);

// Environments are pure value transformers: step/reset never mutate the
// object, so instances can be shared across threads.
class Env {
public:
    virtual ~Env() = default;
    virtual const EnvSpec& spec() const = 0;
    virtual StateVec reset(Rng& rng) const = 0;
    virtual StepResult step(std::span<const double> state, int action) const = 0;
    virtual bool is_terminal_state(std::span<const double> state) const = 0;
};

class GridWorldEnv : public Env {
public:
    explicit GridWorldEnv(GridLayout layout = default_grid_layout(),
                          std::optional<double> gamma_override = std::nullopt);
    const EnvSpec& spec() const override { return spec_; }
    const GridLayout& layout() const { return layout_; }
    StateVec reset(Rng& rng) const override;
    StepResult step(std::span<const double> state, int action) const override;
    bool is_terminal_state(std::span<const double> state) const override;

    StateVec one_hot(int state_index) const;
    int state_index(std::span<const double> state) const;

private:
    GridLayout layout_;
    EnvSpec spec_;
};

class CartPoleEnv : public Env {
public:
    explicit CartPoleEnv(std::optional<double> gamma_override = std::nullopt);
    const EnvSpec& spec() const override { return spec_; }
    StateVec reset(Rng& rng) const override;
    StepResult step(std::span<const double> state, int action) const override;
    bool is_terminal_state(std::span<const double> state) const override;

private:
    EnvSpec spec_;
};

class MountainCarEnv : public Env {
public:
    explicit MountainCarEnv(std::optional<double> gamma_override = std::nullopt);
    const EnvSpec& spec() const override { return spec_; }
    StateVec reset(Rng& rng) const override;
    StepResult step(std::span<const double> state, int action) const override;
    bool is_terminal_state(std::span<const double> state) const override;

private:
    EnvSpec spec_;
};

class AcrobotEnv : public Env {
public:
    explicit AcrobotEnv(std::optional<double> gamma_override = std::nullopt);
    const EnvSpec& spec() const override { return spec_; }
    StateVec reset(Rng& rng) const override;
    StepResult step(std::span<const double> state, int action) const override;
    bool is_terminal_state(std::span<const double> state) const override;

private:
    EnvSpec spec_;
};

// Known names: "gridworld", "cartpole", "mountaincar", "acrobot".
// Throws ConfigError for anything else.
std::unique_ptr<Env> make_env(const std::string& name,
                              std::optional<GridLayout> layout = std::nullopt,
                              std::optional<double> gamma_override = std::nullopt);

StateVec reset_seeded(const Env& env, std::uint64_t seed);

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct MissingArtifactError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace qregime
