#pragma once

#include <cstdint>
#include <deque>
#include <string>
#include <vector>

#include "qregime/env.hpp"

namespace qregime {

struct Transition {
    StateVec state;
    int action = 0;
    StateVec next_state;
    double reward = 0.0;
    bool next_is_terminal = false;
};

struct DatasetProvenance {
    std::string kind;            // "cartesian" | "random-play" | "online"
    std::uint64_t seed = 0;      // random-play only
    int episodes = 0;            // random-play only
};

struct Dataset {
    std::vector<Transition> transitions;
    std::string env_name;
    DatasetProvenance provenance;

    std::size_t size() const { return transitions.size(); }
    bool empty() const { return transitions.empty(); }
};

// One transition per (non-terminal state, action) pair, ordered by state
// index then action.
Dataset build_grid_cartesian(const GridLayout& layout);

// Uniform-random play for `episodes` episodes; the seed drives both the
// initial states and the action draws. Episodes stop at a terminal state or
// at the step cap; hitting the cap does not mark the last transition
// terminal.
Dataset sample_random_play(const Env& env, std::uint64_t seed, int episodes);

// Replays every transition through the environment and throws
// std::runtime_error on the first mismatch. Used by tests.
void validate_dataset(const Env& env, const Dataset& dataset);

class ReplayBuffer {
public:
    explicit ReplayBuffer(std::size_t capacity);
    std::size_t capacity() const { return capacity_; }
    std::size_t size() const { return contents_.size(); }
    void push(Transition t);
    // Uniform with replacement; throws std::runtime_error when empty.
    std::vector<Transition> sample(std::size_t batch_size, Rng& rng) const;
    const std::deque<Transition>& contents() const { return contents_; }

private:
    std::size_t capacity_;
    std::deque<Transition> contents_;
};

// CSV schema: s0..s{d-1},action,ns0..ns{d-1},reward,terminal with a header
// row. Doubles use shortest round-trip formatting so reload is bit-exact.
void save_dataset_csv(const Dataset& dataset, const std::string& path);
Dataset load_dataset_csv(const std::string& path);

} // namespace qregime
