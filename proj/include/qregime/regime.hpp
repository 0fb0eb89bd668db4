#pragma once

#include <optional>
#include <vector>

#include "qregime/dataset.hpp"
#include "qregime/gradients.hpp"
#include "qregime/qnet.hpp"

namespace qregime {

enum class Verdict { Good, Bad, Indeterminate };
std::string to_string(Verdict v);

// States drawn from a dataset, split into terminal states (seen as terminal
// next-states), pre-terminal states (their greedy action lands in a terminal
// state) and the rest. Grid World states are deduplicated by exact vector
// equality; continuous states are kept per dataset row.
struct StatePartition {
    std::vector<StateVec> terminal;
    std::vector<StateVec> pre_terminal;
    std::vector<StateVec> other;
};

StatePartition partition_states(const Dataset& dataset, const QNetwork& net,
                                std::span<const double> params);

// r_s / (1 - gamma): the fixed-point state value that separates the good and
// bad regimes.
double regime_threshold(double step_reward, double gamma);

double default_margin(double threshold);

struct PartitionValues {
    std::optional<double> v_t, v_pt, v_o;
};
PartitionValues mean_partition_values(const StatePartition& partition, const QNetwork& net,
                                      std::span<const double> params);

// Goal-seeking: Good when every supplied value clears threshold + margin,
// Bad when all of them sit inside the margin band around the threshold.
// Survival: Good when V_pT is well below the threshold and V_O sits at it;
// Bad when V_pT reaches the threshold.
Verdict classify(EnvKind kind, std::span<const double> nonterminal_values,
                 std::optional<double> v_pt, std::optional<double> v_o, double threshold,
                 double margin);

// Episode-level diagnostic: how many plays in the dataset end with a
// pre-terminal / terminal state valued above the threshold.
struct ExceedanceCounts {
    int episodes = 0;
    int pre_terminal_above = 0;
    int terminal_above = 0;
};
ExceedanceCounts count_rollout_exceedances(const Dataset& dataset, const QNetwork& net,
                                           std::span<const double> params, double threshold);

struct RegimeReport {
    EnvKind kind = EnvKind::GoalSeeking;
    double threshold = 0.0;
    double margin = 0.0;
    std::optional<double> v_t, v_pt, v_o;
    Verdict verdict = Verdict::Indeterminate;
    std::optional<ExceedanceCounts> exceedances; // random-play datasets only
};

// Full analysis of a trained Q-function against a dataset. For the grid the
// classified values are the layout's non-terminal states except the start;
// for continuous environments they are the dataset's origin-state values.
RegimeReport analyze_regime(const Env& env, const Dataset& dataset, const QNetwork& net,
                            std::span<const double> params,
                            std::optional<double> margin = std::nullopt);

// Dataset-free grid analysis: the partition comes straight from the layout
// and the network's greedy actions. Matches analyze_regime on the Cartesian
// dataset and is cheap enough for per-log-step use.
RegimeReport analyze_grid_regime(const GridWorldEnv& grid, const QNetwork& net,
                                 std::span<const double> params,
                                 std::optional<double> margin = std::nullopt);

// Same classification applied to an exact tabular Q on the grid.
RegimeReport analyze_tabular_regime(const Env& env, const std::vector<double>& state_values,
                                    std::optional<double> margin = std::nullopt);

// max_a Q(s, a) for every grid state index, in index order.
std::vector<double> grid_state_values(const GridWorldEnv& env, const QNetwork& net,
                                      std::span<const double> params);

// JSON document for report files and the CLI.
std::string regime_report_json(const RegimeReport& report);

} // namespace qregime
