#include "qregime/regime.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "qregime/oracle.hpp"

namespace qregime {

std::string to_string(Verdict v) {
    switch (v) {
        case Verdict::Good: return "good";
        case Verdict::Bad: return "bad";
        case Verdict::Indeterminate: return "indeterminate";
    }
    throw std::logic_error("unreachable verdict");
}

double regime_threshold(double step_reward, double gamma) {
    if (gamma >= 1.0) throw std::invalid_argument("regime threshold requires gamma < 1");
    return step_reward / (1.0 - gamma);
}

double default_margin(double threshold) { return 0.05 * std::abs(threshold) + 0.01; }

namespace {

Eigen::MatrixXd to_columns(const std::vector<const StateVec*>& states) {
    const auto dim = static_cast<Eigen::Index>(states.front()->size());
    Eigen::MatrixXd m(dim, static_cast<Eigen::Index>(states.size()));
    for (std::size_t i = 0; i < states.size(); ++i)
        for (Eigen::Index r = 0; r < dim; ++r)
            m(r, static_cast<Eigen::Index>(i)) = (*states[i])[static_cast<std::size_t>(r)];
    return m;
}

// One batched forward per call; returns max-over-action value per state and,
// optionally, the lowest-index greedy action.
void batch_eval(const QNetwork& net, std::span<const double> params,
                const std::vector<const StateVec*>& states, std::vector<double>* values,
                std::vector<int>* greedy) {
    if (states.empty()) return;
    Eigen::MatrixXd q = net.forward_batch(params, to_columns(states));
    for (Eigen::Index i = 0; i < q.cols(); ++i) {
        int best = 0;
        for (Eigen::Index a = 1; a < q.rows(); ++a)
            if (q(a, i) > q(best, i)) best = static_cast<int>(a);
        if (values) values->push_back(q(best, i));
        if (greedy) greedy->push_back(best);
    }
}

std::vector<double> batch_values(const QNetwork& net, std::span<const double> params,
                                 const std::vector<StateVec>& states) {
    std::vector<const StateVec*> ptrs;
    ptrs.reserve(states.size());
    for (const auto& s : states) ptrs.push_back(&s);
    std::vector<double> out;
    out.reserve(states.size());
    batch_eval(net, params, ptrs, &out, nullptr);
    return out;
}

std::optional<double> mean_of(const std::vector<double>& xs) {
    if (xs.empty()) return std::nullopt;
    double sum = 0.0;
    for (double x : xs) sum += x;
    return sum / static_cast<double>(xs.size());
}

} // namespace

StatePartition partition_states(const Dataset& dataset, const QNetwork& net,
                                std::span<const double> params) {
    if (dataset.empty()) throw std::invalid_argument("partition_states: dataset is empty");

    std::vector<const StateVec*> origins;
    origins.reserve(dataset.size());
    for (const auto& t : dataset.transitions) origins.push_back(&t.state);
    std::vector<int> greedy;
    greedy.reserve(dataset.size());
    batch_eval(net, params, origins, nullptr, &greedy);

    StatePartition out;
    if (dataset.env_name == "gridworld") {
        // Unique states by exact vector equality.
        std::map<StateVec, bool> terminal_next;
        for (const auto& t : dataset.transitions)
            if (t.next_is_terminal) terminal_next.emplace(t.next_state, true);
        for (auto& [s, _] : terminal_next) out.terminal.push_back(s);

        std::map<StateVec, bool> origin_pre;
        for (std::size_t i = 0; i < dataset.size(); ++i) {
            const Transition& t = dataset.transitions[i];
            auto [it, inserted] = origin_pre.emplace(t.state, false);
            if (t.next_is_terminal && t.action == greedy[i]) it->second = true;
        }
        for (auto& [s, pre] : origin_pre) (pre ? out.pre_terminal : out.other).push_back(s);
    } else {
        // Continuous states keep one entry per dataset row.
        for (std::size_t i = 0; i < dataset.size(); ++i) {
            const Transition& t = dataset.transitions[i];
            if (t.next_is_terminal) out.terminal.push_back(t.next_state);
            bool pre = t.next_is_terminal && t.action == greedy[i];
            (pre ? out.pre_terminal : out.other).push_back(t.state);
        }
    }
    return out;
}

PartitionValues mean_partition_values(const StatePartition& partition, const QNetwork& net,
                                      std::span<const double> params) {
    return {mean_of(batch_values(net, params, partition.terminal)),
            mean_of(batch_values(net, params, partition.pre_terminal)),
            mean_of(batch_values(net, params, partition.other))};
}

Verdict classify(EnvKind kind, std::span<const double> nonterminal_values,
                 std::optional<double> v_pt, std::optional<double> v_o, double threshold,
                 double margin) {
    if (kind == EnvKind::GoalSeeking) {
        if (nonterminal_values.empty()) return Verdict::Indeterminate;
        bool all_above = true, all_at = true;
        for (double v : nonterminal_values) {
            if (!(v > threshold + margin)) all_above = false;
            if (std::abs(v - threshold) > margin) all_at = false;
        }
        if (all_above) return Verdict::Good;
        if (all_at) return Verdict::Bad;
        return Verdict::Indeterminate;
    }
    // Survival
    if (!v_pt.has_value()) return Verdict::Indeterminate;
    if (*v_pt >= threshold) return Verdict::Bad;
    if (*v_pt < threshold - margin && v_o.has_value() && std::abs(*v_o - threshold) <= margin)
        return Verdict::Good;
    return Verdict::Indeterminate;
}

ExceedanceCounts count_rollout_exceedances(const Dataset& dataset, const QNetwork& net,
                                           std::span<const double> params, double threshold) {
    std::vector<StateVec> pre, term;
    for (const auto& t : dataset.transitions) {
        if (!t.next_is_terminal) continue;
        pre.push_back(t.state);
        term.push_back(t.next_state);
    }
    ExceedanceCounts out;
    out.episodes = static_cast<int>(pre.size());
    for (double v : batch_values(net, params, pre))
        if (v > threshold) ++out.pre_terminal_above;
    for (double v : batch_values(net, params, term))
        if (v > threshold) ++out.terminal_above;
    return out;
}

std::vector<double> grid_state_values(const GridWorldEnv& env, const QNetwork& net,
                                      std::span<const double> params) {
    std::vector<StateVec> states;
    states.reserve(static_cast<std::size_t>(env.layout().num_states()));
    for (int s = 0; s < env.layout().num_states(); ++s) states.push_back(env.one_hot(s));
    return batch_values(net, params, states);
}

namespace {

RegimeReport classify_grid(const GridWorldEnv& grid, const std::vector<double>& all_values,
                           const std::vector<int>& greedy, std::optional<double> margin) {
    const GridLayout& layout = grid.layout();
    RegimeReport rep;
    rep.kind = EnvKind::GoalSeeking;
    rep.threshold = regime_threshold(grid.spec().step_reward, grid.spec().gamma);
    rep.margin = margin.value_or(default_margin(rep.threshold));

    std::vector<double> t_vals, pt_vals, o_vals, classified;
    for (int s = 0; s < layout.num_states(); ++s) {
        double v = all_values[static_cast<std::size_t>(s)];
        if (layout.is_terminal(s)) {
            t_vals.push_back(v);
            continue;
        }
        GridStep step = grid_step(layout, s, greedy[static_cast<std::size_t>(s)]);
        (step.terminal ? pt_vals : o_vals).push_back(v);
        if (s != layout.start) classified.push_back(v);
    }
    rep.v_t = mean_of(t_vals);
    rep.v_pt = mean_of(pt_vals);
    rep.v_o = mean_of(o_vals);
    rep.verdict =
        classify(EnvKind::GoalSeeking, classified, rep.v_pt, rep.v_o, rep.threshold, rep.margin);
    return rep;
}

} // namespace

RegimeReport analyze_grid_regime(const GridWorldEnv& grid, const QNetwork& net,
                                 std::span<const double> params, std::optional<double> margin) {
    std::vector<StateVec> states;
    for (int s = 0; s < grid.layout().num_states(); ++s) states.push_back(grid.one_hot(s));
    std::vector<const StateVec*> ptrs;
    for (const auto& s : states) ptrs.push_back(&s);
    std::vector<double> values;
    std::vector<int> greedy;
    batch_eval(net, params, ptrs, &values, &greedy);
    return classify_grid(grid, values, greedy, margin);
}

RegimeReport analyze_regime(const Env& env, const Dataset& dataset, const QNetwork& net,
                            std::span<const double> params, std::optional<double> margin) {
    RegimeReport rep;
    if (const auto* grid = dynamic_cast<const GridWorldEnv*>(&env)) {
        rep = analyze_grid_regime(*grid, net, params, margin);
        // Partition means follow the dataset definition, not the layout.
        StatePartition partition = partition_states(dataset, net, params);
        PartitionValues pv = mean_partition_values(partition, net, params);
        rep.v_t = pv.v_t;
        rep.v_pt = pv.v_pt;
        rep.v_o = pv.v_o;
    } else {
        rep.kind = env.spec().kind;
        rep.threshold = regime_threshold(env.spec().step_reward, env.spec().gamma);
        rep.margin = margin.value_or(default_margin(rep.threshold));

        StatePartition partition = partition_states(dataset, net, params);
        PartitionValues pv = mean_partition_values(partition, net, params);
        rep.v_t = pv.v_t;
        rep.v_pt = pv.v_pt;
        rep.v_o = pv.v_o;

        std::vector<double> values = batch_values(net, params, partition.pre_terminal);
        for (double v : batch_values(net, params, partition.other)) values.push_back(v);
        rep.verdict = classify(rep.kind, values, rep.v_pt, rep.v_o, rep.threshold, rep.margin);
    }
    if (dataset.provenance.kind == "random-play")
        rep.exceedances = count_rollout_exceedances(dataset, net, params, rep.threshold);
    return rep;
}

std::string regime_report_json(const RegimeReport& report) {
    nlohmann::json j{
        {"env_kind", report.kind == EnvKind::GoalSeeking ? "goal-seeking" : "survival"},
        {"threshold", report.threshold},
        {"margin", report.margin},
        {"verdict", to_string(report.verdict)},
        {"v_t", report.v_t ? nlohmann::json(*report.v_t) : nlohmann::json(nullptr)},
        {"v_pt", report.v_pt ? nlohmann::json(*report.v_pt) : nlohmann::json(nullptr)},
        {"v_o", report.v_o ? nlohmann::json(*report.v_o) : nlohmann::json(nullptr)},
    };
    if (report.exceedances) {
        j["exceedances"] = {{"episodes", report.exceedances->episodes},
                            {"pre_terminal_above", report.exceedances->pre_terminal_above},
                            {"terminal_above", report.exceedances->terminal_above}};
    }
    return j.dump(2);
}

RegimeReport analyze_tabular_regime(const Env& env, const std::vector<double>& state_values,
                                    std::optional<double> margin) {
    const auto* grid = dynamic_cast<const GridWorldEnv*>(&env);
    if (!grid) throw std::invalid_argument("tabular regime analysis requires the grid world");
    const GridLayout& layout = grid->layout();
    if (static_cast<int>(state_values.size()) != layout.num_states())
        throw std::invalid_argument("state value table does not match the layout");

    RegimeReport rep;
    rep.kind = EnvKind::GoalSeeking;
    rep.threshold = regime_threshold(env.spec().step_reward, env.spec().gamma);
    rep.margin = margin.value_or(default_margin(rep.threshold));

    std::vector<double> values;
    double t_sum = 0.0;
    int t_count = 0;
    for (int s = 0; s < layout.num_states(); ++s) {
        if (layout.is_terminal(s)) {
            t_sum += state_values[static_cast<std::size_t>(s)];
            ++t_count;
        } else if (s != layout.start) {
            values.push_back(state_values[static_cast<std::size_t>(s)]);
        }
    }
    if (t_count > 0) rep.v_t = t_sum / t_count;
    rep.verdict = classify(rep.kind, values, std::nullopt, std::nullopt, rep.threshold, rep.margin);
    return rep;
}

} // namespace qregime
