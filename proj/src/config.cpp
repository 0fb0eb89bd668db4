#include "qregime/config.hpp"

#include <cstdio>

#include <nlohmann/json.hpp>

namespace qregime {

ExperimentConfig config_from_toml(const TomlTable& t) {
    ExperimentConfig c;
    c.name = t.get_string("experiment.name", "experiment");
    c.env_name = t.get_string("experiment.env");
    if (t.contains("experiment.gamma")) c.gamma_override = t.get_double("experiment.gamma");
    c.mode = gradient_mode_from_string(t.get_string("experiment.mode", "semi"));
    c.total_steps = t.get_int("experiment.total_steps", 30000);
    c.log_every = static_cast<int>(t.get_int("experiment.log_every", 100));
    c.init_seed = t.get_u64("experiment.init_seed", 1);
    if (t.contains("experiment.regime_margin"))
        c.regime_margin = t.get_double("experiment.regime_margin");

    c.dataset_source = t.get_string("dataset.source", "cartesian");
    if (c.dataset_source != "cartesian" && c.dataset_source != "random-play" &&
        c.dataset_source != "online")
        throw ConfigError("dataset.source must be cartesian | random-play | online");
    c.data_seed = t.get_u64("dataset.seed", 100);
    c.episodes = static_cast<int>(t.get_int("dataset.episodes", 100));
    c.dataset_path = t.get_string("dataset.path", "");

    if (t.contains("network.hidden")) {
        c.hidden_dims.clear();
        for (auto v : t.get_int_array("network.hidden")) c.hidden_dims.push_back(static_cast<int>(v));
        if (c.hidden_dims.empty()) throw ConfigError("network.hidden must not be empty");
    }

    c.schedule.lr0 = t.get_double("schedule.lr0", 1e-4);
    c.schedule.decay = t.get_double("schedule.decay", 0.85);
    c.schedule.period = static_cast<int>(t.get_int("schedule.period", 3000));
    if (c.schedule.decay <= 0.0 || c.schedule.decay > 1.0)
        throw ConfigError("schedule.decay must lie in (0, 1]");
    if (c.schedule.period < 1) throw ConfigError("schedule.period must be >= 1");

    if (t.contains("gridworld.rows")) {
        c.layout.rows = static_cast<int>(t.get_int("gridworld.rows"));
        c.layout.cols = static_cast<int>(t.get_int("gridworld.cols"));
        c.layout.start = static_cast<int>(t.get_int("gridworld.start"));
        c.layout.goal = static_cast<int>(t.get_int("gridworld.goal"));
        c.layout.traps.clear();
        if (t.contains("gridworld.traps"))
            for (auto v : t.get_int_array("gridworld.traps"))
                c.layout.traps.insert(static_cast<int>(v));
        c.layout.validate();
    }

    c.online.buffer_capacity = static_cast<int>(t.get_int("online.buffer_capacity", 30000));
    c.online.batch_size = static_cast<int>(t.get_int("online.batch_size", 16));
    c.online.explore_rate = t.get_double("online.explore_rate", 0.2);
    c.online.env_seed = t.get_u64("online.env_seed", 0);

    c.eval_seed = t.get_u64("eval.rollout_seed", 12345);
    c.out_dir = t.get_string("output.dir", "runs/" + c.name);
    c.checkpoint_every = static_cast<int>(t.get_int("output.checkpoint_every", 0));
    return c;
}

ExperimentConfig load_config(const std::string& path) {
    return config_from_toml(TomlTable::parse_file(path));
}

std::string config_to_json(const ExperimentConfig& c) {
    nlohmann::json j{
        {"name", c.name},
        {"env", c.env_name},
        {"mode", to_string(c.mode)},
        {"total_steps", c.total_steps},
        {"log_every", c.log_every},
        {"init_seed", c.init_seed},
        {"dataset",
         {{"source", c.dataset_source},
          {"seed", c.data_seed},
          {"episodes", c.episodes},
          {"path", c.dataset_path}}},
        {"hidden", c.hidden_dims},
        {"schedule",
         {{"lr0", c.schedule.lr0}, {"decay", c.schedule.decay}, {"period", c.schedule.period}}},
        {"online",
         {{"buffer_capacity", c.online.buffer_capacity},
          {"batch_size", c.online.batch_size},
          {"explore_rate", c.online.explore_rate},
          {"env_seed", c.online.env_seed}}},
        {"eval_seed", c.eval_seed},
        {"out_dir", c.out_dir},
        {"checkpoint_every", c.checkpoint_every},
    };
    if (c.gamma_override) j["gamma"] = *c.gamma_override;
    if (c.regime_margin) j["regime_margin"] = *c.regime_margin;
    if (c.env_name == "gridworld")
        j["layout"] = {{"rows", c.layout.rows},
                       {"cols", c.layout.cols},
                       {"start", c.layout.start},
                       {"goal", c.layout.goal},
                       {"traps", std::vector<int>(c.layout.traps.begin(), c.layout.traps.end())}};
    return j.dump();
}

std::string config_digest(const ExperimentConfig& config) {
    const std::string canon = config_to_json(config);
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (unsigned char ch : canon) {
        h ^= ch;
        h *= 0x100000001B3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

} // namespace qregime
