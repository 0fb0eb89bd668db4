#include "qregime/trainer.hpp"

#include <cmath>
#include <fstream>

#include <nlohmann/json.hpp>

#include "qregime/evaluation.hpp"

namespace qregime {

namespace {
constexpr double kDivergenceThreshold = 1e12;
// Online runs compute logged loss and regime statistics over the most
// recent slice of the buffer to keep the logging cost bounded.
constexpr std::size_t kOnlineLogWindow = 2000;
} // namespace

DivergenceError::DivergenceError(long step_, double loss_)
    : std::runtime_error("training diverged at step " + std::to_string(step_) +
                         " (loss=" + std::to_string(loss_) + ")"),
      step(step_),
      loss(loss_) {}

std::unique_ptr<Env> make_env_from_config(const ExperimentConfig& config) {
    std::optional<GridLayout> layout;
    if (config.env_name == "gridworld") layout = config.layout;
    return make_env(config.env_name, layout, config.gamma_override);
}

Dataset build_dataset(const Env& env, const ExperimentConfig& config) {
    if (config.dataset_source == "cartesian") {
        const auto* grid = dynamic_cast<const GridWorldEnv*>(&env);
        if (!grid) throw ConfigError("cartesian dataset requires the grid world environment");
        return build_grid_cartesian(grid->layout());
    }
    if (config.dataset_source == "random-play")
        return sample_random_play(env, config.data_seed, config.episodes);
    throw ConfigError("no offline dataset for source '" + config.dataset_source + "'");
}

namespace {

void guard(double loss, long step) {
    if (!std::isfinite(loss) || loss > kDivergenceThreshold) throw DivergenceError(step, loss);
}

NetShape shape_for(const Env& env, const ExperimentConfig& config) {
    return NetShape{env.spec().obs_dim, config.hidden_dims, env.spec().num_actions};
}

RunRecord make_record(const Env& env, const Dataset* regime_data, const QNetwork& net,
                      const ParamVec& params, long step, double loss, double lr,
                      const ExperimentConfig& config) {
    RunRecord rec;
    rec.step = step;
    rec.loss = loss;
    rec.lr = lr;
    rec.accumulated_reward =
        rollout_greedy(env, net, params, config.eval_seed).accumulated_reward;

    if (const auto* grid = dynamic_cast<const GridWorldEnv*>(&env)) {
        rec.state_values = grid_state_values(*grid, net, params);
        RegimeReport rep = analyze_grid_regime(*grid, net, params, config.regime_margin);
        rec.verdict = to_string(rep.verdict);
        rec.v_t = rep.v_t;
        rec.v_pt = rep.v_pt;
        rec.v_o = rep.v_o;
    } else if (regime_data && !regime_data->empty()) {
        RegimeReport rep = analyze_regime(env, *regime_data, net, params, config.regime_margin);
        rec.verdict = to_string(rep.verdict);
        rec.v_t = rep.v_t;
        rec.v_pt = rep.v_pt;
        rec.v_o = rep.v_o;
    }
    return rec;
}

TrainResult run_offline_loop(const Env& env, const Dataset& dataset, const QNetwork& net,
                             ParamVec params, const ExperimentConfig& config,
                             const CheckpointHook& checkpoint_hook) {
    if (dataset.empty()) throw std::invalid_argument("training dataset is empty");
    if (config.log_every < 1) throw ConfigError("log_every must be >= 1");

    TrainResult out;
    AdamState adam = make_adam(params.size());
    const double gamma = env.spec().gamma;
    const std::span<const Transition> batch = dataset.transitions;

    for (long t = 0; t < config.total_steps; ++t) {
        GradResult gr = grad_with_loss(config.mode, net, params, batch, gamma);
        guard(gr.loss, t);
        if (t % config.log_every == 0)
            out.log.records.push_back(make_record(env, &dataset, net, params, t, gr.loss,
                                                  lr_at(config.schedule, t), config));
        if (checkpoint_hook && config.checkpoint_every > 0 && t > 0 &&
            t % config.checkpoint_every == 0)
            checkpoint_hook({net.shape(), config.init_seed, t, config.mode, gamma, params, adam});
        adam_step(adam, params, gr.gradient, lr_at(config.schedule, t));
    }

    out.final_loss = bellman_loss(net, params, batch, gamma);
    guard(out.final_loss, config.total_steps);
    out.log.records.push_back(make_record(env, &dataset, net, params, config.total_steps,
                                          out.final_loss, lr_at(config.schedule, config.total_steps),
                                          config));
    out.final_regime = analyze_regime(env, dataset, net, params, config.regime_margin);
    out.params = std::move(params);
    out.adam = std::move(adam);
    return out;
}

Dataset tail_window(const ReplayBuffer& buffer, const std::string& env_name) {
    Dataset ds;
    ds.env_name = env_name;
    ds.provenance.kind = "online";
    const auto& contents = buffer.contents();
    const std::size_t n = std::min(contents.size(), kOnlineLogWindow);
    for (std::size_t i = contents.size() - n; i < contents.size(); ++i)
        ds.transitions.push_back(contents[i]);
    return ds;
}

} // namespace

TrainResult train_offline(const Env& env, const Dataset& dataset, const ExperimentConfig& config,
                          const CheckpointHook& checkpoint_hook) {
    if (config.total_steps < 1) throw ConfigError("total_steps must be >= 1");
    QNetwork net(shape_for(env, config));
    ParamVec params = init_params(net.shape(), config.init_seed);
    return run_offline_loop(env, dataset, net, std::move(params), config, checkpoint_hook);
}

TrainResult continue_training(const Env& env, const Dataset& dataset, const Checkpoint& ckpt,
                              GradientMode new_mode, long steps, const ExperimentConfig& config,
                              const CheckpointHook& checkpoint_hook) {
    if (steps < 0) throw ConfigError("continuation steps must be >= 0");
    if (ckpt.shape.input_dim != env.spec().obs_dim ||
        ckpt.shape.output_dim != env.spec().num_actions)
        throw std::runtime_error("checkpoint shape does not match the environment");
    if (ckpt.params.size() != param_count(ckpt.shape))
        throw std::runtime_error("checkpoint parameter count does not match its shape");

    ExperimentConfig cont = config;
    cont.mode = new_mode;
    cont.total_steps = steps;
    cont.hidden_dims = ckpt.shape.hidden;
    QNetwork net(ckpt.shape);
    return run_offline_loop(env, dataset, net, ckpt.params, cont, checkpoint_hook);
}

TrainResult train_online(const Env& env, const ExperimentConfig& config,
                         const CheckpointHook& checkpoint_hook) {
    if (config.total_steps < 1) throw ConfigError("total_steps must be >= 1");
    if (config.log_every < 1) throw ConfigError("log_every must be >= 1");
    const OnlineSettings& online = config.online;
    if (online.explore_rate < 0.0 || online.explore_rate > 1.0)
        throw ConfigError("explore_rate must lie in [0, 1]");
    if (online.batch_size < 1) throw ConfigError("online batch_size must be >= 1");
    if (online.buffer_capacity < online.batch_size)
        throw ConfigError("buffer capacity must be >= batch size");

    QNetwork net(shape_for(env, config));
    ParamVec params = init_params(net.shape(), config.init_seed);
    AdamState adam = make_adam(params.size());
    const double gamma = env.spec().gamma;

    Rng rng_env(online.env_seed);
    Rng rng_sample(mix_seed(online.env_seed, 1));
    ReplayBuffer buffer(static_cast<std::size_t>(online.buffer_capacity));

    StateVec state = env.reset(rng_env);
    int episode_steps = 0;
    const int cap = env.spec().max_episode_steps;
    const int n_actions = env.spec().num_actions;

    TrainResult out;
    auto window_loss = [&]() {
        if (buffer.size() == 0) return 0.0;
        Dataset w = tail_window(buffer, env.spec().name);
        return bellman_loss(net, params, w.transitions, gamma);
    };

    for (long t = 0; t < config.total_steps; ++t) {
        if (t % config.log_every == 0) {
            Dataset w = tail_window(buffer, env.spec().name);
            double loss = w.empty() ? 0.0 : bellman_loss(net, params, w.transitions, gamma);
            guard(loss, t);
            out.log.records.push_back(make_record(env, w.empty() ? nullptr : &w, net, params, t,
                                                  loss, lr_at(config.schedule, t), config));
        }

        // epsilon-greedy behavior; the greedy branch is only evaluated when
        // the exploration draw misses, so explore_rate = 1 never consults it
        int action;
        if (rng_env.uniform() < online.explore_rate)
            action = rng_env.uniform_int(n_actions);
        else
            action = greedy_action(net, params, state);

        StepResult r = env.step(state, action);
        buffer.push({state, action, r.next, r.reward, r.terminal});
        ++episode_steps;
        if (r.terminal || episode_steps >= cap) {
            state = env.reset(rng_env);
            episode_steps = 0;
        } else {
            state = std::move(r.next);
        }

        if (buffer.size() >= static_cast<std::size_t>(online.batch_size)) {
            auto batch = buffer.sample(static_cast<std::size_t>(online.batch_size), rng_sample);
            GradResult gr = grad_with_loss(config.mode, net, params, batch, gamma);
            guard(gr.loss, t);
            adam_step(adam, params, gr.gradient, lr_at(config.schedule, t));
        }

        if (checkpoint_hook && config.checkpoint_every > 0 && t > 0 &&
            t % config.checkpoint_every == 0)
            checkpoint_hook({net.shape(), config.init_seed, t, config.mode, gamma, params, adam});
    }

    out.final_loss = window_loss();
    guard(out.final_loss, config.total_steps);
    Dataset w = tail_window(buffer, env.spec().name);
    out.log.records.push_back(make_record(env, w.empty() ? nullptr : &w, net, params,
                                          config.total_steps, out.final_loss,
                                          lr_at(config.schedule, config.total_steps), config));
    out.final_regime = analyze_regime(env, w, net, params, config.regime_margin);
    out.params = std::move(params);
    out.adam = std::move(adam);
    return out;
}

// --- run log serialization ---

namespace {

nlohmann::json record_to_json(const RunRecord& r) {
    nlohmann::json j{{"step", r.step},
                     {"loss", r.loss},
                     {"lr", r.lr},
                     {"reward", r.accumulated_reward},
                     {"verdict", r.verdict}};
    if (!r.state_values.empty()) j["values"] = r.state_values;
    if (r.v_t) j["v_t"] = *r.v_t;
    if (r.v_pt) j["v_pt"] = *r.v_pt;
    if (r.v_o) j["v_o"] = *r.v_o;
    return j;
}

RunRecord record_from_json(const nlohmann::json& j) {
    RunRecord r;
    r.step = j.at("step").get<long>();
    r.loss = j.at("loss").get<double>();
    r.lr = j.at("lr").get<double>();
    r.accumulated_reward = j.at("reward").get<double>();
    r.verdict = j.value("verdict", std::string{});
    if (j.contains("values")) r.state_values = j.at("values").get<std::vector<double>>();
    if (j.contains("v_t")) r.v_t = j.at("v_t").get<double>();
    if (j.contains("v_pt")) r.v_pt = j.at("v_pt").get<double>();
    if (j.contains("v_o")) r.v_o = j.at("v_o").get<double>();
    return r;
}

} // namespace

void save_runlog_jsonl(const std::string& path, const RunLog& log) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open " + path + " for writing");
    for (const auto& rec : log.records) f << record_to_json(rec).dump() << '\n';
    if (!f) throw std::runtime_error("run log write failed for " + path);
}

RunLog load_runlog_jsonl(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open run log " + path);
    RunLog log;
    std::string line;
    while (std::getline(f, line)) {
        if (line.empty()) continue;
        log.records.push_back(record_from_json(nlohmann::json::parse(line)));
    }
    return log;
}

} // namespace qregime
