#pragma once

#include <functional>
#include <optional>
#include <string>

#include "qregime/checkpoint.hpp"
#include "qregime/dataset.hpp"
#include "qregime/gradients.hpp"
#include "qregime/optimizer.hpp"
#include "qregime/regime.hpp"

namespace qregime {

struct OnlineSettings {
    int buffer_capacity = 30000;
    int batch_size = 16;
    double explore_rate = 0.2;
    std::uint64_t env_seed = 0;
};

// Full declarative description of one run. Every random draw is controlled
// by a seed recorded here, so a config pins the run bit for bit.
struct ExperimentConfig {
    std::string name = "experiment";
    std::string env_name = "gridworld";
    std::optional<double> gamma_override;
    GridLayout layout = default_grid_layout();

    std::string dataset_source = "cartesian"; // cartesian | random-play | online
    std::uint64_t data_seed = 100;
    int episodes = 100;
    std::string dataset_path; // optional pre-built CSV (gen-data output)

    std::vector<int> hidden_dims = {64, 64};
    std::uint64_t init_seed = 1;

    GradientMode mode = GradientMode::Semi;
    Schedule schedule{1e-4, 0.85, 3000};
    long total_steps = 30000;
    int log_every = 100;
    std::uint64_t eval_seed = 12345;
    std::optional<double> regime_margin;

    OnlineSettings online;

    std::string out_dir = "runs/experiment";
    int checkpoint_every = 0; // 0 = final checkpoint only
};

std::unique_ptr<Env> make_env_from_config(const ExperimentConfig& config);
Dataset build_dataset(const Env& env, const ExperimentConfig& config);

struct RunRecord {
    long step = 0;
    double loss = 0.0;
    double lr = 0.0;
    double accumulated_reward = 0.0;
    std::string verdict;
    std::vector<double> state_values; // grid world: V(s) per state index
    std::optional<double> v_t, v_pt, v_o;
};

struct RunLog {
    std::vector<RunRecord> records;
};

void save_runlog_jsonl(const std::string& path, const RunLog& log);
RunLog load_runlog_jsonl(const std::string& path);

struct TrainResult {
    ParamVec params;
    AdamState adam;
    RunLog log;
    double final_loss = 0.0;
    RegimeReport final_regime;
};

// Raised when the loss passes 1e12 or stops being finite.
struct DivergenceError : std::runtime_error {
    DivergenceError(long step_, double loss_);
    long step;
    double loss;
};

using CheckpointHook = std::function<void(const Checkpoint&)>;

// Full-batch gradient descent on a fixed dataset; exactly
// config.total_steps updates of the configured mode.
TrainResult train_offline(const Env& env, const Dataset& dataset, const ExperimentConfig& config,
                          const CheckpointHook& checkpoint_hook = nullptr);

// Epsilon-greedy interaction with one mini-batch update per environment step
// once the buffer holds a full batch.
TrainResult train_online(const Env& env, const ExperimentConfig& config,
                         const CheckpointHook& checkpoint_hook = nullptr);

// Resumes from a checkpoint's parameters with a fresh optimizer and a
// restarted schedule, training `steps` further updates under `new_mode`.
TrainResult continue_training(const Env& env, const Dataset& dataset, const Checkpoint& ckpt,
                              GradientMode new_mode, long steps, const ExperimentConfig& config,
                              const CheckpointHook& checkpoint_hook = nullptr);

} // namespace qregime
