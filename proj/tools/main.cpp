#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <thread>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "qregime/config.hpp"
#include "qregime/evaluation.hpp"
#include "qregime/oracle.hpp"
#include "qregime/svg.hpp"
#include "qregime/trainer.hpp"

namespace fs = std::filesystem;
using namespace qregime;

namespace {

constexpr const char* kVersion = "0.1.0";

constexpr int kExitConfigError = 2;
constexpr int kExitDivergence = 3;
constexpr int kExitMissingArtifact = 4;

std::string iso_timestamp() {
    std::time_t now = std::time(nullptr);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
    return buf;
}

fs::path resolve_out(const std::string& dir) {
    fs::path p(dir);
    if (p.is_relative()) {
        if (const char* root = std::getenv("QREGIME_OUT_ROOT")) p = fs::path(root) / p;
    }
    fs::create_directories(p);
    return p;
}

void require_file(const fs::path& p, const std::string& what) {
    if (!fs::exists(p)) throw MissingArtifactError(what + " not found: " + p.string());
}

void write_manifest(const fs::path& dir, const std::string& command,
                    const ExperimentConfig& config,
                    const std::vector<std::pair<std::string, fs::path>>& artifacts) {
    nlohmann::json j{
        {"command", command},
        {"version", kVersion},
        {"config_digest", config_digest(config)},
        {"config", nlohmann::json::parse(config_to_json(config))},
        {"created", iso_timestamp()},
    };
    for (const auto& [name, path] : artifacts) {
        require_file(path, name);
        j["artifacts"][name] = path.string();
    }
    std::ofstream f(dir / "manifest.json");
    f << j.dump(2) << '\n';
}

struct CommonOpts {
    std::string config_path;
    std::string out_dir;
    std::string seeds;
    std::string mode;
    long steps = -1;
};

ExperimentConfig effective_config(const CommonOpts& opts) {
    require_file(opts.config_path, "config file");
    ExperimentConfig cfg = load_config(opts.config_path);
    if (!opts.mode.empty()) cfg.mode = gradient_mode_from_string(opts.mode);
    if (opts.steps >= 0) cfg.total_steps = opts.steps;
    if (!opts.out_dir.empty()) cfg.out_dir = opts.out_dir;
    return cfg;
}

Dataset dataset_for(const Env& env, const ExperimentConfig& cfg) {
    if (!cfg.dataset_path.empty()) {
        require_file(cfg.dataset_path, "dataset file");
        Dataset ds = load_dataset_csv(cfg.dataset_path);
        if (ds.env_name != env.spec().name)
            throw ConfigError("dataset file was generated for environment '" + ds.env_name + "'");
        return ds;
    }
    return build_dataset(env, cfg);
}

std::vector<std::uint64_t> parse_seed_list(const std::string& s, std::uint64_t fallback) {
    if (s.empty()) return {fallback};
    std::vector<std::uint64_t> out;
    std::string cur;
    for (char c : s + ",") {
        if (c == ',') {
            if (!cur.empty()) out.push_back(std::stoull(cur));
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    if (out.empty()) throw ConfigError("--seeds parsed to an empty list");
    return out;
}

// --- subcommands ---

int cmd_gen_data(const CommonOpts& opts) {
    ExperimentConfig cfg = effective_config(opts);
    auto env = make_env_from_config(cfg);
    Dataset ds = build_dataset(*env, cfg);
    fs::path dir = resolve_out(cfg.out_dir);
    fs::path csv = dir / "dataset.csv";
    save_dataset_csv(ds, csv.string());
    write_manifest(dir, "gen-data", cfg, {{"dataset", csv}});
    std::cout << "wrote " << csv.string() << " (" << ds.size() << " transitions)\n";
    return 0;
}

void run_one_training(const ExperimentConfig& cfg, const fs::path& dir) {
    auto env = make_env_from_config(cfg);
    CheckpointHook hook = [&](const Checkpoint& c) {
        save_checkpoint((dir / ("ckpt_" + std::to_string(c.step) + ".ckpt")).string(), c);
    };

    TrainResult result;
    if (cfg.dataset_source == "online") {
        result = train_online(*env, cfg, hook);
    } else {
        Dataset ds = dataset_for(*env, cfg);
        result = train_offline(*env, ds, cfg, hook);
    }

    fs::path runlog = dir / "runlog.jsonl";
    save_runlog_jsonl(runlog.string(), result.log);
    fs::path final_ckpt = dir / "final.ckpt";
    save_checkpoint(final_ckpt.string(),
                    {QNetwork({env->spec().obs_dim, cfg.hidden_dims, env->spec().num_actions})
                         .shape(),
                     cfg.init_seed, cfg.total_steps, cfg.mode, env->spec().gamma, result.params,
                     result.adam});
    fs::path report = dir / "regime_report.json";
    {
        std::ofstream f(report);
        f << regime_report_json(result.final_regime) << '\n';
    }
    write_manifest(dir, "train", cfg,
                   {{"runlog", runlog}, {"checkpoint", final_ckpt}, {"regime_report", report}});
    std::cout << "seed " << cfg.init_seed << ": final loss " << result.final_loss << ", verdict "
              << to_string(result.final_regime.verdict) << ", artifacts in " << dir.string()
              << '\n';
}

int cmd_train(const CommonOpts& opts) {
    ExperimentConfig base = effective_config(opts);
    std::vector<std::uint64_t> seeds = parse_seed_list(opts.seeds, base.init_seed);
    fs::path root = resolve_out(base.out_dir);

    if (seeds.size() == 1) {
        base.init_seed = seeds.front();
        run_one_training(base, root);
        return 0;
    }

    // Fan out one worker per seed; each run stays sequential internally.
    std::vector<std::thread> workers;
    std::vector<std::exception_ptr> errors(seeds.size());
    const unsigned max_workers = std::max(1u, std::thread::hardware_concurrency());
    for (std::size_t begin = 0; begin < seeds.size(); begin += max_workers) {
        std::size_t end = std::min(begin + max_workers, seeds.size());
        for (std::size_t i = begin; i < end; ++i) {
            workers.emplace_back([&, i]() {
                try {
                    ExperimentConfig cfg = base;
                    cfg.init_seed = seeds[i];
                    fs::path dir = root / ("seed_" + std::to_string(seeds[i]));
                    fs::create_directories(dir);
                    run_one_training(cfg, dir);
                } catch (...) {
                    errors[i] = std::current_exception();
                }
            });
        }
        for (auto& w : workers) w.join();
        workers.clear();
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
    return 0;
}

int cmd_eval(const CommonOpts& opts, const std::string& checkpoint_path) {
    ExperimentConfig cfg = effective_config(opts);
    require_file(checkpoint_path, "checkpoint");
    Checkpoint ckpt = load_checkpoint(checkpoint_path);
    auto env = make_env_from_config(cfg);
    QNetwork net(ckpt.shape);
    RolloutResult r = rollout_greedy(*env, net, ckpt.params, cfg.eval_seed);
    nlohmann::json j{{"accumulated_reward", r.accumulated_reward},
                     {"steps_taken", r.steps_taken},
                     {"reached_terminal", r.reached_terminal},
                     {"rollout_seed", cfg.eval_seed}};
    std::cout << j.dump(2) << '\n';
    return 0;
}

int cmd_sweep(const CommonOpts& opts, const std::string& checkpoint_path,
              std::vector<double> alphas, int repeats, std::uint64_t sweep_seed) {
    ExperimentConfig cfg = effective_config(opts);
    require_file(checkpoint_path, "checkpoint");
    Checkpoint ckpt = load_checkpoint(checkpoint_path);
    auto env = make_env_from_config(cfg);
    QNetwork net(ckpt.shape);
    if (alphas.empty()) alphas = default_alpha_grid();

    SweepResult sweep =
        robustness_sweep(*env, net, ckpt.params, alphas, repeats, sweep_seed, cfg.eval_seed);

    fs::path dir = resolve_out(cfg.out_dir);
    fs::path csv = dir / "sweep.csv";
    {
        std::ofstream f(csv);
        f << "alpha,mean_reward,ci_half_width,n,insufficient_n\n";
        for (const auto& p : sweep.points)
            f << p.alpha << ',' << p.mean_reward << ',' << p.ci_half_width << ',' << p.n << ','
              << (p.insufficient_n ? 1 : 0) << '\n';
    }
    Series s;
    s.label = to_string(cfg.mode);
    for (const auto& p : sweep.points) {
        s.x.push_back(p.alpha);
        s.y.push_back(p.mean_reward);
        s.band_half.push_back(p.ci_half_width);
    }
    fs::path svg = dir / "sweep.svg";
    write_svg_plot(svg.string(),
                   {"reward vs perturbation scale", "alpha", "accumulated reward", false, {s}});
    write_manifest(dir, "sweep", cfg, {{"sweep_csv", csv}, {"sweep_svg", svg}});
    std::cout << "wrote " << csv.string() << " and " << svg.string() << '\n';
    return 0;
}

int cmd_regime(const CommonOpts& opts, const std::string& checkpoint_path, bool certificate) {
    ExperimentConfig cfg = effective_config(opts);
    auto env = make_env_from_config(cfg);

    RegimeReport report;
    if (certificate) {
        const auto* grid = dynamic_cast<const GridWorldEnv*>(env.get());
        if (!grid) throw ConfigError("--certificate requires a grid world config");
        TabularQ cert = bad_regime_certificate(grid->layout(), env->spec().gamma,
                                               env->spec().step_reward);
        std::vector<double> values;
        for (int s = 0; s < cert.n_states; ++s) values.push_back(cert.state_value(s));
        report = analyze_tabular_regime(*env, values, cfg.regime_margin);
    } else {
        require_file(checkpoint_path, "checkpoint");
        Checkpoint ckpt = load_checkpoint(checkpoint_path);
        QNetwork net(ckpt.shape);
        Dataset ds = dataset_for(*env, cfg);
        report = analyze_regime(*env, ds, net, ckpt.params, cfg.regime_margin);
    }

    fs::path dir = resolve_out(cfg.out_dir);
    fs::path out = dir / "regime_report.json";
    {
        std::ofstream f(out);
        f << regime_report_json(report) << '\n';
    }
    write_manifest(dir, "regime", cfg, {{"regime_report", out}});
    std::cout << regime_report_json(report) << '\n';
    return 0;
}

int cmd_plot(const CommonOpts& opts, const std::vector<std::string>& runlog_paths) {
    ExperimentConfig cfg = effective_config(opts);
    if (runlog_paths.empty()) throw ConfigError("plot needs at least one --runlog");
    std::vector<RunLog> logs;
    for (const auto& p : runlog_paths) {
        require_file(p, "run log");
        logs.push_back(load_runlog_jsonl(p));
    }
    fs::path dir = resolve_out(cfg.out_dir);
    std::vector<std::pair<std::string, fs::path>> artifacts;

    // loss curves, log scale
    {
        PlotSpec spec{"training loss", "step", "loss", true, {}};
        for (std::size_t k = 0; k < logs.size(); ++k) {
            Series s;
            s.label = "run " + std::to_string(k);
            for (const auto& r : logs[k].records) {
                s.x.push_back(static_cast<double>(r.step));
                s.y.push_back(r.loss);
            }
            spec.series.push_back(std::move(s));
        }
        fs::path p = dir / "loss.svg";
        write_svg_plot(p.string(), spec);
        artifacts.emplace_back("loss_svg", p);
    }

    // accumulated reward, mean and CI band across runs
    {
        PlotSpec spec{"greedy accumulated reward", "step", "accumulated reward", false, {}};
        std::vector<std::vector<double>> curves;
        std::vector<double> xs;
        for (const auto& r : logs.front().records) xs.push_back(static_cast<double>(r.step));
        bool aligned = true;
        for (const auto& log : logs) {
            std::vector<double> c;
            for (const auto& r : log.records) c.push_back(r.accumulated_reward);
            if (c.size() != xs.size()) aligned = false;
            curves.push_back(std::move(c));
        }
        if (aligned && curves.size() > 1) {
            MeanBand band = aggregate_trials(curves);
            Series s{"mean of " + std::to_string(curves.size()) + " runs", xs, band.mean,
                     band.half_width};
            spec.series.push_back(std::move(s));
        } else {
            for (std::size_t k = 0; k < logs.size(); ++k)
                spec.series.push_back({"run " + std::to_string(k), xs, curves[k], {}});
        }
        fs::path p = dir / "reward.svg";
        write_svg_plot(p.string(), spec);
        artifacts.emplace_back("reward_svg", p);
    }

    // per-state value dynamics for grid runs
    if (!logs.front().records.empty() && !logs.front().records.front().state_values.empty()) {
        PlotSpec spec{"state value dynamics", "step", "V(s)", false, {}};
        const auto& log = logs.front();
        const std::size_t n_states = log.records.front().state_values.size();
        for (std::size_t s = 0; s < n_states; ++s) {
            Series ser;
            ser.label = "s" + std::to_string(s);
            for (const auto& r : log.records) {
                ser.x.push_back(static_cast<double>(r.step));
                ser.y.push_back(r.state_values[s]);
            }
            spec.series.push_back(std::move(ser));
        }
        fs::path p = dir / "values.svg";
        write_svg_plot(p.string(), spec);
        artifacts.emplace_back("values_svg", p);
    }

    write_manifest(dir, "plot", cfg, artifacts);
    for (const auto& [name, p] : artifacts) std::cout << "wrote " << p.string() << '\n';
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"deep Q-learning gradient estimator lab"};
    app.require_subcommand(1);

    CommonOpts opts;
    std::string checkpoint_path;
    std::vector<double> alphas;
    int repeats = 20;
    std::uint64_t sweep_seed = 2024;
    bool certificate = false;
    std::vector<std::string> runlog_paths;

    auto add_common = [&](CLI::App* sub, bool needs_config = true) {
        auto* c = sub->add_option("--config", opts.config_path, "experiment config (TOML)");
        if (needs_config) c->required();
        sub->add_option("--out", opts.out_dir, "output directory (overrides config)");
        sub->add_option("--mode", opts.mode, "gradient mode: semi | true | backward-semi");
        sub->add_option("--steps", opts.steps, "training step count override");
    };

    auto* gen = app.add_subcommand("gen-data", "sample a dataset and write it as CSV");
    add_common(gen);

    auto* train = app.add_subcommand("train", "train a Q-network per the config");
    add_common(train);
    train->add_option("--seeds", opts.seeds, "comma-separated init seeds; runs fan out in parallel");

    auto* eval = app.add_subcommand("eval", "greedy rollout of a checkpoint");
    add_common(eval);
    eval->add_option("--checkpoint", checkpoint_path, "checkpoint file")->required();

    auto* sweep = app.add_subcommand("sweep", "robustness sweep over perturbation scales");
    add_common(sweep);
    sweep->add_option("--checkpoint", checkpoint_path, "checkpoint file")->required();
    sweep->add_option("--alphas", alphas, "perturbation scales (default: built-in grid)");
    sweep->add_option("--repeats", repeats, "perturbations per alpha");
    sweep->add_option("--sweep-seed", sweep_seed, "seed for perturbation draws");

    auto* regime = app.add_subcommand("regime", "policy-regime audit of a checkpoint");
    add_common(regime);
    regime->add_option("--checkpoint", checkpoint_path, "checkpoint file");
    regime->add_flag("--certificate", certificate,
                     "audit the analytic zero-loss certificate instead of a checkpoint");

    auto* plot = app.add_subcommand("plot", "render run logs as SVG figures");
    add_common(plot);
    plot->add_option("--runlog", runlog_paths, "run log JSONL file(s)");

    try {
        app.parse(argc, argv);
        if (gen->parsed()) return cmd_gen_data(opts);
        if (train->parsed()) return cmd_train(opts);
        if (eval->parsed()) return cmd_eval(opts, checkpoint_path);
        if (sweep->parsed()) return cmd_sweep(opts, checkpoint_path, alphas, repeats, sweep_seed);
        if (regime->parsed()) {
            if (!certificate && checkpoint_path.empty())
                throw ConfigError("regime needs --checkpoint or --certificate");
            return cmd_regime(opts, checkpoint_path, certificate);
        }
        if (plot->parsed()) return cmd_plot(opts, runlog_paths);
        return 0;
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfigError;
    } catch (const DivergenceError& e) {
        std::cerr << "divergence: " << e.what() << '\n';
        return kExitDivergence;
    } catch (const MissingArtifactError& e) {
        std::cerr << "missing artifact: " << e.what() << '\n';
        return kExitMissingArtifact;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
