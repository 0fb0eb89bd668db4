#include "qregime/dataset.hpp"

#include <charconv>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace qregime {

Dataset build_grid_cartesian(const GridLayout& layout) {
    layout.validate();
    GridWorldEnv env(layout);
    Dataset ds;
    ds.env_name = "gridworld";
    ds.provenance.kind = "cartesian";
    for (int s = 0; s < layout.num_states(); ++s) {
        if (layout.is_terminal(s)) continue;
        for (int a = 0; a < 4; ++a) {
            GridStep step = grid_step(layout, s, a);
            ds.transitions.push_back(
                {env.one_hot(s), a, env.one_hot(step.next_index), step.reward, step.terminal});
        }
    }
    return ds;
}

Dataset sample_random_play(const Env& env, std::uint64_t seed, int episodes) {
    if (episodes < 1) throw std::invalid_argument("sample_random_play: episodes must be >= 1");
    Rng rng(seed);
    Dataset ds;
    ds.env_name = env.spec().name;
    ds.provenance = {"random-play", seed, episodes};
    const int cap = env.spec().max_episode_steps;
    const int n_actions = env.spec().num_actions;
    for (int ep = 0; ep < episodes; ++ep) {
        StateVec state = env.reset(rng);
        for (int t = 0; t < cap; ++t) {
            int action = rng.uniform_int(n_actions);
            StepResult r = env.step(state, action);
            ds.transitions.push_back({state, action, r.next, r.reward, r.terminal});
            if (r.terminal) break;
            state = std::move(r.next);
        }
    }
    return ds;
}

void validate_dataset(const Env& env, const Dataset& dataset) {
    for (std::size_t i = 0; i < dataset.transitions.size(); ++i) {
        const Transition& t = dataset.transitions[i];
        StepResult r = env.step(t.state, t.action);
        if (r.next != t.next_state || r.reward != t.reward || r.terminal != t.next_is_terminal) {
            throw std::runtime_error("dataset row " + std::to_string(i) +
                                     " does not replay through the environment");
        }
    }
}

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
    if (capacity == 0) throw std::invalid_argument("replay buffer capacity must be positive");
}

void ReplayBuffer::push(Transition t) {
    if (contents_.size() == capacity_) contents_.pop_front();
    contents_.push_back(std::move(t));
}

std::vector<Transition> ReplayBuffer::sample(std::size_t batch_size, Rng& rng) const {
    if (contents_.empty()) throw std::runtime_error("cannot sample from an empty replay buffer");
    std::vector<Transition> out;
    out.reserve(batch_size);
    for (std::size_t i = 0; i < batch_size; ++i)
        out.push_back(contents_[static_cast<std::size_t>(
            rng.uniform_int(static_cast<int>(contents_.size())))]);
    return out;
}

namespace {

void append_double(std::string& out, double v) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    out.append(buf, res.ptr);
}

double parse_double(const std::string& tok) {
    double v = 0.0;
    auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (res.ec != std::errc{} || res.ptr != tok.data() + tok.size())
        throw std::runtime_error("dataset csv: bad numeric field '" + tok + "'");
    return v;
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            out.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(ch);
        }
    }
    out.push_back(cur);
    return out;
}

} // namespace

void save_dataset_csv(const Dataset& dataset, const std::string& path) {
    if (dataset.empty()) throw std::invalid_argument("refusing to save an empty dataset");
    const std::size_t dim = dataset.transitions.front().state.size();
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open " + path + " for writing");

    std::string header = "# env=" + dataset.env_name + " kind=" + dataset.provenance.kind;
    if (dataset.provenance.kind == "random-play")
        header += " seed=" + std::to_string(dataset.provenance.seed) +
                  " episodes=" + std::to_string(dataset.provenance.episodes);
    f << header << '\n';
    for (std::size_t i = 0; i < dim; ++i) f << 's' << i << ',';
    f << "action,";
    for (std::size_t i = 0; i < dim; ++i) f << "ns" << i << ',';
    f << "reward,terminal\n";

    std::string line;
    for (const Transition& t : dataset.transitions) {
        line.clear();
        for (double v : t.state) {
            append_double(line, v);
            line.push_back(',');
        }
        line += std::to_string(t.action);
        line.push_back(',');
        for (double v : t.next_state) {
            append_double(line, v);
            line.push_back(',');
        }
        append_double(line, t.reward);
        line.push_back(',');
        line.push_back(t.next_is_terminal ? '1' : '0');
        line.push_back('\n');
        f << line;
    }
    if (!f) throw std::runtime_error("write failed for " + path);
}

Dataset load_dataset_csv(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open dataset file " + path);
    Dataset ds;

    std::string line;
    if (!std::getline(f, line) || line.rfind("# env=", 0) != 0)
        throw std::runtime_error("dataset csv: missing provenance header");
    {
        std::istringstream ss(line.substr(2));
        std::string field;
        while (ss >> field) {
            auto eq = field.find('=');
            if (eq == std::string::npos) continue;
            std::string key = field.substr(0, eq), val = field.substr(eq + 1);
            if (key == "env") ds.env_name = val;
            else if (key == "kind") ds.provenance.kind = val;
            else if (key == "seed") ds.provenance.seed = std::stoull(val);
            else if (key == "episodes") ds.provenance.episodes = std::stoi(val);
        }
    }
    if (!std::getline(f, line)) throw std::runtime_error("dataset csv: missing column header");
    const std::size_t n_cols = split_csv(line).size();
    if (n_cols < 5 || (n_cols - 3) % 2 != 0)
        throw std::runtime_error("dataset csv: malformed column header");
    const std::size_t dim = (n_cols - 3) / 2;

    while (std::getline(f, line)) {
        if (line.empty()) continue;
        auto tok = split_csv(line);
        if (tok.size() != n_cols)
            throw std::runtime_error("dataset csv: row has wrong number of fields");
        Transition t;
        t.state.reserve(dim);
        t.next_state.reserve(dim);
        std::size_t k = 0;
        for (std::size_t i = 0; i < dim; ++i) t.state.push_back(parse_double(tok[k++]));
        t.action = std::stoi(tok[k++]);
        for (std::size_t i = 0; i < dim; ++i) t.next_state.push_back(parse_double(tok[k++]));
        t.reward = parse_double(tok[k++]);
        t.next_is_terminal = tok[k] == "1";
        ds.transitions.push_back(std::move(t));
    }
    if (ds.empty()) throw std::runtime_error("dataset csv: no rows in " + path);
    return ds;
}

} // namespace qregime
