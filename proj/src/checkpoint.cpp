#include "qregime/checkpoint.hpp"

#include <bit>
#include <fstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace qregime {

namespace {
constexpr char kMagic[8] = {'Q', 'R', 'C', 'K', 'P', 'T', '1', '\n'};

void write_doubles(std::ofstream& f, const std::vector<double>& v) {
    f.write(reinterpret_cast<const char*>(v.data()),
            static_cast<std::streamsize>(v.size() * sizeof(double)));
}

void read_doubles(std::ifstream& f, std::vector<double>& v, std::size_t n) {
    v.resize(n);
    f.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(n * sizeof(double)));
    if (!f) throw std::runtime_error("checkpoint: truncated parameter payload");
}
} // namespace

void save_checkpoint(const std::string& path, const Checkpoint& ckpt) {
    static_assert(std::endian::native == std::endian::little,
                  "checkpoint format assumes a little-endian host");
    nlohmann::json header{
        {"input_dim", ckpt.shape.input_dim},
        {"hidden", ckpt.shape.hidden},
        {"output_dim", ckpt.shape.output_dim},
        {"init_seed", ckpt.init_seed},
        {"step", ckpt.step},
        {"mode", to_string(ckpt.mode)},
        {"gamma", ckpt.gamma},
        {"n_params", ckpt.params.size()},
        {"adam", {{"t", ckpt.adam.t},
                  {"beta1", ckpt.adam.beta1},
                  {"beta2", ckpt.adam.beta2},
                  {"epsilon", ckpt.adam.epsilon}}},
    };
    const std::string h = header.dump();

    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open " + path + " for writing");
    f.write(kMagic, sizeof(kMagic));
    std::uint64_t len = h.size();
    f.write(reinterpret_cast<const char*>(&len), sizeof(len));
    f.write(h.data(), static_cast<std::streamsize>(h.size()));
    write_doubles(f, ckpt.params);
    write_doubles(f, ckpt.adam.m);
    write_doubles(f, ckpt.adam.v);
    if (!f) throw std::runtime_error("checkpoint write failed for " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open checkpoint file " + path);
    char magic[8];
    f.read(magic, sizeof(magic));
    if (!f || !std::equal(std::begin(magic), std::end(magic), std::begin(kMagic)))
        throw std::runtime_error("not a checkpoint file: " + path);

    std::uint64_t len = 0;
    f.read(reinterpret_cast<char*>(&len), sizeof(len));
    std::string h(len, '\0');
    f.read(h.data(), static_cast<std::streamsize>(len));
    if (!f) throw std::runtime_error("checkpoint: truncated header");
    nlohmann::json header = nlohmann::json::parse(h);

    Checkpoint ckpt;
    ckpt.shape.input_dim = header.at("input_dim").get<int>();
    ckpt.shape.hidden = header.at("hidden").get<std::vector<int>>();
    ckpt.shape.output_dim = header.at("output_dim").get<int>();
    ckpt.init_seed = header.at("init_seed").get<std::uint64_t>();
    ckpt.step = header.at("step").get<long>();
    ckpt.mode = gradient_mode_from_string(header.at("mode").get<std::string>());
    ckpt.gamma = header.at("gamma").get<double>();
    const auto n = header.at("n_params").get<std::size_t>();
    if (n != param_count(ckpt.shape))
        throw std::runtime_error("checkpoint: parameter count does not match shape");
    ckpt.adam.t = header.at("adam").at("t").get<long>();
    ckpt.adam.beta1 = header.at("adam").at("beta1").get<double>();
    ckpt.adam.beta2 = header.at("adam").at("beta2").get<double>();
    ckpt.adam.epsilon = header.at("adam").at("epsilon").get<double>();

    read_doubles(f, ckpt.params, n);
    read_doubles(f, ckpt.adam.m, n);
    read_doubles(f, ckpt.adam.v, n);
    return ckpt;
}

} // namespace qregime
