#pragma once

#include <cstdint>
#include <string>

#include "qregime/gradients.hpp"
#include "qregime/optimizer.hpp"
#include "qregime/qnet.hpp"

namespace qregime {

// Self-describing training snapshot. The payload is raw little-endian
// doubles, so save/load round-trips bit for bit.
struct Checkpoint {
    NetShape shape;
    std::uint64_t init_seed = 0;
    long step = 0;
    GradientMode mode = GradientMode::Semi;
    double gamma = 0.0;
    ParamVec params;
    AdamState adam;
};

void save_checkpoint(const std::string& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::string& path);

} // namespace qregime
