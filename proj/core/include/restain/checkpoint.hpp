#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "restain/denoiser.hpp"
#include "restain/nn.hpp"

namespace restain {

// Everything needed to rebuild the model and its inference pipeline from the
// file alone: architecture, noise schedule, and morphology embedding setup.
struct CheckpointMeta {
    UNetConfig arch;
    int patch = 16;           // morphology token tile size
    uint64_t token_seed = 0;  // seed of the fixed token projection
    int T = 1000;
    double beta_start = 1e-4;
    double beta_end = 0.02;
    uint8_t spacing = 0;  // BetaSpacing value as stored
    bool zero_terminal = true;
    std::string tool_version;
    std::string config_hash;
};

// Adam moments parallel to the flat parameter vector.
struct OptimizerState {
    uint64_t step = 0;
    std::vector<float> m, v;
};

// Little-endian binary, magic "RSTCKPT1": header (version, flags, meta),
// named tensors (u32 name length, name, u32 rank, u32 dims, raw f32 data),
// then an optional optimizer section. Round trips are bit-exact.
// Writes go to a temp file first and rename into place.
void save_checkpoint(const std::string& path, const CheckpointMeta& meta,
                     const nn::ParamStore<float>& ps, const OptimizerState* opt = nullptr);

// Header only; use it to construct the network before a full load.
CheckpointMeta read_checkpoint_meta(const std::string& path);

// Fills an already-built store. The stored tensors must match the store's
// names and shapes exactly; opt, when given, must be present in the file.
CheckpointMeta load_checkpoint(const std::string& path, nn::ParamStore<float>& ps,
                               OptimizerState* opt = nullptr);

}  // namespace restain
