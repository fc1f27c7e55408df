#pragma once

#include <array>
#include <cstdint>
#include <span>

namespace restain {

// All randomness in the toolkit flows through this generator so that seeded
// runs are bit-identical across platforms and standard-library versions
// (std::mt19937 distributions are implementation-defined).
//
// Core generator is xoshiro256++ seeded via splitmix64; gaussians use
// Box-Muller on the 53-bit uniform.

uint64_t splitmix64_next(uint64_t& state);

class Rng {
public:
    explicit Rng(uint64_t seed);

    uint64_t next_u64();

    // Uniform in [0, 1), 53-bit resolution.
    double uniform();

    // Uniform in [lo, hi], inclusive. Requires lo <= hi.
    int64_t uniform_int(int64_t lo, int64_t hi);

    // Standard normal. Pairs are cached, so draw order matters for
    // reproducibility; never interleave streams that must stay independent.
    double gaussian();

    void fill_gaussian(std::span<float> out);

private:
    std::array<uint64_t, 4> state_;
    double cached_gaussian_ = 0.0;
    bool has_cached_ = false;
};

// Named sub-streams. A (seed, stream, index) triple hashes to an independent
// generator seed; every module derives its randomness this way, which keeps
// training resumable and batch results independent of evaluation order.
enum class Stream : uint64_t {
    ParamInit = 1,
    TrainStep = 2,
    EpochShuffle = 3,
    SamplerNoise = 4,
    GenerateInit = 5,
    SynthGeometry = 6,
    SynthTexture = 7,
    TokenProjection = 8,
    PerImageSeed = 9,
};

uint64_t derive_seed(uint64_t root, Stream stream, uint64_t index = 0);

inline Rng derive_rng(uint64_t root, Stream stream, uint64_t index = 0) {
    return Rng(derive_seed(root, stream, index));
}

}  // namespace restain
