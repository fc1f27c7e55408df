#include "restain/rng.hpp"

#include <bit>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace restain {

uint64_t splitmix64_next(uint64_t& state) {
    state += 0x9E3779B97F4A7C15ULL;
    uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

Rng::Rng(uint64_t seed) {
    uint64_t sm = seed;
    for (auto& word : state_) {
        word = splitmix64_next(sm);
    }
}

uint64_t Rng::next_u64() {
    const uint64_t result = std::rotl(state_[0] + state_[3], 23) + state_[0];
    const uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = std::rotl(state_[3], 45);
    return result;
}

double Rng::uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

int64_t Rng::uniform_int(int64_t lo, int64_t hi) {
    if (lo > hi) throw std::invalid_argument("uniform_int: lo > hi");
    const uint64_t span = static_cast<uint64_t>(hi - lo) + 1;
    return lo + static_cast<int64_t>(next_u64() % span);
}

double Rng::gaussian() {
    if (has_cached_) {
        has_cached_ = false;
        return cached_gaussian_;
    }
    const double u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log1p(-u1));
    const double theta = 2.0 * std::numbers::pi * u2;
    cached_gaussian_ = r * std::sin(theta);
    has_cached_ = true;
    return r * std::cos(theta);
}

void Rng::fill_gaussian(std::span<float> out) {
    for (auto& v : out) {
        v = static_cast<float>(gaussian());
    }
}

uint64_t derive_seed(uint64_t root, Stream stream, uint64_t index) {
    uint64_t s = root;
    s = splitmix64_next(s) ^ static_cast<uint64_t>(stream);
    s = splitmix64_next(s) ^ index;
    return splitmix64_next(s);
}

}  // namespace restain
