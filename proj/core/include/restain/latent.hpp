#pragma once

#include <cstddef>
#include <vector>

namespace restain {

// Channels x height x width grid of reals, row-major CHW. The unit moved
// through the codec, the forward process, the denoiser, and the samplers.
struct LatentGrid {
    int channels = 0;
    int height = 0;
    int width = 0;
    std::vector<float> data;

    LatentGrid() = default;
    LatentGrid(int c, int h, int w)
        : channels(c), height(h), width(w),
          data(static_cast<size_t>(c) * h * w, 0.0f) {}

    static LatentGrid zeros(int c, int h, int w) { return LatentGrid(c, h, w); }

    size_t size() const { return data.size(); }

    float& at(int c, int y, int x) {
        return data[(static_cast<size_t>(c) * height + y) * width + x];
    }
    float at(int c, int y, int x) const {
        return data[(static_cast<size_t>(c) * height + y) * width + x];
    }

    bool same_shape(const LatentGrid& o) const {
        return channels == o.channels && height == o.height && width == o.width;
    }
};

}  // namespace restain
