#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace restain {

// Interleaved 8-bit RGB, row-major.
struct ImageRGB {
    int height = 0;
    int width = 0;
    std::vector<uint8_t> data;  // height*width*3

    ImageRGB() = default;
    ImageRGB(int h, int w) : height(h), width(w), data(size_t(h) * w * 3, 0) {}

    uint8_t& at(int y, int x, int c) { return data[(size_t(y) * width + x) * 3 + c]; }
    uint8_t at(int y, int x, int c) const { return data[(size_t(y) * width + x) * 3 + c]; }
};

// Text metadata stored in PNG tEXt chunks (keyword -> value).
using PngMetadata = std::map<std::string, std::string>;

void write_png(const std::string& path, const ImageRGB& img, const PngMetadata& meta = {});
ImageRGB read_png(const std::string& path, PngMetadata* meta = nullptr);

}  // namespace restain
