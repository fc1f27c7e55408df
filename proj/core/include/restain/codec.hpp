#pragma once

#include "restain/image.hpp"
#include "restain/latent.hpp"

namespace restain {

// Maps 8-bit images into the [-1, 1] working space and back.
struct CodecSpec {
    enum class Kind { Identity, Downsample };
    Kind kind = Kind::Identity;
    int factor = 1;  // used by Downsample only
};

LatentGrid encode(const CodecSpec& c, const ImageRGB& img);
ImageRGB decode(const CodecSpec& c, const LatentGrid& z);

}  // namespace restain
