#include "restain/codec.hpp"

#include <cmath>

#include "restain/errors.hpp"

namespace restain {

namespace {

void validate_spec(const CodecSpec& c) {
    if (c.kind == CodecSpec::Kind::Downsample && c.factor < 1) {
        throw ValidationError("codec: downsample factor must be >= 1");
    }
}

LatentGrid normalize(const ImageRGB& img) {
    LatentGrid z(3, img.height, img.width);
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) {
            for (int c = 0; c < 3; ++c) {
                z.at(c, y, x) = float(double(img.at(y, x, c)) / 127.5 - 1.0);
            }
        }
    }
    return z;
}

uint8_t to_pixel(double v) {
    double y = std::floor((v + 1.0) * 127.5 + 0.5);
    if (y < 0.0) y = 0.0;
    if (y > 255.0) y = 255.0;
    return uint8_t(y);
}

}  // namespace

LatentGrid encode(const CodecSpec& c, const ImageRGB& img) {
    validate_spec(c);
    if (img.height <= 0 || img.width <= 0 ||
        img.data.size() != size_t(img.height) * img.width * 3) {
        throw ValidationError("encode: malformed image");
    }
    if (c.kind == CodecSpec::Kind::Identity) return normalize(img);

    const int f = c.factor;
    if (img.height % f != 0 || img.width % f != 0) {
        throw ValidationError("encode: image dimensions not divisible by downsample factor");
    }
    LatentGrid full = normalize(img);
    LatentGrid z(3, img.height / f, img.width / f);
    const double inv = 1.0 / double(f * f);
    for (int ch = 0; ch < 3; ++ch) {
        for (int y = 0; y < z.height; ++y) {
            for (int x = 0; x < z.width; ++x) {
                double acc = 0.0;
                for (int dy = 0; dy < f; ++dy) {
                    for (int dx = 0; dx < f; ++dx) {
                        acc += full.at(ch, y * f + dy, x * f + dx);
                    }
                }
                z.at(ch, y, x) = float(acc * inv);
            }
        }
    }
    return z;
}

ImageRGB decode(const CodecSpec& c, const LatentGrid& z) {
    validate_spec(c);
    if (z.channels != 3) throw ValidationError("decode: latent must have 3 channels");
    const int f = (c.kind == CodecSpec::Kind::Identity) ? 1 : c.factor;
    ImageRGB img(z.height * f, z.width * f);
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) {
            for (int ch = 0; ch < 3; ++ch) {
                img.at(y, x, ch) = to_pixel(z.at(ch, y / f, x / f));
            }
        }
    }
    return img;
}

}  // namespace restain
