#include "restain/image.hpp"

#include <png.h>

#include <cstdio>
#include <cstring>
#include <memory>
#include <stdexcept>

#include "restain/errors.hpp"

namespace restain {

namespace {

struct FileCloser {
    void operator()(FILE* f) const {
        if (f) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<FILE, FileCloser>;

}  // namespace

void write_png(const std::string& path, const ImageRGB& img, const PngMetadata& meta) {
    if (img.height <= 0 || img.width <= 0 ||
        img.data.size() != size_t(img.height) * img.width * 3) {
        throw ValidationError("write_png: malformed image buffer");
    }
    FilePtr fp(std::fopen(path.c_str(), "wb"));
    if (!fp) throw ValidationError("write_png: cannot open " + path);

    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) throw std::runtime_error("write_png: png_create_write_struct failed");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_write_struct(&png, nullptr);
        throw std::runtime_error("write_png: png_create_info_struct failed");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw std::runtime_error("write_png: libpng error writing " + path);
    }

    png_init_io(png, fp.get());
    png_set_IHDR(png, info, png_uint_32(img.width), png_uint_32(img.height), 8,
                 PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
                 PNG_FILTER_TYPE_DEFAULT);

    std::vector<png_text> texts;
    texts.reserve(meta.size());
    for (const auto& [key, value] : meta) {
        png_text t;
        std::memset(&t, 0, sizeof(t));
        t.compression = PNG_TEXT_COMPRESSION_NONE;
        t.key = const_cast<char*>(key.c_str());
        t.text = const_cast<char*>(value.c_str());
        t.text_length = value.size();
        texts.push_back(t);
    }
    if (!texts.empty()) png_set_text(png, info, texts.data(), int(texts.size()));

    png_write_info(png, info);
    std::vector<png_bytep> rows(img.height);
    for (int y = 0; y < img.height; ++y) {
        rows[y] = const_cast<png_bytep>(img.data.data() + size_t(y) * img.width * 3);
    }
    png_write_image(png, rows.data());
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
}

ImageRGB read_png(const std::string& path, PngMetadata* meta) {
    FilePtr fp(std::fopen(path.c_str(), "rb"));
    if (!fp) throw ValidationError("read_png: cannot open " + path);

    png_byte sig[8];
    if (std::fread(sig, 1, 8, fp.get()) != 8 || png_sig_cmp(sig, 0, 8) != 0) {
        throw ValidationError("read_png: not a PNG file: " + path);
    }

    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) throw std::runtime_error("read_png: png_create_read_struct failed");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_read_struct(&png, nullptr, nullptr);
        throw std::runtime_error("read_png: png_create_info_struct failed");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw ValidationError("read_png: corrupt PNG: " + path);
    }

    png_init_io(png, fp.get());
    png_set_sig_bytes(png, 8);
    png_read_info(png, info);

    png_uint_32 w = png_get_image_width(png, info);
    png_uint_32 h = png_get_image_height(png, info);
    int bit_depth = png_get_bit_depth(png, info);
    int color_type = png_get_color_type(png, info);

    // Normalize everything to 8-bit RGB.
    if (bit_depth == 16) png_set_strip_16(png);
    if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
    if (color_type == PNG_COLOR_TYPE_GRAY && bit_depth < 8) png_set_expand_gray_1_2_4_to_8(png);
    if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
    if (color_type == PNG_COLOR_TYPE_GRAY || color_type == PNG_COLOR_TYPE_GRAY_ALPHA) {
        png_set_gray_to_rgb(png);
    }
    if (color_type & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
    png_read_update_info(png, info);

    if (png_get_rowbytes(png, info) != size_t(w) * 3) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw ValidationError("read_png: unexpected row size after conversion: " + path);
    }

    ImageRGB img{int(h), int(w)};
    std::vector<png_bytep> rows(h);
    for (png_uint_32 y = 0; y < h; ++y) {
        rows[y] = img.data.data() + size_t(y) * w * 3;
    }
    png_read_image(png, rows.data());
    png_read_end(png, info);

    if (meta) {
        meta->clear();
        png_textp text_ptr = nullptr;
        int num_text = 0;
        if (png_get_text(png, info, &text_ptr, &num_text) > 0) {
            for (int i = 0; i < num_text; ++i) {
                (*meta)[text_ptr[i].key] = text_ptr[i].text ? text_ptr[i].text : "";
            }
        }
    }
    png_destroy_read_struct(&png, &info, nullptr);
    return img;
}

}  // namespace restain
