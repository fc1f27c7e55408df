#include "restain/synthdata.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>

#include <nlohmann/json.hpp>

#include "restain/errors.hpp"
#include "restain/rng.hpp"

namespace restain {

namespace {

using json = nlohmann::ordered_json;

constexpr const char* kGeneratorVersion = "1";

// fixed palette
constexpr double kSrcBg[3] = {245, 205, 220};
constexpr double kPurpleLight[3] = {150, 110, 180};
constexpr double kPurpleDark[3] = {60, 30, 110};
constexpr double kTgtBg[3] = {240, 238, 235};
constexpr double kDabBrown[3] = {140, 85, 35};
constexpr double kCounterBlue[3] = {70, 90, 165};
constexpr int kMaskThreshold = 60;  // L1 color distance from kTgtBg

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

uint8_t quantize(double v) {
    double r = std::floor(v + 0.5);
    return uint8_t(std::clamp(r, 0.0, 255.0));
}

void validate(const SynthParams& sp) {
    if (sp.size < 16) throw ValidationError("synth: size must be >= 16");
    if (sp.count_lo < 0 || sp.count_hi < sp.count_lo)
        throw ValidationError("synth: bad nucleus count range");
    if (sp.radius_lo <= 0 || sp.radius_hi < sp.radius_lo)
        throw ValidationError("synth: bad radius range");
    if (sp.texture_amplitude < 0) throw ValidationError("synth: bad texture amplitude");
}

bool inside(const Nucleus& n, double x, double y) {
    const double dx = x - n.cx, dy = y - n.cy;
    const double c = std::cos(n.theta), s = std::sin(n.theta);
    const double u = (dx * c + dy * s) / n.a;
    const double v = (-dx * s + dy * c) / n.b;
    return u * u + v * v <= 1.0;
}

// pixel-center rasterization used for the overlap budget
int raster_cells(const Nucleus& n, int size, std::vector<int>& out) {
    const double c = std::cos(n.theta), s = std::sin(n.theta);
    const double ex = std::sqrt(n.a * n.a * c * c + n.b * n.b * s * s);
    const double ey = std::sqrt(n.a * n.a * s * s + n.b * n.b * c * c);
    const int x0 = std::max(0, int(std::floor(n.cx - ex)));
    const int x1 = std::min(size - 1, int(std::ceil(n.cx + ex)));
    const int y0 = std::max(0, int(std::floor(n.cy - ey)));
    const int y1 = std::min(size - 1, int(std::ceil(n.cy + ey)));
    out.clear();
    for (int y = y0; y <= y1; ++y)
        for (int x = x0; x <= x1; ++x)
            if (inside(n, x + 0.5, y + 0.5)) out.push_back(y * size + x);
    return int(out.size());
}

std::vector<Nucleus> sample_geometry(const SynthParams& sp, Rng& rng) {
    const int count = int(rng.uniform_int(sp.count_lo, sp.count_hi));
    std::vector<Nucleus> nuclei;
    nuclei.reserve(count);
    std::vector<uint8_t> occupied(size_t(sp.size) * sp.size, 0);
    std::vector<int> cells;

    for (int k = 0; k < count; ++k) {
        bool placed = false;
        for (int attempt = 0; attempt < 1000 && !placed; ++attempt) {
            Nucleus n;
            n.cx = rng.uniform() * sp.size;
            n.cy = rng.uniform() * sp.size;
            n.a = sp.radius_lo + rng.uniform() * (sp.radius_hi - sp.radius_lo);
            n.b = sp.radius_lo + rng.uniform() * (sp.radius_hi - sp.radius_lo);
            n.theta = rng.uniform() * 3.14159265358979323846;

            const double c = std::cos(n.theta), s = std::sin(n.theta);
            const double ex = std::sqrt(n.a * n.a * c * c + n.b * n.b * s * s);
            const double ey = std::sqrt(n.a * n.a * s * s + n.b * n.b * c * c);
            if (n.cx - ex < 0 || n.cx + ex > sp.size || n.cy - ey < 0 || n.cy + ey > sp.size)
                continue;

            const int area = raster_cells(n, sp.size, cells);
            if (area == 0) continue;
            int overlap = 0;
            for (int idx : cells) overlap += occupied[idx];
            if (double(overlap) / double(area) > 0.3) continue;

            for (int idx : cells) occupied[idx] = 1;
            nuclei.push_back(n);
            placed = true;
        }
        if (!placed)
            throw ValidationError("synth: nucleus " + std::to_string(k) +
                                  " unplaceable after 1000 attempts (parameters too crowded)");
    }
    return nuclei;
}

std::vector<std::vector<float>> per_nucleus_coverage(const std::vector<Nucleus>& nuclei,
                                                     int size) {
    static constexpr double kOff[4][2] = {{0.25, 0.25}, {0.75, 0.25}, {0.25, 0.75}, {0.75, 0.75}};
    std::vector<std::vector<float>> cov(nuclei.size());
    for (size_t k = 0; k < nuclei.size(); ++k) {
        const Nucleus& n = nuclei[k];
        cov[k].assign(size_t(size) * size, 0.0f);
        const double c = std::cos(n.theta), s = std::sin(n.theta);
        const double ex = std::sqrt(n.a * n.a * c * c + n.b * n.b * s * s);
        const double ey = std::sqrt(n.a * n.a * s * s + n.b * n.b * c * c);
        const int x0 = std::max(0, int(std::floor(n.cx - ex)) - 1);
        const int x1 = std::min(size - 1, int(std::ceil(n.cx + ex)) + 1);
        const int y0 = std::max(0, int(std::floor(n.cy - ey)) - 1);
        const int y1 = std::min(size - 1, int(std::ceil(n.cy + ey)) + 1);
        for (int y = y0; y <= y1; ++y) {
            for (int x = x0; x <= x1; ++x) {
                int hits = 0;
                for (const auto& o : kOff) hits += inside(n, x + o[0], y + o[1]);
                cov[k][size_t(y) * size + x] = float(hits) / 4.0f;
            }
        }
    }
    return cov;
}

// grid of uniform offsets in [-amp, amp], bilinearly interpolated
struct ValueNoise {
    static constexpr int kNodes = 8;
    double node[kNodes][kNodes];
    double cell;

    ValueNoise(int size, double amp, Rng& rng) : cell(double(size) / kNodes) {
        for (int j = 0; j < kNodes; ++j)
            for (int i = 0; i < kNodes; ++i) node[j][i] = (rng.uniform() * 2.0 - 1.0) * amp;
    }

    double at(int x, int y) const {
        const double gx = x / cell, gy = y / cell;
        const int i0 = std::min(kNodes - 1, int(gx)), j0 = std::min(kNodes - 1, int(gy));
        const int i1 = std::min(kNodes - 1, i0 + 1), j1 = std::min(kNodes - 1, j0 + 1);
        const double fx = std::clamp(gx - i0, 0.0, 1.0), fy = std::clamp(gy - j0, 0.0, 1.0);
        const double top = node[j0][i0] + (node[j0][i1] - node[j0][i0]) * fx;
        const double bot = node[j1][i0] + (node[j1][i1] - node[j1][i0]) * fx;
        return top + (bot - top) * fy;
    }
};

double area_u(const Nucleus& n, const SynthParams& sp) {
    const double lo2 = sp.radius_lo * sp.radius_lo;
    const double hi2 = sp.radius_hi * sp.radius_hi;
    if (hi2 <= lo2) return 0.5;
    return std::clamp((n.a * n.b - lo2) / (hi2 - lo2), 0.0, 1.0);
}

ImageRGB render_source(const std::vector<Nucleus>& nuclei,
                       const std::vector<std::vector<float>>& cov, const SynthParams& sp,
                       Rng& texture_rng) {
    const double brightness = 0.2 + 0.8 * texture_rng.uniform();
    ValueNoise noise(sp.size, sp.texture_amplitude, texture_rng);

    ImageRGB img{sp.size, sp.size};
    for (int y = 0; y < sp.size; ++y) {
        for (int x = 0; x < sp.size; ++x) {
            double px[3];
            const double off = noise.at(x, y);
            for (int c = 0; c < 3; ++c) px[c] = kSrcBg[c] + off;
            for (size_t k = 0; k < nuclei.size(); ++k) {
                const float a = cov[k][size_t(y) * sp.size + x];
                if (a <= 0.0f) continue;
                const double u = area_u(nuclei[k], sp);
                for (int c = 0; c < 3; ++c) {
                    const double col = kPurpleLight[c] + (kPurpleDark[c] - kPurpleLight[c]) * u;
                    px[c] = px[c] * (1.0 - a) + col * a;
                }
            }
            for (int c = 0; c < 3; ++c) img.at(y, x, c) = quantize(px[c] * brightness);
        }
    }
    return img;
}

ImageRGB render_target(const std::vector<Nucleus>& nuclei,
                       const std::vector<std::vector<float>>& cov, const SynthParams& sp) {
    ImageRGB img{sp.size, sp.size};
    for (int y = 0; y < sp.size; ++y) {
        for (int x = 0; x < sp.size; ++x) {
            double px[3] = {kTgtBg[0], kTgtBg[1], kTgtBg[2]};
            for (size_t k = 0; k < nuclei.size(); ++k) {
                const float a = cov[k][size_t(y) * sp.size + x];
                if (a <= 0.0f) continue;
                const double e = nuclei[k].e;
                for (int c = 0; c < 3; ++c) {
                    const double col = kCounterBlue[c] + (kDabBrown[c] - kCounterBlue[c]) * e;
                    px[c] = px[c] * (1.0 - a) + col * a;
                }
            }
            for (int c = 0; c < 3; ++c) img.at(y, x, c) = quantize(px[c]);
        }
    }
    return img;
}

json nucleus_to_json(const Nucleus& n) {
    return json{{"cx", n.cx}, {"cy", n.cy}, {"a", n.a},
                {"b", n.b},   {"theta", n.theta}, {"e", n.e}};
}

Nucleus nucleus_from_json(const json& j) {
    Nucleus n;
    n.cx = j.at("cx").get<double>();
    n.cy = j.at("cy").get<double>();
    n.a = j.at("a").get<double>();
    n.b = j.at("b").get<double>();
    n.theta = j.at("theta").get<double>();
    n.e = j.at("e").get<double>();
    return n;
}

}  // namespace

void compute_expression(std::vector<Nucleus>& nuclei, const SynthParams& sp) {
    // analytic moments of a*b for independent uniform semi-axes, so the rule
    // depends on the records alone, never on the sampled batch
    const double mr = (sp.radius_lo + sp.radius_hi) / 2.0;
    const double mr2 = (sp.radius_lo * sp.radius_lo + sp.radius_lo * sp.radius_hi +
                        sp.radius_hi * sp.radius_hi) /
                       3.0;
    const double mean_ab = mr * mr;
    const double var_ab = mr2 * mr2 - mean_ab * mean_ab;
    const double std_ab = var_ab > 0 ? std::sqrt(var_ab) : 0.0;
    const double reach = 3.0 * sp.radius_hi;

    for (size_t i = 0; i < nuclei.size(); ++i) {
        const double z =
            std_ab > 1e-12 ? (nuclei[i].a * nuclei[i].b - mean_ab) / std_ab : 0.0;
        int close = 0;
        for (size_t j = 0; j < nuclei.size(); ++j) {
            if (j == i) continue;
            const double dx = nuclei[i].cx - nuclei[j].cx;
            const double dy = nuclei[i].cy - nuclei[j].cy;
            if (std::sqrt(dx * dx + dy * dy) < reach) ++close;
        }
        const double density = std::min(1.0, close / 4.0);
        nuclei[i].e = sigmoid(sp.c1 * z + sp.c2 * (2.0 * density - 1.0));
    }
}

PairedSample generate_pair(const SynthParams& sp, int index) {
    validate(sp);
    Rng geom = derive_rng(sp.seed, Stream::SynthGeometry, uint64_t(index));
    Rng texture = derive_rng(sp.seed, Stream::SynthTexture, uint64_t(index));

    PairedSample out;
    out.image_id = index;
    out.nuclei = sample_geometry(sp, geom);
    compute_expression(out.nuclei, sp);
    auto cov = per_nucleus_coverage(out.nuclei, sp.size);
    out.source = render_source(out.nuclei, cov, sp, texture);
    out.target = render_target(out.nuclei, cov, sp);
    return out;
}

std::vector<float> nucleus_coverage(const std::vector<Nucleus>& nuclei, int size) {
    auto cov = per_nucleus_coverage(nuclei, size);
    std::vector<float> out(size_t(size) * size, 0.0f);
    for (const auto& c : cov)
        for (size_t i = 0; i < out.size(); ++i) out[i] = std::max(out[i], c[i]);
    return out;
}

std::vector<uint8_t> geometry_mask(const std::vector<Nucleus>& nuclei, int size) {
    auto cov = nucleus_coverage(nuclei, size);
    std::vector<uint8_t> mask(cov.size());
    for (size_t i = 0; i < cov.size(); ++i) mask[i] = cov[i] >= 0.5f ? 1 : 0;
    return mask;
}

std::vector<uint8_t> stain_mask(const ImageRGB& img) {
    std::vector<uint8_t> mask(size_t(img.height) * img.width);
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) {
            int dist = 0;
            for (int c = 0; c < 3; ++c)
                dist += std::abs(int(img.at(y, x, c)) - int(kTgtBg[c]));
            mask[size_t(y) * img.width + x] = dist > kMaskThreshold ? 1 : 0;
        }
    }
    return mask;
}

double mask_iou(const std::vector<uint8_t>& a, const std::vector<uint8_t>& b) {
    if (a.size() != b.size()) throw ValidationError("mask_iou: size mismatch");
    long inter = 0, uni = 0;
    for (size_t i = 0; i < a.size(); ++i) {
        inter += a[i] && b[i];
        uni += a[i] || b[i];
    }
    return uni == 0 ? 1.0 : double(inter) / double(uni);
}

void write_dataset(const SynthParams& sp, int n, const std::string& dir,
                   const std::string& tool_version, const std::string& config_hash) {
    validate(sp);
    if (n < 0) throw ValidationError("write_dataset: negative count");
    std::filesystem::create_directories(dir);

    PngMetadata png_meta{{"Software", "restain " + tool_version},
                         {"Comment", "config:" + config_hash}};
    json manifest;
    manifest["generator_version"] = kGeneratorVersion;
    manifest["tool_version"] = tool_version;
    manifest["config_hash"] = config_hash;
    manifest["count"] = n;
    manifest["params"] = {{"size", sp.size},
                          {"count_lo", sp.count_lo},
                          {"count_hi", sp.count_hi},
                          {"radius_lo", sp.radius_lo},
                          {"radius_hi", sp.radius_hi},
                          {"texture_amplitude", sp.texture_amplitude},
                          {"c1", sp.c1},
                          {"c2", sp.c2},
                          {"seed", sp.seed}};
    {
        std::ofstream out(dir + "/manifest.json", std::ios::binary);
        if (!out) throw ValidationError("write_dataset: cannot write manifest in " + dir);
        out << manifest.dump(2) << "\n";
    }

    for (int id = 0; id < n; ++id) {
        PairedSample s = generate_pair(sp, id);
        const std::string stem = dir + "/" + std::to_string(id);
        write_png(stem + "_src.png", s.source, png_meta);
        write_png(stem + "_tgt.png", s.target, png_meta);

        json meta;
        meta["image_id"] = id;
        meta["tool_version"] = tool_version;
        meta["config_hash"] = config_hash;
        meta["nuclei"] = json::array();
        for (const auto& nu : s.nuclei) meta["nuclei"].push_back(nucleus_to_json(nu));
        std::ofstream out(stem + "_meta.json", std::ios::binary);
        if (!out) throw ValidationError("write_dataset: cannot write " + stem + "_meta.json");
        out << meta.dump(2) << "\n";
    }
}

std::vector<PairedSample> read_dataset(const std::string& dir) {
    std::ifstream in(dir + "/manifest.json");
    if (!in) throw ValidationError("read_dataset: no manifest in " + dir);
    json manifest;
    try {
        in >> manifest;
    } catch (const json::exception& e) {
        throw ValidationError(std::string("read_dataset: bad manifest: ") + e.what());
    }
    if (manifest.at("generator_version").get<std::string>() != kGeneratorVersion)
        throw ValidationError("read_dataset: generator version mismatch");

    const int n = manifest.at("count").get<int>();
    std::vector<PairedSample> out;
    out.reserve(n);
    for (int id = 0; id < n; ++id) {
        const std::string stem = dir + "/" + std::to_string(id);
        PairedSample s;
        s.image_id = id;
        s.source = read_png(stem + "_src.png");
        s.target = read_png(stem + "_tgt.png");
        std::ifstream mf(stem + "_meta.json");
        if (!mf) throw ValidationError("read_dataset: missing " + stem + "_meta.json");
        json meta;
        try {
            mf >> meta;
        } catch (const json::exception& e) {
            throw ValidationError(std::string("read_dataset: bad meta: ") + e.what());
        }
        for (const auto& j : meta.at("nuclei")) s.nuclei.push_back(nucleus_from_json(j));
        out.push_back(std::move(s));
    }
    return out;
}

}  // namespace restain
