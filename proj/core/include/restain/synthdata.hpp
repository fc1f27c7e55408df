#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "restain/image.hpp"

namespace restain {

// One elliptical nucleus. Expression e is a pure function of the geometry
// records (area z-score and local crowding through a sigmoid), so the target
// staining is always predictable from source morphology.
struct Nucleus {
    double cx = 0, cy = 0;  // center, pixels
    double a = 0, b = 0;    // semi-axes, pixels
    double theta = 0;       // orientation, radians
    double e = 0;           // expression level in [0, 1]
};

struct PairedSample {
    ImageRGB source;  // hematoxylin-eosin look: dark purple nuclei, pink texture
    ImageRGB target;  // immunostain look: brown chroma by e, blue counterstain
    std::vector<Nucleus> nuclei;
    int image_id = 0;
};

struct SynthParams {
    int size = 64;
    int count_lo = 6, count_hi = 14;
    double radius_lo = 4.0, radius_hi = 9.0;
    double texture_amplitude = 8.0;  // background value-noise range
    double c1 = 1.5, c2 = 1.0;       // expression rule: area z-score, crowding
    uint64_t seed = 0;
};

// Deterministic in (sp.seed, index). Geometry is rejection-sampled so each
// nucleus stays inside the frame and overlaps previously placed ones by at
// most 30% of its rasterized area; placement gets 1000 attempts before the
// parameters are rejected as unsatisfiable. Source images carry a per-image
// brightness factor in [0.2, 1] so the dataset spans dark and bright regimes.
PairedSample generate_pair(const SynthParams& sp, int index);

// Fills e for every nucleus from the shared rule; used by generate_pair and
// exposed so stored records can be re-derived from geometry alone.
void compute_expression(std::vector<Nucleus>& nuclei, const SynthParams& sp);

// Antialiased union coverage (2x2 supersampling), values in [0, 1].
// Both renders composite from the same per-nucleus coverage, which is what
// makes the geometry pixel-identical across stains.
std::vector<float> nucleus_coverage(const std::vector<Nucleus>& nuclei, int size);

// coverage >= 0.5
std::vector<uint8_t> geometry_mask(const std::vector<Nucleus>& nuclei, int size);

// Nucleus mask recovered from a target-stain rendering: absolute deviation
// from the neutral background above a fixed threshold.
std::vector<uint8_t> stain_mask(const ImageRGB& img);

// Intersection over union of two binary masks; 1 when both are empty.
double mask_iou(const std::vector<uint8_t>& a, const std::vector<uint8_t>& b);

// Writes {id}_src.png / {id}_tgt.png / {id}_meta.json plus manifest.json.
// Every file embeds the tool version and config hash. read_dataset verifies
// the generator version and round-trips samples exactly.
void write_dataset(const SynthParams& sp, int n, const std::string& dir,
                   const std::string& tool_version, const std::string& config_hash);
std::vector<PairedSample> read_dataset(const std::string& dir);

}  // namespace restain
