#pragma once

#include <cstdint>

#include "restain/codec.hpp"
#include "restain/denoiser.hpp"
#include "restain/image.hpp"
#include "restain/latent.hpp"
#include "restain/schedule.hpp"

namespace restain {

struct SamplerConfig {
    int inversion_steps = 200;
    int denoise_steps = 200;
    EtaSchedule eta = EtaSchedule::cosine(0.2);
    uint64_t seed = 0;
};

struct SamplerDiagnostics {
    long clamped_hops = 0;  // hops where 1 - abar_prev - sigma^2 dipped below 0
};

// Morphology token settings the model was trained with; translation has to
// embed its conditioning exactly the way the trainer did.
struct TokenSpec {
    int d_tok = 64;
    int patch = 16;
    uint64_t seed = 1117;
};

// One reverse hop t -> t_prev. With vh = p.predict_v(z_t, t, cond):
//   z_prev = sqrt(abar_prev) * x0(vh) + sqrt(1 - abar_prev - sig~^2) * eps(vh)
//          + sig~ * noise,   sig~ = eta_t * ddim_sigma(s, t, t_prev)
// noise may be null when sig~ == 0; a negative value under the square root
// is clamped to zero and counted in diag.
LatentGrid ddim_step(VPredictor& p, const NoiseSchedule& s, const LatentGrid& z_t, int t,
                     int t_prev, const ConditioningBundle& cond, double eta_t,
                     const LatentGrid* noise, SamplerDiagnostics* diag = nullptr);

// Deterministic forward walk recovering the noise latent of a clean z0.
// Ascends the reversed plan from t = 0 and stops at the plan's second entry:
// the terminal step carries no signal on a zero-terminal-SNR schedule, so
// the last hop belongs to the denoising pass. Queries the predictor at the
// current (lower) timestep of each hop.
LatentGrid ddim_invert(VPredictor& p, const NoiseSchedule& s, const LatentGrid& z0,
                       const TimestepPlan& plan, const ConditioningBundle& cond_gen);

// Runs the plan from plan.steps[start_index] down to 0. Eta progress for the
// step at plan index i is i/(S-1); per-step noise comes from the SamplerNoise
// stream of `seed`, indexed by i, so the path is a pure function of
// (seed, plan, eta).
LatentGrid ddim_denoise(VPredictor& p, const NoiseSchedule& s, LatentGrid z,
                        const TimestepPlan& plan, const ConditioningBundle& cond,
                        const EtaSchedule& eta, uint64_t seed, size_t start_index = 0,
                        SamplerDiagnostics* diag = nullptr);

// encode -> invert under generation conditioning -> stochastic denoise under
// translation conditioning (structural latent + morphology tokens from the
// source) -> decode.
ImageRGB translate(VPredictor& p, const NoiseSchedule& s, const CodecSpec& codec,
                   const ImageRGB& source, const SamplerConfig& cfg, const TokenSpec& tok,
                   SamplerDiagnostics* diag = nullptr);

// z_T ~ N(0, I) from the GenerateInit stream, denoised under generation
// conditioning over the trailing plan.
ImageRGB generate(VPredictor& p, const NoiseSchedule& s, const CodecSpec& codec, int height,
                  int width, const SamplerConfig& cfg, SamplerDiagnostics* diag = nullptr);

// encode -> invert -> eta = 0 denoise re-entering the plan where inversion
// stopped, generation conditioning both ways; returns per-element mean
// absolute error against the original latent.
double invert_roundtrip_mae(VPredictor& p, const NoiseSchedule& s, const CodecSpec& codec,
                            const ImageRGB& source, const SamplerConfig& cfg);

// Same round trip on a raw latent, for callers that start from one.
double invert_roundtrip_mae_latent(VPredictor& p, const NoiseSchedule& s, const LatentGrid& z0,
                                   const TimestepPlan& plan);

}  // namespace restain
