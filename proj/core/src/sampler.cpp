#include "restain/sampler.hpp"

#include <cmath>
#include <cstddef>
#include <string>

#include "restain/diffusion.hpp"
#include "restain/errors.hpp"
#include "restain/rng.hpp"

namespace restain {

namespace {

double eta_progress(size_t i, size_t S) { return S > 1 ? double(i) / double(S - 1) : 0.0; }

LatentGrid gaussian_latent(int c, int h, int w, Rng& rng) {
    LatentGrid z(c, h, w);
    rng.fill_gaussian(z.data);
    return z;
}

}  // namespace

LatentGrid ddim_step(VPredictor& p, const NoiseSchedule& s, const LatentGrid& z_t, int t,
                     int t_prev, const ConditioningBundle& cond, double eta_t,
                     const LatentGrid* noise, SamplerDiagnostics* diag) {
    if (!(t > t_prev && t_prev >= 0)) throw std::invalid_argument("ddim_step: need t > t_prev >= 0");
    if (eta_t < 0.0 || eta_t > 1.0) throw std::invalid_argument("ddim_step: eta_t outside [0, 1]");

    const LatentGrid v_hat = p.predict_v(z_t, t, cond);
    const double ab_t = s.alpha_bar(t);
    const double ab_prev = s.alpha_bar(t_prev);
    const LatentGrid x0 = x0_from_v(z_t, v_hat, ab_t);
    const LatentGrid eps = eps_from_v(z_t, v_hat, ab_t);

    const double sig = eta_t * ddim_sigma(s, t, t_prev);
    double dir_sq = 1.0 - ab_prev - sig * sig;
    if (dir_sq < 0.0) {
        if (diag) ++diag->clamped_hops;
        dir_sq = 0.0;
    }
    const double ca = std::sqrt(ab_prev);
    const double cb = std::sqrt(dir_sq);

    if (sig > 0.0) {
        if (!noise || !noise->same_shape(z_t))
            throw std::invalid_argument("ddim_step: noise shape mismatch");
        LatentGrid out(z_t.channels, z_t.height, z_t.width);
        for (size_t i = 0; i < out.data.size(); ++i)
            out.data[i] = float(ca * x0.data[i] + cb * eps.data[i] + sig * noise->data[i]);
        return out;
    }
    LatentGrid out(z_t.channels, z_t.height, z_t.width);
    for (size_t i = 0; i < out.data.size(); ++i)
        out.data[i] = float(ca * x0.data[i] + cb * eps.data[i]);
    return out;
}

LatentGrid ddim_invert(VPredictor& p, const NoiseSchedule& s, const LatentGrid& z0,
                       const TimestepPlan& plan, const ConditioningBundle& cond_gen) {
    if (cond_gen.mode != TaskMode::Generation)
        throw ValidationError("ddim_invert: inversion runs under generation conditioning");
    if (plan.steps.size() < 2)
        throw ValidationError("ddim_invert: plan too short to invert");

    LatentGrid z = z0;
    int t_cur = 0;
    // plan is descending and starts at T; walk it back to front, skipping T
    for (size_t k = plan.steps.size(); k-- > 1;) {
        const int t_next = plan.steps[k];
        const double ab_cur = s.alpha_bar(t_cur);
        const double ab_next = s.alpha_bar(t_next);
        if (ab_cur == 0.0 || ab_next == 0.0)
            throw ValidationError("ddim_invert: reached the zero-SNR terminal point at t=" +
                                  std::to_string(ab_cur == 0.0 ? t_cur : t_next));

        const LatentGrid v_hat = p.predict_v(z, t_cur, cond_gen);
        const LatentGrid x0 = x0_from_v(z, v_hat, ab_cur);
        const LatentGrid eps = eps_from_v(z, v_hat, ab_cur);
        const double ca = std::sqrt(ab_next);
        const double cb = std::sqrt(1.0 - ab_next);
        for (size_t i = 0; i < z.data.size(); ++i)
            z.data[i] = float(ca * x0.data[i] + cb * eps.data[i]);
        t_cur = t_next;
    }
    return z;
}

LatentGrid ddim_denoise(VPredictor& p, const NoiseSchedule& s, LatentGrid z,
                        const TimestepPlan& plan, const ConditioningBundle& cond,
                        const EtaSchedule& eta, uint64_t seed, size_t start_index,
                        SamplerDiagnostics* diag) {
    const size_t S = plan.steps.size();
    if (start_index >= S) throw ValidationError("ddim_denoise: start index beyond plan");
    for (size_t i = start_index; i < S; ++i) {
        const int t = plan.steps[i];
        const int t_prev = (i + 1 < S) ? plan.steps[i + 1] : 0;
        const double eta_t = eta_value(eta, eta_progress(i, S));
        const double sig = eta_t * ddim_sigma(s, t, t_prev);
        if (sig > 0.0) {
            Rng rng = derive_rng(seed, Stream::SamplerNoise, uint64_t(i));
            LatentGrid noise = gaussian_latent(z.channels, z.height, z.width, rng);
            z = ddim_step(p, s, z, t, t_prev, cond, eta_t, &noise, diag);
        } else {
            z = ddim_step(p, s, z, t, t_prev, cond, eta_t, nullptr, diag);
        }
    }
    return z;
}

ImageRGB translate(VPredictor& p, const NoiseSchedule& s, const CodecSpec& codec,
                   const ImageRGB& source, const SamplerConfig& cfg, const TokenSpec& tok,
                   SamplerDiagnostics* diag) {
    const LatentGrid z0 = encode(codec, source);
    const ConditioningBundle cond_gen =
        make_generation_cond(z0.channels, z0.height, z0.width);

    const TimestepPlan inv_plan = trailing_timesteps(s.T, cfg.inversion_steps);
    LatentGrid z = ddim_invert(p, s, z0, inv_plan, cond_gen);

    const ConditioningBundle cond_tr =
        make_translation_cond(z0, embed_morphology(source, tok.d_tok, tok.patch, tok.seed));
    const TimestepPlan den_plan = trailing_timesteps(s.T, cfg.denoise_steps);
    z = ddim_denoise(p, s, std::move(z), den_plan, cond_tr, cfg.eta, cfg.seed, 0, diag);
    return decode(codec, z);
}

ImageRGB generate(VPredictor& p, const NoiseSchedule& s, const CodecSpec& codec, int height,
                  int width, const SamplerConfig& cfg, SamplerDiagnostics* diag) {
    const int f = codec.kind == CodecSpec::Kind::Downsample ? codec.factor : 1;
    if (height % f != 0 || width % f != 0)
        throw ValidationError("generate: size not divisible by codec factor");
    Rng init = derive_rng(cfg.seed, Stream::GenerateInit, 0);
    LatentGrid z = gaussian_latent(3, height / f, width / f, init);
    const ConditioningBundle cond_gen = make_generation_cond(z.channels, z.height, z.width);
    const TimestepPlan plan = trailing_timesteps(s.T, cfg.denoise_steps);
    z = ddim_denoise(p, s, std::move(z), plan, cond_gen, cfg.eta, cfg.seed, 0, diag);
    return decode(codec, z);
}

double invert_roundtrip_mae_latent(VPredictor& p, const NoiseSchedule& s, const LatentGrid& z0,
                                   const TimestepPlan& plan) {
    const ConditioningBundle cond_gen =
        make_generation_cond(z0.channels, z0.height, z0.width);
    LatentGrid z = ddim_invert(p, s, z0, plan, cond_gen);
    z = ddim_denoise(p, s, std::move(z), plan, cond_gen, EtaSchedule::constant(0.0), 0, 1);
    double acc = 0.0;
    for (size_t i = 0; i < z.data.size(); ++i)
        acc += std::abs(double(z.data[i]) - double(z0.data[i]));
    return acc / double(z.data.size());
}

double invert_roundtrip_mae(VPredictor& p, const NoiseSchedule& s, const CodecSpec& codec,
                            const ImageRGB& source, const SamplerConfig& cfg) {
    const LatentGrid z0 = encode(codec, source);
    const TimestepPlan plan = trailing_timesteps(s.T, cfg.inversion_steps);
    return invert_roundtrip_mae_latent(p, s, z0, plan);
}

}  // namespace restain
