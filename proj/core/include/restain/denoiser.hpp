#pragma once

#include <cstdint>
#include <vector>

#include "restain/image.hpp"
#include "restain/latent.hpp"
#include "restain/nn.hpp"

namespace restain {

enum class TaskMode { Generation, Translation };

struct MorphologyTokens {
    int count = 0;
    int d_tok = 0;
    std::vector<float> data;  // [count, d_tok] row-major
};

struct ConditioningBundle {
    TaskMode mode = TaskMode::Translation;
    LatentGrid structural_latent;
    MorphologyTokens tokens;
};

struct UNetConfig {
    int base_width = 32;
    int levels = 2;
    int d_tok = 64;
    int heads = 4;
    int in_channels = 6;
    int out_channels = 3;
    int groups = 8;
};

// Small conditional U-Net predicting the velocity target.
// Input is the channel-concatenation [noisy latent | structural latent];
// tokens are injected through one cross-attention block per resolution.
template <typename T>
class UNet {
public:
    explicit UNet(const UNetConfig& cfg);
    void init_params(uint64_t seed);

    // x_in: [in_channels, H, W]; tokens: [n_tok, d_tok]; v_out: [out_channels, H, W]
    void forward(const T* x_in, int H, int W, int t, const T* tokens, int n_tok, T* v_out);
    // Accumulates parameter grads from the last forward; dtokens optional [n_tok, d_tok].
    void backward(const T* dv, T* dtokens = nullptr);

    nn::ParamStore<T>& params() { return ps_; }
    const nn::ParamStore<T>& params() const { return ps_; }
    const UNetConfig& config() const { return cfg_; }
    size_t gen_token_offset() const { return gen_tok_off_; }

private:
    struct Down {
        nn::ResBlock<T> rb;
        nn::CrossAttention<T> attn;
        nn::Conv2d<T> down;
        std::vector<T> a_rb, a_attn, a_down;
        int H = 0, W = 0;
    };
    struct Up {
        nn::Conv2d<T> conv;
        nn::ResBlock<T> rb;
        nn::CrossAttention<T> attn;
        std::vector<T> a_nn, a_conv, a_cat, a_attn;
        int H = 0, W = 0;
    };

    UNetConfig cfg_;
    nn::ParamStore<T> ps_;
    size_t gen_tok_off_ = 0;

    nn::Linear<T> t1_, t2_;
    nn::SiLU<T> t_act_;
    nn::Conv2d<T> stem_;
    std::vector<Down> down_;
    nn::ResBlock<T> mid1_, mid2_;
    nn::CrossAttention<T> mid_attn_;
    std::vector<Up> up_;  // indexed by level, applied high level to low
    nn::GroupNorm<T> head_gn_;
    nn::SiLU<T> head_act_;
    nn::Conv2d<T> head_conv_;

    int H_ = 0, W_ = 0;
    std::vector<T> temb_sin_, temb_;
    std::vector<T> a_stem_, a_mid1_, a_mid_attn_, a_mid2_, a_head_;
    std::vector<T> up_rb_out_;  // per-level rb outputs live in up_[l].a_attn path
};

// Wraps a float UNet behind the sampler-facing interface.
class VPredictor {
public:
    virtual ~VPredictor() = default;
    virtual LatentGrid predict_v(const LatentGrid& z_t, int t, const ConditioningBundle& cond) = 0;
};

class Denoiser : public VPredictor {
public:
    explicit Denoiser(const UNetConfig& cfg) : net_(cfg) {}
    LatentGrid predict_v(const LatentGrid& z_t, int t, const ConditioningBundle& cond) override;

    UNet<float>& net() { return net_; }
    const UNet<float>& net() const { return net_; }
    MorphologyTokens generation_token() const;

private:
    UNet<float> net_;
};

// Splits the image into non-overlapping patch x patch tiles, standardizes each,
// and projects through a fixed seeded Gaussian matrix. Token order is row-major.
MorphologyTokens embed_morphology(const ImageRGB& img, int d_tok, int patch, uint64_t seed);

ConditioningBundle make_translation_cond(const LatentGrid& structural, MorphologyTokens tokens);
ConditioningBundle make_generation_cond(int channels, int height, int width);

}  // namespace restain
