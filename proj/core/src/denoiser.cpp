#include "restain/denoiser.hpp"

#include <cmath>
#include <cstring>
#include <stdexcept>

#include "restain/errors.hpp"
#include "restain/rng.hpp"

namespace restain {

template <typename T>
UNet<T>::UNet(const UNetConfig& cfg) : cfg_(cfg) {
    const int b = cfg_.base_width;
    if (b % cfg_.groups != 0) throw ValidationError("unet: base width not divisible by groups");
    if (b % cfg_.heads != 0) throw ValidationError("unet: base width not divisible by heads");
    if (cfg_.levels < 1) throw ValidationError("unet: need at least one level");
    const int td = 4 * b;

    t1_.init(ps_, "temb.fc1", b, td);
    t2_.init(ps_, "temb.fc2", td, td);
    stem_.init(ps_, "stem", cfg_.in_channels, b, 3, 1);

    down_.resize(cfg_.levels);
    for (int l = 0; l < cfg_.levels; ++l) {
        const int w_l = b << l;
        const int cin = (l == 0) ? b : (b << (l - 1));
        const std::string p = "down" + std::to_string(l);
        down_[l].rb.init(ps_, p + ".rb", cin, w_l, td, cfg_.groups);
        down_[l].attn.init(ps_, p + ".attn", w_l, cfg_.d_tok, cfg_.heads, cfg_.groups);
        down_[l].down.init(ps_, p + ".ds", w_l, w_l, 3, 2);
    }
    const int mw = b << cfg_.levels;
    mid1_.init(ps_, "mid.rb1", b << (cfg_.levels - 1), mw, td, cfg_.groups);
    mid_attn_.init(ps_, "mid.attn", mw, cfg_.d_tok, cfg_.heads, cfg_.groups);
    mid2_.init(ps_, "mid.rb2", mw, mw, td, cfg_.groups);

    up_.resize(cfg_.levels);
    for (int l = cfg_.levels - 1; l >= 0; --l) {
        const int w_l = b << l;
        const int cin = (l == cfg_.levels - 1) ? mw : (b << (l + 1));
        const std::string p = "up" + std::to_string(l);
        up_[l].conv.init(ps_, p + ".conv", cin, w_l, 3, 1);
        up_[l].rb.init(ps_, p + ".rb", 2 * w_l, w_l, td, cfg_.groups);
        up_[l].attn.init(ps_, p + ".attn", w_l, cfg_.d_tok, cfg_.heads, cfg_.groups);
    }
    head_gn_.init(ps_, "head.gn", b, cfg_.groups);
    head_conv_.init(ps_, "head.conv", b, cfg_.out_channels, 3, 1, /*zero_init=*/true);

    gen_tok_off_ = ps_.add("gen_token", {1, cfg_.d_tok}, nn::InitKind::FanInUniform, cfg_.d_tok);
}

template <typename T>
void UNet<T>::init_params(uint64_t seed) {
    Rng rng = derive_rng(seed, Stream::ParamInit, 0);
    ps_.init_values(rng);
}

template <typename T>
void UNet<T>::forward(const T* x_in, int H, int W, int t, const T* tokens, int n_tok, T* v_out) {
    if (H % (1 << cfg_.levels) != 0 || W % (1 << cfg_.levels) != 0) {
        throw ValidationError("unet: spatial dims must be divisible by 2^levels");
    }
    if (n_tok < 1) throw ValidationError("unet: need at least one conditioning token");
    H_ = H;
    W_ = W;
    const int b = cfg_.base_width;
    const int td = 4 * b;

    temb_sin_.resize(b);
    nn::timestep_embedding(double(t), b, temb_sin_.data());
    std::vector<T> tmid(td);
    t1_.forward(ps_, temb_sin_.data(), 1, tmid.data());
    t_act_.forward(tmid.data(), tmid.size(), tmid.data());
    temb_.resize(td);
    t2_.forward(ps_, tmid.data(), 1, temb_.data());

    a_stem_.resize(size_t(b) * H * W);
    stem_.forward(ps_, x_in, H, W, a_stem_.data());

    const T* cur = a_stem_.data();
    int hh = H, ww = W;
    for (int l = 0; l < cfg_.levels; ++l) {
        Down& d = down_[l];
        const int w_l = b << l;
        d.H = hh;
        d.W = ww;
        d.a_rb.resize(size_t(w_l) * hh * ww);
        d.rb.forward(ps_, cur, hh, ww, temb_.data(), d.a_rb.data());
        d.a_attn.resize(size_t(w_l) * hh * ww);
        d.attn.forward(ps_, d.a_rb.data(), hh, ww, tokens, n_tok, d.a_attn.data());
        hh /= 2;
        ww /= 2;
        d.a_down.resize(size_t(w_l) * hh * ww);
        d.down.forward(ps_, d.a_attn.data(), d.H, d.W, d.a_down.data());
        cur = d.a_down.data();
    }

    const int mw = b << cfg_.levels;
    a_mid1_.resize(size_t(mw) * hh * ww);
    mid1_.forward(ps_, cur, hh, ww, temb_.data(), a_mid1_.data());
    a_mid_attn_.resize(size_t(mw) * hh * ww);
    mid_attn_.forward(ps_, a_mid1_.data(), hh, ww, tokens, n_tok, a_mid_attn_.data());
    a_mid2_.resize(size_t(mw) * hh * ww);
    mid2_.forward(ps_, a_mid_attn_.data(), hh, ww, temb_.data(), a_mid2_.data());
    cur = a_mid2_.data();
    int ch = mw;

    for (int l = cfg_.levels - 1; l >= 0; --l) {
        Up& u = up_[l];
        const int w_l = b << l;
        u.H = hh * 2;
        u.W = ww * 2;
        const size_t hw = size_t(u.H) * u.W;
        u.a_nn.resize(size_t(ch) * hw);
        nn::upsample_nearest2x(cur, ch, hh, ww, u.a_nn.data());
        u.a_conv.resize(size_t(w_l) * hw);
        u.conv.forward(ps_, u.a_nn.data(), u.H, u.W, u.a_conv.data());
        u.a_cat.resize(size_t(2 * w_l) * hw);
        std::memcpy(u.a_cat.data(), u.a_conv.data(), sizeof(T) * size_t(w_l) * hw);
        std::memcpy(u.a_cat.data() + size_t(w_l) * hw, down_[l].a_attn.data(),
                    sizeof(T) * size_t(w_l) * hw);
        up_rb_out_.resize(size_t(w_l) * hw);
        u.rb.forward(ps_, u.a_cat.data(), u.H, u.W, temb_.data(), up_rb_out_.data());
        u.a_attn.resize(size_t(w_l) * hw);
        u.attn.forward(ps_, up_rb_out_.data(), u.H, u.W, tokens, n_tok, u.a_attn.data());
        cur = u.a_attn.data();
        ch = w_l;
        hh = u.H;
        ww = u.W;
    }

    a_head_.resize(size_t(b) * H * W);
    head_gn_.forward(ps_, cur, H * W, a_head_.data());
    head_act_.forward(a_head_.data(), a_head_.size(), a_head_.data());
    head_conv_.forward(ps_, a_head_.data(), H, W, v_out);
}

template <typename T>
void UNet<T>::backward(const T* dv, T* dtokens) {
    const int b = cfg_.base_width;
    const int td = 4 * b;
    std::vector<T> dtemb(td, T(0));

    std::vector<T> g(size_t(b) * H_ * W_);
    head_conv_.backward(ps_, dv, g.data());
    head_act_.backward(g.data(), g.data());
    std::vector<T> cur(size_t(b) * H_ * W_);
    head_gn_.backward(ps_, g.data(), cur.data());

    std::vector<std::vector<T>> dskip(cfg_.levels);
    for (int l = 0; l < cfg_.levels; ++l) {
        Up& u = up_[l];
        const int w_l = b << l;
        const size_t hw = size_t(u.H) * u.W;
        std::vector<T> d_rb(size_t(w_l) * hw);
        u.attn.backward(ps_, cur.data(), d_rb.data(), dtokens);
        std::vector<T> d_cat(size_t(2 * w_l) * hw);
        u.rb.backward(ps_, d_rb.data(), d_cat.data(), dtemb.data());
        dskip[l].assign(d_cat.begin() + ptrdiff_t(size_t(w_l) * hw), d_cat.end());
        const int cin_up = u.conv.cin;
        std::vector<T> d_nn(size_t(cin_up) * hw);
        u.conv.backward(ps_, d_cat.data(), d_nn.data());
        cur.assign(size_t(cin_up) * hw / 4, T(0));
        nn::upsample_nearest2x_backward(d_nn.data(), cin_up, u.H / 2, u.W / 2, cur.data());
    }

    const int mw = b << cfg_.levels;
    const int hh = H_ >> cfg_.levels, ww = W_ >> cfg_.levels;
    std::vector<T> d_ma(size_t(mw) * hh * ww);
    mid2_.backward(ps_, cur.data(), d_ma.data(), dtemb.data());
    std::vector<T> d_m1(size_t(mw) * hh * ww);
    mid_attn_.backward(ps_, d_ma.data(), d_m1.data(), dtokens);
    const int c_last = b << (cfg_.levels - 1);
    cur.assign(size_t(c_last) * hh * ww, T(0));
    mid1_.backward(ps_, d_m1.data(), cur.data(), dtemb.data());

    for (int l = cfg_.levels - 1; l >= 0; --l) {
        Down& d = down_[l];
        const int w_l = b << l;
        const size_t hw = size_t(d.H) * d.W;
        std::vector<T> d_attn(size_t(w_l) * hw);
        d.down.backward(ps_, cur.data(), d_attn.data());
        for (size_t i = 0; i < d_attn.size(); ++i) d_attn[i] += dskip[l][i];
        std::vector<T> d_rb(size_t(w_l) * hw);
        d.attn.backward(ps_, d_attn.data(), d_rb.data(), dtokens);
        const int cin_l = (l == 0) ? b : (b << (l - 1));
        cur.assign(size_t(cin_l) * hw, T(0));
        d.rb.backward(ps_, d_rb.data(), cur.data(), dtemb.data());
    }
    stem_.backward(ps_, cur.data(), nullptr);

    std::vector<T> d_tm(td);
    t2_.backward(ps_, dtemb.data(), d_tm.data());
    t_act_.backward(d_tm.data(), d_tm.data());
    t1_.backward(ps_, d_tm.data(), nullptr);
}

template class UNet<float>;
template class UNet<double>;

LatentGrid Denoiser::predict_v(const LatentGrid& z_t, int t, const ConditioningBundle& cond) {
    const UNetConfig& cfg = net_.config();
    if (!z_t.same_shape(cond.structural_latent)) {
        throw ValidationError("predict_v: structural latent shape mismatch");
    }
    if (2 * z_t.channels != cfg.in_channels) {
        throw ValidationError("predict_v: latent channel count incompatible with network");
    }
    // t = 0 is legal: inversion queries the model once at the clean state
    if (t < 0) throw ValidationError("predict_v: timestep must be >= 0");

    std::vector<float> x(size_t(cfg.in_channels) * z_t.height * z_t.width);
    std::memcpy(x.data(), z_t.data.data(), sizeof(float) * z_t.size());
    std::memcpy(x.data() + z_t.size(), cond.structural_latent.data.data(),
                sizeof(float) * z_t.size());

    const float* tokens = nullptr;
    int n_tok = 0;
    MorphologyTokens gen;
    if (cond.mode == TaskMode::Generation) {
        gen = generation_token();
        tokens = gen.data.data();
        n_tok = 1;
    } else {
        if (cond.tokens.count < 1 || cond.tokens.d_tok != cfg.d_tok) {
            throw ValidationError("predict_v: bad morphology tokens");
        }
        tokens = cond.tokens.data.data();
        n_tok = cond.tokens.count;
    }

    LatentGrid v(cfg.out_channels, z_t.height, z_t.width);
    net_.forward(x.data(), z_t.height, z_t.width, t, tokens, n_tok, v.data.data());
    for (float f : v.data) {
        if (!std::isfinite(f)) throw NumericError("predict_v: non-finite activation");
    }
    return v;
}

MorphologyTokens Denoiser::generation_token() const {
    const UNetConfig& cfg = net_.config();
    MorphologyTokens tok;
    tok.count = 1;
    tok.d_tok = cfg.d_tok;
    const float* p = net_.params().values.data() + net_.gen_token_offset();
    tok.data.assign(p, p + cfg.d_tok);
    return tok;
}

MorphologyTokens embed_morphology(const ImageRGB& img, int d_tok, int patch, uint64_t seed) {
    if (patch <= 0 || d_tok <= 0) throw ValidationError("embed_morphology: bad dimensions");
    if (img.height % patch != 0 || img.width % patch != 0) {
        throw ValidationError("embed_morphology: patch size must divide image dimensions");
    }
    const int ty_n = img.height / patch;
    const int tx_n = img.width / patch;
    const int dim = 3 * patch * patch;

    Rng rng = derive_rng(seed, Stream::TokenProjection, 0);
    const double scale = 1.0 / std::sqrt(double(dim));
    std::vector<double> proj(size_t(d_tok) * dim);
    for (double& p : proj) p = rng.gaussian() * scale;

    MorphologyTokens out;
    out.count = ty_n * tx_n;
    out.d_tok = d_tok;
    out.data.assign(size_t(out.count) * d_tok, 0.0f);

    std::vector<double> tile(dim);
    for (int ty = 0; ty < ty_n; ++ty) {
        for (int tx = 0; tx < tx_n; ++tx) {
            int idx = 0;
            for (int y = 0; y < patch; ++y) {
                for (int x = 0; x < patch; ++x) {
                    for (int c = 0; c < 3; ++c) {
                        tile[idx++] = double(img.at(ty * patch + y, tx * patch + x, c));
                    }
                }
            }
            double mean = 0.0;
            for (double v : tile) mean += v;
            mean /= dim;
            double var = 0.0;
            for (double v : tile) var += (v - mean) * (v - mean);
            var /= dim;
            float* tok = out.data.data() + size_t(ty * tx_n + tx) * d_tok;
            if (var <= 0.0) continue;  // zero-variance tile maps to the zero token
            const double inv_sd = 1.0 / std::sqrt(var);
            for (int i = 0; i < d_tok; ++i) {
                double acc = 0.0;
                const double* prow = proj.data() + size_t(i) * dim;
                for (int j = 0; j < dim; ++j) acc += prow[j] * (tile[j] - mean) * inv_sd;
                tok[i] = float(acc);
            }
        }
    }
    return out;
}

ConditioningBundle make_translation_cond(const LatentGrid& structural, MorphologyTokens tokens) {
    ConditioningBundle c;
    c.mode = TaskMode::Translation;
    c.structural_latent = structural;
    c.tokens = std::move(tokens);
    return c;
}

ConditioningBundle make_generation_cond(int channels, int height, int width) {
    ConditioningBundle c;
    c.mode = TaskMode::Generation;
    c.structural_latent = LatentGrid(channels, height, width);  // zeros
    return c;
}

}  // namespace restain
