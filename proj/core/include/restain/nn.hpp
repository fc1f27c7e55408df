#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "restain/rng.hpp"

namespace restain::nn {

enum class InitKind { Zero, One, FanInUniform };

// Flat storage for all trainable tensors, addressed by offset.
// Offsets stay valid as entries are appended.
template <typename T>
class ParamStore {
public:
    struct Entry {
        std::string name;
        std::vector<int> shape;
        size_t offset = 0;
        size_t size = 0;
        InitKind init = InitKind::Zero;
        int fan_in = 1;
    };

    size_t add(const std::string& name, std::vector<int> shape, InitKind init, int fan_in = 1);
    void init_values(Rng& rng);  // fills values in registration order
    void zero_grad();

    size_t offset_of(const std::string& name) const;
    const Entry* find(const std::string& name) const;
    const std::vector<Entry>& entries() const { return entries_; }
    size_t total() const { return values.size(); }

    std::vector<T> values;
    std::vector<T> grads;

private:
    std::vector<Entry> entries_;
    std::unordered_map<std::string, size_t> by_name_;
};

template <typename T>
struct Conv2d {
    int cin = 0, cout = 0, k = 3, stride = 1, pad = 1;
    size_t w_off = 0, b_off = 0;

    int H = 0, W = 0, Ho = 0, Wo = 0;
    std::vector<T> col;  // saved patch matrix [cin*k*k, Ho*Wo]

    void init(ParamStore<T>& ps, const std::string& name, int cin, int cout, int k, int stride,
              bool zero_init = false);
    void forward(const ParamStore<T>& ps, const T* x, int H, int W, T* y);
    // accumulates weight grads; dx may be nullptr to skip input grad
    void backward(ParamStore<T>& ps, const T* dy, T* dx);

    int out_h(int h) const { return (h + 2 * pad - k) / stride + 1; }
    int out_w(int w) const { return (w + 2 * pad - k) / stride + 1; }
};

template <typename T>
struct GroupNorm {
    int C = 0, groups = 8;
    size_t g_off = 0, b_off = 0;

    int HW = 0;
    std::vector<T> xhat;
    std::vector<double> inv_std;  // per group

    void init(ParamStore<T>& ps, const std::string& name, int C, int groups = 8);
    void forward(const ParamStore<T>& ps, const T* x, int HW, T* y);
    void backward(ParamStore<T>& ps, const T* dy, T* dx);
};

template <typename T>
struct SiLU {
    std::vector<T> x_saved;
    void forward(const T* x, size_t n, T* y);
    void backward(const T* dy, T* dx);
};

template <typename T>
struct Linear {
    int in = 0, out = 0;
    bool has_bias = true;
    size_t w_off = 0, b_off = 0;

    int N = 0;
    std::vector<T> x_saved;  // [N, in]

    void init(ParamStore<T>& ps, const std::string& name, int in, int out, bool bias = true);
    void forward(const ParamStore<T>& ps, const T* x, int N, T* y);  // y = x W^T + b, row-major
    void backward(ParamStore<T>& ps, const T* dy, T* dx);
};

// Spatial features attend to an external token sequence; residual output.
template <typename T>
struct CrossAttention {
    int C = 0, d_tok = 0, heads = 1;
    GroupNorm<T> gn;
    size_t wq_off = 0, wk_off = 0, wv_off = 0, wo_off = 0, bo_off = 0;

    int HW = 0, M = 0;
    std::vector<T> xn;   // [C, HW] after norm
    std::vector<T> Q;    // [C, HW]
    std::vector<T> K, V; // [C, M]
    std::vector<T> A;    // [heads, HW, M] softmaxed attention
    std::vector<T> O;    // [C, HW] pre-projection head outputs
    std::vector<T> tok_saved;  // [M, d_tok]

    void init(ParamStore<T>& ps, const std::string& name, int C, int d_tok, int heads,
              int groups = 8);
    void forward(const ParamStore<T>& ps, const T* x, int H, int W, const T* tokens, int M, T* y);
    // dtokens (shape [M, d_tok]) accumulated when non-null
    void backward(ParamStore<T>& ps, const T* dy, T* dx, T* dtokens);
};

template <typename T>
struct ResBlock {
    int cin = 0, cout = 0, temb_dim = 0;
    GroupNorm<T> gn1, gn2;
    SiLU<T> act1, act2, act_t;
    Conv2d<T> conv1, conv2, skip;
    Linear<T> time_proj;
    bool has_skip = false;

    int H = 0, W = 0;
    std::vector<T> b1, h, b2, h2;  // intermediates kept for backward wiring

    void init(ParamStore<T>& ps, const std::string& name, int cin, int cout, int temb_dim,
              int groups = 8);
    void forward(const ParamStore<T>& ps, const T* x, int H, int W, const T* temb, T* y);
    void backward(ParamStore<T>& ps, const T* dy, T* dx, T* dtemb);
};

// out[i] = sin(t * f_i), out[half+i] = cos(t * f_i), f_i = exp(-ln(10000) * i / half)
template <typename T>
void timestep_embedding(double t, int dim, T* out);

template <typename T>
void upsample_nearest2x(const T* x, int C, int H, int W, T* y);
template <typename T>
void upsample_nearest2x_backward(const T* dy, int C, int H, int W, T* dx);

}  // namespace restain::nn
