#include "restain/nn.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace restain::nn {

namespace {

template <typename T>
using MatRM = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using MapM = Eigen::Map<MatRM<T>>;
template <typename T>
using MapC = Eigen::Map<const MatRM<T>>;

template <typename T>
T sigmoid(T x) {
    return T(1) / (T(1) + std::exp(-x));
}

}  // namespace

// ---------------------------------------------------------------- ParamStore

template <typename T>
size_t ParamStore<T>::add(const std::string& name, std::vector<int> shape, InitKind init,
                          int fan_in) {
    if (by_name_.count(name)) throw std::logic_error("ParamStore: duplicate tensor " + name);
    size_t sz = 1;
    for (int d : shape) {
        if (d <= 0) throw std::logic_error("ParamStore: bad shape for " + name);
        sz *= size_t(d);
    }
    Entry e;
    e.name = name;
    e.shape = std::move(shape);
    e.offset = values.size();
    e.size = sz;
    e.init = init;
    e.fan_in = fan_in;
    by_name_[name] = entries_.size();
    entries_.push_back(std::move(e));
    values.resize(values.size() + sz, T(0));
    grads.resize(values.size(), T(0));
    return entries_.back().offset;
}

template <typename T>
void ParamStore<T>::init_values(Rng& rng) {
    for (const Entry& e : entries_) {
        T* p = values.data() + e.offset;
        switch (e.init) {
            case InitKind::Zero:
                std::fill(p, p + e.size, T(0));
                break;
            case InitKind::One:
                std::fill(p, p + e.size, T(1));
                break;
            case InitKind::FanInUniform: {
                const double bound = 1.0 / std::sqrt(double(e.fan_in));
                for (size_t i = 0; i < e.size; ++i) {
                    p[i] = T((2.0 * rng.uniform() - 1.0) * bound);
                }
                break;
            }
        }
    }
}

template <typename T>
void ParamStore<T>::zero_grad() {
    std::fill(grads.begin(), grads.end(), T(0));
}

template <typename T>
size_t ParamStore<T>::offset_of(const std::string& name) const {
    auto it = by_name_.find(name);
    if (it == by_name_.end()) throw std::out_of_range("ParamStore: no tensor " + name);
    return entries_[it->second].offset;
}

template <typename T>
const typename ParamStore<T>::Entry* ParamStore<T>::find(const std::string& name) const {
    auto it = by_name_.find(name);
    return it == by_name_.end() ? nullptr : &entries_[it->second];
}

// -------------------------------------------------------------------- Conv2d

template <typename T>
void Conv2d<T>::init(ParamStore<T>& ps, const std::string& name, int cin_, int cout_, int k_,
                     int stride_, bool zero_init) {
    cin = cin_;
    cout = cout_;
    k = k_;
    stride = stride_;
    pad = (k == 3) ? 1 : 0;
    const int fan = cin * k * k;
    const InitKind kind = zero_init ? InitKind::Zero : InitKind::FanInUniform;
    w_off = ps.add(name + ".w", {cout, cin, k, k}, kind, fan);
    b_off = ps.add(name + ".b", {cout}, kind, fan);
}

template <typename T>
void Conv2d<T>::forward(const ParamStore<T>& ps, const T* x, int H_, int W_, T* y) {
    H = H_;
    W = W_;
    Ho = out_h(H);
    Wo = out_w(W);
    const int KK = cin * k * k;
    const size_t P = size_t(Ho) * Wo;
    col.assign(size_t(KK) * P, T(0));
    for (int c = 0; c < cin; ++c) {
        const T* xc = x + size_t(c) * H * W;
        for (int ky = 0; ky < k; ++ky) {
            for (int kx = 0; kx < k; ++kx) {
                T* crow = col.data() + (size_t(c) * k * k + size_t(ky) * k + kx) * P;
                int ox_lo = 0;
                while (ox_lo < Wo && ox_lo * stride + kx - pad < 0) ++ox_lo;
                int ox_hi = Wo;
                while (ox_hi > ox_lo && (ox_hi - 1) * stride + kx - pad >= W) --ox_hi;
                for (int oy = 0; oy < Ho; ++oy) {
                    const int iy = oy * stride + ky - pad;
                    if (iy < 0 || iy >= H) continue;
                    T* dstrow = crow + size_t(oy) * Wo;
                    const T* xrow = xc + size_t(iy) * W;
                    for (int ox = ox_lo; ox < ox_hi; ++ox) {
                        dstrow[ox] = xrow[ox * stride + kx - pad];
                    }
                }
            }
        }
    }
    MapC<T> Wm(ps.values.data() + w_off, cout, KK);
    MapC<T> Cm(col.data(), KK, Eigen::Index(P));
    MapM<T> Ym(y, cout, Eigen::Index(P));
    Ym.noalias() = Wm * Cm;
    const T* b = ps.values.data() + b_off;
    for (int o = 0; o < cout; ++o) Ym.row(o).array() += b[o];
}

template <typename T>
void Conv2d<T>::backward(ParamStore<T>& ps, const T* dy, T* dx) {
    const int KK = cin * k * k;
    const size_t P = size_t(Ho) * Wo;
    MapC<T> dYm(dy, cout, Eigen::Index(P));
    MapC<T> Cm(col.data(), KK, Eigen::Index(P));
    MapM<T> dWm(ps.grads.data() + w_off, cout, KK);
    dWm.noalias() += dYm * Cm.transpose();
    T* db = ps.grads.data() + b_off;
    for (int o = 0; o < cout; ++o) db[o] += dYm.row(o).sum();
    if (!dx) return;

    MapC<T> Wm(ps.values.data() + w_off, cout, KK);
    MatRM<T> dCol(KK, Eigen::Index(P));
    dCol.noalias() = Wm.transpose() * dYm;
    std::fill(dx, dx + size_t(cin) * H * W, T(0));
    for (int c = 0; c < cin; ++c) {
        T* dxc = dx + size_t(c) * H * W;
        for (int ky = 0; ky < k; ++ky) {
            for (int kx = 0; kx < k; ++kx) {
                const T* drow = dCol.data() + (size_t(c) * k * k + size_t(ky) * k + kx) * P;
                int ox_lo = 0;
                while (ox_lo < Wo && ox_lo * stride + kx - pad < 0) ++ox_lo;
                int ox_hi = Wo;
                while (ox_hi > ox_lo && (ox_hi - 1) * stride + kx - pad >= W) --ox_hi;
                for (int oy = 0; oy < Ho; ++oy) {
                    const int iy = oy * stride + ky - pad;
                    if (iy < 0 || iy >= H) continue;
                    const T* srow = drow + size_t(oy) * Wo;
                    T* dxrow = dxc + size_t(iy) * W;
                    for (int ox = ox_lo; ox < ox_hi; ++ox) {
                        dxrow[ox * stride + kx - pad] += srow[ox];
                    }
                }
            }
        }
    }
}

// ----------------------------------------------------------------- GroupNorm

template <typename T>
void GroupNorm<T>::init(ParamStore<T>& ps, const std::string& name, int C_, int groups_) {
    C = C_;
    groups = groups_;
    if (C % groups != 0) throw std::logic_error("GroupNorm: channels not divisible by groups");
    g_off = ps.add(name + ".g", {C}, InitKind::One);
    b_off = ps.add(name + ".b", {C}, InitKind::Zero);
}

template <typename T>
void GroupNorm<T>::forward(const ParamStore<T>& ps, const T* x, int HW_, T* y) {
    HW = HW_;
    const int cpg = C / groups;
    xhat.resize(size_t(C) * HW);
    inv_std.assign(groups, 0.0);
    const T* g = ps.values.data() + g_off;
    const T* b = ps.values.data() + b_off;
    for (int gi = 0; gi < groups; ++gi) {
        const size_t base = size_t(gi) * cpg * HW;
        const size_t m = size_t(cpg) * HW;
        double mean = 0.0;
        for (size_t i = 0; i < m; ++i) mean += double(x[base + i]);
        mean /= double(m);
        double var = 0.0;
        for (size_t i = 0; i < m; ++i) {
            const double d = double(x[base + i]) - mean;
            var += d * d;
        }
        var /= double(m);
        const double is = 1.0 / std::sqrt(var + 1e-5);
        inv_std[gi] = is;
        for (int c = gi * cpg; c < (gi + 1) * cpg; ++c) {
            const T* xc = x + size_t(c) * HW;
            T* xh = xhat.data() + size_t(c) * HW;
            T* yc = y + size_t(c) * HW;
            const double gc = double(g[c]), bc = double(b[c]);
            for (int i = 0; i < HW; ++i) {
                const double v = (double(xc[i]) - mean) * is;
                xh[i] = T(v);
                yc[i] = T(gc * v + bc);
            }
        }
    }
}

template <typename T>
void GroupNorm<T>::backward(ParamStore<T>& ps, const T* dy, T* dx) {
    const int cpg = C / groups;
    const T* g = ps.values.data() + g_off;
    T* dg = ps.grads.data() + g_off;
    T* db = ps.grads.data() + b_off;
    for (int gi = 0; gi < groups; ++gi) {
        const double m = double(cpg) * HW;
        double s1 = 0.0, s2 = 0.0;
        for (int c = gi * cpg; c < (gi + 1) * cpg; ++c) {
            const T* dyc = dy + size_t(c) * HW;
            const T* xh = xhat.data() + size_t(c) * HW;
            const double gc = double(g[c]);
            for (int i = 0; i < HW; ++i) {
                const double gg = double(dyc[i]) * gc;
                s1 += gg;
                s2 += gg * double(xh[i]);
            }
        }
        const double is = inv_std[gi];
        const double mu1 = s1 / m, mu2 = s2 / m;
        for (int c = gi * cpg; c < (gi + 1) * cpg; ++c) {
            const T* dyc = dy + size_t(c) * HW;
            const T* xh = xhat.data() + size_t(c) * HW;
            T* dxc = dx + size_t(c) * HW;
            const double gc = double(g[c]);
            double dgc = 0.0, dbc = 0.0;
            for (int i = 0; i < HW; ++i) {
                const double dyv = double(dyc[i]);
                const double xv = double(xh[i]);
                dgc += dyv * xv;
                dbc += dyv;
                dxc[i] = T(is * (dyv * gc - mu1 - xv * mu2));
            }
            dg[c] += T(dgc);
            db[c] += T(dbc);
        }
    }
}

// ---------------------------------------------------------------------- SiLU

template <typename T>
void SiLU<T>::forward(const T* x, size_t n, T* y) {
    x_saved.assign(x, x + n);
    for (size_t i = 0; i < n; ++i) {
        const T v = x_saved[i];
        y[i] = v * sigmoid(v);
    }
}

template <typename T>
void SiLU<T>::backward(const T* dy, T* dx) {
    const size_t n = x_saved.size();
    for (size_t i = 0; i < n; ++i) {
        const T v = x_saved[i];
        const T s = sigmoid(v);
        dx[i] = dy[i] * (s * (T(1) + v * (T(1) - s)));
    }
}

// -------------------------------------------------------------------- Linear

template <typename T>
void Linear<T>::init(ParamStore<T>& ps, const std::string& name, int in_, int out_, bool bias) {
    in = in_;
    out = out_;
    has_bias = bias;
    w_off = ps.add(name + ".w", {out, in}, InitKind::FanInUniform, in);
    if (has_bias) b_off = ps.add(name + ".b", {out}, InitKind::FanInUniform, in);
}

template <typename T>
void Linear<T>::forward(const ParamStore<T>& ps, const T* x, int N_, T* y) {
    N = N_;
    x_saved.assign(x, x + size_t(N) * in);
    MapC<T> X(x, N, in);
    MapC<T> Wm(ps.values.data() + w_off, out, in);
    MapM<T> Y(y, N, out);
    Y.noalias() = X * Wm.transpose();
    if (has_bias) {
        Eigen::Map<const Eigen::Matrix<T, 1, Eigen::Dynamic>> b(ps.values.data() + b_off, out);
        Y.rowwise() += b;
    }
}

template <typename T>
void Linear<T>::backward(ParamStore<T>& ps, const T* dy, T* dx) {
    MapC<T> dY(dy, N, out);
    MapC<T> X(x_saved.data(), N, in);
    MapM<T> dW(ps.grads.data() + w_off, out, in);
    dW.noalias() += dY.transpose() * X;
    if (has_bias) {
        T* db = ps.grads.data() + b_off;
        for (int o = 0; o < out; ++o) db[o] += dY.col(o).sum();
    }
    if (dx) {
        MapC<T> Wm(ps.values.data() + w_off, out, in);
        MapM<T> dX(dx, N, in);
        dX.noalias() = dY * Wm;
    }
}

// ------------------------------------------------------------ CrossAttention

template <typename T>
void CrossAttention<T>::init(ParamStore<T>& ps, const std::string& name, int C_, int d_tok_,
                             int heads_, int groups) {
    C = C_;
    d_tok = d_tok_;
    heads = heads_;
    if (C % heads != 0) throw std::logic_error("CrossAttention: channels not divisible by heads");
    gn.init(ps, name + ".gn", C, groups);
    wq_off = ps.add(name + ".wq", {C, C}, InitKind::FanInUniform, C);
    wk_off = ps.add(name + ".wk", {C, d_tok}, InitKind::FanInUniform, d_tok);
    wv_off = ps.add(name + ".wv", {C, d_tok}, InitKind::FanInUniform, d_tok);
    wo_off = ps.add(name + ".wo", {C, C}, InitKind::FanInUniform, C);
    bo_off = ps.add(name + ".bo", {C}, InitKind::FanInUniform, C);
}

template <typename T>
void CrossAttention<T>::forward(const ParamStore<T>& ps, const T* x, int H, int W,
                                const T* tokens, int M_, T* y) {
    HW = H * W;
    M = M_;
    const int dh = C / heads;
    xn.resize(size_t(C) * HW);
    gn.forward(ps, x, HW, xn.data());
    tok_saved.assign(tokens, tokens + size_t(M) * d_tok);

    Q.resize(size_t(C) * HW);
    K.resize(size_t(C) * M);
    V.resize(size_t(C) * M);
    MapC<T> Xn(xn.data(), C, HW);
    MapC<T> Tok(tokens, M, d_tok);
    MapM<T>(Q.data(), C, HW).noalias() = MapC<T>(ps.values.data() + wq_off, C, C) * Xn;
    MapM<T>(K.data(), C, M).noalias() =
        MapC<T>(ps.values.data() + wk_off, C, d_tok) * Tok.transpose();
    MapM<T>(V.data(), C, M).noalias() =
        MapC<T>(ps.values.data() + wv_off, C, d_tok) * Tok.transpose();

    const T scale = T(1.0 / std::sqrt(double(dh)));
    A.resize(size_t(heads) * HW * M);
    O.resize(size_t(C) * HW);
    for (int h = 0; h < heads; ++h) {
        MapC<T> Qh(Q.data() + size_t(h) * dh * HW, dh, HW);
        MapC<T> Kh(K.data() + size_t(h) * dh * M, dh, M);
        MapC<T> Vh(V.data() + size_t(h) * dh * M, dh, M);
        MapM<T> Ah(A.data() + size_t(h) * HW * M, HW, M);
        Ah.noalias() = (Qh.transpose() * Kh) * scale;
        for (int r = 0; r < HW; ++r) {
            T* row = A.data() + size_t(h) * HW * M + size_t(r) * M;
            T mx = row[0];
            for (int j = 1; j < M; ++j) mx = std::max(mx, row[j]);
            double sum = 0.0;
            for (int j = 0; j < M; ++j) {
                const double e = std::exp(double(row[j] - mx));
                row[j] = T(e);
                sum += e;
            }
            const double invs = 1.0 / sum;
            for (int j = 0; j < M; ++j) row[j] = T(double(row[j]) * invs);
        }
        MapM<T> Oh(O.data() + size_t(h) * dh * HW, dh, HW);
        Oh.noalias() = Vh * Ah.transpose();
    }
    MapM<T> Y(y, C, HW);
    Y.noalias() = MapC<T>(ps.values.data() + wo_off, C, C) * MapC<T>(O.data(), C, HW);
    const T* bo = ps.values.data() + bo_off;
    for (int c = 0; c < C; ++c) Y.row(c).array() += bo[c];
    Y += MapC<T>(x, C, HW);
}

template <typename T>
void CrossAttention<T>::backward(ParamStore<T>& ps, const T* dy, T* dx, T* dtokens) {
    const int dh = C / heads;
    const T scale = T(1.0 / std::sqrt(double(dh)));
    MapC<T> dY(dy, C, HW);

    MapM<T> dWo(ps.grads.data() + wo_off, C, C);
    dWo.noalias() += dY * MapC<T>(O.data(), C, HW).transpose();
    T* dbo = ps.grads.data() + bo_off;
    for (int c = 0; c < C; ++c) dbo[c] += dY.row(c).sum();
    MatRM<T> dO(C, HW);
    dO.noalias() = MapC<T>(ps.values.data() + wo_off, C, C).transpose() * dY;

    MatRM<T> dQ(C, HW), dK(C, M), dV(C, M);
    for (int h = 0; h < heads; ++h) {
        MapC<T> Ah(A.data() + size_t(h) * HW * M, HW, M);
        MapC<T> Vh(V.data() + size_t(h) * dh * M, dh, M);
        auto dOh = dO.block(h * dh, 0, dh, HW);
        dV.block(h * dh, 0, dh, M).noalias() = dOh * Ah;
        MatRM<T> dAh(HW, M);
        dAh.noalias() = dOh.transpose() * Vh;
        for (int r = 0; r < HW; ++r) {
            const T* a = A.data() + size_t(h) * HW * M + size_t(r) * M;
            T* da = dAh.data() + size_t(r) * M;
            double dot = 0.0;
            for (int j = 0; j < M; ++j) dot += double(da[j]) * double(a[j]);
            for (int j = 0; j < M; ++j) da[j] = T(double(a[j]) * (double(da[j]) - dot));
        }
        MapC<T> Qh(Q.data() + size_t(h) * dh * HW, dh, HW);
        MapC<T> Kh(K.data() + size_t(h) * dh * M, dh, M);
        dQ.block(h * dh, 0, dh, HW).noalias() = (Kh * dAh.transpose()) * scale;
        dK.block(h * dh, 0, dh, M).noalias() = (Qh * dAh) * scale;
    }

    MapC<T> Xn(xn.data(), C, HW);
    MapM<T> dWq(ps.grads.data() + wq_off, C, C);
    dWq.noalias() += dQ * Xn.transpose();
    MatRM<T> dXn(C, HW);
    dXn.noalias() = MapC<T>(ps.values.data() + wq_off, C, C).transpose() * dQ;

    MapC<T> Tok(tok_saved.data(), M, d_tok);
    MapM<T> dWk(ps.grads.data() + wk_off, C, d_tok);
    dWk.noalias() += dK * Tok;
    MapM<T> dWv(ps.grads.data() + wv_off, C, d_tok);
    dWv.noalias() += dV * Tok;
    if (dtokens) {
        MapM<T> dTok(dtokens, M, d_tok);
        dTok.noalias() += dK.transpose() * MapC<T>(ps.values.data() + wk_off, C, d_tok);
        dTok.noalias() += dV.transpose() * MapC<T>(ps.values.data() + wv_off, C, d_tok);
    }

    gn.backward(ps, dXn.data(), dx);
    MapM<T>(dx, C, HW) += dY;
}

// ------------------------------------------------------------------ ResBlock

template <typename T>
void ResBlock<T>::init(ParamStore<T>& ps, const std::string& name, int cin_, int cout_,
                       int temb_dim_, int groups) {
    cin = cin_;
    cout = cout_;
    temb_dim = temb_dim_;
    gn1.init(ps, name + ".gn1", cin, groups);
    conv1.init(ps, name + ".conv1", cin, cout, 3, 1);
    time_proj.init(ps, name + ".temb", temb_dim, cout, true);
    gn2.init(ps, name + ".gn2", cout, groups);
    conv2.init(ps, name + ".conv2", cout, cout, 3, 1);
    has_skip = (cin != cout);
    if (has_skip) skip.init(ps, name + ".skip", cin, cout, 1, 1);
}

template <typename T>
void ResBlock<T>::forward(const ParamStore<T>& ps, const T* x, int H_, int W_, const T* temb,
                          T* y) {
    H = H_;
    W = W_;
    const size_t HWn = size_t(H) * W;
    b1.resize(size_t(cin) * HWn);
    gn1.forward(ps, x, int(HWn), b1.data());
    act1.forward(b1.data(), b1.size(), b1.data());
    h.resize(size_t(cout) * HWn);
    conv1.forward(ps, b1.data(), H, W, h.data());

    std::vector<T> tt(temb_dim), tp(cout);
    act_t.forward(temb, size_t(temb_dim), tt.data());
    time_proj.forward(ps, tt.data(), 1, tp.data());
    for (int c = 0; c < cout; ++c) {
        T* hc = h.data() + size_t(c) * HWn;
        const T add = tp[c];
        for (size_t i = 0; i < HWn; ++i) hc[i] += add;
    }

    b2.resize(size_t(cout) * HWn);
    gn2.forward(ps, h.data(), int(HWn), b2.data());
    act2.forward(b2.data(), b2.size(), b2.data());
    conv2.forward(ps, b2.data(), H, W, y);

    if (has_skip) {
        h2.resize(size_t(cout) * HWn);
        skip.forward(ps, x, H, W, h2.data());
        for (size_t i = 0; i < size_t(cout) * HWn; ++i) y[i] += h2[i];
    } else {
        for (size_t i = 0; i < size_t(cout) * HWn; ++i) y[i] += x[i];
    }
}

template <typename T>
void ResBlock<T>::backward(ParamStore<T>& ps, const T* dy, T* dx, T* dtemb) {
    const size_t HWn = size_t(H) * W;
    std::vector<T> g2(size_t(cout) * HWn);
    conv2.backward(ps, dy, g2.data());
    act2.backward(g2.data(), g2.data());
    std::vector<T> gh(size_t(cout) * HWn);
    gn2.backward(ps, g2.data(), gh.data());

    std::vector<T> dtp(cout), dtt(temb_dim);
    for (int c = 0; c < cout; ++c) {
        double acc = 0.0;
        const T* ghc = gh.data() + size_t(c) * HWn;
        for (size_t i = 0; i < HWn; ++i) acc += double(ghc[i]);
        dtp[c] = T(acc);
    }
    time_proj.backward(ps, dtp.data(), dtt.data());
    act_t.backward(dtt.data(), dtt.data());
    for (int i = 0; i < temb_dim; ++i) dtemb[i] += dtt[i];

    std::vector<T> g1(size_t(cin) * HWn);
    conv1.backward(ps, gh.data(), g1.data());
    act1.backward(g1.data(), g1.data());
    gn1.backward(ps, g1.data(), dx);

    if (has_skip) {
        std::vector<T> gs(size_t(cin) * HWn);
        skip.backward(ps, dy, gs.data());
        for (size_t i = 0; i < size_t(cin) * HWn; ++i) dx[i] += gs[i];
    } else {
        for (size_t i = 0; i < size_t(cin) * HWn; ++i) dx[i] += dy[i];
    }
}

// ------------------------------------------------------------------- helpers

template <typename T>
void timestep_embedding(double t, int dim, T* out) {
    const int half = dim / 2;
    for (int i = 0; i < half; ++i) {
        const double f = std::exp(-std::log(10000.0) * double(i) / double(half));
        out[i] = T(std::sin(t * f));
        out[half + i] = T(std::cos(t * f));
    }
}

template <typename T>
void upsample_nearest2x(const T* x, int C, int H, int W, T* y) {
    for (int c = 0; c < C; ++c) {
        const T* xc = x + size_t(c) * H * W;
        T* yc = y + size_t(c) * 4 * H * W;
        for (int i = 0; i < 2 * H; ++i) {
            const T* xrow = xc + size_t(i / 2) * W;
            T* yrow = yc + size_t(i) * 2 * W;
            for (int j = 0; j < 2 * W; ++j) yrow[j] = xrow[j / 2];
        }
    }
}

template <typename T>
void upsample_nearest2x_backward(const T* dy, int C, int H, int W, T* dx) {
    for (int c = 0; c < C; ++c) {
        const T* dyc = dy + size_t(c) * 4 * H * W;
        T* dxc = dx + size_t(c) * H * W;
        for (int i = 0; i < H; ++i) {
            for (int j = 0; j < W; ++j) {
                const T* r0 = dyc + size_t(2 * i) * 2 * W + 2 * j;
                const T* r1 = dyc + size_t(2 * i + 1) * 2 * W + 2 * j;
                dxc[size_t(i) * W + j] = r0[0] + r0[1] + r1[0] + r1[1];
            }
        }
    }
}

#define RESTAIN_NN_INSTANTIATE(T)                                     \
    template class ParamStore<T>;                                     \
    template struct Conv2d<T>;                                        \
    template struct GroupNorm<T>;                                     \
    template struct SiLU<T>;                                          \
    template struct Linear<T>;                                        \
    template struct CrossAttention<T>;                                \
    template struct ResBlock<T>;                                      \
    template void timestep_embedding<T>(double, int, T*);             \
    template void upsample_nearest2x<T>(const T*, int, int, int, T*); \
    template void upsample_nearest2x_backward<T>(const T*, int, int, int, T*);

RESTAIN_NN_INSTANTIATE(float)
RESTAIN_NN_INSTANTIATE(double)
#undef RESTAIN_NN_INSTANTIATE

}  // namespace restain::nn
