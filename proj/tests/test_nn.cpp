#include <doctest.h>

#include <cmath>
#include <vector>

#include "gradcheck.hpp"
#include "restain/nn.hpp"
#include "restain/rng.hpp"

using namespace restain;
using namespace restain::nn;

namespace {

// Loss = sum(R .* y) with fixed random R: gradient wrt y is just R, so each
// layer's backward can be checked against finite differences of the loss.
struct Probe {
    std::vector<double> r;
    explicit Probe(size_t n, uint64_t seed) : r(n) {
        Rng rng(seed);
        for (auto& v : r) v = rng.gaussian();
    }
    double loss(const double* y) const {
        double acc = 0.0;
        for (size_t i = 0; i < r.size(); ++i) acc += r[i] * y[i];
        return acc;
    }
};

std::vector<double> gaussian_vec(size_t n, uint64_t seed) {
    std::vector<double> v(n);
    Rng rng(seed);
    for (auto& x : v) x = rng.gaussian();
    return v;
}

// Checks d(loss)/d(param[i]) for every parameter and d(loss)/d(x[i]) for
// every input coordinate of a single-layer forward function.
template <typename Fwd, typename Bwd>
void check_layer(ParamStore<double>& ps, std::vector<double>& x, size_t y_size, Fwd fwd, Bwd bwd,
                 double tol = 1e-6) {
    Probe probe(y_size, 99);
    std::vector<double> y(y_size);
    auto loss = [&] {
        fwd(x.data(), y.data());
        return probe.loss(y.data());
    };
    loss();
    std::vector<double> dy(probe.r.begin(), probe.r.end());
    std::vector<double> dx(x.size(), 0.0);
    ps.zero_grad();
    bwd(dy.data(), dx.data());

    for (size_t i = 0; i < ps.values.size(); ++i) {
        const double fd = central_diff(loss, &ps.values[i]);
        CHECK_MESSAGE(rel_err(ps.grads[i], fd) < tol, "param ", i, " analytic ", ps.grads[i],
                      " fd ", fd);
    }
    for (size_t i = 0; i < x.size(); ++i) {
        const double fd = central_diff(loss, &x[i]);
        CHECK_MESSAGE(rel_err(dx[i], fd) < tol, "input ", i, " analytic ", dx[i], " fd ", fd);
    }
}

}  // namespace

TEST_CASE("conv2d 3x3 stride 1 gradcheck") {
    ParamStore<double> ps;
    Conv2d<double> conv;
    conv.init(ps, "c", 2, 3, 3, 1);
    Rng rng(1);
    ps.init_values(rng);
    auto x = gaussian_vec(2 * 4 * 5, 11);
    check_layer(
        ps, x, 3 * 4 * 5, [&](const double* in, double* out) { conv.forward(ps, in, 4, 5, out); },
        [&](const double* dy, double* dx) { conv.backward(ps, dy, dx); });
}

TEST_CASE("conv2d 3x3 stride 2 gradcheck") {
    ParamStore<double> ps;
    Conv2d<double> conv;
    conv.init(ps, "c", 3, 2, 3, 2);
    Rng rng(2);
    ps.init_values(rng);
    auto x = gaussian_vec(3 * 6 * 6, 12);
    check_layer(
        ps, x, 2 * 3 * 3, [&](const double* in, double* out) { conv.forward(ps, in, 6, 6, out); },
        [&](const double* dy, double* dx) { conv.backward(ps, dy, dx); });
}

TEST_CASE("conv2d 1x1 gradcheck") {
    ParamStore<double> ps;
    Conv2d<double> conv;
    conv.init(ps, "c", 3, 2, 1, 1);
    Rng rng(3);
    ps.init_values(rng);
    auto x = gaussian_vec(3 * 3 * 3, 13);
    check_layer(
        ps, x, 2 * 3 * 3, [&](const double* in, double* out) { conv.forward(ps, in, 3, 3, out); },
        [&](const double* dy, double* dx) { conv.backward(ps, dy, dx); });
}

TEST_CASE("conv2d zero init writes zeros") {
    ParamStore<double> ps;
    Conv2d<double> conv;
    conv.init(ps, "c", 2, 2, 3, 1, /*zero_init=*/true);
    Rng rng(4);
    ps.init_values(rng);
    auto x = gaussian_vec(2 * 4 * 4, 14);
    std::vector<double> y(2 * 4 * 4, 1.0);
    conv.forward(ps, x.data(), 4, 4, y.data());
    for (double v : y) CHECK(v == 0.0);
}

TEST_CASE("groupnorm gradcheck") {
    ParamStore<double> ps;
    GroupNorm<double> gn;
    gn.init(ps, "g", 4, 2);
    Rng rng(5);
    ps.init_values(rng);
    // nudge gains away from exactly 1 for a generic-position check
    for (size_t i = 0; i < 4; ++i) ps.values[i] += 0.1 * double(i + 1);
    auto x = gaussian_vec(4 * 6, 15);
    check_layer(
        ps, x, 4 * 6, [&](const double* in, double* out) { gn.forward(ps, in, 6, out); },
        [&](const double* dy, double* dx) { gn.backward(ps, dy, dx); }, 1e-5);
}

TEST_CASE("groupnorm normalizes per group") {
    ParamStore<double> ps;
    GroupNorm<double> gn;
    gn.init(ps, "g", 4, 2);
    Rng rng(6);
    ps.init_values(rng);
    auto x = gaussian_vec(4 * 8, 16);
    for (auto& v : x) v = v * 3.0 + 2.0;
    std::vector<double> y(4 * 8);
    gn.forward(ps, x.data(), 8, y.data());
    for (int g = 0; g < 2; ++g) {
        double mean = 0.0, var = 0.0;
        for (int i = 0; i < 16; ++i) mean += y[g * 16 + i];
        mean /= 16;
        for (int i = 0; i < 16; ++i) var += (y[g * 16 + i] - mean) * (y[g * 16 + i] - mean);
        var /= 16;
        CHECK(mean == doctest::Approx(0.0).epsilon(1e-10));
        CHECK(var == doctest::Approx(1.0).epsilon(1e-3));  // eps shifts it slightly
    }
}

TEST_CASE("silu gradcheck and values") {
    SiLU<double> act;
    std::vector<double> x{-2.0, -0.5, 0.0, 0.7, 3.0};
    std::vector<double> y(x.size());
    act.forward(x.data(), x.size(), y.data());
    CHECK(y[2] == 0.0);
    CHECK(y[4] == doctest::Approx(3.0 / (1.0 + std::exp(-3.0))).epsilon(1e-12));

    Probe probe(x.size(), 21);
    auto loss = [&] {
        act.forward(x.data(), x.size(), y.data());
        return probe.loss(y.data());
    };
    loss();
    std::vector<double> dx(x.size());
    act.backward(probe.r.data(), dx.data());
    for (size_t i = 0; i < x.size(); ++i) {
        CHECK(rel_err(dx[i], central_diff(loss, &x[i])) < 1e-6);
    }
}

TEST_CASE("linear gradcheck") {
    ParamStore<double> ps;
    Linear<double> lin;
    lin.init(ps, "l", 5, 3);
    Rng rng(7);
    ps.init_values(rng);
    auto x = gaussian_vec(4 * 5, 17);  // N=4 rows
    check_layer(
        ps, x, 4 * 3, [&](const double* in, double* out) { lin.forward(ps, in, 4, out); },
        [&](const double* dy, double* dx) { lin.backward(ps, dy, dx); });
}

TEST_CASE("linear without bias") {
    ParamStore<double> ps;
    Linear<double> lin;
    lin.init(ps, "l", 3, 2, /*bias=*/false);
    CHECK(ps.total() == 6);
    Rng rng(8);
    ps.init_values(rng);
    std::vector<double> x{0.0, 0.0, 0.0};
    std::vector<double> y(2, 5.0);
    lin.forward(ps, x.data(), 1, y.data());
    CHECK(y[0] == 0.0);
    CHECK(y[1] == 0.0);
}

TEST_CASE("cross attention gradcheck including tokens") {
    ParamStore<double> ps;
    CrossAttention<double> attn;
    attn.init(ps, "a", 4, 3, 2, 2);  // C=4, d_tok=3, heads=2, groups=2
    Rng rng(9);
    ps.init_values(rng);
    auto x = gaussian_vec(4 * 6, 19);      // 2x3 spatial
    auto tok = gaussian_vec(2 * 3, 20);    // M=2 tokens

    Probe probe(4 * 6, 23);
    std::vector<double> y(4 * 6);
    auto loss = [&] {
        attn.forward(ps, x.data(), 2, 3, tok.data(), 2, y.data());
        return probe.loss(y.data());
    };
    loss();
    std::vector<double> dx(x.size(), 0.0), dtok(tok.size(), 0.0);
    ps.zero_grad();
    attn.backward(ps, probe.r.data(), dx.data(), dtok.data());

    for (size_t i = 0; i < ps.values.size(); ++i) {
        CHECK(rel_err(ps.grads[i], central_diff(loss, &ps.values[i])) < 1e-5);
    }
    for (size_t i = 0; i < x.size(); ++i) {
        CHECK(rel_err(dx[i], central_diff(loss, &x[i])) < 1e-5);
    }
    for (size_t i = 0; i < tok.size(); ++i) {
        CHECK(rel_err(dtok[i], central_diff(loss, &tok[i])) < 1e-5);
    }
}

TEST_CASE("cross attention with one zero token is a bias-only residual") {
    ParamStore<double> ps;
    CrossAttention<double> attn;
    attn.init(ps, "a", 4, 3, 2, 2);
    Rng rng(10);
    ps.init_values(rng);
    auto x = gaussian_vec(4 * 4, 25);
    std::vector<double> tok(3, 0.0);
    std::vector<double> y(4 * 4);
    attn.forward(ps, x.data(), 2, 2, tok.data(), 1, y.data());
    const double* bo = ps.values.data() + ps.offset_of("a.bo");
    for (int c = 0; c < 4; ++c) {
        for (int i = 0; i < 4; ++i) {
            CHECK(y[c * 4 + i] == doctest::Approx(x[c * 4 + i] + bo[c]).epsilon(1e-12));
        }
    }
    // output moves continuously with token scale
    std::vector<double> tok_eps{1e-3, -2e-3, 0.5e-3};
    std::vector<double> y2(4 * 4);
    attn.forward(ps, x.data(), 2, 2, tok_eps.data(), 1, y2.data());
    double diff = 0.0;
    for (size_t i = 0; i < y.size(); ++i) diff = std::max(diff, std::abs(y2[i] - y[i]));
    CHECK(diff > 0.0);
    CHECK(diff < 0.05);
}

TEST_CASE("resblock gradcheck with time embedding") {
    ParamStore<double> ps;
    ResBlock<double> rb;
    rb.init(ps, "r", 2, 4, 6, 2);  // cin=2, cout=4, temb_dim=6, groups=2
    Rng rng(11);
    ps.init_values(rng);
    auto x = gaussian_vec(2 * 4 * 4, 27);
    auto temb = gaussian_vec(6, 28);

    Probe probe(4 * 4 * 4, 29);
    std::vector<double> y(4 * 4 * 4);
    auto loss = [&] {
        rb.forward(ps, x.data(), 4, 4, temb.data(), y.data());
        return probe.loss(y.data());
    };
    loss();
    std::vector<double> dx(x.size(), 0.0), dtemb(temb.size(), 0.0);
    ps.zero_grad();
    rb.backward(ps, probe.r.data(), dx.data(), dtemb.data());

    for (size_t i = 0; i < ps.values.size(); ++i) {
        CHECK(rel_err(ps.grads[i], central_diff(loss, &ps.values[i])) < 1e-5);
    }
    for (size_t i = 0; i < x.size(); ++i) {
        CHECK(rel_err(dx[i], central_diff(loss, &x[i])) < 1e-5);
    }
    for (size_t i = 0; i < temb.size(); ++i) {
        CHECK(rel_err(dtemb[i], central_diff(loss, &temb[i])) < 1e-5);
    }
}

TEST_CASE("upsample nearest and its adjoint") {
    std::vector<double> x{1, 2, 3, 4};  // 1x2x2
    std::vector<double> y(16);
    upsample_nearest2x(x.data(), 1, 2, 2, y.data());
    CHECK(y[0] == 1);
    CHECK(y[1] == 1);
    CHECK(y[4] == 1);
    CHECK(y[5] == 1);
    CHECK(y[2] == 2);
    CHECK(y[15] == 4);

    // adjoint: <up(x), y> == <x, up^T(y)>
    auto yr = gaussian_vec(16, 31);
    std::vector<double> xt(4);
    upsample_nearest2x_backward(yr.data(), 1, 2, 2, xt.data());
    double lhs = 0.0, rhs = 0.0;
    for (int i = 0; i < 16; ++i) lhs += y[i] * yr[i];
    for (int i = 0; i < 4; ++i) rhs += x[i] * xt[i];
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
}

TEST_CASE("timestep embedding structure") {
    std::vector<double> e(8);
    timestep_embedding(0.0, 8, e.data());
    for (int i = 0; i < 4; ++i) {
        CHECK(e[i] == 0.0);        // sin(0)
        CHECK(e[4 + i] == 1.0);    // cos(0)
    }
    timestep_embedding(500.0, 8, e.data());
    CHECK(e[0] == doctest::Approx(std::sin(500.0)).epsilon(1e-12));
    const double f1 = std::exp(-std::log(10000.0) / 4.0);
    CHECK(e[1] == doctest::Approx(std::sin(500.0 * f1)).epsilon(1e-12));
    CHECK(e[4] == doctest::Approx(std::cos(500.0)).epsilon(1e-12));
    for (double v : e) {
        CHECK(v >= -1.0);
        CHECK(v <= 1.0);
    }
}

TEST_CASE("param store bookkeeping") {
    ParamStore<float> ps;
    const size_t a = ps.add("w1", {2, 3}, InitKind::FanInUniform, 3);
    const size_t b = ps.add("b1", {2}, InitKind::Zero);
    CHECK(a == 0);
    CHECK(b == 6);
    CHECK(ps.total() == 8);
    CHECK(ps.offset_of("b1") == 6);
    CHECK(ps.find("nope") == nullptr);
    CHECK_THROWS(ps.add("w1", {1}, InitKind::Zero));
    CHECK_THROWS(ps.offset_of("missing"));

    Rng rng(12);
    ps.init_values(rng);
    const double bound = 1.0 / std::sqrt(3.0);
    for (size_t i = 0; i < 6; ++i) {
        CHECK(ps.values[i] >= -bound);
        CHECK(ps.values[i] <= bound);
    }
    CHECK(ps.values[6] == 0.0f);
    CHECK(ps.values[7] == 0.0f);
}
