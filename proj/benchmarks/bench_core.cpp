#include <benchmark/benchmark.h>

#include "restain/denoiser.hpp"
#include "restain/diffusion.hpp"
#include "restain/rng.hpp"
#include "restain/schedule.hpp"

namespace {

using namespace restain;

void BM_MakeSchedule(benchmark::State& state) {
    for (auto _ : state) {
        auto s = rescale_zero_terminal_snr(make_linear_schedule(1000, 1e-4, 0.02));
        benchmark::DoNotOptimize(s.alpha_bars.data());
    }
}
BENCHMARK(BM_MakeSchedule);

void BM_ForwardSample(benchmark::State& state) {
    auto s = make_linear_schedule(1000, 1e-4, 0.02);
    LatentGrid x0(3, 64, 64), eps(3, 64, 64);
    Rng rng(1);
    rng.fill_gaussian(x0.data);
    rng.fill_gaussian(eps.data);
    for (auto _ : state) {
        auto xt = forward_sample(s, x0, 500, eps);
        benchmark::DoNotOptimize(xt.data.data());
    }
}
BENCHMARK(BM_ForwardSample);

void BM_UNetForward(benchmark::State& state) {
    UNetConfig cfg;
    UNet<float> net(cfg);
    net.init_params(7);
    const int H = 64, W = 64;
    std::vector<float> x(size_t(cfg.in_channels) * H * W), v(size_t(cfg.out_channels) * H * W);
    std::vector<float> tok(size_t(16) * cfg.d_tok);
    Rng rng(2);
    rng.fill_gaussian(x);
    rng.fill_gaussian(tok);
    for (auto _ : state) {
        net.forward(x.data(), H, W, 500, tok.data(), 16, v.data());
        benchmark::DoNotOptimize(v.data());
    }
}
BENCHMARK(BM_UNetForward);

void BM_UNetBackward(benchmark::State& state) {
    UNetConfig cfg;
    UNet<float> net(cfg);
    net.init_params(7);
    const int H = 64, W = 64;
    std::vector<float> x(size_t(cfg.in_channels) * H * W), v(size_t(cfg.out_channels) * H * W);
    std::vector<float> dv(v.size(), 1.0f);
    std::vector<float> tok(size_t(16) * cfg.d_tok);
    Rng rng(2);
    rng.fill_gaussian(x);
    rng.fill_gaussian(tok);
    net.forward(x.data(), H, W, 500, tok.data(), 16, v.data());
    for (auto _ : state) {
        net.params().zero_grad();
        net.backward(dv.data());
        benchmark::DoNotOptimize(net.params().grads.data());
    }
}
BENCHMARK(BM_UNetBackward);

}  // namespace

BENCHMARK_MAIN();
