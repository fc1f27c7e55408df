#include "restain/diffusion.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace restain {

namespace {

void check_same_shape(const LatentGrid& a, const LatentGrid& b, const char* who) {
    if (!a.same_shape(b)) {
        throw std::invalid_argument(std::string(who) + ": shape mismatch");
    }
}

void check_alpha_bar(double ab, const char* who) {
    if (!(ab >= 0.0 && ab <= 1.0)) {
        throw std::invalid_argument(std::string(who) + ": alpha_bar must be in [0, 1]");
    }
}

// out = ca*a + cb*b, element-wise, accumulated in double
LatentGrid combine(const LatentGrid& a, const LatentGrid& b, double ca, double cb) {
    LatentGrid out(a.channels, a.height, a.width);
    const size_t n = a.size();
    for (size_t i = 0; i < n; ++i) {
        out.data[i] = static_cast<float>(ca * a.data[i] + cb * b.data[i]);
    }
    return out;
}

}  // namespace

LatentGrid forward_sample(const NoiseSchedule& s, const LatentGrid& x0, int t,
                          const LatentGrid& eps) {
    check_same_shape(x0, eps, "forward_sample");
    return combine(x0, eps, s.sqrt_alpha_bar(t), s.sqrt_one_minus_alpha_bar(t));
}

LatentGrid velocity_from(const LatentGrid& x0, const LatentGrid& eps, double alpha_bar) {
    check_same_shape(x0, eps, "velocity_from");
    check_alpha_bar(alpha_bar, "velocity_from");
    return combine(eps, x0, std::sqrt(alpha_bar), -std::sqrt(1.0 - alpha_bar));
}

LatentGrid x0_from_v(const LatentGrid& xt, const LatentGrid& v, double alpha_bar) {
    check_same_shape(xt, v, "x0_from_v");
    check_alpha_bar(alpha_bar, "x0_from_v");
    return combine(xt, v, std::sqrt(alpha_bar), -std::sqrt(1.0 - alpha_bar));
}

LatentGrid eps_from_v(const LatentGrid& xt, const LatentGrid& v, double alpha_bar) {
    check_same_shape(xt, v, "eps_from_v");
    check_alpha_bar(alpha_bar, "eps_from_v");
    return combine(xt, v, std::sqrt(1.0 - alpha_bar), std::sqrt(alpha_bar));
}

double loss_weight(double snr_t, const LossWeighting& w) {
    if (!(w.gamma > 0.0)) throw std::invalid_argument("loss_weight: gamma must be > 0");
    const double lambda = std::min(snr_t, w.gamma) / (snr_t + 1.0);
    return std::max(lambda, 1e-8);
}

double v_loss(const LatentGrid& v_pred, const LatentGrid& v_true, int t,
              const NoiseSchedule& s, const LossWeighting& w) {
    check_same_shape(v_pred, v_true, "v_loss");
    const double lambda = loss_weight(snr(s, t), w);
    double acc = 0.0;
    const size_t n = v_pred.size();
    for (size_t i = 0; i < n; ++i) {
        const double d = double(v_pred.data[i]) - double(v_true.data[i]);
        acc += d * d;
    }
    return lambda * acc / double(n);
}

LatentGrid v_loss_grad(const LatentGrid& v_pred, const LatentGrid& v_true, int t,
                       const NoiseSchedule& s, const LossWeighting& w) {
    check_same_shape(v_pred, v_true, "v_loss_grad");
    const double lambda = loss_weight(snr(s, t), w);
    const size_t n = v_pred.size();
    const double scale = 2.0 * lambda / double(n);
    LatentGrid g(v_pred.channels, v_pred.height, v_pred.width);
    for (size_t i = 0; i < n; ++i) {
        g.data[i] = static_cast<float>(scale * (double(v_pred.data[i]) - double(v_true.data[i])));
    }
    return g;
}

double eps_loss(const LatentGrid& eps_pred, const LatentGrid& eps_true) {
    check_same_shape(eps_pred, eps_true, "eps_loss");
    double acc = 0.0;
    const size_t n = eps_pred.size();
    for (size_t i = 0; i < n; ++i) {
        const double d = double(eps_pred.data[i]) - double(eps_true.data[i]);
        acc += d * d;
    }
    return acc / double(n);
}

}  // namespace restain
