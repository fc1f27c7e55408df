#pragma once

#include <cmath>

#include "restain/denoiser.hpp"
#include "restain/latent.hpp"
#include "restain/schedule.hpp"

namespace restain::testing {

// Closed-form predictor that knows the true clean latent. For any state z at
// level t it returns the v consistent with decomposing z into (x0, eps):
//   eps = (z - sqrt(abar) * x0) / sqrt(1 - abar)    (0 when abar == 1)
//   v   = sqrt(abar) * eps - sqrt(1 - abar) * x0
// Deterministic samplers driven by it follow the analytic trajectory exactly,
// which makes it the reference for round-trip checks.
class OracleDenoiser : public VPredictor {
public:
    OracleDenoiser(LatentGrid x0, const NoiseSchedule& s) : x0_(std::move(x0)), s_(&s) {}

    LatentGrid predict_v(const LatentGrid& z, int t, const ConditioningBundle&) override {
        const double ab = s_->alpha_bar(t);
        const double sa = std::sqrt(ab);
        const double sb = std::sqrt(1.0 - ab);
        LatentGrid v(z.channels, z.height, z.width);
        for (size_t i = 0; i < z.data.size(); ++i) {
            const double eps = sb > 0.0 ? (double(z.data[i]) - sa * double(x0_.data[i])) / sb : 0.0;
            v.data[i] = float(sa * eps - sb * double(x0_.data[i]));
        }
        return v;
    }

private:
    LatentGrid x0_;
    const NoiseSchedule* s_;
};

}  // namespace restain::testing
