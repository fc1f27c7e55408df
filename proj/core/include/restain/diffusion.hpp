#pragma once

#include "restain/latent.hpp"
#include "restain/schedule.hpp"

namespace restain {

// Forward-process marginal and the velocity parameterization algebra.
//
// With abar = alpha_bar(t):
//   x_t = sqrt(abar) * x0 + sqrt(1-abar) * eps
//   v   = sqrt(abar) * eps - sqrt(1-abar) * x0
// and the inversions
//   x0  = sqrt(abar) * x_t - sqrt(1-abar) * v
//   eps = sqrt(1-abar) * x_t + sqrt(abar) * v

LatentGrid forward_sample(const NoiseSchedule& s, const LatentGrid& x0, int t,
                          const LatentGrid& eps);

LatentGrid velocity_from(const LatentGrid& x0, const LatentGrid& eps, double alpha_bar);
LatentGrid x0_from_v(const LatentGrid& xt, const LatentGrid& v, double alpha_bar);
LatentGrid eps_from_v(const LatentGrid& xt, const LatentGrid& v, double alpha_bar);

// SNR-capped loss weight, floored at 1e-8 so zero-SNR (terminal) samples
// still contribute:  lambda_t = max(min(snr, gamma) / (snr + 1), 1e-8)
struct LossWeighting {
    double gamma = 5.0;
};

double loss_weight(double snr_t, const LossWeighting& w);

// lambda_t * mean squared error between predicted and true velocity.
double v_loss(const LatentGrid& v_pred, const LatentGrid& v_true, int t,
              const NoiseSchedule& s, const LossWeighting& w);

// d(v_loss)/d(v_pred), analytic.
LatentGrid v_loss_grad(const LatentGrid& v_pred, const LatentGrid& v_true, int t,
                       const NoiseSchedule& s, const LossWeighting& w);

// Plain mean squared error, the baseline noise-prediction objective.
double eps_loss(const LatentGrid& eps_pred, const LatentGrid& eps_true);

}  // namespace restain
