#pragma once

#include <ostream>
#include <vector>

namespace restain {

// Discrete diffusion noise schedule over timesteps t = 1..T. All schedule
// math is kept in double; the latent pipeline downstream is float.
//
// Convention: alpha_bar(0) == 1, so the final denoising hop lands on a clean
// sample.
struct NoiseSchedule {
    int T = 0;
    std::vector<double> betas;                      // index t-1
    std::vector<double> alpha_bars;                 // strictly decreasing
    std::vector<double> sqrt_alpha_bars;
    std::vector<double> sqrt_one_minus_alpha_bars;
    bool terminal_snr_zero = false;

    double beta(int t) const;
    double alpha_bar(int t) const;                  // accepts t in [0, T]
    double sqrt_alpha_bar(int t) const;
    double sqrt_one_minus_alpha_bar(int t) const;
};

enum class BetaSpacing {
    Linear,
    ScaledLinear,  // linear in sqrt(beta), as used by large latent models
};

NoiseSchedule make_schedule(int T, double beta_start, double beta_end,
                            BetaSpacing spacing);

inline NoiseSchedule make_linear_schedule(int T, double beta_start, double beta_end) {
    return make_schedule(T, beta_start, beta_end, BetaSpacing::Linear);
}

// Affine remap of sqrt(alpha_bar) that keeps the first value and forces the
// last one to exactly zero, so the terminal timestep carries no signal.
// Betas are recomputed from the new alpha_bar ratios (beta_T becomes 1).
// Rejects schedules that were already rescaled.
NoiseSchedule rescale_zero_terminal_snr(const NoiseSchedule& s);

// Signal-to-noise ratio alpha_bar/(1 - alpha_bar). Returns +inf when
// alpha_bar == 1 and exactly 0 when alpha_bar == 0.
double snr(const NoiseSchedule& s, int t);

// Inference timestep plan, strictly decreasing, always starting at T.
struct TimestepPlan {
    std::vector<int> steps;
    int T = 0;
};

// steps[i] = round(T - i*T/S) with half-up rounding in integer arithmetic,
// clamped to [1, T] and deduplicated. steps[0] == T always.
TimestepPlan trailing_timesteps(int T, int S);

// Stochasticity scale of a DDIM hop t -> t_prev at full eta:
//   sigma = sqrt((1-abar_prev)/(1-abar_t)) * sqrt(1 - abar_t/abar_prev)
double ddim_sigma(const NoiseSchedule& s, int t, int t_prev);

// Noise scale along denoising progress p in [0, 1]. The cosine kind ramps
// from `start` at p=0 to `end` at p=1 through (start+end)/2 at p=1/2.
struct EtaSchedule {
    enum class Kind { Constant, Cosine };
    Kind kind = Kind::Constant;
    double start = 0.0;
    double end = 0.0;

    static EtaSchedule constant(double value);
    static EtaSchedule cosine(double start, double end = 1.0);
};

double eta_value(const EtaSchedule& e, double progress);

// One CSV row per plan step: t, beta, alpha_bar, snr, sigma to the next plan
// step (or to 0 for the last), and eta at that step's denoising progress.
void dump_schedule_csv(const NoiseSchedule& s, const TimestepPlan& plan,
                       const EtaSchedule& eta, std::ostream& out);

}  // namespace restain
