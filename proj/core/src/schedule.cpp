#include "restain/schedule.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace restain {

namespace {

void check_t_range(const NoiseSchedule& s, int t, const char* who) {
    if (t < 1 || t > s.T) {
        throw std::invalid_argument(std::string(who) + ": timestep out of range [1, T]");
    }
}

void finish_caches(NoiseSchedule& s) {
    s.sqrt_alpha_bars.resize(s.alpha_bars.size());
    s.sqrt_one_minus_alpha_bars.resize(s.alpha_bars.size());
    for (size_t i = 0; i < s.alpha_bars.size(); ++i) {
        s.sqrt_alpha_bars[i] = std::sqrt(s.alpha_bars[i]);
        s.sqrt_one_minus_alpha_bars[i] = std::sqrt(1.0 - s.alpha_bars[i]);
    }
}

void check_monotone(const NoiseSchedule& s) {
    for (int t = 2; t <= s.T; ++t) {
        if (!(s.alpha_bars[t - 1] < s.alpha_bars[t - 2])) {
            throw std::invalid_argument("schedule: alpha_bar is not strictly decreasing");
        }
    }
}

}  // namespace

double NoiseSchedule::beta(int t) const {
    check_t_range(*this, t, "beta");
    return betas[t - 1];
}

double NoiseSchedule::alpha_bar(int t) const {
    if (t == 0) return 1.0;
    check_t_range(*this, t, "alpha_bar");
    return alpha_bars[t - 1];
}

double NoiseSchedule::sqrt_alpha_bar(int t) const {
    if (t == 0) return 1.0;
    check_t_range(*this, t, "sqrt_alpha_bar");
    return sqrt_alpha_bars[t - 1];
}

double NoiseSchedule::sqrt_one_minus_alpha_bar(int t) const {
    if (t == 0) return 0.0;
    check_t_range(*this, t, "sqrt_one_minus_alpha_bar");
    return sqrt_one_minus_alpha_bars[t - 1];
}

NoiseSchedule make_schedule(int T, double beta_start, double beta_end,
                            BetaSpacing spacing) {
    if (T < 1) throw std::invalid_argument("make_schedule: T must be >= 1");
    if (!std::isfinite(beta_start) || !std::isfinite(beta_end)) {
        throw std::invalid_argument("make_schedule: non-finite beta");
    }
    if (!(0.0 < beta_start && beta_start <= beta_end && beta_end < 1.0)) {
        throw std::invalid_argument("make_schedule: need 0 < beta_start <= beta_end < 1");
    }

    NoiseSchedule s;
    s.T = T;
    s.betas.resize(T);
    if (T == 1) {
        s.betas[0] = beta_start;
    } else if (spacing == BetaSpacing::Linear) {
        for (int t = 1; t <= T; ++t) {
            s.betas[t - 1] = beta_start + (beta_end - beta_start) * (t - 1) / double(T - 1);
        }
    } else {
        const double r0 = std::sqrt(beta_start);
        const double r1 = std::sqrt(beta_end);
        for (int t = 1; t <= T; ++t) {
            const double r = r0 + (r1 - r0) * (t - 1) / double(T - 1);
            s.betas[t - 1] = r * r;
        }
    }

    s.alpha_bars.resize(T);
    double prod = 1.0;
    for (int t = 1; t <= T; ++t) {
        prod *= 1.0 - s.betas[t - 1];
        s.alpha_bars[t - 1] = prod;
    }
    finish_caches(s);
    check_monotone(s);
    s.terminal_snr_zero = false;
    return s;
}

NoiseSchedule rescale_zero_terminal_snr(const NoiseSchedule& s) {
    if (s.terminal_snr_zero || s.alpha_bars.back() == 0.0) {
        throw std::invalid_argument("rescale_zero_terminal_snr: schedule already rescaled");
    }
    const double sa_first = s.sqrt_alpha_bars.front();
    const double sa_last = s.sqrt_alpha_bars.back();
    if (sa_first == sa_last) {
        throw std::invalid_argument("rescale_zero_terminal_snr: flat schedule");
    }

    NoiseSchedule out;
    out.T = s.T;
    out.alpha_bars.resize(s.T);
    // The affine map on sqrt(alpha_bar) fixes both endpoints by construction;
    // pin them exactly so snr(1) is preserved bit-for-bit and snr(T) is 0.
    out.alpha_bars[0] = s.alpha_bars[0];
    out.alpha_bars[s.T - 1] = 0.0;
    for (int t = 2; t < s.T; ++t) {
        const double u = (s.sqrt_alpha_bars[t - 1] - sa_last) / (sa_first - sa_last);
        const double shifted = sa_first * u;
        out.alpha_bars[t - 1] = shifted * shifted;
    }
    // Re-derive betas from the new ratios; the terminal beta becomes 1.
    out.betas.resize(s.T);
    double prev = 1.0;
    for (int t = 1; t <= s.T; ++t) {
        out.betas[t - 1] = 1.0 - out.alpha_bars[t - 1] / prev;
        prev = out.alpha_bars[t - 1];
    }
    finish_caches(out);
    check_monotone(out);
    out.terminal_snr_zero = true;
    return out;
}

double snr(const NoiseSchedule& s, int t) {
    check_t_range(s, t, "snr");
    const double ab = s.alpha_bars[t - 1];
    if (ab >= 1.0) return std::numeric_limits<double>::infinity();
    if (ab == 0.0) return 0.0;
    return ab / (1.0 - ab);
}

TimestepPlan trailing_timesteps(int T, int S) {
    if (S < 1 || S > T) throw std::invalid_argument("trailing_timesteps: need 1 <= S <= T");
    TimestepPlan plan;
    plan.T = T;
    plan.steps.reserve(S);
    for (int i = 0; i < S; ++i) {
        // round-half-up of T*(S-i)/S, in integers for cross-platform stability
        const int64_t num = 2LL * T * (S - i) + S;
        int v = static_cast<int>(num / (2LL * S));
        v = std::max(1, std::min(T, v));
        if (plan.steps.empty() || plan.steps.back() != v) {
            plan.steps.push_back(v);
        }
    }
    return plan;
}

double ddim_sigma(const NoiseSchedule& s, int t, int t_prev) {
    if (t_prev < 0 || t <= t_prev) {
        throw std::invalid_argument("ddim_sigma: need t > t_prev >= 0");
    }
    check_t_range(s, t, "ddim_sigma");
    const double ab_t = s.alpha_bar(t);
    const double ab_prev = s.alpha_bar(t_prev);
    if (ab_t >= 1.0) throw std::invalid_argument("ddim_sigma: alpha_bar(t) == 1");
    const double ratio = std::max(0.0, 1.0 - ab_t / ab_prev);
    return std::sqrt((1.0 - ab_prev) / (1.0 - ab_t)) * std::sqrt(ratio);
}

EtaSchedule EtaSchedule::constant(double value) {
    if (!(value >= 0.0 && value <= 1.0)) {
        throw std::invalid_argument("EtaSchedule: eta must be in [0, 1]");
    }
    return EtaSchedule{Kind::Constant, value, value};
}

EtaSchedule EtaSchedule::cosine(double start, double end) {
    if (!(start >= 0.0 && start <= 1.0 && end >= 0.0 && end <= 1.0)) {
        throw std::invalid_argument("EtaSchedule: eta must be in [0, 1]");
    }
    if (start > end) {
        throw std::invalid_argument("EtaSchedule: cosine needs start <= end");
    }
    return EtaSchedule{Kind::Cosine, start, end};
}

double eta_value(const EtaSchedule& e, double progress) {
    if (!(progress >= 0.0 && progress <= 1.0)) {
        throw std::invalid_argument("eta_value: progress must be in [0, 1]");
    }
    if (e.kind == EtaSchedule::Kind::Constant) return e.start;
    const double mid = 0.5 * (e.end + e.start);
    const double amp = 0.5 * (e.end - e.start);
    return mid - amp * std::cos(std::numbers::pi * progress);
}

void dump_schedule_csv(const NoiseSchedule& s, const TimestepPlan& plan,
                       const EtaSchedule& eta, std::ostream& out) {
    out << "t,beta,alpha_bar,snr,sigma,eta\n";
    const size_t n = plan.steps.size();
    char buf[160];
    for (size_t i = 0; i < n; ++i) {
        const int t = plan.steps[i];
        const int t_next = (i + 1 < n) ? plan.steps[i + 1] : 0;
        const double progress = (n > 1) ? double(i) / double(n - 1) : 0.0;
        std::snprintf(buf, sizeof(buf), "%d,%.17g,%.17g,%.17g,%.17g,%.17g\n",
                      t, s.beta(t), s.alpha_bar(t), snr(s, t),
                      ddim_sigma(s, t, t_next), eta_value(eta, progress));
        out << buf;
    }
}

}  // namespace restain
