#include <doctest.h>

#include <cmath>
#include <sstream>
#include <vector>

#include "restain/schedule.hpp"

using namespace restain;

namespace {
NoiseSchedule default_schedule() { return make_linear_schedule(1000, 1e-4, 0.02); }
}  // namespace

TEST_CASE("linear schedule golden values") {
    auto s = default_schedule();
    CHECK(s.T == 1000);
    CHECK(s.beta(1) == doctest::Approx(1e-4).epsilon(1e-15));
    CHECK(s.beta(1000) == doctest::Approx(0.02).epsilon(1e-15));
    CHECK(s.alpha_bar(0) == 1.0);
    CHECK(s.alpha_bar(1) == doctest::Approx(0.99990000000000001).epsilon(1e-15));
    CHECK(s.alpha_bar(500) == doctest::Approx(0.078587242881778208).epsilon(1e-13));
    CHECK(s.alpha_bar(1000) == doctest::Approx(4.0358297653756754e-05).epsilon(1e-12));
    CHECK(s.sqrt_alpha_bar(500) == doctest::Approx(std::sqrt(0.078587242881778208)).epsilon(1e-13));
    CHECK(s.sqrt_one_minus_alpha_bar(0) == 0.0);
}

TEST_CASE("schedule validation") {
    CHECK_THROWS(make_linear_schedule(0, 1e-4, 0.02));
    CHECK_THROWS(make_linear_schedule(10, 0.0, 0.02));
    CHECK_THROWS(make_linear_schedule(10, 0.02, 1e-4));
    CHECK_THROWS(make_linear_schedule(10, 1e-4, 1.0));
    auto s = default_schedule();
    CHECK_THROWS(s.alpha_bar(1001));
    CHECK_THROWS(s.beta(0));
}

TEST_CASE("snr golden values and edge conventions") {
    auto s = default_schedule();
    CHECK(snr(s, 1) == doctest::Approx(9999.0000000011005).epsilon(1e-13));
    CHECK(snr(s, 500) == doctest::Approx(0.085289944462636824).epsilon(1e-13));
    CHECK(snr(s, 1000) == doctest::Approx(4.0359926511684198e-05).epsilon(1e-12));
}

TEST_CASE("zero terminal snr rescale") {
    auto s = default_schedule();
    auto r = rescale_zero_terminal_snr(s);
    CHECK(r.terminal_snr_zero);
    CHECK(r.alpha_bar(1000) == 0.0);
    CHECK(snr(r, 1000) == 0.0);
    // first timestep preserved exactly
    CHECK(r.alpha_bar(1) == s.alpha_bar(1));
    CHECK(snr(r, 1) == snr(s, 1));
    CHECK(r.alpha_bar(500) == doctest::Approx(0.076028750547114721).epsilon(1e-13));
    CHECK(r.alpha_bar(999) == doctest::Approx(4.2132624650880717e-09).epsilon(1e-12));
    CHECK(r.beta(1000) == 1.0);
    CHECK(r.beta(500) == doctest::Approx(0.01027104254954192).epsilon(1e-12));
    // strictly decreasing
    for (int t = 2; t <= 1000; ++t) CHECK(r.alpha_bar(t) < r.alpha_bar(t - 1));
    // betas consistent with alpha_bar ratios
    for (int t = 1; t <= 1000; ++t) {
        const double ratio = r.alpha_bar(t) / r.alpha_bar(t - 1);
        CHECK(1.0 - r.beta(t) == doctest::Approx(ratio).epsilon(1e-12));
    }
    // applying twice is rejected
    CHECK_THROWS(rescale_zero_terminal_snr(r));
}

TEST_CASE("trailing timestep plans") {
    auto p = trailing_timesteps(1000, 10);
    const std::vector<int> expect{1000, 900, 800, 700, 600, 500, 400, 300, 200, 100};
    CHECK(p.steps == expect);
    CHECK(p.T == 1000);

    CHECK(trailing_timesteps(7, 3).steps == std::vector<int>{7, 5, 2});
    CHECK(trailing_timesteps(10, 4).steps == std::vector<int>{10, 8, 5, 3});
    CHECK(trailing_timesteps(5, 5).steps == std::vector<int>{5, 4, 3, 2, 1});
    CHECK(trailing_timesteps(3, 3).steps == std::vector<int>{3, 2, 1});
    CHECK(trailing_timesteps(1000, 1).steps == std::vector<int>{1000});

    auto p200 = trailing_timesteps(1000, 200);
    CHECK(p200.steps.size() == 200);
    CHECK(p200.steps.front() == 1000);
    CHECK(p200.steps.back() == 5);
    for (size_t i = 1; i < p200.steps.size(); ++i) CHECK(p200.steps[i] < p200.steps[i - 1]);

    CHECK_THROWS(trailing_timesteps(10, 11));
    CHECK_THROWS(trailing_timesteps(10, 0));
}

TEST_CASE("trailing plans always start at T and stay in range") {
    for (int T : {1, 2, 7, 100, 999, 1000}) {
        for (int S = 1; S <= T; S = S * 3 + 1) {
            auto p = trailing_timesteps(T, S);
            CHECK(p.steps.front() == T);
            for (int t : p.steps) {
                CHECK(t >= 1);
                CHECK(t <= T);
            }
        }
    }
}

TEST_CASE("ddim sigma") {
    auto s = default_schedule();
    CHECK(ddim_sigma(s, 600, 400) == doctest::Approx(0.84656043033760531).epsilon(1e-13));
    // the hop to a clean sample is deterministic: alpha_bar(0) = 1 kills sigma
    CHECK(ddim_sigma(s, 500, 0) == 0.0);
    CHECK_THROWS(ddim_sigma(s, 400, 400));
    CHECK_THROWS(ddim_sigma(s, 400, 600));
    CHECK_THROWS(ddim_sigma(s, 400, -1));
}

TEST_CASE("eta schedule values") {
    auto c = EtaSchedule::constant(0.3);
    CHECK(eta_value(c, 0.0) == 0.3);
    CHECK(eta_value(c, 1.0) == 0.3);

    auto e = EtaSchedule::cosine(0.2);
    CHECK(eta_value(e, 0.0) == doctest::Approx(0.2).epsilon(1e-13));
    CHECK(eta_value(e, 0.25) == doctest::Approx(0.31715728752538092).epsilon(1e-13));
    CHECK(eta_value(e, 0.5) == doctest::Approx(0.6).epsilon(1e-13));
    CHECK(eta_value(e, 1.0) == doctest::Approx(1.0).epsilon(1e-13));

    double prev = -1.0;
    for (int i = 0; i <= 1000; ++i) {
        const double v = eta_value(e, i / 1000.0);
        CHECK(v >= prev);
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
        prev = v;
    }

    CHECK_THROWS(EtaSchedule::constant(1.5));
    CHECK_THROWS(EtaSchedule::cosine(-0.1));
    CHECK_THROWS(EtaSchedule::cosine(0.9, 0.2));
    CHECK_THROWS(eta_value(e, 1.5));
}

TEST_CASE("schedule csv dump is deterministic and well formed") {
    auto s = rescale_zero_terminal_snr(default_schedule());
    auto plan = trailing_timesteps(1000, 10);
    auto eta = EtaSchedule::cosine(0.2);
    std::ostringstream a, b;
    dump_schedule_csv(s, plan, eta, a);
    dump_schedule_csv(s, plan, eta, b);
    CHECK(a.str() == b.str());
    CHECK(a.str().substr(0, 31) == "t,beta,alpha_bar,snr,sigma,eta\n");
    // header + one row per plan step
    size_t lines = 0;
    for (char ch : a.str()) lines += (ch == '\n');
    CHECK(lines == 11);
}
