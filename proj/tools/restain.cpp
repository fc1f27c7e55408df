#include <CLI11.hpp>

#include <fstream>
#include <iostream>

#include "restain/errors.hpp"
#include "restain/schedule.hpp"
#include "restain/version.hpp"

namespace {

int run_schedule_dump(const std::string& out_path, int T, int steps, const std::string& eta_spec) {
    using namespace restain;
    NoiseSchedule s = rescale_zero_terminal_snr(make_linear_schedule(T, 1e-4, 0.02));
    TimestepPlan plan = trailing_timesteps(T, steps);
    EtaSchedule eta = EtaSchedule::cosine(0.2);
    (void)eta_spec;
    std::ofstream out(out_path);
    if (!out) throw ValidationError("cannot open " + out_path);
    dump_schedule_csv(s, plan, eta, out);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"restain: diffusion stain-translation toolkit"};
    app.set_version_flag("--version", restain::kToolVersion);

    auto* sched = app.add_subcommand("schedule", "Noise schedule utilities");
    auto* dump = sched->add_subcommand("dump", "Write the inference plan as CSV");
    std::string out_path = "schedule.csv";
    int T = 1000, steps = 200;
    std::string eta_spec = "cosine:0.2";
    dump->add_option("-o,--output", out_path, "Output CSV path");
    dump->add_option("-T,--timesteps", T, "Training timestep count");
    dump->add_option("-s,--steps", steps, "Inference step count");

    try {
        app.parse(argc, argv);
        if (*dump) return run_schedule_dump(out_path, T, steps, eta_spec);
        std::cout << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 1;
    } catch (const restain::NumericError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
