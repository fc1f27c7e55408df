#include <doctest.h>

#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>

#include "restain/checkpoint.hpp"
#include "restain/denoiser.hpp"
#include "restain/errors.hpp"
#include "restain/rng.hpp"

using namespace restain;

namespace {

UNetConfig tiny_config() {
    UNetConfig cfg;
    cfg.base_width = 8;
    cfg.levels = 2;
    cfg.d_tok = 8;
    cfg.heads = 4;
    cfg.groups = 8;
    return cfg;
}

CheckpointMeta tiny_meta() {
    CheckpointMeta m;
    m.arch = tiny_config();
    m.patch = 16;
    m.token_seed = 9001;
    m.T = 1000;
    m.beta_start = 1e-4;
    m.beta_end = 0.02;
    m.zero_terminal = true;
    m.tool_version = "0.1.0";
    m.config_hash = "deadbeef00112233";
    return m;
}

std::string temp_path(const char* name) {
    return (std::filesystem::temp_directory_path() / name).string();
}

}  // namespace

TEST_CASE("checkpoint round trip is bit exact") {
    UNet<float> net(tiny_config());
    net.init_params(77);
    auto saved = net.params().values;

    const std::string path = temp_path("ckpt_roundtrip.bin");
    save_checkpoint(path, tiny_meta(), net.params());

    UNet<float> net2(tiny_config());
    CheckpointMeta m = load_checkpoint(path, net2.params());

    REQUIRE(net2.params().values.size() == saved.size());
    CHECK(std::memcmp(net2.params().values.data(), saved.data(), saved.size() * sizeof(float)) ==
          0);
    CHECK(m.arch.base_width == 8);
    CHECK(m.arch.d_tok == 8);
    CHECK(m.patch == 16);
    CHECK(m.token_seed == 9001);
    CHECK(m.T == 1000);
    CHECK(m.beta_start == 1e-4);
    CHECK(m.beta_end == 0.02);
    CHECK(m.zero_terminal);
    CHECK(m.tool_version == "0.1.0");
    CHECK(m.config_hash == "deadbeef00112233");
    std::filesystem::remove(path);
}

TEST_CASE("checkpoint optimizer state round trips") {
    UNet<float> net(tiny_config());
    net.init_params(5);

    OptimizerState opt;
    opt.step = 1234;
    opt.m.resize(net.params().total());
    opt.v.resize(net.params().total());
    Rng rng(99);
    for (auto& x : opt.m) x = float(rng.gaussian());
    for (auto& x : opt.v) x = float(rng.uniform());

    const std::string path = temp_path("ckpt_opt.bin");
    save_checkpoint(path, tiny_meta(), net.params(), &opt);

    UNet<float> net2(tiny_config());
    OptimizerState opt2;
    load_checkpoint(path, net2.params(), &opt2);
    CHECK(opt2.step == 1234);
    CHECK(std::memcmp(opt2.m.data(), opt.m.data(), opt.m.size() * sizeof(float)) == 0);
    CHECK(std::memcmp(opt2.v.data(), opt.v.data(), opt.v.size() * sizeof(float)) == 0);

    // same file loads fine when the caller skips the optimizer section
    UNet<float> net3(tiny_config());
    CHECK_NOTHROW(load_checkpoint(path, net3.params()));
    std::filesystem::remove(path);
}

TEST_CASE("checkpoint meta readable without building the network") {
    UNet<float> net(tiny_config());
    net.init_params(1);
    const std::string path = temp_path("ckpt_meta.bin");
    save_checkpoint(path, tiny_meta(), net.params());

    CheckpointMeta m = read_checkpoint_meta(path);
    CHECK(m.arch.base_width == 8);
    CHECK(m.arch.levels == 2);
    CHECK(m.arch.heads == 4);
    CHECK(m.config_hash == "deadbeef00112233");
    std::filesystem::remove(path);
}

TEST_CASE("checkpoint validation failures") {
    UNet<float> net(tiny_config());
    net.init_params(1);
    const std::string path = temp_path("ckpt_bad.bin");
    save_checkpoint(path, tiny_meta(), net.params());

    SUBCASE("missing file") {
        CHECK_THROWS_AS(read_checkpoint_meta(temp_path("ckpt_nope.bin")), ValidationError);
    }
    SUBCASE("bad magic") {
        std::fstream f(path, std::ios::in | std::ios::out | std::ios::binary);
        f.seekp(0);
        f.write("XXXXXXXX", 8);
        f.close();
        CHECK_THROWS_AS(read_checkpoint_meta(path), ValidationError);
    }
    SUBCASE("unsupported version") {
        std::fstream f(path, std::ios::in | std::ios::out | std::ios::binary);
        f.seekp(8);
        char nine[4] = {9, 0, 0, 0};
        f.write(nine, 4);
        f.close();
        CHECK_THROWS_AS(read_checkpoint_meta(path), ValidationError);
    }
    SUBCASE("truncated tensor data") {
        auto size = std::filesystem::file_size(path);
        std::filesystem::resize_file(path, size / 2);
        UNet<float> net2(tiny_config());
        CHECK_THROWS_AS(load_checkpoint(path, net2.params()), ValidationError);
    }
    SUBCASE("architecture mismatch") {
        UNetConfig other = tiny_config();
        other.base_width = 16;
        UNet<float> net2(other);
        CHECK_THROWS_AS(load_checkpoint(path, net2.params()), ValidationError);
    }
    SUBCASE("optimizer requested but absent") {
        UNet<float> net2(tiny_config());
        OptimizerState opt;
        CHECK_THROWS_AS(load_checkpoint(path, net2.params(), &opt), ValidationError);
    }
    std::filesystem::remove(path);
}

TEST_CASE("checkpoint write is atomic") {
    UNet<float> net(tiny_config());
    net.init_params(3);
    const std::string path = temp_path("ckpt_atomic.bin");
    save_checkpoint(path, tiny_meta(), net.params());
    CHECK(!std::filesystem::exists(path + ".tmp"));

    // overwrite with different values, reload sees the new ones
    net.params().values[0] = 42.0f;
    save_checkpoint(path, tiny_meta(), net.params());
    UNet<float> net2(tiny_config());
    load_checkpoint(path, net2.params());
    CHECK(net2.params().values[0] == 42.0f);
    std::filesystem::remove(path);
}
