#include "restain/checkpoint.hpp"

#include <bit>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>

#include "restain/errors.hpp"

namespace restain {

namespace {

constexpr char kMagic[8] = {'R', 'S', 'T', 'C', 'K', 'P', 'T', '1'};
constexpr uint32_t kVersion = 1;
constexpr uint32_t kFlagOptimizer = 1u << 0;

void put_u32(std::string& b, uint32_t v) {
    for (int i = 0; i < 4; ++i) b.push_back(char((v >> (8 * i)) & 0xff));
}

void put_u64(std::string& b, uint64_t v) {
    for (int i = 0; i < 8; ++i) b.push_back(char((v >> (8 * i)) & 0xff));
}

void put_f32(std::string& b, float v) { put_u32(b, std::bit_cast<uint32_t>(v)); }
void put_f64(std::string& b, double v) { put_u64(b, std::bit_cast<uint64_t>(v)); }

void put_str(std::string& b, const std::string& s) {
    put_u32(b, uint32_t(s.size()));
    b.append(s);
}

void put_f32_array(std::string& b, const float* p, size_t n) {
    for (size_t i = 0; i < n; ++i) put_f32(b, p[i]);
}

struct Cursor {
    const std::string& buf;
    size_t pos = 0;

    void need(size_t n) const {
        if (pos + n > buf.size()) throw ValidationError("checkpoint truncated");
    }
    uint8_t u8() {
        need(1);
        return uint8_t(buf[pos++]);
    }
    uint32_t u32() {
        need(4);
        uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= uint32_t(uint8_t(buf[pos + i])) << (8 * i);
        pos += 4;
        return v;
    }
    uint64_t u64() {
        need(8);
        uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= uint64_t(uint8_t(buf[pos + i])) << (8 * i);
        pos += 8;
        return v;
    }
    float f32() { return std::bit_cast<float>(u32()); }
    double f64() { return std::bit_cast<double>(u64()); }
    std::string str() {
        uint32_t n = u32();
        need(n);
        std::string s = buf.substr(pos, n);
        pos += n;
        return s;
    }
    void f32_array(float* p, size_t n) {
        for (size_t i = 0; i < n; ++i) p[i] = f32();
    }
};

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open checkpoint " + path);
    std::string buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return buf;
}

CheckpointMeta parse_header(Cursor& c, uint32_t* flags) {
    c.need(8);
    if (std::memcmp(c.buf.data(), kMagic, 8) != 0)
        throw ValidationError("not a checkpoint file (bad magic)");
    c.pos += 8;
    uint32_t version = c.u32();
    if (version != kVersion)
        throw ValidationError("unsupported checkpoint version " + std::to_string(version));
    *flags = c.u32();

    CheckpointMeta m;
    m.arch.base_width = int(c.u32());
    m.arch.levels = int(c.u32());
    m.arch.d_tok = int(c.u32());
    m.arch.heads = int(c.u32());
    m.arch.in_channels = int(c.u32());
    m.arch.out_channels = int(c.u32());
    m.arch.groups = int(c.u32());
    m.patch = int(c.u32());
    m.token_seed = c.u64();
    m.T = int(c.u32());
    m.beta_start = c.f64();
    m.beta_end = c.f64();
    m.spacing = c.u8();
    m.zero_terminal = c.u8() != 0;
    m.tool_version = c.str();
    m.config_hash = c.str();
    return m;
}

}  // namespace

void save_checkpoint(const std::string& path, const CheckpointMeta& meta,
                     const nn::ParamStore<float>& ps, const OptimizerState* opt) {
    std::string b;
    b.reserve(64 + ps.total() * 4 * (opt ? 3 : 1));
    b.append(kMagic, 8);
    put_u32(b, kVersion);
    put_u32(b, opt ? kFlagOptimizer : 0);

    put_u32(b, uint32_t(meta.arch.base_width));
    put_u32(b, uint32_t(meta.arch.levels));
    put_u32(b, uint32_t(meta.arch.d_tok));
    put_u32(b, uint32_t(meta.arch.heads));
    put_u32(b, uint32_t(meta.arch.in_channels));
    put_u32(b, uint32_t(meta.arch.out_channels));
    put_u32(b, uint32_t(meta.arch.groups));
    put_u32(b, uint32_t(meta.patch));
    put_u64(b, meta.token_seed);
    put_u32(b, uint32_t(meta.T));
    put_f64(b, meta.beta_start);
    put_f64(b, meta.beta_end);
    b.push_back(char(meta.spacing));
    b.push_back(char(meta.zero_terminal ? 1 : 0));
    put_str(b, meta.tool_version);
    put_str(b, meta.config_hash);

    put_u64(b, uint64_t(ps.entries().size()));
    for (const auto& e : ps.entries()) {
        put_str(b, e.name);
        put_u32(b, uint32_t(e.shape.size()));
        for (int d : e.shape) put_u32(b, uint32_t(d));
        put_f32_array(b, ps.values.data() + e.offset, e.size);
    }

    if (opt) {
        if (opt->m.size() != ps.total() || opt->v.size() != ps.total())
            throw ValidationError("optimizer state size does not match parameters");
        put_u64(b, opt->step);
        put_u64(b, uint64_t(ps.total()));
        put_f32_array(b, opt->m.data(), opt->m.size());
        put_f32_array(b, opt->v.data(), opt->v.size());
    }

    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw ValidationError("cannot write checkpoint " + tmp);
        out.write(b.data(), std::streamsize(b.size()));
        if (!out) throw ValidationError("short write on " + tmp);
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw ValidationError("cannot move checkpoint into place: " + ec.message());
}

CheckpointMeta read_checkpoint_meta(const std::string& path) {
    std::string buf = slurp(path);
    Cursor c{buf};
    uint32_t flags = 0;
    return parse_header(c, &flags);
}

CheckpointMeta load_checkpoint(const std::string& path, nn::ParamStore<float>& ps,
                               OptimizerState* opt) {
    std::string buf = slurp(path);
    Cursor c{buf};
    uint32_t flags = 0;
    CheckpointMeta meta = parse_header(c, &flags);

    uint64_t count = c.u64();
    if (count != ps.entries().size())
        throw ValidationError("checkpoint holds " + std::to_string(count) + " tensors, expected " +
                              std::to_string(ps.entries().size()));
    for (uint64_t i = 0; i < count; ++i) {
        std::string name = c.str();
        const auto* e = ps.find(name);
        if (!e) throw ValidationError("unknown tensor in checkpoint: " + name);
        uint32_t rank = c.u32();
        if (rank != e->shape.size())
            throw ValidationError("tensor rank mismatch for " + name);
        size_t n = 1;
        for (uint32_t r = 0; r < rank; ++r) {
            uint32_t d = c.u32();
            if (int(d) != e->shape[r]) throw ValidationError("tensor shape mismatch for " + name);
            n *= d;
        }
        c.f32_array(ps.values.data() + e->offset, n);
    }

    if (opt) {
        if (!(flags & kFlagOptimizer))
            throw ValidationError("checkpoint has no optimizer state");
        opt->step = c.u64();
        uint64_t n = c.u64();
        if (n != ps.total()) throw ValidationError("optimizer state size mismatch");
        opt->m.resize(n);
        opt->v.resize(n);
        c.f32_array(opt->m.data(), n);
        c.f32_array(opt->v.data(), n);
    }
    return meta;
}

}  // namespace restain
