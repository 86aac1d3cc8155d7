#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>

#include "phaseflow/grid.hpp"

namespace phaseflow {

// Checkpoint container, little-endian throughout:
//   magic "WFPS" | u32 version | u32 nq | u32 np
//   f64 q_min q_max p_min p_max time hbar D
//   nq*np complex samples as interleaved f64 (re, im), row-major over q.
inline constexpr std::uint32_t field_format_version = 1;

static_assert(std::endian::native == std::endian::little,
              "field files are little-endian; big-endian hosts are unsupported");

struct FieldFile {
    Field field;
    double hbar = 0.0;
    double D = 0.0;
};

inline void write_field(const Field& f, double hbar, double D,
                        const std::filesystem::path& path) {
    if (f.rep() != Rep::qp)
        throw std::invalid_argument("only (q,p) representation fields are persisted");
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");

    const auto& g = f.grid();
    out.write("WFPS", 4);
    auto put_u32 = [&](std::uint32_t v) { out.write(reinterpret_cast<const char*>(&v), 4); };
    auto put_f64 = [&](double v) { out.write(reinterpret_cast<const char*>(&v), 8); };
    put_u32(field_format_version);
    put_u32(static_cast<std::uint32_t>(g.nq));
    put_u32(static_cast<std::uint32_t>(g.np));
    put_f64(g.q_min);
    put_f64(g.q_max);
    put_f64(g.p_min);
    put_f64(g.p_max);
    put_f64(f.time());
    put_f64(hbar);
    put_f64(D);
    out.write(reinterpret_cast<const char*>(f.data()),
              static_cast<std::streamsize>(f.size() * sizeof(Complex)));
    if (!out) throw std::runtime_error("write failed for " + path.string());
}

inline FieldFile read_field(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());

    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, "WFPS", 4) != 0)
        throw std::runtime_error(path.string() + ": not a WFPS field file");
    auto get_u32 = [&] {
        std::uint32_t v = 0;
        in.read(reinterpret_cast<char*>(&v), 4);
        return v;
    };
    auto get_f64 = [&] {
        double v = 0;
        in.read(reinterpret_cast<char*>(&v), 8);
        return v;
    };
    const std::uint32_t version = get_u32();
    if (version != field_format_version)
        throw std::runtime_error(path.string() + ": unsupported format version " +
                                 std::to_string(version));
    const std::uint32_t nq = get_u32();
    const std::uint32_t np = get_u32();
    const double q_min = get_f64();
    const double q_max = get_f64();
    const double p_min = get_f64();
    const double p_max = get_f64();
    const double time = get_f64();
    const double hbar = get_f64();
    const double D = get_f64();
    if (!in) throw std::runtime_error(path.string() + ": truncated header");

    auto grid = make_grid(nq, np, {q_min, q_max}, {p_min, p_max});
    FieldFile out{Field(grid, time), hbar, D};
    in.read(reinterpret_cast<char*>(out.field.data()),
            static_cast<std::streamsize>(out.field.size() * sizeof(Complex)));
    if (!in || in.gcount() !=
                   static_cast<std::streamsize>(out.field.size() * sizeof(Complex)))
        throw std::runtime_error(path.string() + ": truncated sample data");
    return out;
}

/// FNV-1a 64-bit content hash used by run manifests.
inline std::uint64_t fnv1a64(std::span<const std::byte> bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (std::byte b : bytes) {
        h ^= static_cast<std::uint64_t>(b);
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline std::uint64_t fnv1a64(std::string_view text) {
    return fnv1a64(std::as_bytes(std::span{text.data(), text.size()}));
}

inline std::uint64_t hash_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot hash missing file " + path.string());
    std::uint64_t h = 0xcbf29ce484222325ULL;
    char buf[65536];
    while (in.read(buf, sizeof buf) || in.gcount() > 0) {
        const auto n = static_cast<std::size_t>(in.gcount());
        for (std::size_t i = 0; i < n; ++i) {
            h ^= static_cast<unsigned char>(buf[i]);
            h *= 0x100000001b3ULL;
        }
    }
    return h;
}

} // namespace phaseflow
