// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "otfs/geometry.hpp"

namespace otfs {

// M x N delay-Doppler grid; row index = delay bin l, column index = Doppler bin k.
struct DDGrid {
    FrameGeometry geometry;
    std::vector<cplx> values;  // row-major, values[l*N + k]

    DDGrid() = default;
    explicit DDGrid(const FrameGeometry& g) : geometry(g), values(g.size(), cplx{0.0, 0.0}) {}

    cplx& at(int l, int k) { return values[static_cast<std::size_t>(l) * geometry.N + k]; }
    const cplx& at(int l, int k) const {
        return values[static_cast<std::size_t>(l) * geometry.N + k];
    }

    bool all_finite() const {
        for (const auto& v : values)
            if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) return false;
        return true;
    }

    double energy() const {
        double e = 0.0;
        for (const auto& v : values) e += std::norm(v);
        return e;
    }
};

// Length-MN time-domain sample vector; sample q = n*M + m maps to delay-time
// entry (m, n). That column-major serialization is load-bearing: every delay
// and block index computation downstream depends on it.
struct TimeSignal {
    FrameGeometry geometry;
    std::vector<cplx> samples;

    TimeSignal() = default;
    explicit TimeSignal(const FrameGeometry& g) : geometry(g), samples(g.size(), cplx{0.0, 0.0}) {}

    cplx& operator[](std::size_t q) { return samples[q]; }
    const cplx& operator[](std::size_t q) const { return samples[q]; }
    std::size_t size() const { return samples.size(); }

    bool all_finite() const {
        for (const auto& v : samples)
            if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) return false;
        return true;
    }

    double energy() const {
        double e = 0.0;
        for (const auto& v : samples) e += std::norm(v);
        return e;
    }
};

// --- binary capture format -------------------------------------------------
// 16-byte header {magic "OTFS", u32 M, u32 N, u32 reserved}, then MN pairs of
// little-endian f64 (re, im).

namespace detail {

inline void put_u32(std::string& out, std::uint32_t v) {
    char b[4];
    b[0] = static_cast<char>(v & 0xff);
    b[1] = static_cast<char>((v >> 8) & 0xff);
    b[2] = static_cast<char>((v >> 16) & 0xff);
    b[3] = static_cast<char>((v >> 24) & 0xff);
    out.append(b, 4);
}

inline std::uint32_t get_u32(const char* p) {
    return static_cast<std::uint32_t>(static_cast<unsigned char>(p[0])) |
           (static_cast<std::uint32_t>(static_cast<unsigned char>(p[1])) << 8) |
           (static_cast<std::uint32_t>(static_cast<unsigned char>(p[2])) << 16) |
           (static_cast<std::uint32_t>(static_cast<unsigned char>(p[3])) << 24);
}

inline void put_f64(std::string& out, double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, 8);
    char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((bits >> (8 * i)) & 0xff);
    out.append(b, 8);
}

inline double get_f64(const char* p) {
    std::uint64_t bits = 0;
    for (int i = 0; i < 8; ++i)
        bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(p[i])) << (8 * i);
    double v;
    std::memcpy(&v, &bits, 8);
    return v;
}

}  // namespace detail

inline void write_time_signal(const TimeSignal& sig, const std::string& path) {
    std::string buf;
    buf.reserve(16 + sig.size() * 16);
    buf.append("OTFS", 4);
    detail::put_u32(buf, static_cast<std::uint32_t>(sig.geometry.M));
    detail::put_u32(buf, static_cast<std::uint32_t>(sig.geometry.N));
    detail::put_u32(buf, 0u);
    for (const auto& v : sig.samples) {
        detail::put_f64(buf, v.real());
        detail::put_f64(buf, v.imag());
    }
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open for write: " + path);
    f.write(buf.data(), static_cast<std::streamsize>(buf.size()));
}

// delta_f is not stored in the capture; the caller supplies it.
inline TimeSignal read_time_signal(const std::string& path, double delta_f) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open for read: " + path);
    std::string buf((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    if (buf.size() < 16 || buf.compare(0, 4, "OTFS") != 0)
        throw std::runtime_error("bad capture header: " + path);
    const std::uint32_t m = detail::get_u32(buf.data() + 4);
    const std::uint32_t n = detail::get_u32(buf.data() + 8);
    const std::size_t count = static_cast<std::size_t>(m) * n;
    if (buf.size() != 16 + count * 16)
        throw std::runtime_error("truncated capture: " + path);
    TimeSignal sig(FrameGeometry(static_cast<int>(m), static_cast<int>(n), delta_f));
    for (std::size_t q = 0; q < count; ++q) {
        const char* p = buf.data() + 16 + q * 16;
        sig.samples[q] = {detail::get_f64(p), detail::get_f64(p + 8)};
    }
    return sig;
}

}  // namespace otfs
