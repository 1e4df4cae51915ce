// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <vector>

#include "otfs/common.hpp"

namespace otfs {
namespace detail {

inline bool is_pow2(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

// In-place radix-2 Cooley-Tukey, no normalization. sign = -1 forward, +1 inverse.
inline void fft_pow2(std::vector<cplx>& x, int sign, OpCounter* ops) {
    const std::size_t n = x.size();
    if (n <= 1) return;
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(x[i], x[j]);
    }
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const double ang = sign * kTwoPi / static_cast<double>(len);
        const cplx wlen(std::cos(ang), std::sin(ang));
        for (std::size_t i = 0; i < n; i += len) {
            cplx w(1.0, 0.0);
            for (std::size_t j = 0; j < len / 2; ++j) {
                const cplx u = x[i + j];
                const cplx v = x[i + j + len / 2] * w;
                x[i + j] = u + v;
                x[i + j + len / 2] = u - v;
                w *= wlen;
            }
        }
    }
    if (ops) ops->transform += static_cast<std::uint64_t>(n / 2) *
                               static_cast<std::uint64_t>(std::countr_zero(n));
}

// O(n^2) fallback for non-power-of-two sizes (small test geometries only).
inline void dft_naive(std::vector<cplx>& x, int sign, OpCounter* ops) {
    const std::size_t n = x.size();
    std::vector<cplx> out(n, cplx{0.0, 0.0});
    for (std::size_t k = 0; k < n; ++k) {
        for (std::size_t m = 0; m < n; ++m) {
            const double cyc = sign * static_cast<double>(k * m) / static_cast<double>(n);
            out[k] += x[m] * cis_cycles(cyc);
        }
    }
    x = std::move(out);
    if (ops) ops->transform += static_cast<std::uint64_t>(n) * n;
}

}  // namespace detail

// Unitary DFT pair: F[k] = (1/sqrt(n)) sum_m x[m] e^{-j2pi km/n} and inverse.
inline void dft_unitary(std::vector<cplx>& x, OpCounter* ops = nullptr) {
    if (detail::is_pow2(x.size()))
        detail::fft_pow2(x, -1, ops);
    else
        detail::dft_naive(x, -1, ops);
    const double s = 1.0 / std::sqrt(static_cast<double>(x.size()));
    for (auto& v : x) v *= s;
}

inline void idft_unitary(std::vector<cplx>& x, OpCounter* ops = nullptr) {
    if (detail::is_pow2(x.size()))
        detail::fft_pow2(x, +1, ops);
    else
        detail::dft_naive(x, +1, ops);
    const double s = 1.0 / std::sqrt(static_cast<double>(x.size()));
    for (auto& v : x) v *= s;
}

}  // namespace otfs
