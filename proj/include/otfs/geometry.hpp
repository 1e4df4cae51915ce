// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>

#include "otfs/common.hpp"

namespace otfs {

// Frame geometry: M delay bins (subcarriers) x N Doppler bins (blocks),
// subcarrier spacing delta_f. Everything else is derived.
struct FrameGeometry {
    int M = 0;
    int N = 0;
    double delta_f = 0.0;  // Hz

    FrameGeometry() = default;
    FrameGeometry(int m, int n, double df) : M(m), N(n), delta_f(df) {
        if (M < 1 || N < 1) throw std::invalid_argument("FrameGeometry: M, N must be >= 1");
        if (!(delta_f > 0.0)) throw std::invalid_argument("FrameGeometry: delta_f must be > 0");
    }

    int size() const { return M * N; }                       // samples per frame
    double block_duration() const { return 1.0 / delta_f; }  // T
    double sample_interval() const { return 1.0 / (static_cast<double>(M) * delta_f); }  // T_s
    double bandwidth() const { return static_cast<double>(M) * delta_f; }                // B
    double frame_duration() const { return static_cast<double>(N) / delta_f; }           // T_f

    friend bool operator==(const FrameGeometry& a, const FrameGeometry& b) {
        return a.M == b.M && a.N == b.N && a.delta_f == b.delta_f;
    }
};

// Splits a normalized delay into (aliased delay, block index): l = l_mod + b*M.
struct AliasedDelay {
    int aliased;
    int block;
};

inline AliasedDelay mod_delay(int l, const FrameGeometry& g) {
    if (l < 0 || l >= g.size()) throw std::domain_error("mod_delay: l outside [0, M*N)");
    return {l % g.M, l / g.M};
}

// Doppler grid index in [0, N) -> physical signed value in (-N/2, N/2].
inline int signed_doppler(int k_grid, int N) {
    return (2 * k_grid <= N) ? k_grid : k_grid - N;
}

// Physical signed Doppler -> grid index in [0, N).
inline int doppler_grid_index(int k_signed, int N) {
    int k = k_signed % N;
    if (k < 0) k += N;
    return k;
}

}  // namespace otfs
