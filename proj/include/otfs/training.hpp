// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <stdexcept>

#include "otfs/grid.hpp"
#include "otfs/zak.hpp"

namespace otfs {

// Dual-chirp pulse parameters. The pulse is a sum of two linear FM chirps of
// duration M samples with opposite sweep rates +-B/(2T); f_o defaults to 0,
// receiver and templates share whatever value is configured so correlation
// is invariant to it.
struct ChirpParams {
    double amplitude = 1.0;  // A
    double f_o = 0.0;        // center frequency, Hz

    // A from a configured chirp SNR (2A^2 / sigma_w^2)
    static ChirpParams from_snr_db(double snr_c_db, double noise_var) {
        ChirpParams p;
        p.amplitude = std::sqrt(noise_var * std::pow(10.0, snr_c_db / 10.0) / 2.0);
        return p;
    }
};

// p[l,k,q] = A sum_{a=+-1} exp(j2pi[(f_o T/M + k/(MN))(q-l) + a (q-l)^2/(4M)])
// for q in [l, l+M-1], zero otherwise. k is the *signed* normalized Doppler.
inline TimeSignal dual_chirp(int l, int k, const ChirpParams& params, const FrameGeometry& g) {
    if (l < 0 || l > g.size() - g.M)
        throw std::invalid_argument("dual_chirp: support must fit inside the frame");
    TimeSignal p(g);
    const double f_term = params.f_o * g.block_duration() / g.M;
    const double k_term = static_cast<double>(k) / g.size();
    for (int q = l; q < l + g.M; ++q) {
        const double u = static_cast<double>(q - l);
        const double lin = (f_term + k_term) * u;
        const double quad = u * u / (4.0 * g.M);
        p.samples[q] = params.amplitude * (cis_cycles(lin + quad) + cis_cycles(lin - quad));
    }
    return p;
}

// DD training frame: DZT of the dual chirp plus a single high-power pilot
// superimposed at (0, 0).
struct TrainingFrame {
    FrameGeometry geometry;
    cplx pilot{0.0, 0.0};    // x_p
    ChirpParams chirp;
    DDGrid dd_grid;          // X_t
    TimeSignal time_signal;  // s_t = IDZT(X_t)

    // The (0,0) grid entry the pilot echoes actually carry: x_p plus the
    // chirp's own co-located DD coefficient. Using it as the gain divisor
    // removes the co-moving chirp term exactly.
    cplx effective_pilot() const { return dd_grid.at(0, 0); }
};

// Pilot amplitude from SNR_p = |x_p|^2 / (N sigma_w^2); real positive.
inline cplx pilot_from_snr_db(double snr_p_db, double noise_var, const FrameGeometry& g) {
    return {std::sqrt(static_cast<double>(g.N) * noise_var * std::pow(10.0, snr_p_db / 10.0)), 0.0};
}

inline TrainingFrame build_training(cplx pilot, const ChirpParams& params,
                                    const FrameGeometry& g, double min_power_ratio = 30.0,
                                    OpCounter* ops = nullptr) {
    const double two_a2 = 2.0 * params.amplitude * params.amplitude;
    if (two_a2 > 0.0 && std::norm(pilot) * g.N / two_a2 < min_power_ratio)
        throw std::invalid_argument("pilot too weak against the chirp: |x_p|^2 N / (2A^2) below bound");

    TrainingFrame tf;
    tf.geometry = g;
    tf.pilot = pilot;
    tf.chirp = params;
    tf.dd_grid = dzt(dual_chirp(0, 0, params, g), ops);
    tf.dd_grid.at(0, 0) += pilot;
    tf.time_signal = idzt(tf.dd_grid, ops);
    return tf;
}

}  // namespace otfs
