// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <map>
#include <vector>

#include "otfs/channel.hpp"
#include "otfs/dft.hpp"
#include "otfs/qam.hpp"
#include "otfs/zak.hpp"

namespace otfs {

struct DetectorConfig {
    int n_iter = 5;
    double delta_bar = 1.0;  // soft/hard blend weight in [0, 1]
    enum class Init { zeros, passthrough } init = Init::zeros;
};

// Non-cyclic block shift: p >= 0 shifts down (leading zeros), p < 0 shifts up
// (trailing zeros). The shift matrix is nilpotent, so "negative powers" mean
// powers of the transpose.
inline std::vector<cplx> block_shift(const std::vector<cplx>& v, int p) {
    const int n = static_cast<int>(v.size());
    if (p <= -n || p >= n) throw std::domain_error("block_shift: |p| must be < N");
    std::vector<cplx> out(v.size(), cplx{0.0, 0.0});
    if (p >= 0) {
        for (int i = p; i < n; ++i) out[i] = v[i - p];
    } else {
        for (int i = 0; i < n + p; ++i) out[i] = v[i - p];
    }
    return out;
}

struct DetectResult {
    DDGrid symbols;                     // hard-decided DD grid
    std::vector<std::uint8_t> bits;
    std::vector<std::vector<double>> residual_norms;  // per iteration, per m (squared)
    int iterations = 0;
    int unobserved = 0;  // combining-weight zeros encountered (skipped entries)
    OpCounter ops;
    std::uint64_t ops_per_iteration = 0;
};

// Received time signal reshaped into delay-time columns y_m[n] = r[nM + m].
inline std::vector<std::vector<cplx>> dt_columns(const TimeSignal& r) {
    const int M = r.geometry.M;
    const int N = r.geometry.N;
    std::vector<std::vector<cplx>> y(M, std::vector<cplx>(N));
    for (int m = 0; m < M; ++m)
        for (int n = 0; n < N; ++n) y[m][n] = r.samples[static_cast<std::size_t>(n) * M + m];
    return y;
}

namespace detail {

// Channel paths grouped per delay for the detector's branch loops.
struct MrcChannel {
    struct Branch {
        int delay;
        int k_signed;
        cplx gain;
        std::vector<cplx> ramp;  // e^{j2pi k n / N}
    };
    std::vector<Branch> branches;

    static MrcChannel build(const std::vector<ChannelPath>& paths, const FrameGeometry& g) {
        MrcChannel ch;
        for (const auto& p : paths) {
            Branch b;
            b.delay = p.delay;
            b.k_signed = signed_doppler(p.doppler, g.N);
            b.gain = p.gain;
            b.ramp.resize(g.N);
            for (int n = 0; n < g.N; ++n)
                b.ramp[n] = cis_cycles(static_cast<double>(b.k_signed) * n / g.N);
            ch.branches.push_back(std::move(b));
        }
        return ch;
    }

    // nu_{m,l}[n] = head(m) * ramp[n]
    cplx head(const Branch& b, int m, const FrameGeometry& g) const {
        return b.gain * cis_cycles(static_cast<double>(b.k_signed) * (m - b.delay) / g.size());
    }
};

}  // namespace detail

// Iterative delay-time MRC detector for RZP-OTFS with overspread delays.
// Each branch (m, l) scatters x_m into row m' = (m+l) mod M down-shifted by
// c = floor((m+l)/M); combining uses the transposed (up) shifts.
inline DetectResult mrc_detect(const TimeSignal& received, const std::vector<ChannelPath>& paths,
                               const QamConstellation& qam, const DetectorConfig& cfg) {
    const FrameGeometry g = received.geometry;
    const int M = g.M;
    const int N = g.N;
    DetectResult res;
    res.symbols = DDGrid(g);
    if (paths.empty()) throw std::invalid_argument("mrc_detect: empty path list");

    const auto ch = detail::MrcChannel::build(paths, g);
    auto y = dt_columns(received);

    // initial DT symbol estimates
    std::vector<std::vector<cplx>> xhat(M, std::vector<cplx>(N, cplx{0.0, 0.0}));
    if (cfg.init == DetectorConfig::Init::passthrough) xhat = y;

    // residuals and combining weights
    std::vector<std::vector<cplx>> dy = y;
    std::vector<std::vector<double>> d(M, std::vector<double>(N, 0.0));
    for (int m = 0; m < M; ++m) {
        for (const auto& b : ch.branches) {
            const int c = (m + b.delay) / M;  // up-shift power for the gather
            const int mp = (m + b.delay) % M;
            const double g2 = std::norm(b.gain);
            for (int n = 0; n < N - c && n < N; ++n) d[m][n] += g2;
            if (cfg.init == DetectorConfig::Init::passthrough) {
                // subtract the branch contribution of the initial estimate
                const cplx head = ch.head(b, mp, g);
                for (int n = c; n < N; ++n)
                    dy[mp][n] -= head * b.ramp[n] * xhat[m][n - c];
                res.ops.combining += static_cast<std::uint64_t>(N - c) * 2;
            }
        }
    }

    auto norms = [&](const std::vector<std::vector<cplx>>& v) {
        std::vector<double> out(M, 0.0);
        for (int m = 0; m < M; ++m)
            for (int n = 0; n < N; ++n) out[m] += std::norm(v[m][n]);
        return out;
    };

    std::vector<double> prev_norm = norms(dy);
    res.residual_norms.push_back(prev_norm);
    std::vector<std::vector<cplx>> xprev = xhat;

    std::vector<cplx> grad(N), cvec(N), work(N);
    const std::uint64_t ops_before_loop = res.ops.total();
    for (int iter = 1; iter <= cfg.n_iter; ++iter) {
        xprev = xhat;
        for (int m = 0; m < M; ++m) {
            std::fill(grad.begin(), grad.end(), cplx{0.0, 0.0});
            for (const auto& b : ch.branches) {
                const int c = (m + b.delay) / M;
                const int mp = (m + b.delay) % M;
                const cplx head_conj = std::conj(ch.head(b, mp, g));
                for (int n = 0; n + c < N; ++n)
                    grad[n] += head_conj * std::conj(b.ramp[n + c]) * dy[mp][n + c];
                res.ops.combining += static_cast<std::uint64_t>(N - c);
            }
            for (int n = 0; n < N; ++n) {
                if (d[m][n] > 0.0) {
                    cvec[n] = xhat[m][n] + grad[n] / d[m][n];
                } else {
                    cvec[n] = xhat[m][n];  // unobserved position, keep prior
                    if (iter == 1) ++res.unobserved;
                }
            }
            res.ops.combining += static_cast<std::uint64_t>(N);

            // hard-decision feedback in the DD domain, blended by delta_bar
            work = cvec;
            dft_unitary(work, &res.ops);
            for (auto& v : work) v = qam.slice(v);
            idft_unitary(work, &res.ops);
            for (int n = 0; n < N; ++n)
                work[n] = cfg.delta_bar * work[n] + (1.0 - cfg.delta_bar) * cvec[n];

            // residual update for every branch touched by this column
            for (const auto& b : ch.branches) {
                const int c = (m + b.delay) / M;
                const int mp = (m + b.delay) % M;
                const cplx head = ch.head(b, mp, g);
                for (int n = c; n < N; ++n)
                    dy[mp][n] -= head * b.ramp[n] * (work[n - c] - xhat[m][n - c]);
                res.ops.combining += static_cast<std::uint64_t>(N - c) * 2;
            }
            xhat[m] = work;
        }

        std::vector<double> cur_norm = norms(dy);
        res.residual_norms.push_back(cur_norm);
        res.iterations = iter;
        bool all_worse = true;
        for (int m = 0; m < M; ++m)
            if (cur_norm[m] < prev_norm[m]) {
                all_worse = false;
                break;
            }
        if (all_worse) {
            xhat = xprev;  // report the predecessor
            break;
        }
        prev_norm = cur_norm;
    }
    if (res.iterations > 0)
        res.ops_per_iteration = (res.ops.total() - ops_before_loop) /
                                static_cast<std::uint64_t>(res.iterations);

    // DD symbols: per-row forward DFT of the final DT estimates, hard-decided
    std::vector<cplx> row(N);
    for (int m = 0; m < M; ++m) {
        row = xhat[m];
        dft_unitary(row, &res.ops);
        for (int k = 0; k < N; ++k) res.symbols.at(m, k) = qam.slice(row[k]);
    }
    res.bits = qam.demap(res.symbols.values);
    return res;
}

}  // namespace otfs
