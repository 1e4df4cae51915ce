// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "otfs/dft.hpp"
#include "otfs/grid.hpp"

namespace otfs {

// Inverse discrete Zak transform: per delay row, unitary N-point IDFT across
// the Doppler axis, then column-major serialization samples[n*M + m].
inline TimeSignal idzt(const DDGrid& grid, OpCounter* ops = nullptr) {
    const int M = grid.geometry.M;
    const int N = grid.geometry.N;
    TimeSignal sig(grid.geometry);
    std::vector<cplx> row(N);
    for (int m = 0; m < M; ++m) {
        for (int k = 0; k < N; ++k) row[k] = grid.at(m, k);
        idft_unitary(row, ops);
        for (int n = 0; n < N; ++n) sig.samples[static_cast<std::size_t>(n) * M + m] = row[n];
    }
    return sig;
}

// Forward DZT: de-serialize to the M x N delay-time matrix, unitary N-point
// DFT across the block axis of each row.
inline DDGrid dzt(const TimeSignal& sig, OpCounter* ops = nullptr) {
    const int M = sig.geometry.M;
    const int N = sig.geometry.N;
    DDGrid grid(sig.geometry);
    std::vector<cplx> row(N);
    for (int m = 0; m < M; ++m) {
        for (int n = 0; n < N; ++n) row[n] = sig.samples[static_cast<std::size_t>(n) * M + m];
        dft_unitary(row, ops);
        for (int k = 0; k < N; ++k) grid.at(m, k) = row[k];
    }
    return grid;
}

}  // namespace otfs
