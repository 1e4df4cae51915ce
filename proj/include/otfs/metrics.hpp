// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <map>
#include <set>
#include <stdexcept>
#include <vector>

#include "otfs/channel.hpp"
#include "otfs/estimator.hpp"

namespace otfs {

enum class NmseMode {
    truth_delays,  // sum over the true delay set only
    union_delays   // union of true and estimated delays; spurious paths count
};

// Normalized MSE between true and estimated delay-time channel vectors.
// Missing entries on either side are zero vectors.
inline double nmse(const ChannelRealization& truth, const std::vector<PathEstimate>& est,
                   const FrameGeometry& g, NmseMode mode = NmseMode::union_delays) {
    if (truth.paths.empty()) throw std::invalid_argument("nmse: empty truth channel");

    std::map<int, std::vector<ChannelPath>> true_by_delay, est_by_delay;
    for (const auto& p : truth.paths) true_by_delay[p.delay].push_back(p);
    for (const auto& p : est) est_by_delay[p.delay].push_back({p.gain, p.delay, p.doppler});

    std::set<int> delays;
    for (const auto& [d, _] : true_by_delay) delays.insert(d);
    if (mode == NmseMode::union_delays)
        for (const auto& [d, _] : est_by_delay) delays.insert(d);

    // Doppler ramps are shared across delays and m
    std::map<int, std::vector<cplx>> ramps;
    auto ramp_of = [&](int k_grid) -> const std::vector<cplx>& {
        auto it = ramps.find(k_grid);
        if (it == ramps.end()) {
            std::vector<cplx> r(g.N);
            const int ks = signed_doppler(k_grid, g.N);
            for (int n = 0; n < g.N; ++n) r[n] = cis_cycles(static_cast<double>(ks) * n / g.N);
            it = ramps.emplace(k_grid, std::move(r)).first;
        }
        return it->second;
    };

    double num = 0.0, den = 0.0;
    std::vector<cplx> vt(g.N), ve(g.N);
    const std::vector<ChannelPath> none;
    for (int d : delays) {
        auto ti = true_by_delay.find(d);
        auto ei = est_by_delay.find(d);
        const auto& tp = ti != true_by_delay.end() ? ti->second : none;
        const auto& ep = ei != est_by_delay.end() ? ei->second : none;
        for (int m = 0; m < g.M; ++m) {
            std::fill(vt.begin(), vt.end(), cplx{0.0, 0.0});
            std::fill(ve.begin(), ve.end(), cplx{0.0, 0.0});
            for (const auto& p : tp) {
                const auto& ramp = ramp_of(p.doppler);
                const int ks = signed_doppler(p.doppler, g.N);
                const cplx head = p.gain * cis_cycles(static_cast<double>(ks) * (m - d) / g.size());
                for (int n = 0; n < g.N; ++n) vt[n] += head * ramp[n];
            }
            for (const auto& p : ep) {
                const auto& ramp = ramp_of(p.doppler);
                const int ks = signed_doppler(p.doppler, g.N);
                const cplx head = p.gain * cis_cycles(static_cast<double>(ks) * (m - d) / g.size());
                for (int n = 0; n < g.N; ++n) ve[n] += head * ramp[n];
            }
            for (int n = 0; n < g.N; ++n) {
                num += std::norm(ve[n] - vt[n]);
                den += std::norm(vt[n]);
            }
        }
    }
    if (den == 0.0) throw std::invalid_argument("nmse: zero-energy truth channel");
    return num / den;
}

}  // namespace otfs
