// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "otfs/common.hpp"
#include "otfs/geometry.hpp"
#include "otfs/grid.hpp"

namespace otfs {

// One propagation path: complex gain, normalized integer delay in samples,
// Doppler as a grid index in [0, N). Phase ramps are always built from the
// signed physical Doppler (grid index folded into (-N/2, N/2]).
struct ChannelPath {
    cplx gain{0.0, 0.0};
    int delay = 0;
    int doppler = 0;  // grid index
};

struct ChannelRealization {
    std::vector<ChannelPath> paths;  // sorted ascending by delay, delays distinct
    int l_max = 0;

    int b_max(const FrameGeometry& g) const { return l_max / g.M; }

    void validate(const FrameGeometry& g) const {
        int prev = -1;
        for (const auto& p : paths) {
            if (p.delay <= prev)
                throw std::invalid_argument("channel paths must have distinct ascending delays");
            if (p.delay > l_max || p.delay >= g.size())
                throw std::invalid_argument("path delay exceeds bound");
            if (p.doppler < 0 || p.doppler >= g.N)
                throw std::invalid_argument("Doppler grid index out of range");
            prev = p.delay;
        }
        if (l_max >= g.size()) throw std::invalid_argument("l_max must be < M*N");
    }

    double total_power() const {
        double s = 0.0;
        for (const auto& p : paths) s += std::norm(p.gain);
        return s;
    }
};

// --- power/delay profiles ----------------------------------------------------

enum class ProfileKind { UniformA, EvaB, EtuC };

// Tap tables from 3GPP TS 36.101 Annex B (EVA B.2.2, ETU B.2.3).
inline constexpr std::array<double, 9> kEvaDelayNs = {0, 30, 150, 310, 370, 710, 1090, 1730, 2510};
inline constexpr std::array<double, 9> kEvaPowerDb = {0.0, -1.5, -1.4, -3.6, -0.6,
                                                      -9.1, -7.0, -12.0, -16.9};
inline constexpr std::array<double, 9> kEtuDelayNs = {0, 50, 120, 200, 230, 500, 1600, 2300, 5000};
inline constexpr std::array<double, 9> kEtuPowerDb = {-1.0, -1.0, -1.0, 0.0, 0.0,
                                                      0.0,  -3.0, -5.0, -7.0};

// Gain model per profile: the uniform profile fixes |h_i|^2 itself (equal
// powers, uniform random phases); the 3GPP profiles are fading models, so
// their taps draw complex Gaussian gains with the tabulated mean powers.
enum class GainModel { profile_magnitude, rayleigh };

struct ChannelProfile {
    ProfileKind kind = ProfileKind::UniformA;
    double speed_kmh = 500.0;
    int k_max = 16;  // normalized Doppler bound (Jakes)
    // Uniform-delay profiles redraw until this many delays land below M.
    int min_underspread = 2;
    GainModel gains = GainModel::profile_magnitude;

    static ChannelProfile channel_a() {
        return {ProfileKind::UniformA, 500.0, 16, 2, GainModel::profile_magnitude};
    }
    static ChannelProfile channel_b() {
        return {ProfileKind::EvaB, 500.0, 16, 2, GainModel::rayleigh};
    }
    static ChannelProfile channel_c() {
        return {ProfileKind::EtuC, 1000.0, 1, 0, GainModel::rayleigh};
    }

    std::string name() const {
        switch (kind) {
            case ProfileKind::UniformA: return "A";
            case ProfileKind::EvaB: return "B";
            default: return "C";
        }
    }
};

inline ChannelProfile profile_by_name(const std::string& s) {
    if (s == "A" || s == "a") return ChannelProfile::channel_a();
    if (s == "B" || s == "b") return ChannelProfile::channel_b();
    if (s == "C" || s == "c") return ChannelProfile::channel_c();
    throw std::invalid_argument("unknown channel profile: " + s);
}

// --- generation ---------------------------------------------------------------

inline ChannelRealization generate_channel(const ChannelProfile& profile,
                                           const FrameGeometry& g, int l_max, int L,
                                           std::uint64_t seed) {
    if (L < 1) throw std::invalid_argument("L must be >= 1");
    if (l_max >= g.size()) throw std::invalid_argument("l_max must be < M*N");
    if (L > l_max + 1) throw std::invalid_argument("cannot place L distinct delays in [0, l_max]");

    Rng rng(seed);
    std::vector<int> delays;
    std::vector<double> powers(static_cast<std::size_t>(L), 1.0 / L);

    if (profile.kind == ProfileKind::EtuC) {
        delays.reserve(kEtuDelayNs.size());
        for (std::size_t i = 0; i < kEtuDelayNs.size(); ++i) {
            const int l = static_cast<int>(
                std::lround(kEtuDelayNs[i] * 1e-9 * g.bandwidth()));
            delays.push_back(l);
            powers[i % powers.size()] = std::pow(10.0, kEtuPowerDb[i] / 10.0);
        }
        if (static_cast<int>(delays.size()) != L)
            throw std::invalid_argument("ETU profile defines 9 taps; L must be 9");
        for (int l : delays)
            if (l > l_max) throw std::invalid_argument("ETU tap exceeds l_max at this geometry");
    } else {
        // distinct uniform delays on [0, l_max]; whole set redrawn until the
        // required number of underspread taps is present
        for (;;) {
            std::set<int> picked;
            while (static_cast<int>(picked.size()) < L)
                picked.insert(static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(l_max) + 1)));
            int under = 0;
            for (int l : picked)
                if (l < g.M) ++under;
            if (under >= profile.min_underspread) {
                delays.assign(picked.begin(), picked.end());
                break;
            }
        }
        if (profile.kind == ProfileKind::EvaB) {
            for (int i = 0; i < L; ++i)
                powers[i] = std::pow(10.0, kEvaPowerDb[i % kEvaPowerDb.size()] / 10.0);
        }
    }

    std::sort(delays.begin(), delays.end());

    ChannelRealization chan;
    chan.l_max = l_max;
    chan.paths.resize(L);
    double total = 0.0;
    for (int i = 0; i < L; ++i) {
        chan.paths[i].delay = delays[i];
        chan.paths[i].gain = profile.gains == GainModel::rayleigh
                                 ? rng.cgaussian(powers[i])
                                 : std::sqrt(powers[i]) * cis_cycles(rng.uniform());
        total += std::norm(chan.paths[i].gain);
    }
    const double scale = 1.0 / std::sqrt(total);
    for (auto& p : chan.paths) p.gain *= scale;

    // Jakes draw: k = round(k_max cos(theta)), theta uniform
    for (auto& p : chan.paths) {
        const double theta = rng.uniform(0.0, kTwoPi);
        const int k_signed = static_cast<int>(std::lround(profile.k_max * std::cos(theta)));
        p.doppler = doppler_grid_index(k_signed, g.N);
    }

    chan.validate(g);
    return chan;
}

// --- application ---------------------------------------------------------------

// r[q] = sum_i h_i e^{j2pi k_i (q-l_i)/(MN)} s[q-l_i] + w[q], zero history
// before the frame (no inter-frame leakage).
inline TimeSignal apply_channel(const TimeSignal& s, const ChannelRealization& chan,
                                double noise_var, std::uint64_t noise_seed,
                                OpCounter* ops = nullptr) {
    const int MN = s.geometry.size();
    TimeSignal r(s.geometry);
    for (const auto& p : chan.paths) {
        const int ks = signed_doppler(p.doppler, s.geometry.N);
        const double cyc_step = static_cast<double>(ks) / MN;
        const cplx step = cis_cycles(cyc_step);
        cplx rot = p.gain;
        for (int q = p.delay; q < MN; ++q) {
            const int u = q - p.delay;
            // incremental phasor, resynced periodically to stop drift
            if ((u & 1023) == 0) rot = p.gain * cis_cycles(cyc_step * u);
            r.samples[q] += rot * s.samples[u];
            rot *= step;
        }
        if (ops) ops->reconstruction += static_cast<std::uint64_t>(MN - p.delay) * 2;
    }
    if (noise_var > 0.0) {
        Rng rng(noise_seed);
        for (auto& v : r.samples) v += rng.cgaussian(noise_var);
    }
    return r;
}

// Brute-force MN x MN matrix oracle (tests only): G[q][q-l] += h e^{j2pi k(q-l)/(MN)}.
inline std::vector<std::vector<cplx>> to_matrix_oracle(const ChannelRealization& chan,
                                                       const FrameGeometry& g) {
    const int MN = g.size();
    std::vector<std::vector<cplx>> G(MN, std::vector<cplx>(MN, cplx{0.0, 0.0}));
    for (const auto& p : chan.paths) {
        const int ks = signed_doppler(p.doppler, g.N);
        for (int q = p.delay; q < MN; ++q)
            G[q][q - p.delay] += p.gain * cis_cycles(static_cast<double>(ks) * (q - p.delay) / MN);
    }
    return G;
}

// Delay-time channel vector for one (m, path) branch:
// nu[n] = h e^{j2pi k(m-l)/(MN)} e^{j2pi k n / N}, n in [0, N).
inline std::vector<cplx> dt_channel_vector(const ChannelPath& p, int m, const FrameGeometry& g) {
    const int ks = signed_doppler(p.doppler, g.N);
    const cplx head = p.gain * cis_cycles(static_cast<double>(ks) * (m - p.delay) / g.size());
    std::vector<cplx> nu(g.N);
    for (int n = 0; n < g.N; ++n)
        nu[n] = head * cis_cycles(static_cast<double>(ks) * n / g.N);
    return nu;
}

// --- fractional-delay tap model ------------------------------------------------

inline double sinc(double x) {
    if (std::abs(x) < 1e-12) return 1.0;
    return std::sin(kPi * x) / (kPi * x);
}

struct FractionalPath {
    cplx gain{0.0, 0.0};
    double delay = 0.0;  // real-valued, in samples
    int doppler = 0;     // grid index
};

// Channel with real-valued delays expanded onto integer taps p where
// |sinc(p - l_i)| exceeds the truncation threshold for at least one path.
struct FractionalTapChannel {
    FrameGeometry geometry;
    std::vector<FractionalPath> paths;
    std::vector<int> taps;  // ascending tap set P
    double epsilon = 0.0;

    // time-varying response h[q, p] of tap p at sample q
    cplx response(int q, int p) const {
        cplx h{0.0, 0.0};
        for (const auto& pp : paths) {
            const double s = sinc(static_cast<double>(p) - pp.delay);
            if (s == 0.0) continue;
            const int ks = signed_doppler(pp.doppler, geometry.N);
            h += pp.gain * s * cis_cycles(static_cast<double>(ks) * (q - pp.delay) / geometry.size());
        }
        return h;
    }
};

inline FractionalTapChannel fractional_taps(const std::vector<FractionalPath>& paths,
                                            double epsilon, const FrameGeometry& g) {
    if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be > 0");
    FractionalTapChannel out;
    out.geometry = g;
    out.paths = paths;
    out.epsilon = epsilon;
    // |sinc(x)| > eps is impossible beyond |x| >= 1/(pi*eps)
    const int reach = static_cast<int>(std::ceil(1.0 / (kPi * epsilon))) + 1;
    std::set<int> taps;
    for (const auto& p : paths) {
        const int lo = std::max(0, static_cast<int>(std::floor(p.delay)) - reach);
        const int hi = std::min(g.size() - 1, static_cast<int>(std::ceil(p.delay)) + reach);
        for (int t = lo; t <= hi; ++t)
            if (std::abs(sinc(static_cast<double>(t) - p.delay)) > epsilon) taps.insert(t);
    }
    if (taps.empty()) throw std::invalid_argument("empty tap set; epsilon too large");
    out.taps.assign(taps.begin(), taps.end());
    return out;
}

inline TimeSignal apply_fractional(const TimeSignal& s, const FractionalTapChannel& chan,
                                   double noise_var, std::uint64_t noise_seed) {
    const int MN = s.geometry.size();
    TimeSignal r(s.geometry);
    for (int p : chan.taps) {
        for (int q = p; q < MN; ++q)
            r.samples[q] += chan.response(q, p) * s.samples[q - p];
    }
    if (noise_var > 0.0) {
        Rng rng(noise_seed);
        for (auto& v : r.samples) v += rng.cgaussian(noise_var);
    }
    return r;
}

// --- text serialization ---------------------------------------------------------
// Line-oriented: header, l_max, then one "re im l k" per path.

inline void write_channel(const ChannelRealization& chan, std::ostream& os) {
    os << "otfs-channel 1\n";
    os << "l_max " << chan.l_max << "\n";
    os.precision(17);
    for (const auto& p : chan.paths)
        os << p.gain.real() << " " << p.gain.imag() << " " << p.delay << " " << p.doppler << "\n";
}

inline void write_channel_file(const ChannelRealization& chan, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot open for write: " + path);
    write_channel(chan, f);
}

inline ChannelRealization read_channel(std::istream& is) {
    std::string tag;
    int version = 0;
    if (!(is >> tag >> version) || tag != "otfs-channel")
        throw std::runtime_error("bad channel file header");
    ChannelRealization chan;
    if (!(is >> tag >> chan.l_max) || tag != "l_max")
        throw std::runtime_error("bad channel file: missing l_max");
    double re, im;
    int l, k;
    while (is >> re >> im >> l >> k) chan.paths.push_back({{re, im}, l, k});
    std::sort(chan.paths.begin(), chan.paths.end(),
              [](const ChannelPath& a, const ChannelPath& b) { return a.delay < b.delay; });
    return chan;
}

inline ChannelRealization read_channel_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open for read: " + path);
    return read_channel(f);
}

}  // namespace otfs
