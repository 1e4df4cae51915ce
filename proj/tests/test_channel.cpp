// SPDX-License-Identifier: Apache-2.0
#include <catch2/catch_amalgamated.hpp>

#include <sstream>

#include "otfs/channel.hpp"
#include "otfs/zak.hpp"

using namespace otfs;

namespace {

TimeSignal random_signal(const FrameGeometry& g, std::uint64_t seed) {
    Rng rng(seed);
    TimeSignal s(g);
    for (auto& v : s.samples) v = rng.cgaussian(1.0);
    return s;
}

// The nine-path reference layout on an 8x6 frame used across the suite.
ChannelRealization reference_channel_8x6() {
    ChannelRealization chan;
    chan.l_max = 30;
    const int delays[] = {0, 2, 4, 9, 10, 12, 14, 20, 30};
    const int dops[] = {0, 1, 2, 4, 3, 2, 1, 5, 1};
    const double amp = 1.0 / 3.0;
    for (int i = 0; i < 9; ++i) chan.paths.push_back({{amp, 0.0}, delays[i], dops[i]});
    return chan;
}

}  // namespace

TEST_CASE("identity channel passes the signal through") {
    FrameGeometry g(8, 8, 15e3);
    ChannelRealization chan;
    chan.l_max = 0;
    chan.paths = {{{1.0, 0.0}, 0, 0}};
    TimeSignal s = random_signal(g, 1);
    TimeSignal r = apply_channel(s, chan, 0.0, 0);
    for (std::size_t q = 0; q < s.size(); ++q) REQUIRE(r.samples[q] == s.samples[q]);
}

TEST_CASE("pure delay shifts with zero history") {
    FrameGeometry g(8, 8, 15e3);
    ChannelRealization chan;
    chan.l_max = 3;
    chan.paths = {{{1.0, 0.0}, 3, 0}};
    TimeSignal s = random_signal(g, 2);
    TimeSignal r = apply_channel(s, chan, 0.0, 0);
    for (int q = 0; q < 3; ++q) REQUIRE(r.samples[q] == cplx{0.0, 0.0});
    for (std::size_t q = 3; q < s.size(); ++q) REQUIRE(r.samples[q] == s.samples[q - 3]);
}

TEST_CASE("matrix oracle agrees with apply_channel") {
    FrameGeometry g(8, 8, 15e3);
    Rng rng(33);
    ChannelRealization chan;
    chan.l_max = 40;
    chan.paths = {{rng.cgaussian(0.5), 5, 3}, {rng.cgaussian(0.5), 21, 6}};
    TimeSignal s = random_signal(g, 3);
    TimeSignal r = apply_channel(s, chan, 0.0, 0);
    auto G = to_matrix_oracle(chan, g);
    for (int q = 0; q < g.size(); ++q) {
        cplx acc{0.0, 0.0};
        for (int p = 0; p < g.size(); ++p) acc += G[q][p] * s.samples[p];
        REQUIRE(std::abs(acc - r.samples[q]) < 1e-10);
    }
}

TEST_CASE("matrix oracle structure for elementary channels") {
    FrameGeometry g(4, 4, 15e3);
    ChannelRealization ident;
    ident.l_max = 0;
    ident.paths = {{{1.0, 0.0}, 0, 0}};
    auto G = to_matrix_oracle(ident, g);
    for (int i = 0; i < 16; ++i)
        for (int j = 0; j < 16; ++j)
            REQUIRE(G[i][j] == (i == j ? cplx{1.0, 0.0} : cplx{0.0, 0.0}));

    ChannelRealization delay1;
    delay1.l_max = 1;
    delay1.paths = {{{1.0, 0.0}, 1, 0}};
    G = to_matrix_oracle(delay1, g);
    for (int i = 0; i < 16; ++i)
        for (int j = 0; j < 16; ++j)
            REQUIRE(G[i][j] == (j + 1 == i ? cplx{1.0, 0.0} : cplx{0.0, 0.0}));
}

TEST_CASE("reference 8x6 channel: banded lower-triangular oracle, matches time domain") {
    FrameGeometry g(8, 6, 15e3);
    ChannelRealization chan = reference_channel_8x6();
    auto G = to_matrix_oracle(chan, g);
    for (int q = 0; q < g.size(); ++q)
        for (int p = 0; p < g.size(); ++p) {
            if (p > q) REQUIRE(G[q][p] == cplx{0.0, 0.0});       // causal
            if (q - p > 30) REQUIRE(G[q][p] == cplx{0.0, 0.0});  // band limited by l_max
        }
    TimeSignal s = random_signal(g, 4);
    TimeSignal r = apply_channel(s, chan, 0.0, 0);
    for (int q = 0; q < g.size(); ++q) {
        cplx acc{0.0, 0.0};
        for (int p = 0; p < g.size(); ++p) acc += G[q][p] * s.samples[p];
        REQUIRE(std::abs(acc - r.samples[q]) < 1e-10);
    }
}

TEST_CASE("causality: output depends only on past and present input") {
    FrameGeometry g(8, 6, 15e3);
    ChannelRealization chan = reference_channel_8x6();
    TimeSignal s = random_signal(g, 5);
    TimeSignal r1 = apply_channel(s, chan, 0.0, 0);
    const int q0 = 20;
    s.samples[q0] += cplx{1.0, 1.0};
    TimeSignal r2 = apply_channel(s, chan, 0.0, 0);
    for (int q = 0; q < q0; ++q) REQUIRE(r1.samples[q] == r2.samples[q]);
}

TEST_CASE("delay-time channel vectors") {
    FrameGeometry g(8, 6, 15e3);
    ChannelPath flat{{1.0, 0.0}, 3, 0};
    auto nu = dt_channel_vector(flat, 5, g);
    for (const auto& v : nu) REQUIRE(std::abs(v - cplx{1.0, 0.0}) < 1e-14);

    ChannelPath moving{{0.3, -0.4}, 9, 4};
    for (int m = 0; m < g.M; ++m) {
        auto v = dt_channel_vector(moving, m, g);
        for (const auto& e : v) REQUIRE(std::abs(std::abs(e) - 0.5) < 1e-14);
    }
}

TEST_CASE("channel A generation: path count, delay bounds, unit power") {
    FrameGeometry g(512, 128, 15e3);
    auto chan = generate_channel(ChannelProfile::channel_a(), g, 2400, 9, 12345);
    REQUIRE(chan.paths.size() == 9);
    REQUIRE(std::abs(chan.total_power() - 1.0) < 1e-12);
    int under = 0;
    int prev = -1;
    for (const auto& p : chan.paths) {
        REQUIRE(p.delay > prev);
        REQUIRE(p.delay <= 2400);
        prev = p.delay;
        if (p.delay < g.M) ++under;
    }
    REQUIRE(under >= 2);
}

TEST_CASE("zero mobility collapses every Doppler to zero") {
    FrameGeometry g(64, 16, 15e3);
    ChannelProfile prof = ChannelProfile::channel_a();
    prof.k_max = 0;
    auto chan = generate_channel(prof, g, 200, 5, 99);
    for (const auto& p : chan.paths) REQUIRE(p.doppler == 0);
}

TEST_CASE("channel C maps the 5000 ns tap to 2304 samples at 900 kHz spacing") {
    FrameGeometry g(512, 128, 900e3);
    auto chan = generate_channel(ChannelProfile::channel_c(), g, 2400, 9, 7);
    REQUIRE(chan.paths.back().delay == 2304);
    REQUIRE(chan.paths.front().delay == 0);
    // distinct aliased delays is what makes this profile refinement-free
    std::set<int> aliased;
    for (const auto& p : chan.paths) aliased.insert(p.delay % g.M);
    REQUIRE(aliased.size() == chan.paths.size());
}

TEST_CASE("noise calibration: sample variance within 1% of sigma_w^2") {
    FrameGeometry g(1024, 1024, 15e3);
    TimeSignal zero(g);
    ChannelRealization chan;
    chan.l_max = 0;
    chan.paths = {{{1.0, 0.0}, 0, 0}};
    const double var = 0.7;
    TimeSignal r = apply_channel(zero, chan, var, 2024);
    double acc = 0.0;
    for (const auto& v : r.samples) acc += std::norm(v);
    acc /= static_cast<double>(r.size());
    REQUIRE(std::abs(acc - var) < 0.01 * var);
}

TEST_CASE("generation rejects impossible configurations") {
    FrameGeometry g(8, 6, 15e3);
    REQUIRE_THROWS_AS(generate_channel(ChannelProfile::channel_a(), g, 3, 9, 1),
                      std::invalid_argument);
    REQUIRE_THROWS_AS(generate_channel(ChannelProfile::channel_a(), g, 100, 9, 1),
                      std::invalid_argument);  // l_max >= M*N
}

TEST_CASE("fractional taps reduce to integer delays when delays are integral") {
    FrameGeometry g(16, 8, 15e3);
    std::vector<FractionalPath> paths = {{{0.6, 0.0}, 3.0, 1}, {{0.0, 0.8}, 7.0, 5}};
    auto frac = fractional_taps(paths, 0.2, g);
    REQUIRE(frac.taps == std::vector<int>{3, 7});

    ChannelRealization chan;
    chan.l_max = 7;
    chan.paths = {{{0.6, 0.0}, 3, 1}, {{0.0, 0.8}, 7, 5}};
    TimeSignal s = random_signal(g, 6);
    TimeSignal a = apply_channel(s, chan, 0.0, 0);
    TimeSignal b = apply_fractional(s, frac, 0.0, 0);
    for (std::size_t q = 0; q < s.size(); ++q) REQUIRE(std::abs(a.samples[q] - b.samples[q]) < 1e-12);
}

TEST_CASE("fractional tap set covers the sinc mainlobe and drops the tail") {
    FrameGeometry g(16, 8, 15e3);
    auto frac = fractional_taps({{{1.0, 0.0}, 3.5, 0}}, 0.2, g);
    REQUIRE(std::find(frac.taps.begin(), frac.taps.end(), 3) != frac.taps.end());
    REQUIRE(std::find(frac.taps.begin(), frac.taps.end(), 4) != frac.taps.end());
    for (int t : frac.taps) REQUIRE(std::abs(t - 3.5) < 2.0);  // |sinc| < 0.2 beyond
}

TEST_CASE("fractional truncation keeps nearly all tap energy at eps = 0.02") {
    FrameGeometry g(64, 8, 15e3);
    const double delay = 20.37;
    auto frac = fractional_taps({{{1.0, 0.0}, delay, 0}}, 0.02, g);
    double kept = 0.0, total = 0.0;
    for (int p = 0; p < g.size(); ++p) total += std::norm(sinc(p - delay));
    for (int p : frac.taps) kept += std::norm(sinc(p - delay));
    REQUIRE(kept / total > 0.99);
}

TEST_CASE("channel text serialization round trip") {
    ChannelRealization chan = reference_channel_8x6();
    std::stringstream ss;
    write_channel(chan, ss);
    ChannelRealization back = read_channel(ss);
    REQUIRE(back.l_max == chan.l_max);
    REQUIRE(back.paths.size() == chan.paths.size());
    for (std::size_t i = 0; i < chan.paths.size(); ++i) {
        REQUIRE(back.paths[i].delay == chan.paths[i].delay);
        REQUIRE(back.paths[i].doppler == chan.paths[i].doppler);
        REQUIRE(std::abs(back.paths[i].gain - chan.paths[i].gain) < 1e-15);
    }
}
