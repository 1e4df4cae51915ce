// SPDX-License-Identifier: Apache-2.0
#include <catch2/catch_amalgamated.hpp>

#include "otfs/detector.hpp"
#include "otfs/metrics.hpp"

using namespace otfs;

namespace {

DDGrid random_qam_grid(const FrameGeometry& g, const QamConstellation& qam,
                       std::vector<std::uint8_t>& bits_out, std::uint64_t seed) {
    Rng rng(seed);
    bits_out.resize(static_cast<std::size_t>(g.size()) * qam.bits_per_symbol());
    for (auto& b : bits_out) b = static_cast<std::uint8_t>(rng.uniform_index(2));
    DDGrid x(g);
    x.values = qam.map(bits_out);
    return x;
}

ChannelRealization random_channel(const FrameGeometry& g, int L, int l_max, int k_max,
                                  std::uint64_t seed) {
    ChannelProfile prof = ChannelProfile::channel_a();
    prof.k_max = k_max;
    prof.min_underspread = 1;
    return generate_channel(prof, g, l_max, L, seed);
}

// Delay-time model assembled from channel vectors and block shifts; this is
// the detector's view of the channel and must agree with the time domain.
std::vector<std::vector<cplx>> dt_model(const DDGrid& x, const ChannelRealization& chan) {
    const FrameGeometry g = x.geometry;
    const int M = g.M, N = g.N;
    std::vector<std::vector<cplx>> xt(M, std::vector<cplx>(N));
    for (int m = 0; m < M; ++m) {
        std::vector<cplx> row(N);
        for (int k = 0; k < N; ++k) row[k] = x.at(m, k);
        idft_unitary(row);
        xt[m] = row;
    }
    std::vector<std::vector<cplx>> y(M, std::vector<cplx>(N, cplx{0.0, 0.0}));
    for (int mp = 0; mp < M; ++mp) {
        for (const auto& p : chan.paths) {
            const int src = ((mp - p.delay) % M + M) % M;
            const int power = -static_cast<int>(
                std::floor(static_cast<double>(mp - p.delay) / M));  // down-shift count
            const auto nu = dt_channel_vector(p, mp, g);
            const auto shifted = block_shift(xt[src], power);
            for (int n = 0; n < N; ++n) y[mp][n] += nu[n] * shifted[n];
        }
    }
    return y;
}

}  // namespace

TEST_CASE("block shift basics") {
    std::vector<cplx> v = {{1, 0}, {2, 0}, {3, 0}, {4, 0}};
    auto s0 = block_shift(v, 0);
    REQUIRE(s0 == v);
    auto s1 = block_shift(v, 1);
    REQUIRE(s1 == std::vector<cplx>{{0, 0}, {1, 0}, {2, 0}, {3, 0}});
    auto su = block_shift(s1, -1);
    REQUIRE(su == std::vector<cplx>{{1, 0}, {2, 0}, {3, 0}, {0, 0}});
    REQUIRE_THROWS_AS(block_shift(v, 4), std::domain_error);
    REQUIRE_THROWS_AS(block_shift(v, -4), std::domain_error);
}

TEST_CASE("delay-time model equals the time-domain channel, including overspread") {
    FrameGeometry g(8, 8, 15e3);
    const QamConstellation qam(4, 1.0);
    for (int trial = 0; trial < 50; ++trial) {
        auto chan = random_channel(g, 3, 40, 3, 500 + trial);
        std::vector<std::uint8_t> bits;
        DDGrid x = random_qam_grid(g, qam, bits, 900 + trial);
        TimeSignal r = apply_channel(idzt(x), chan, 0.0, 0);
        auto y_time = dt_columns(r);
        auto y_model = dt_model(x, chan);
        for (int m = 0; m < g.M; ++m)
            for (int n = 0; n < g.N; ++n)
                REQUIRE(std::abs(y_time[m][n] - y_model[m][n]) < 1e-10);
    }
}

TEST_CASE("single-path DT relation, evaluated at M=N=4") {
    FrameGeometry g(4, 4, 15e3);
    ChannelRealization chan;
    chan.l_max = 6;
    chan.paths = {{{0.8, -0.6}, 6, 1}};  // overspread: aliased 2, block 1
    const QamConstellation qam(4, 1.0);
    std::vector<std::uint8_t> bits;
    DDGrid x = random_qam_grid(g, qam, bits, 31);
    TimeSignal r = apply_channel(idzt(x), chan, 0.0, 0);
    auto y = dt_columns(r);
    auto model = dt_model(x, chan);
    for (int m = 0; m < 4; ++m)
        for (int n = 0; n < 4; ++n) REQUIRE(std::abs(y[m][n] - model[m][n]) < 1e-12);
}

TEST_CASE("identity channel detects in one iteration") {
    FrameGeometry g(8, 8, 15e3);
    const QamConstellation qam(4, 1.0);
    std::vector<std::uint8_t> bits;
    DDGrid x = random_qam_grid(g, qam, bits, 1);
    ChannelRealization chan;
    chan.l_max = 0;
    chan.paths = {{{1.0, 0.0}, 0, 0}};
    TimeSignal r = apply_channel(idzt(x), chan, 0.0, 0);
    DetectorConfig cfg;
    cfg.n_iter = 5;
    cfg.delta_bar = 1.0;
    auto res = mrc_detect(r, chan.paths, qam, cfg);
    REQUIRE(res.bits == bits);
    REQUIRE(res.residual_norms.size() >= 2);
    double total = 0.0;
    for (double v : res.residual_norms[1]) total += v;
    REQUIRE(total < 1e-20);
}

TEST_CASE("two-path underspread channel, true CSI, noiseless: exact bits") {
    FrameGeometry g(8, 8, 15e3);
    const QamConstellation qam(4, 1.0);
    ChannelRealization chan;
    chan.l_max = 5;
    chan.paths = {{{0.8, 0.0}, 0, 1}, {{0.0, 0.6}, 5, 6}};
    for (int trial = 0; trial < 10; ++trial) {
        std::vector<std::uint8_t> bits;
        DDGrid x = random_qam_grid(g, qam, bits, 60 + trial);
        TimeSignal r = apply_channel(idzt(x), chan, 0.0, 0);
        DetectorConfig cfg;
        cfg.n_iter = 20;
        cfg.delta_bar = 0.25;  // small-frame blend
        auto res = mrc_detect(r, chan.paths, qam, cfg);
        REQUIRE(res.bits == bits);
    }
}

TEST_CASE("overspread channel with delayed first tap: erasures are repaired") {
    FrameGeometry g(8, 8, 15e3);
    const QamConstellation qam(4, 1.0);
    ChannelRealization chan;
    chan.l_max = 17;
    chan.paths = {{{0.7, 0.1}, 1, 2}, {{-0.1, 0.69}, 17, 7}};
    std::vector<std::uint8_t> bits;
    DDGrid x = random_qam_grid(g, qam, bits, 77);
    TimeSignal r = apply_channel(idzt(x), chan, 0.0, 0);
    DetectorConfig cfg;
    cfg.n_iter = 30;
    cfg.delta_bar = 0.5;
    auto res = mrc_detect(r, chan.paths, qam, cfg);
    REQUIRE(res.unobserved > 0);  // zero combining weights exist and are skipped
    REQUIRE(res.bits == bits);
}

TEST_CASE("reported iterate never has a larger residual than its predecessor") {
    FrameGeometry g(16, 16, 15e3);
    const QamConstellation qam(4, 1.0);
    for (int trial = 0; trial < 5; ++trial) {
        auto chan = random_channel(g, 3, 100, 4, 400 + trial);
        std::vector<std::uint8_t> bits;
        DDGrid x = random_qam_grid(g, qam, bits, 800 + trial);
        TimeSignal r = apply_channel(idzt(x), chan, 0.01, 7 + trial);
        DetectorConfig cfg;
        cfg.n_iter = 12;
        cfg.delta_bar = 0.25;
        auto res = mrc_detect(r, chan.paths, qam, cfg);
        const auto& rn = res.residual_norms;
        // every retained iteration improved at least one branch
        for (std::size_t i = 1; i + 1 < rn.size(); ++i) {
            bool any_improved = false;
            for (std::size_t m = 0; m < rn[i].size(); ++m)
                if (rn[i][m] < rn[i - 1][m]) any_improved = true;
            REQUIRE(any_improved);
        }
    }
}

TEST_CASE("per-iteration multiplication count stays inside the budget") {
    FrameGeometry g(64, 32, 15e3);
    const QamConstellation qam(4, 1.0);
    auto chan = random_channel(g, 4, 300, 3, 11);
    std::vector<std::uint8_t> bits;
    DDGrid x = random_qam_grid(g, qam, bits, 12);
    TimeSignal r = apply_channel(idzt(x), chan, 1e-3, 13);
    DetectorConfig cfg;
    cfg.n_iter = 4;
    auto res = mrc_detect(r, chan.paths, qam, cfg);
    const double L = static_cast<double>(chan.paths.size());
    const double budget = g.size() * (2.0 * L + 1.0 + 2.0 * std::log2(static_cast<double>(g.N)));
    REQUIRE(static_cast<double>(res.ops_per_iteration) <= 1.1 * budget);
}

TEST_CASE("empty path list is rejected") {
    FrameGeometry g(4, 4, 15e3);
    TimeSignal r(g);
    QamConstellation qam(4, 1.0);
    REQUIRE_THROWS_AS(mrc_detect(r, {}, qam, DetectorConfig{}), std::invalid_argument);
}
