// SPDX-License-Identifier: Apache-2.0
#include <catch2/catch_amalgamated.hpp>

#include "otfs/common.hpp"
#include "otfs/qam.hpp"

using namespace otfs;

TEST_CASE("4-QAM constellation and labeling") {
    QamConstellation qam(4, 1.0);
    REQUIRE(qam.bits_per_symbol() == 2);
    const double a = 1.0 / std::sqrt(2.0);

    std::uint8_t b00[] = {0, 0};
    REQUIRE(std::abs(qam.map_bits(b00) - cplx{a, a}) < 1e-15);

    // all four points lie on {(+-1 +- j)/sqrt(2)}
    for (const auto& p : qam.points()) {
        REQUIRE(std::abs(std::abs(p.real()) - a) < 1e-15);
        REQUIRE(std::abs(std::abs(p.imag()) - a) < 1e-15);
    }
}

TEST_CASE("round trip over every 4-QAM symbol is exact") {
    QamConstellation qam(4, 1.0);
    for (int v = 0; v < 4; ++v) {
        std::vector<std::uint8_t> bits = {static_cast<std::uint8_t>((v >> 1) & 1),
                                          static_cast<std::uint8_t>(v & 1)};
        auto syms = qam.map(bits);
        REQUIRE(qam.demap(syms) == bits);
    }
}

TEST_CASE("random 16-QAM frame round trips bit-exactly") {
    QamConstellation qam(16, 3.0);
    Rng rng(11);
    std::vector<std::uint8_t> bits(4096);
    for (auto& b : bits) b = static_cast<std::uint8_t>(rng.uniform_index(2));
    REQUIRE(qam.demap(qam.map(bits)) == bits);
}

TEST_CASE("mean symbol energy matches E_s") {
    for (int order : {4, 16, 64}) {
        const double es = 2.5;
        QamConstellation qam(order, es);
        double mean = 0.0;
        for (const auto& p : qam.points()) mean += std::norm(p);
        mean /= order;
        REQUIRE(std::abs(mean - es) < 1e-12);
    }
}

TEST_CASE("Gray labeling: nearest neighbors differ in one bit") {
    QamConstellation qam(16, 1.0);
    const auto& pts = qam.points();
    const double step = 2.0 * std::sqrt(1.0 / 10.0);  // axis level spacing at E_s=1
    auto bits_of = [&](int idx) {
        std::vector<std::uint8_t> b(4);
        for (int i = 0; i < 4; ++i) b[i] = static_cast<std::uint8_t>((idx >> (3 - i)) & 1);
        return b;
    };
    for (int i = 0; i < 16; ++i)
        for (int j = 0; j < 16; ++j) {
            if (i == j) continue;
            if (std::abs(pts[i] - pts[j]) < step * 1.001) {
                int diff = 0;
                auto bi = bits_of(i), bj = bits_of(j);
                for (int b = 0; b < 4; ++b) diff += bi[b] != bj[b];
                REQUIRE(diff == 1);
            }
        }
}

TEST_CASE("hard decision snaps to the nearest point") {
    QamConstellation qam(16, 1.0);
    Rng rng(3);
    for (int trial = 0; trial < 200; ++trial) {
        const cplx v{rng.uniform(-2.0, 2.0), rng.uniform(-2.0, 2.0)};
        const cplx s = qam.slice(v);
        for (const auto& p : qam.points()) REQUIRE(std::abs(v - s) <= std::abs(v - p) + 1e-12);
    }
}

TEST_CASE("invalid inputs are rejected") {
    REQUIRE_THROWS_AS(QamConstellation(8, 1.0), std::invalid_argument);
    QamConstellation qam(4, 1.0);
    REQUIRE_THROWS_AS(qam.map({0, 1, 0}), std::invalid_argument);
}
