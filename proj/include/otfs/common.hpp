// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <complex>
#include <cstdint>
#include <limits>
#include <random>
#include <stdexcept>
#include <vector>

namespace otfs {

using cplx = std::complex<double>;

inline constexpr double kPi = 3.141592653589793238462643383279502884;
inline constexpr double kTwoPi = 2.0 * kPi;

// e^{j*2*pi*cycles}; phase given in cycles, not radians.
inline cplx cis_cycles(double cycles) {
    const double arg = kTwoPi * cycles;
    return {std::cos(arg), std::sin(arg)};
}

// Complex-multiplication counters, accumulated per algorithm stage so tests
// can check the documented complexity envelopes.
struct OpCounter {
    std::uint64_t transform = 0;    // DFT/IDFT butterflies
    std::uint64_t detection = 0;    // grid power scans
    std::uint64_t correlation = 0;  // chirp cross-correlations
    std::uint64_t reconstruction = 0;
    std::uint64_t combining = 0;    // detector MRC updates

    std::uint64_t total() const {
        return transform + detection + correlation + reconstruction + combining;
    }
    void reset() { *this = OpCounter{}; }
};

// splitmix64, used only to derive decorrelated child seeds from a master
// seed plus stream indices (point index, trial index, purpose tag).
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream,
                                 std::uint64_t index) {
    return splitmix64(master ^ splitmix64(stream * 0x9e3779b97f4a7c15ull + index));
}

// mt19937_64 with hand-rolled uniform/Gaussian draws. The standard engine is
// bit-exact everywhere; std::normal_distribution is not, so Box-Muller keeps
// seeded runs reproducible across toolchains.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    double uniform() {  // [0, 1)
        return (eng_() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // uniform integer in [0, n)
    std::uint64_t uniform_index(std::uint64_t n) {
        // rejection keeps the draw unbiased
        const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                    std::numeric_limits<std::uint64_t>::max() % n;
        std::uint64_t v = eng_();
        while (v >= limit) v = eng_();
        return v % n;
    }

    double gaussian() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        spare_ = r * std::sin(kTwoPi * u2);
        have_spare_ = true;
        return r * std::cos(kTwoPi * u2);
    }

    // circularly symmetric complex Gaussian, E|z|^2 = var
    cplx cgaussian(double var) {
        const double s = std::sqrt(var / 2.0);
        return {s * gaussian(), s * gaussian()};
    }

  private:
    std::mt19937_64 eng_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

}  // namespace otfs
