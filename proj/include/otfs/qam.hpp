// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "otfs/common.hpp"

namespace otfs {

// Square Gray-labelled Q-QAM, Q a power of 4. Bits split evenly between the
// axes, I bits first, MSB first, Gray-coded per axis; 0-bits map toward the
// positive end. For Q=4, E_s=1 this gives 00 -> (+1+j)/sqrt(2).
class QamConstellation {
  public:
    QamConstellation(int order, double symbol_energy) : order_(order), es_(symbol_energy) {
        if (order < 4) throw std::invalid_argument("QAM order must be >= 4");
        int q = order;
        while (q > 1) {
            if (q % 4 != 0) throw std::invalid_argument("QAM order must be a power of 4");
            q /= 4;
        }
        bits_per_symbol_ = 0;
        for (int v = order; v > 1; v >>= 1) ++bits_per_symbol_;
        side_ = 1 << (bits_per_symbol_ / 2);
        // mean unnormalized energy of {+-1, +-3, ...} per axis is (side^2-1)/3
        scale_ = std::sqrt(symbol_energy / (2.0 * (side_ * side_ - 1) / 3.0));
        points_.resize(order);
        for (int idx = 0; idx < order; ++idx) points_[idx] = point_from_index(idx);
    }

    int order() const { return order_; }
    int bits_per_symbol() const { return bits_per_symbol_; }
    double symbol_energy() const { return es_; }
    const std::vector<cplx>& points() const { return points_; }

    cplx map_bits(const std::uint8_t* bits) const {
        int idx = 0;
        for (int b = 0; b < bits_per_symbol_; ++b) idx = (idx << 1) | (bits[b] & 1);
        return points_[idx];
    }

    std::vector<cplx> map(const std::vector<std::uint8_t>& bits) const {
        if (bits.size() % bits_per_symbol_ != 0)
            throw std::invalid_argument("bit count not divisible by log2(Q)");
        std::vector<cplx> out(bits.size() / bits_per_symbol_);
        for (std::size_t s = 0; s < out.size(); ++s)
            out[s] = map_bits(bits.data() + s * bits_per_symbol_);
        return out;
    }

    // Nearest-neighbor hard decision, done per axis on the rectangular grid.
    cplx slice(cplx v) const {
        return {slice_axis(v.real()), slice_axis(v.imag())};
    }

    void demap_symbol(cplx v, std::uint8_t* bits) const {
        const int i_idx = axis_index(v.real());
        const int q_idx = axis_index(v.imag());
        const int half = bits_per_symbol_ / 2;
        const int i_gray = bin_to_gray(i_idx);
        const int q_gray = bin_to_gray(q_idx);
        for (int b = 0; b < half; ++b) {
            bits[b] = static_cast<std::uint8_t>((i_gray >> (half - 1 - b)) & 1);
            bits[half + b] = static_cast<std::uint8_t>((q_gray >> (half - 1 - b)) & 1);
        }
    }

    std::vector<std::uint8_t> demap(const std::vector<cplx>& symbols) const {
        std::vector<std::uint8_t> bits(symbols.size() * bits_per_symbol_);
        for (std::size_t s = 0; s < symbols.size(); ++s)
            demap_symbol(symbols[s], bits.data() + s * bits_per_symbol_);
        return bits;
    }

  private:
    // Gray code of the level index; level 0 is the most positive amplitude.
    static int bin_to_gray(int v) { return v ^ (v >> 1); }
    static int gray_to_bin(int g) {
        int b = 0;
        for (; g; g >>= 1) b ^= g;
        return b;
    }

    double level_amplitude(int idx) const {
        // idx 0 -> +(side-1), idx side-1 -> -(side-1), step -2
        return scale_ * static_cast<double>(side_ - 1 - 2 * idx);
    }

    cplx point_from_index(int idx) const {
        const int half = bits_per_symbol_ / 2;
        const int i_gray = idx >> half;
        const int q_gray = idx & ((1 << half) - 1);
        return {level_amplitude(gray_to_bin(i_gray)), level_amplitude(gray_to_bin(q_gray))};
    }

    int axis_index(double v) const {
        const int idx = static_cast<int>(std::lround((static_cast<double>(side_ - 1) - v / scale_) / 2.0));
        return idx < 0 ? 0 : (idx >= side_ ? side_ - 1 : idx);
    }

    double slice_axis(double v) const { return level_amplitude(axis_index(v)); }

    int order_;
    double es_;
    int bits_per_symbol_;
    int side_;
    double scale_;
    std::vector<cplx> points_;
};

}  // namespace otfs
