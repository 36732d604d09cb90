#pragma once

// Unscrambled two-dimensional Sobol sequence in Gray-code order, with the
// standard (Joe-Kuo) direction numbers. Dimension 1 is the van der Corput
// sequence; dimension 2 uses primitive polynomial x + 1 with m_1 = 1.

#include <array>
#include <bit>
#include <cstdint>
#include <stdexcept>

namespace quadbench {

class Sobol2D {
public:
    static constexpr int kBits = 32;

    Sobol2D() {
        std::uint32_t m = 1;
        for (int k = 0; k < kBits; ++k) {
            dir_[0][k] = std::uint32_t{1} << (kBits - 1 - k);
            if (k > 0) m = (m << 1) ^ m;  // m_k = 2 m_{k-1} xor m_{k-1}
            dir_[1][k] = m << (kBits - 1 - k);
        }
    }

    /// Returns point `index_` and advances. The first call yields (0, 0).
    std::array<double, 2> next() {
        std::array<double, 2> p = {state_[0] * kScale, state_[1] * kScale};
        if (index_ == UINT32_MAX) throw std::out_of_range("Sobol sequence exhausted");
        const int c = std::countr_one(index_);  // lowest zero bit of the index
        state_[0] ^= dir_[0][c];
        state_[1] ^= dir_[1][c];
        ++index_;
        return p;
    }

    void skip(std::uint32_t n) {
        for (std::uint32_t i = 0; i < n; ++i) next();
    }

    std::uint32_t index() const { return index_; }

private:
    static constexpr double kScale = 1.0 / 4294967296.0;

    std::array<std::array<std::uint32_t, kBits>, 2> dir_{};
    std::array<std::uint32_t, 2> state_{0, 0};
    std::uint32_t index_ = 0;
};

}  // namespace quadbench
