#pragma once

#include <array>
#include <cstdint>

namespace tasep {

// Philox4x32-10 counter-based generator (Salmon, Moraes, Dror, Shaw 2011).
// A pure function of (counter, key): no state, so any draw can be
// addressed directly and streams for different sites never overlap.
class Philox4x32 {
public:
    using Counter = std::array<std::uint32_t, 4>;
    using Key = std::array<std::uint32_t, 2>;

    static constexpr Counter generate(Counter ctr, Key key) noexcept {
        std::uint32_t c0 = ctr[0], c1 = ctr[1], c2 = ctr[2], c3 = ctr[3];
        std::uint32_t k0 = key[0], k1 = key[1];
        for (int round = 0; round < 10; ++round) {
            const std::uint64_t p0 = std::uint64_t{kMul0} * c0;
            const std::uint64_t p1 = std::uint64_t{kMul1} * c2;
            c0 = static_cast<std::uint32_t>(p1 >> 32) ^ c1 ^ k0;
            c1 = static_cast<std::uint32_t>(p1);
            c2 = static_cast<std::uint32_t>(p0 >> 32) ^ c3 ^ k1;
            c3 = static_cast<std::uint32_t>(p0);
            k0 += kWeyl0;
            k1 += kWeyl1;
        }
        return {c0, c1, c2, c3};
    }

private:
    static constexpr std::uint32_t kMul0 = 0xD2511F53u;
    static constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
    static constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
    static constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;
};

// Open-interval uniform in (0,1) from 64 random bits; never returns 0 or 1.
constexpr double uniform_open(std::uint64_t bits) noexcept {
    return (static_cast<double>(bits >> 12) + 0.5) * 0x1.0p-52;
}

// Convenience wrapper: a 64-bit key plus a 64-bit "stream" word and a
// 64-bit draw index; yields two open uniforms per block.
class KeyedUniforms {
public:
    KeyedUniforms(std::uint64_t key, std::uint64_t stream) noexcept
        : key_{static_cast<std::uint32_t>(key), static_cast<std::uint32_t>(key >> 32)},
          stream_(stream) {}

    // The index-th uniform of this stream.
    double operator()(std::uint64_t index) const noexcept {
        const auto block = block_for(index / 2);
        return (index % 2 == 0) ? uniform_open(block.first) : uniform_open(block.second);
    }

    std::pair<std::uint64_t, std::uint64_t> block_for(std::uint64_t block_index) const noexcept {
        const Philox4x32::Counter ctr{static_cast<std::uint32_t>(block_index),
                                      static_cast<std::uint32_t>(block_index >> 32),
                                      static_cast<std::uint32_t>(stream_),
                                      static_cast<std::uint32_t>(stream_ >> 32)};
        const auto out = Philox4x32::generate(ctr, key_);
        return {(std::uint64_t{out[0]} << 32) | out[1], (std::uint64_t{out[2]} << 32) | out[3]};
    }

private:
    Philox4x32::Key key_;
    std::uint64_t stream_;
};

}  // namespace tasep
