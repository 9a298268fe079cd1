#pragma once

#include <array>
#include <cmath>
#include <cstdint>

namespace fdc {

/**
 * Philox4x32-10 keyed by (seed, stream). Every draw is a pure function of
 * (seed, stream, index), so results do not depend on evaluation order.
 */
class CounterRng {
public:
    CounterRng(std::uint64_t seed, std::uint64_t stream) : seed_(seed), stream_(stream) {}

    std::array<std::uint32_t, 4> block(std::uint64_t index) const {
        std::array<std::uint32_t, 4> c{std::uint32_t(index), std::uint32_t(index >> 32),
                                       std::uint32_t(stream_), std::uint32_t(stream_ >> 32)};
        std::uint32_t k0 = std::uint32_t(seed_), k1 = std::uint32_t(seed_ >> 32);
        for (int r = 0; r < 10; ++r) {
            std::uint64_t p0 = std::uint64_t(0xD2511F53u) * c[0];
            std::uint64_t p1 = std::uint64_t(0xCD9E8D57u) * c[2];
            c = {std::uint32_t(p1 >> 32) ^ c[1] ^ k0, std::uint32_t(p1), std::uint32_t(p0 >> 32) ^ c[3] ^ k1,
                 std::uint32_t(p0)};
            k0 += 0x9E3779B9u;
            k1 += 0xBB67AE85u;
        }
        return c;
    }

    // Uniform in (0, 1) from 53 random bits.
    static double to_open_unit(std::uint32_t hi, std::uint32_t lo) {
        std::uint64_t x = ((std::uint64_t(hi) << 32) | lo) >> 11;
        return (double(x) + 0.5) * 0x1.0p-53;
    }

    double uniform(std::uint64_t index) const {
        auto b = block(index);
        return to_open_unit(b[0], b[1]);
    }

    bool coin(std::uint64_t index) const { return block(index)[0] & 1u; }

    // Standard normal by Box-Muller, one block per draw.
    double normal(std::uint64_t index) const {
        auto b = block(index);
        double u1 = to_open_unit(b[0], b[1]);
        double u2 = to_open_unit(b[2], b[3]);
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
    }

    std::uint64_t seed() const { return seed_; }
    std::uint64_t stream() const { return stream_; }

private:
    std::uint64_t seed_;
    std::uint64_t stream_;
};

// Sequential view over a counter stream.
class RngStream {
public:
    RngStream(std::uint64_t seed, std::uint64_t stream) : rng_(seed, stream) {}
    double uniform() { return rng_.uniform(next_++); }
    double normal() { return rng_.normal(next_++); }
    bool coin() { return rng_.coin(next_++); }
    std::uint64_t bits() {
        auto b = rng_.block(next_++);
        return (std::uint64_t(b[0]) << 32) | b[1];
    }

private:
    CounterRng rng_;
    std::uint64_t next_ = 0;
};

// Stream ids; matrix sampling and state sampling never share a stream.
namespace streams {
constexpr std::uint64_t matrix = 1;
constexpr std::uint64_t state_sampling = 2;
constexpr std::uint64_t test_cases = 3;
constexpr std::uint64_t fresh_seed = 4;
}  // namespace streams

}  // namespace fdc
