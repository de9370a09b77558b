#pragma once

// Counter-based random numbers (Philox4x32-10, Salmon et al. SC'11).
//
// Every value is a pure function of (seed, stream, position), so Monte-Carlo
// draws, dataset rows and experiment trials can be produced in any order and
// still be bit-for-bit reproducible.

#include <array>
#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <numbers>

namespace simlearn {

namespace philox {

using Counter = std::array<std::uint32_t, 4>;
using Key     = std::array<std::uint32_t, 2>;

inline constexpr std::uint32_t M0 = 0xD2511F53;
inline constexpr std::uint32_t M1 = 0xCD9E8D57;
inline constexpr std::uint32_t W0 = 0x9E3779B9;
inline constexpr std::uint32_t W1 = 0xBB67AE85;

constexpr Counter round(const Counter &c, const Key &k) {
    const std::uint64_t p0 = std::uint64_t{M0} * c[0];
    const std::uint64_t p1 = std::uint64_t{M1} * c[2];
    return {static_cast<std::uint32_t>(p1 >> 32) ^ c[1] ^ k[0], static_cast<std::uint32_t>(p1),
            static_cast<std::uint32_t>(p0 >> 32) ^ c[3] ^ k[1], static_cast<std::uint32_t>(p0)};
}

/// Ten-round Philox4x32 block function.
constexpr Counter block(Counter c, Key k) {
    for (int r = 0; r < 10; ++r) {
        if (r > 0) {
            k[0] += W0;
            k[1] += W1;
        }
        c = round(c, k);
    }
    return c;
}

} // namespace philox

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ull;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

/// Derives a child seed from a master seed and a list of coordinates.
/// Changing any coordinate changes the child; other children are unaffected.
inline std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> coords) {
    std::uint64_t h = mix64(master);
    for (auto c : coords)
        h = mix64(h ^ mix64(c + 0x632BE59BD9B4E019ull));
    return h;
}

/// Sequential reader over one Philox substream.
///
/// The key is the seed; the counter holds (block index, stream id).
class CounterStream {
  public:
    CounterStream(std::uint64_t seed, std::uint64_t stream)
        : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
          stream_(stream) {}

    std::uint64_t next_u64() {
        if (pos_ == 2)
            refill();
        return buf_[pos_++];
    }

    /// Uniform on [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Uniform on (0, 1].
    double uniform_pos() { return (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53; }

    /// +1 or -1 with equal probability.
    int sign() { return (next_u64() >> 63) ? 1 : -1; }

    /// Uniform integer in [0, n) by rejection (Lemire); n > 0.
    std::uint64_t below(std::uint64_t n) {
        unsigned __int128 prod = static_cast<unsigned __int128>(next_u64()) * n;
        auto low               = static_cast<std::uint64_t>(prod);
        if (low < n) {
            const std::uint64_t threshold = (0 - n) % n;
            while (low < threshold) {
                prod = static_cast<unsigned __int128>(next_u64()) * n;
                low  = static_cast<std::uint64_t>(prod);
            }
        }
        return static_cast<std::uint64_t>(prod >> 64);
    }

    /// Standard normal by the Box-Muller transform; the sine branch is cached.
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double radius = std::sqrt(-2.0 * std::log(uniform_pos()));
        const double angle  = 2.0 * std::numbers::pi * uniform();
        spare_              = radius * std::sin(angle);
        has_spare_          = true;
        return radius * std::cos(angle);
    }

  private:
    void refill() {
        const philox::Counter ctr{static_cast<std::uint32_t>(block_), static_cast<std::uint32_t>(block_ >> 32),
                                  static_cast<std::uint32_t>(stream_), static_cast<std::uint32_t>(stream_ >> 32)};
        const auto out = philox::block(ctr, key_);
        buf_[0]        = (std::uint64_t{out[1]} << 32) | out[0];
        buf_[1]        = (std::uint64_t{out[3]} << 32) | out[2];
        ++block_;
        pos_ = 0;
    }

    philox::Key key_;
    std::uint64_t stream_;
    std::uint64_t block_ = 0;
    std::array<std::uint64_t, 2> buf_{};
    int pos_        = 2;
    bool has_spare_ = false;
    double spare_   = 0;
};

} // namespace simlearn
