#pragma once

// Counter-based RNG (philox4x64-10). Every draw is a pure function of
// (seed, stream, substream, counter), so independent streams can be split
// deterministically per candidate / trial / permutation index without
// sharing state. The block function matches numpy's Philox bit-for-bit
// (numpy advances the counter before producing a block; tests encode that
// offset explicitly).

#include <cmath>
#include <cstdint>
#include <numbers>

namespace cesim::rng {

struct Block {
    uint64_t w[4];
};

namespace detail {
constexpr uint64_t kMul0 = 0xD2E7470EE14C6C93ull;
constexpr uint64_t kMul1 = 0xCA5A826395121157ull;
constexpr uint64_t kWeyl0 = 0x9E3779B97F4A7C15ull;
constexpr uint64_t kWeyl1 = 0xBB67AE8584CAA73Bull;

inline void mul128(uint64_t a, uint64_t b, uint64_t& hi, uint64_t& lo) {
    unsigned __int128 p = static_cast<unsigned __int128>(a) * b;
    hi = static_cast<uint64_t>(p >> 64);
    lo = static_cast<uint64_t>(p);
}
} // namespace detail

inline Block philox4x64(const uint64_t ctr[4], const uint64_t key[2]) {
    uint64_t c0 = ctr[0], c1 = ctr[1], c2 = ctr[2], c3 = ctr[3];
    uint64_t k0 = key[0], k1 = key[1];
    for (int round = 0; round < 10; ++round) {
        uint64_t hi0, lo0, hi1, lo1;
        detail::mul128(c0, detail::kMul0, hi0, lo0);
        detail::mul128(c2, detail::kMul1, hi1, lo1);
        c0 = hi1 ^ c1 ^ k0;
        c1 = lo1;
        c2 = hi0 ^ c3 ^ k1;
        c3 = lo0;
        k0 += detail::kWeyl0;
        k1 += detail::kWeyl1;
    }
    return Block{{c0, c1, c2, c3}};
}

// u32 lane i (0..7) of a block, low half first.
inline uint32_t block_u32(const Block& b, unsigned i) {
    return static_cast<uint32_t>(b.w[i >> 1] >> (32u * (i & 1u)));
}

// Buffered stream over the counter space. Counter layout:
//   ctr = (block, substream, subsplit, domain)   key = (seed, stream)
// domain 0 is reserved for Stream draws; bulk kernels use domain 1+ so their
// chain-indexed draws can never collide with stream draws under one seed.
class Stream {
  public:
    explicit Stream(uint64_t seed, uint64_t stream = 0, uint64_t substream = 0,
                    uint64_t subsplit = 0)
        : key_{seed, stream}, sub_{substream}, split_{subsplit} {}

    // Independent child stream; children of distinct x never collide.
    Stream split(uint64_t x) const { return Stream(key_[0], key_[1], sub_, split_ ^ (x + 1)); }

    uint64_t next_u64() {
        if (pos_ == 4) refill();
        return buf_.w[pos_++];
    }

    uint32_t next_u32() { return static_cast<uint32_t>(next_u64() >> 32); }

    // Uniform in [0,1) with 53 random bits.
    double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Unbiased draw in [0, n).
    uint64_t next_below(uint64_t n) {
        uint64_t threshold = -n % n;
        for (;;) {
            uint64_t v = next_u64();
            if (v >= threshold) return v % n;
        }
    }

    double next_normal() {
        if (have_cached_) {
            have_cached_ = false;
            return cached_;
        }
        double u1 = next_double();
        double u2 = next_double();
        if (u1 <= 0.0) u1 = 0x1.0p-53;
        double r = std::sqrt(-2.0 * std::log(u1));
        double a = 2.0 * std::numbers::pi * u2;
        cached_ = r * std::sin(a);
        have_cached_ = true;
        return r * std::cos(a);
    }

    uint64_t seed() const { return key_[0]; }
    uint64_t stream() const { return key_[1]; }

  private:
    void refill() {
        uint64_t ctr[4] = {block_++, sub_, split_, 0};
        buf_ = philox4x64(ctr, key_);
        pos_ = 0;
    }

    uint64_t key_[2];
    uint64_t sub_ = 0;
    uint64_t split_ = 0;
    uint64_t block_ = 0;
    Block buf_{};
    int pos_ = 4;
    double cached_ = 0.0;
    bool have_cached_ = false;
};

} // namespace cesim::rng
