#include "cesim/kernels.hpp"

#include <immintrin.h>

namespace cesim::kernels::avx2 {

namespace {

const __m256i kMask32 = _mm256_set1_epi64x(0xFFFFFFFFll);
const __m256i kSign64 = _mm256_set1_epi64x(static_cast<long long>(0x8000000000000000ull));

// Full 64x64 -> 128 product per lane against a broadcast constant.
inline void mul64_const(__m256i a, uint64_t m, __m256i& hi, __m256i& lo) {
    const __m256i mlo = _mm256_set1_epi64x(static_cast<long long>(m & 0xFFFFFFFFull));
    const __m256i mhi = _mm256_set1_epi64x(static_cast<long long>(m >> 32));
    __m256i ahi = _mm256_srli_epi64(a, 32);
    __m256i ll = _mm256_mul_epu32(a, mlo);
    __m256i lh = _mm256_mul_epu32(a, mhi);
    __m256i hl = _mm256_mul_epu32(ahi, mlo);
    __m256i hh = _mm256_mul_epu32(ahi, mhi);
    __m256i t = _mm256_add_epi64(_mm256_srli_epi64(ll, 32),
                                 _mm256_add_epi64(_mm256_and_si256(lh, kMask32),
                                                  _mm256_and_si256(hl, kMask32)));
    lo = _mm256_or_si256(_mm256_slli_epi64(t, 32), _mm256_and_si256(ll, kMask32));
    hi = _mm256_add_epi64(_mm256_add_epi64(hh, _mm256_srli_epi64(t, 32)),
                          _mm256_add_epi64(_mm256_srli_epi64(lh, 32), _mm256_srli_epi64(hl, 32)));
}

struct BlockX4 {
    __m256i w0, w1, w2, w3; // word k of the four lanes
};

inline BlockX4 philox_x4_soa(__m256i c0, __m256i c1, __m256i c2, __m256i c3,
                             __m256i k0, __m256i k1) {
    const __m256i w0 = _mm256_set1_epi64x(static_cast<long long>(rng::detail::kWeyl0));
    const __m256i w1 = _mm256_set1_epi64x(static_cast<long long>(rng::detail::kWeyl1));
    for (int round = 0; round < 10; ++round) {
        __m256i hi0, lo0, hi1, lo1;
        mul64_const(c0, rng::detail::kMul0, hi0, lo0);
        mul64_const(c2, rng::detail::kMul1, hi1, lo1);
        c0 = _mm256_xor_si256(_mm256_xor_si256(hi1, c1), k0);
        c1 = lo1;
        c2 = _mm256_xor_si256(_mm256_xor_si256(hi0, c3), k1);
        c3 = lo0;
        k0 = _mm256_add_epi64(k0, w0);
        k1 = _mm256_add_epi64(k1, w1);
    }
    return BlockX4{c0, c1, c2, c3};
}

// u32 lane (i in 0..7) of every block as zero-extended u64 lanes.
inline __m256i lane_u32(const BlockX4& b, unsigned i) {
    __m256i w;
    switch (i >> 1) {
        case 0: w = b.w0; break;
        case 1: w = b.w1; break;
        case 2: w = b.w2; break;
        default: w = b.w3; break;
    }
    return (i & 1u) ? _mm256_srli_epi64(w, 32) : _mm256_and_si256(w, kMask32);
}

inline __m256i fmix64_x4(__m256i z) {
    __m256i hi, lo;
    z = _mm256_xor_si256(z, _mm256_srli_epi64(z, 33));
    mul64_const(z, 0xFF51AFD7ED558CCDull, hi, lo);
    z = lo;
    z = _mm256_xor_si256(z, _mm256_srli_epi64(z, 33));
    mul64_const(z, 0xC4CEB9FE1A85EC53ull, hi, lo);
    z = lo;
    return _mm256_xor_si256(z, _mm256_srli_epi64(z, 33));
}

} // namespace

void philox4x64_x4(const uint64_t ctr[4][4], const uint64_t key[4][2], rng::Block out[4]) {
    auto gather = [&](int word) {
        return _mm256_set_epi64x(static_cast<long long>(ctr[3][word]),
                                 static_cast<long long>(ctr[2][word]),
                                 static_cast<long long>(ctr[1][word]),
                                 static_cast<long long>(ctr[0][word]));
    };
    __m256i k0 = _mm256_set_epi64x(static_cast<long long>(key[3][0]), static_cast<long long>(key[2][0]),
                                   static_cast<long long>(key[1][0]), static_cast<long long>(key[0][0]));
    __m256i k1 = _mm256_set_epi64x(static_cast<long long>(key[3][1]), static_cast<long long>(key[2][1]),
                                   static_cast<long long>(key[1][1]), static_cast<long long>(key[0][1]));
    BlockX4 b = philox_x4_soa(gather(0), gather(1), gather(2), gather(3), k0, k1);
    alignas(32) uint64_t wa[4], wb[4], wc[4], wd[4];
    _mm256_store_si256(reinterpret_cast<__m256i*>(wa), b.w0);
    _mm256_store_si256(reinterpret_cast<__m256i*>(wb), b.w1);
    _mm256_store_si256(reinterpret_cast<__m256i*>(wc), b.w2);
    _mm256_store_si256(reinterpret_cast<__m256i*>(wd), b.w3);
    for (int i = 0; i < 4; ++i) out[i] = rng::Block{{wa[i], wb[i], wc[i], wd[i]}};
}

uint32_t match_count(const uint8_t* a, const uint8_t* b, size_t n) {
    uint32_t c = 0;
    size_t i = 0;
    for (; i + 32 <= n; i += 32) {
        __m256i va = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(a + i));
        __m256i vb = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(b + i));
        c += static_cast<uint32_t>(
            __builtin_popcount(static_cast<unsigned>(_mm256_movemask_epi8(_mm256_cmpeq_epi8(va, vb)))));
    }
    for (; i < n; ++i) c += (a[i] == b[i]);
    return c;
}

uint32_t equal_count_u64(const uint64_t* a, const uint64_t* b, size_t k) {
    uint32_t c = 0;
    size_t i = 0;
    for (; i + 4 <= k; i += 4) {
        __m256i va = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(a + i));
        __m256i vb = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(b + i));
        __m256i eq = _mm256_cmpeq_epi64(va, vb);
        c += static_cast<uint32_t>(__builtin_popcount(
            static_cast<unsigned>(_mm256_movemask_pd(_mm256_castsi256_pd(eq)))));
    }
    for (; i < k; ++i) c += (a[i] == b[i]);
    return c;
}

void minhash_fold(uint64_t h, const uint64_t* salts, uint64_t* minima, size_t k) {
    const __m256i hv = _mm256_set1_epi64x(static_cast<long long>(h));
    size_t i = 0;
    for (; i + 4 <= k; i += 4) {
        __m256i s = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(salts + i));
        __m256i v = fmix64_x4(_mm256_xor_si256(hv, s));
        __m256i cur = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(minima + i));
        // unsigned v < cur via sign-flipped signed compare
        __m256i lt = _mm256_cmpgt_epi64(_mm256_xor_si256(cur, kSign64), _mm256_xor_si256(v, kSign64));
        _mm256_storeu_si256(reinterpret_cast<__m256i*>(minima + i), _mm256_blendv_epi8(cur, v, lt));
    }
    for (; i < k; ++i) {
        uint64_t v = fmix64(h ^ salts[i]);
        if (v < minima[i]) minima[i] = v;
    }
}

uint64_t markov_valid_count(uint64_t seed, uint64_t stream, uint64_t chain_begin,
                            uint64_t n_chains, uint32_t length,
                            uint64_t t_init_correct, uint64_t t_stay_correct,
                            uint64_t t_format) {
    const __m256i k0 = _mm256_set1_epi64x(static_cast<long long>(seed));
    const __m256i k1 = _mm256_set1_epi64x(static_cast<long long>(stream));
    const __m256i t_init = _mm256_set1_epi64x(static_cast<long long>(t_init_correct));
    const __m256i t_stay = _mm256_set1_epi64x(static_cast<long long>(t_stay_correct));
    const __m256i t_fmt = _mm256_set1_epi64x(static_cast<long long>(t_format));
    const __m256i zero = _mm256_setzero_si256();
    const __m256i dom = _mm256_set1_epi64x(1);

    uint64_t valid = 0;
    uint64_t c = chain_begin;
    for (; c + 4 <= chain_begin + n_chains; c += 4) {
        __m256i chains = _mm256_set_epi64x(static_cast<long long>(c + 3), static_cast<long long>(c + 2),
                                           static_cast<long long>(c + 1), static_cast<long long>(c));
        __m256i alive = _mm256_set1_epi64x(-1);
        BlockX4 blk{};
        for (uint32_t d = 0; d <= length; ++d) {
            if ((d & 7u) == 0) {
                if (_mm256_testz_si256(alive, alive)) break;
                blk = philox_x4_soa(_mm256_set1_epi64x(static_cast<long long>(d >> 3)),
                                    chains, zero, dom, k0, k1);
            }
            __m256i u = lane_u32(blk, d & 7u);
            const __m256i t = (d == 0) ? t_init : (d < length ? t_stay : t_fmt);
            // both sides < 2^33, so signed 64-bit compare is exact
            alive = _mm256_and_si256(alive, _mm256_cmpgt_epi64(t, u));
        }
        valid += static_cast<uint64_t>(__builtin_popcount(
            static_cast<unsigned>(_mm256_movemask_pd(_mm256_castsi256_pd(alive)))));
    }
    if (c < chain_begin + n_chains) {
        valid += scalar::markov_valid_count(seed, stream, c, chain_begin + n_chains - c, length,
                                            t_init_correct, t_stay_correct, t_format);
    }
    return valid;
}

} // namespace cesim::kernels::avx2
