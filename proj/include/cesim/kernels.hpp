#pragma once

// Hot inner loops behind a runtime-dispatched interface. Each kernel has a
// scalar reference implementation and, on x86-64 with AVX2, a vectorised
// variant producing bit-identical results (all-integer arithmetic; random
// words are counter-indexed so lane order cannot change outcomes).
// Set CESIM_KERNEL=scalar|avx2 to force a backend.

#include <cstddef>
#include <cstdint>

#include "cesim/rng.hpp"

namespace cesim::kernels {

enum class Backend { scalar, avx2 };

Backend active_backend();
const char* backend_name();
bool avx2_supported();

// Positions where a and b hold the same token.
uint32_t match_count(const uint8_t* a, const uint8_t* b, size_t n);

// Coordinate-wise equal minima between two MinHash signatures.
uint32_t equal_count_u64(const uint64_t* a, const uint64_t* b, size_t k);

// Fold one shingle hash into k per-permutation minima:
//   minima[i] = min(minima[i], fmix64(h ^ salts[i]))
void minhash_fold(uint64_t h, const uint64_t* salts, uint64_t* minima, size_t k);

// Two-state token-error chains started from stationarity. Chain c in
// [chain_begin, chain_begin+n) takes decision d from u32 lane (d&7) of
// philox(key=(seed,stream), ctr=(d>>3, c, 0, 1)); decision passes when the
// zero-extended u32 is < threshold (thresholds live in [0, 2^32], so
// threshold/2^32 is the exact pass probability). Decision 0 draws the
// initial state, 1..length-1 the stay-correct transitions, and decision
// `length` the format coin. Returns how many chains survived all of them.
uint64_t markov_valid_count(uint64_t seed, uint64_t stream, uint64_t chain_begin,
                            uint64_t n_chains, uint32_t length,
                            uint64_t t_init_correct, uint64_t t_stay_correct,
                            uint64_t t_format);

// 64-bit avalanche mix (murmur3 finaliser); shared by the minhash kernels.
inline uint64_t fmix64(uint64_t z) {
    z ^= z >> 33;
    z *= 0xFF51AFD7ED558CCDull;
    z ^= z >> 33;
    z *= 0xC4CEB9FE1A85EC53ull;
    z ^= z >> 33;
    return z;
}

namespace scalar {
uint32_t match_count(const uint8_t* a, const uint8_t* b, size_t n);
uint32_t equal_count_u64(const uint64_t* a, const uint64_t* b, size_t k);
void minhash_fold(uint64_t h, const uint64_t* salts, uint64_t* minima, size_t k);
uint64_t markov_valid_count(uint64_t seed, uint64_t stream, uint64_t chain_begin,
                            uint64_t n_chains, uint32_t length,
                            uint64_t t_init_correct, uint64_t t_stay_correct,
                            uint64_t t_format);
} // namespace scalar

#if defined(CESIM_BUILD_AVX2)
namespace avx2 {
uint32_t match_count(const uint8_t* a, const uint8_t* b, size_t n);
uint32_t equal_count_u64(const uint64_t* a, const uint64_t* b, size_t k);
void minhash_fold(uint64_t h, const uint64_t* salts, uint64_t* minima, size_t k);
uint64_t markov_valid_count(uint64_t seed, uint64_t stream, uint64_t chain_begin,
                            uint64_t n_chains, uint32_t length,
                            uint64_t t_init_correct, uint64_t t_stay_correct,
                            uint64_t t_format);
// Four philox blocks at once, lane i = philox(ctr[i], key[i]).
void philox4x64_x4(const uint64_t ctr[4][4], const uint64_t key[4][2], rng::Block out[4]);
} // namespace avx2
#endif

} // namespace cesim::kernels
