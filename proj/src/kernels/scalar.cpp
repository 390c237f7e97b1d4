#include "cesim/kernels.hpp"

namespace cesim::kernels::scalar {

uint32_t match_count(const uint8_t* a, const uint8_t* b, size_t n) {
    uint32_t c = 0;
    for (size_t i = 0; i < n; ++i) c += (a[i] == b[i]);
    return c;
}

uint32_t equal_count_u64(const uint64_t* a, const uint64_t* b, size_t k) {
    uint32_t c = 0;
    for (size_t i = 0; i < k; ++i) c += (a[i] == b[i]);
    return c;
}

void minhash_fold(uint64_t h, const uint64_t* salts, uint64_t* minima, size_t k) {
    for (size_t i = 0; i < k; ++i) {
        uint64_t v = fmix64(h ^ salts[i]);
        if (v < minima[i]) minima[i] = v;
    }
}

uint64_t markov_valid_count(uint64_t seed, uint64_t stream, uint64_t chain_begin,
                            uint64_t n_chains, uint32_t length,
                            uint64_t t_init_correct, uint64_t t_stay_correct,
                            uint64_t t_format) {
    const uint64_t key[2] = {seed, stream};
    uint64_t valid = 0;
    for (uint64_t c = chain_begin; c < chain_begin + n_chains; ++c) {
        rng::Block blk{};
        bool alive = true;
        for (uint32_t d = 0; d <= length && alive; ++d) {
            if ((d & 7u) == 0) {
                uint64_t ctr[4] = {d >> 3, c, 0, 1};
                blk = rng::philox4x64(ctr, key);
            }
            uint64_t u = rng::block_u32(blk, d & 7u);
            uint64_t t = (d == 0) ? t_init_correct : (d < length ? t_stay_correct : t_format);
            alive = u < t;
        }
        valid += alive;
    }
    return valid;
}

} // namespace cesim::kernels::scalar
