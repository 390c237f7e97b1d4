#include "cesim/kernels.hpp"

#include <cstdlib>
#include <cstring>

namespace cesim::kernels {

bool avx2_supported() {
#if defined(CESIM_BUILD_AVX2) && (defined(__x86_64__) || defined(_M_X64))
    return __builtin_cpu_supports("avx2");
#else
    return false;
#endif
}

Backend active_backend() {
    static const Backend backend = [] {
        const char* env = std::getenv("CESIM_KERNEL");
        if (env != nullptr) {
            if (std::strcmp(env, "scalar") == 0) return Backend::scalar;
            if (std::strcmp(env, "avx2") == 0 && avx2_supported()) return Backend::avx2;
        }
        return avx2_supported() ? Backend::avx2 : Backend::scalar;
    }();
    return backend;
}

const char* backend_name() {
    return active_backend() == Backend::avx2 ? "avx2" : "scalar";
}

uint32_t match_count(const uint8_t* a, const uint8_t* b, size_t n) {
#if defined(CESIM_BUILD_AVX2)
    if (active_backend() == Backend::avx2) return avx2::match_count(a, b, n);
#endif
    return scalar::match_count(a, b, n);
}

uint32_t equal_count_u64(const uint64_t* a, const uint64_t* b, size_t k) {
#if defined(CESIM_BUILD_AVX2)
    if (active_backend() == Backend::avx2) return avx2::equal_count_u64(a, b, k);
#endif
    return scalar::equal_count_u64(a, b, k);
}

void minhash_fold(uint64_t h, const uint64_t* salts, uint64_t* minima, size_t k) {
#if defined(CESIM_BUILD_AVX2)
    if (active_backend() == Backend::avx2) return avx2::minhash_fold(h, salts, minima, k);
#endif
    scalar::minhash_fold(h, salts, minima, k);
}

uint64_t markov_valid_count(uint64_t seed, uint64_t stream, uint64_t chain_begin,
                            uint64_t n_chains, uint32_t length,
                            uint64_t t_init_correct, uint64_t t_stay_correct,
                            uint64_t t_format) {
#if defined(CESIM_BUILD_AVX2)
    if (active_backend() == Backend::avx2)
        return avx2::markov_valid_count(seed, stream, chain_begin, n_chains, length,
                                        t_init_correct, t_stay_correct, t_format);
#endif
    return scalar::markov_valid_count(seed, stream, chain_begin, n_chains, length,
                                      t_init_correct, t_stay_correct, t_format);
}

} // namespace cesim::kernels
