#pragma once

// Two-state Markov token-error model. Generation is a chain over
// {correct, error} started from stationarity; a sequence is valid when it
// contains no error tokens and passes an independent format coin.

#include <cstdint>

#include "cesim/errors.hpp"
#include "cesim/rng.hpp"

namespace cesim {

enum class GenMode { full, delta };

struct MarkovErrorParams {
    double eps = 0.005;    // P(error | correct)
    double gamma = 0.3;    // P(error | error), >= eps
    uint32_t l_full = 200; // mean full-output length in tokens
    double alpha = 0.20;   // delta length fraction
    double pi_full = 1.0;  // format validity given token-level correctness
    double pi_delta = 1.0;

    void validate() const;
};

// pi_c = (1-gamma) / (1-gamma+eps)
double stationary_correct_prob(const MarkovErrorParams& p);

// pi_c * (1-eps)^(L-1); equals C(gamma,eps) * (1-eps)^L
double no_error_probability(const MarkovErrorParams& p, uint32_t length);

// full -> l_full, delta -> round(alpha*l_full) floored at 1
uint32_t mode_length(const MarkovErrorParams& p, GenMode mode);

double valid_rate(const MarkovErrorParams& p, GenMode mode);

// r_delta / r_full = lambda^((alpha-1)*L_full) * pi_delta/pi_full; the
// stationarity constant cancels, so gamma never enters.
double valid_rate_ratio(const MarkovErrorParams& p);

// One simulated generation: chain from stationarity plus the format coin.
bool corrupt_and_validate(const MarkovErrorParams& p, GenMode mode, rng::Stream& rng);

// Bulk Monte-Carlo. Counts valid generations over `trials` independent
// chains (kernel-backed; chains indexed deterministically from the seed).
// with_format=false counts token-level survival only, matching
// no_error_probability instead of valid_rate.
uint64_t simulate_valid_count(const MarkovErrorParams& p, GenMode mode, uint64_t trials,
                              uint64_t seed, uint64_t stream, bool with_format = true);

} // namespace cesim
