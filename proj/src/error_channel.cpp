#include "cesim/error_channel.hpp"

#include <cmath>

#include "cesim/kernels.hpp"

namespace cesim {

namespace {

constexpr double kTwo32 = 4294967296.0;

// Threshold in [0, 2^32] such that P(u32 < t) == t / 2^32.
uint64_t bernoulli_threshold(double p) {
    if (p <= 0.0) return 0;
    if (p >= 1.0) return uint64_t(1) << 32;
    return static_cast<uint64_t>(std::llround(p * kTwo32));
}

} // namespace

void MarkovErrorParams::validate() const {
    if (!(eps >= 0.0 && eps < 1.0)) throw ValidationError("eps must lie in [0,1)");
    if (!(gamma >= eps && gamma < 1.0)) throw ValidationError("gamma must lie in [eps,1)");
    if (!(alpha > 0.0 && alpha < 1.0)) throw ValidationError("alpha must lie in (0,1)");
    if (!(pi_full > 0.0 && pi_full <= 1.0)) throw ValidationError("pi_full must lie in (0,1]");
    if (!(pi_delta > 0.0 && pi_delta <= 1.0)) throw ValidationError("pi_delta must lie in (0,1]");
    if (l_full == 0) throw ValidationError("l_full must be positive");
}

double stationary_correct_prob(const MarkovErrorParams& p) {
    p.validate();
    return (1.0 - p.gamma) / (1.0 - p.gamma + p.eps);
}

double no_error_probability(const MarkovErrorParams& p, uint32_t length) {
    if (length == 0) throw ValidationError("sequence length must be >= 1");
    return stationary_correct_prob(p) * std::pow(1.0 - p.eps, static_cast<double>(length) - 1.0);
}

uint32_t mode_length(const MarkovErrorParams& p, GenMode mode) {
    p.validate();
    if (mode == GenMode::full) return p.l_full;
    auto len = static_cast<uint32_t>(std::llround(p.alpha * static_cast<double>(p.l_full)));
    return len < 1 ? 1 : len;
}

double valid_rate(const MarkovErrorParams& p, GenMode mode) {
    const double pi = (mode == GenMode::full) ? p.pi_full : p.pi_delta;
    return no_error_probability(p, mode_length(p, mode)) * pi;
}

double valid_rate_ratio(const MarkovErrorParams& p) {
    p.validate();
    const double lambda = 1.0 - p.eps;
    const double exponent = (p.alpha - 1.0) * static_cast<double>(p.l_full);
    return std::pow(lambda, exponent) * (p.pi_delta / p.pi_full);
}

bool corrupt_and_validate(const MarkovErrorParams& p, GenMode mode, rng::Stream& rng) {
    const uint32_t length = mode_length(p, mode);
    const uint64_t t_init = bernoulli_threshold(stationary_correct_prob(p));
    const uint64_t t_stay = bernoulli_threshold(1.0 - p.eps);
    const uint64_t t_fmt =
        bernoulli_threshold(mode == GenMode::full ? p.pi_full : p.pi_delta);
    for (uint32_t d = 0; d < length; ++d) {
        const uint64_t u = rng.next_u32();
        if (u >= (d == 0 ? t_init : t_stay)) return false;
    }
    return static_cast<uint64_t>(rng.next_u32()) < t_fmt;
}

uint64_t simulate_valid_count(const MarkovErrorParams& p, GenMode mode, uint64_t trials,
                              uint64_t seed, uint64_t stream, bool with_format) {
    const uint32_t length = mode_length(p, mode);
    const uint64_t t_init = bernoulli_threshold(stationary_correct_prob(p));
    const uint64_t t_stay = bernoulli_threshold(1.0 - p.eps);
    const double pi = (mode == GenMode::full) ? p.pi_full : p.pi_delta;
    const uint64_t t_fmt = with_format ? bernoulli_threshold(pi) : (uint64_t(1) << 32);
    return kernels::markov_valid_count(seed, stream, 0, trials, length, t_init, t_stay, t_fmt);
}

} // namespace cesim
