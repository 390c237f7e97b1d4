#include "cesim/arch_space.hpp"

#include <algorithm>
#include <string>

#include "cesim/kernels.hpp"

namespace cesim {

QualityFunction::QualityFunction(Kind kind, Architecture target, uint32_t alphabet,
                                 uint32_t width, double penalty)
    : kind_(kind), target_(std::move(target)), alphabet_(alphabet), basin_width_(width),
      penalty_(penalty) {
    if (target_.empty()) throw ValidationError("quality target must be nonempty");
    if (alphabet_ < 2 || alphabet_ > 256)
        throw ValidationError("alphabet size must lie in [2,256]");
    for (uint8_t t : target_)
        if (t >= alphabet_) throw ValidationError("target token outside alphabet");
    if (kind_ == Kind::deceptive_trap) {
        if (basin_width_ >= target_.size())
            throw ValidationError("trap basin width must be smaller than genome length");
        if (!(penalty_ >= 0.0 && penalty_ < 1.0))
            throw ValidationError("trap penalty must lie in [0,1)");
    }
}

QualityFunction QualityFunction::match_ratio(Architecture target, uint32_t alphabet) {
    return QualityFunction(Kind::match_ratio, std::move(target), alphabet, 0, 0.0);
}

QualityFunction QualityFunction::deceptive_trap(Architecture target, uint32_t alphabet,
                                                uint32_t basin_width, double penalty) {
    return QualityFunction(Kind::deceptive_trap, std::move(target), alphabet, basin_width,
                           penalty);
}

double QualityFunction::evaluate(const Architecture& a) const {
    if (a.size() != target_.size())
        throw ValidationError("genome length " + std::to_string(a.size()) +
                              " != configured length " + std::to_string(target_.size()));
    for (uint8_t t : a)
        if (t >= alphabet_) throw ValidationError("genome token outside alphabet");
    const size_t len = target_.size();
    const uint32_t s = kernels::match_count(a.data(), target_.data(), len);
    const double ratio = static_cast<double>(s) / static_cast<double>(len);
    if (kind_ == Kind::match_ratio) return ratio;
    if (s + basin_width_ >= len) return ratio; // peak region
    return std::max(0.0, ratio - penalty_);
}

bool QualityFunction::is_elite(const EliteSpec& spec, const Architecture& a) const {
    return evaluate(a) >= spec.tau;
}

uint64_t space_size_checked(size_t length, uint32_t alphabet, uint64_t cap) {
    uint64_t size = 1;
    for (size_t i = 0; i < length; ++i) {
        if (size > cap / alphabet)
            throw EnumerationCapExceeded("space size " + std::to_string(alphabet) + "^" +
                                         std::to_string(length) + " exceeds enumeration cap " +
                                         std::to_string(cap));
        size *= alphabet;
    }
    return size;
}

std::vector<Architecture> enumerate_elite(const QualityFunction& q, const EliteSpec& spec,
                                          uint64_t cap) {
    const size_t len = q.length();
    const uint32_t m = q.alphabet();
    space_size_checked(len, m, cap);
    std::vector<Architecture> elites;
    Architecture a(len, 0);
    for (;;) {
        if (q.is_elite(spec, a)) elites.push_back(a);
        // odometer increment
        size_t j = 0;
        while (j < len && ++a[j] == m) a[j++] = 0;
        if (j == len) break;
    }
    return elites;
}

} // namespace cesim
