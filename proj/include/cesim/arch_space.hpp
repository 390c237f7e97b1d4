#pragma once

// Finite synthetic architecture space: fixed-length token genomes over an
// alphabet of size m stand in for executable programs, and quality stands in
// for first-epoch validation accuracy.

#include <cstdint>
#include <vector>

#include "cesim/errors.hpp"

namespace cesim {

using Architecture = std::vector<uint8_t>;

struct EliteSpec {
    double tau;

    explicit EliteSpec(double tau_) : tau(tau_) {
        if (!(tau > 0.0 && tau < 1.0))
            throw ValidationError("elite threshold tau must lie in (0,1)");
    }
};

class QualityFunction {
  public:
    enum class Kind { match_ratio, deceptive_trap };

    static QualityFunction match_ratio(Architecture target, uint32_t alphabet);
    // Match ratio with a penalised slope outside the peak region: genomes
    // matching the target on fewer than L-basin_width positions lose
    // `penalty` (floored at 0). The peak keeps a unique global optimum while
    // the penalty carves an elite set no rank-1 logit field can cover.
    static QualityFunction deceptive_trap(Architecture target, uint32_t alphabet,
                                          uint32_t basin_width, double penalty);

    double evaluate(const Architecture& a) const;
    bool is_elite(const EliteSpec& spec, const Architecture& a) const;

    Kind kind() const { return kind_; }
    const Architecture& target() const { return target_; }
    size_t length() const { return target_.size(); }
    uint32_t alphabet() const { return alphabet_; }

  private:
    QualityFunction(Kind kind, Architecture target, uint32_t alphabet, uint32_t width,
                    double penalty);

    Kind kind_;
    Architecture target_;
    uint32_t alphabet_;
    uint32_t basin_width_ = 0;
    double penalty_ = 0.0;
};

// m^L if it fits under cap, otherwise throws EnumerationCapExceeded.
uint64_t space_size_checked(size_t length, uint32_t alphabet, uint64_t cap);

// Brute-force elite enumeration for point-enumerable spaces; the ground
// truth oracle behind the exact concentration mode.
std::vector<Architecture> enumerate_elite(const QualityFunction& q, const EliteSpec& spec,
                                          uint64_t cap = 1000000);

} // namespace cesim
