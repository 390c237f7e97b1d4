#pragma once

// Parametric generation families, the cross-entropy / maximum-likelihood
// fine-tune update, and the per-cycle loop
// (generate -> validate -> evaluate -> filter -> update corpus -> fine-tune).

#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "cesim/arch_space.hpp"
#include "cesim/error_channel.hpp"
#include "cesim/novelty.hpp"
#include "cesim/rng.hpp"

namespace cesim {

enum class Family { full_categorical, rank_restricted };

struct RankFitOptions {
    uint32_t rank = 1;
    uint32_t steps = 500;
    double step_size = 0.1;
    double init_noise = 0.01;
};

// Product-form distribution over genomes: one categorical per position.
// Full-categorical rows are fitted in probability space; rank-restricted
// rows are softmax of a rank-r logit factorisation U*V.
class GenDistribution {
  public:
    static GenDistribution uniform(size_t length, uint32_t alphabet);
    static GenDistribution from_logits(size_t length, uint32_t alphabet,
                                       const std::vector<double>& logits_row_major);
    static GenDistribution from_probs(size_t length, uint32_t alphabet,
                                      const std::vector<double>& probs_row_major);

    // Smoothed relative frequencies over samples ++ statics: per position,
    // p(s) = (count(s) + lambda0/m) / (N + lambda0).
    static GenDistribution fit_full(std::span<const Architecture> samples,
                                    std::span<const Architecture> statics, double lambda0,
                                    size_t length, uint32_t alphabet);

    // Fixed-budget first-order ascent of the same smoothed log-likelihood
    // over factors U (L x r) and V (r x m); zero-init plus seed-derived noise.
    static GenDistribution fit_rank(std::span<const Architecture> samples,
                                    std::span<const Architecture> statics, double lambda0,
                                    size_t length, uint32_t alphabet,
                                    const RankFitOptions& opts, rng::Stream rng);

    double prob(size_t pos, uint8_t token) const { return probs_[pos * alphabet_ + token]; }
    double log_prob(const Architecture& a) const;

    Architecture sample_one(rng::Stream& rng) const;
    // Candidate i draws from rng.split(i); order-independent and
    // parallel-safe by construction.
    std::vector<Architecture> sample(const rng::Stream& rng, size_t n) const;

    double max_genome_prob() const; // product of per-position maxima
    double entropy() const;         // sum of per-position entropies, nats

    Family family() const { return family_; }
    size_t length() const { return length_; }
    uint32_t alphabet() const { return alphabet_; }
    uint32_t rank() const { return rank_; }

  private:
    GenDistribution() = default;
    void normalise_rows();

    Family family_ = Family::full_categorical;
    size_t length_ = 0;
    uint32_t alphabet_ = 0;
    uint32_t rank_ = 0;
    std::vector<double> probs_; // row-major L x m
};

// Exact elite concentration: sum of genome probabilities over the
// brute-force elite enumeration. Only for point-enumerable spaces.
double elite_concentration_exact(const GenDistribution& d, const QualityFunction& q,
                                 const EliteSpec& spec, uint64_t cap = 1000000);

struct McEstimate {
    double value = 0.0;
    double se = 0.0;
    uint64_t n = 0;
};

McEstimate elite_concentration_mc(const GenDistribution& d, const QualityFunction& q,
                                  const EliteSpec& spec, uint64_t n, rng::Stream rng);

// Empirical distribution over explicit support points.
struct EmpiricalDist {
    std::vector<Architecture> support;
    std::vector<double> weights; // positive, summing to 1
};

double cross_entropy_loss(const EmpiricalDist& emp, const GenDistribution& d);
double kl_divergence(const EmpiricalDist& emp, const GenDistribution& d);
double empirical_entropy(const EmpiricalDist& emp);

struct KlCeIdentityResult {
    bool argmins_equal = false;
    bool offset_constant = false;
    size_t argmin_ce = 0;
    size_t argmin_kl = 0;
    double max_offset_error = 0.0; // max |(KL - CE) + H|
    bool pass() const { return argmins_equal && offset_constant; }
};

// Checks argmin_theta CE == argmin_theta KL over the grid and that their
// difference equals the empirical entropy everywhere (within tol). Grid
// distributions must have full support on emp's support.
KlCeIdentityResult kl_ce_identity_check(const EmpiricalDist& emp,
                                        const std::vector<GenDistribution>& grid,
                                        double tol = 1e-10);

struct CorpusState {
    std::vector<Architecture> statics; // fixed warm-start corpus
    std::vector<Architecture> elites;  // accumulated admissions, S_t
    uint64_t cycle = 0;
};

struct CycleOutcome {
    std::optional<double> concentration; // over this cycle's valid samples
    std::optional<double> quality_mean;
    double quality_sd = 0.0;
    uint64_t sample_count = 0;
    uint64_t valid = 0;
    uint64_t admitted = 0;
    double kl_achieved = std::numeric_limits<double>::quiet_NaN(); // KL(fit empirical || fitted)
    bool fine_tuned = false;
};

// Which multiset the fine-tune sees (statics are always appended).
// accumulated_corpus is the literal corpus-update rule; cycle_elites fits
// this cycle's elite samples with multiplicity, the regime the consistency
// assumption actually describes.
enum class FitSource { accumulated_corpus, cycle_elites };

struct RunCycleParams {
    uint64_t n = 500;
    double lambda0 = 1.0;
    FitSource fit_source = FitSource::accumulated_corpus;
    Family family = Family::full_categorical;
    RankFitOptions rank_fit{};
    std::optional<MarkovErrorParams> channel; // nullopt: every sample is valid
    GenMode channel_mode = GenMode::full;
};

// One full cycle; mutates state and dist in place. rng must be the
// cycle-specific stream (candidate i uses rng.split(i)).
CycleOutcome run_cycle(CorpusState& state, GenDistribution& dist, const QualityFunction& q,
                       const EliteSpec& spec, NoveltyFilter& filter,
                       const RunCycleParams& params, rng::Stream rng);

struct GeometricRateReport {
    bool applicable = false; // rho0 > 0
    double rho0 = 0.0;
    double delta = 0.0;
    uint64_t t_star = 0; // ceil(log delta / log(1-rho0))
    std::vector<double> bound;
    std::vector<bool> ok; // C_t >= bound_t - 3*SE_t
    bool all_ok = false;
};

GeometricRateReport geometric_rate_check(std::span<const double> concentration,
                                         std::span<const double> se, double rho0,
                                         double delta);

} // namespace cesim
