#pragma once

// MinHash-Jaccard novelty filter and mode-collapse diagnostics. Admission
// uses the k-minima estimate (as deployed systems do); the separation
// invariant is re-verified with exact Jaccard plus estimator slack.

#include <cstdint>
#include <unordered_set>
#include <vector>

#include "cesim/arch_space.hpp"
#include "cesim/errors.hpp"

namespace cesim {

class GenDistribution;

struct ShingleSet {
    std::vector<uint64_t> hashes; // sorted, unique
    uint32_t window = 0;
};

// Hashes of all w-token contiguous windows. Requires length >= w.
ShingleSet shingle(const Architecture& a, uint32_t window);

double exact_jaccard(const ShingleSet& a, const ShingleSet& b);

struct MinHashSignature {
    std::vector<uint64_t> minima;
    uint64_t filter_seed = 0;
};

// Fraction of coordinate-wise equal minima; signatures must share k and seed.
double estimate_jaccard(const MinHashSignature& a, const MinHashSignature& b);

struct SeparationReport {
    size_t members = 0;
    size_t pairs = 0;
    size_t violations = 0;
    double min_distance = 1.0; // smallest pairwise exact d_J seen
    double required = 0.0;     // 1 - tau_nov - slack
};

// Pairwise exact-Jaccard separation of a corpus at threshold tau_nov with
// estimator slack (pass slack < 0 for the default 3/sqrt(k)).
SeparationReport separation_check(const std::vector<ShingleSet>& corpus, double tau_nov,
                                  double slack, uint32_t k);

struct CollapseDiagnostics {
    double delta_t = 0.0;        // exp(-K* |S_t|)
    double entropy_bound = 0.0;  // binary entropy of delta_t, nats
    double max_genome_prob = 0.0;
    double entropy = 0.0;        // nats
    bool max_prob_flagged = false; // max_genome_prob > 1 - delta_t
};

// K* is the achieved KL(empirical || fitted) of the most recent fine-tune.
// Requires corpus_size >= 2 and k_star >= 0.
CollapseDiagnostics collapse_diagnostics(const GenDistribution& dist, uint64_t corpus_size,
                                         double k_star);

double binary_entropy(double p); // nats

class NoveltyFilter {
  public:
    NoveltyFilter(double tau_nov, uint32_t window, uint32_t k, uint64_t seed);

    MinHashSignature signature(const ShingleSet& s) const;

    // True iff the estimated similarity to every stored member is <= tau_nov;
    // admitted genomes are stored. Admission order matters, so callers must
    // serialise this step.
    bool admit(const Architecture& a);

    size_t size() const { return sets_.size(); }
    const std::vector<ShingleSet>& stored() const { return sets_; }
    double tau_nov() const { return tau_nov_; }
    uint32_t window() const { return window_; }
    uint32_t k() const { return k_; }
    uint64_t seed() const { return seed_; }

    SeparationReport separation(double slack = -1.0) const;

  private:
    double tau_nov_;
    uint32_t window_;
    uint32_t k_;
    uint64_t seed_;
    uint32_t reject_above_; // admit iff equal minima count <= reject_above_
    std::vector<uint64_t> salts_;
    std::vector<MinHashSignature> sigs_;
    std::vector<ShingleSet> sets_;
    std::unordered_set<uint64_t> fingerprints_; // fast exact-duplicate path
};

} // namespace cesim
