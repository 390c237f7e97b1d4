#include "cesim/novelty.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "cesim/ce_engine.hpp"
#include "cesim/kernels.hpp"
#include "cesim/rng.hpp"

namespace cesim {

namespace {
constexpr uint64_t kFnvOffset = 1469598103934665603ull;
constexpr uint64_t kFnvPrime = 1099511628211ull;

uint64_t fingerprint(const ShingleSet& s) {
    uint64_t h = kFnvOffset;
    for (uint64_t v : s.hashes) h = (h ^ v) * kFnvPrime;
    return kernels::fmix64(h);
}
} // namespace

ShingleSet shingle(const Architecture& a, uint32_t window) {
    if (window == 0) throw ValidationError("shingle window must be >= 1");
    if (a.size() < window)
        throw ValidationError("genome shorter than shingle window");
    ShingleSet s;
    s.window = window;
    s.hashes.reserve(a.size() - window + 1);
    for (size_t i = 0; i + window <= a.size(); ++i) {
        uint64_t h = kFnvOffset;
        for (size_t j = 0; j < window; ++j) h = (h ^ a[i + j]) * kFnvPrime;
        s.hashes.push_back(kernels::fmix64(h));
    }
    std::sort(s.hashes.begin(), s.hashes.end());
    s.hashes.erase(std::unique(s.hashes.begin(), s.hashes.end()), s.hashes.end());
    return s;
}

double exact_jaccard(const ShingleSet& a, const ShingleSet& b) {
    if (a.hashes.empty() || b.hashes.empty())
        throw ValidationError("Jaccard of an empty shingle set is undefined");
    size_t i = 0, j = 0, common = 0;
    while (i < a.hashes.size() && j < b.hashes.size()) {
        if (a.hashes[i] == b.hashes[j]) {
            ++common;
            ++i;
            ++j;
        } else if (a.hashes[i] < b.hashes[j]) {
            ++i;
        } else {
            ++j;
        }
    }
    const size_t uni = a.hashes.size() + b.hashes.size() - common;
    return static_cast<double>(common) / static_cast<double>(uni);
}

double estimate_jaccard(const MinHashSignature& a, const MinHashSignature& b) {
    if (a.minima.size() != b.minima.size() || a.minima.empty())
        throw ValidationError("signature length mismatch");
    if (a.filter_seed != b.filter_seed)
        throw ValidationError("signatures built with different permutation seeds");
    const uint32_t eq =
        kernels::equal_count_u64(a.minima.data(), b.minima.data(), a.minima.size());
    return static_cast<double>(eq) / static_cast<double>(a.minima.size());
}

SeparationReport separation_check(const std::vector<ShingleSet>& corpus, double tau_nov,
                                  double slack, uint32_t k) {
    if (slack < 0.0) slack = 3.0 / std::sqrt(static_cast<double>(k));
    SeparationReport r;
    r.members = corpus.size();
    r.required = 1.0 - tau_nov - slack;
    for (size_t i = 0; i < corpus.size(); ++i) {
        for (size_t j = i + 1; j < corpus.size(); ++j) {
            const double d = 1.0 - exact_jaccard(corpus[i], corpus[j]);
            ++r.pairs;
            r.min_distance = std::min(r.min_distance, d);
            if (d < r.required) ++r.violations;
        }
    }
    return r;
}

double binary_entropy(double p) {
    if (p <= 0.0 || p >= 1.0) return 0.0;
    return -p * std::log(p) - (1.0 - p) * std::log(1.0 - p);
}

CollapseDiagnostics collapse_diagnostics(const GenDistribution& dist, uint64_t corpus_size,
                                         double k_star) {
    if (corpus_size < 2)
        throw ValidationError("collapse bound requires a corpus of at least 2 members");
    if (!(k_star >= 0.0)) throw ValidationError("K* must be >= 0");
    CollapseDiagnostics d;
    d.delta_t = std::exp(-k_star * static_cast<double>(corpus_size));
    d.entropy_bound = binary_entropy(d.delta_t);
    d.max_genome_prob = dist.max_genome_prob();
    d.entropy = dist.entropy();
    d.max_prob_flagged = d.max_genome_prob > 1.0 - d.delta_t;
    return d;
}

NoveltyFilter::NoveltyFilter(double tau_nov, uint32_t window, uint32_t k, uint64_t seed)
    : tau_nov_(tau_nov), window_(window), k_(k), seed_(seed) {
    if (!(tau_nov > 0.0 && tau_nov < 1.0))
        throw ValidationError("tau_nov must lie in (0,1)");
    if (window_ == 0) throw ValidationError("shingle window must be >= 1");
    if (k_ == 0) throw ValidationError("signature length k must be >= 1");
    reject_above_ = static_cast<uint32_t>(std::floor(tau_nov * k_ + 1e-9));
    salts_.resize(k_);
    rng::Stream s(seed_, /*stream=*/0x6d696e68u); // permutation salts
    for (auto& v : salts_) v = s.next_u64();
}

MinHashSignature NoveltyFilter::signature(const ShingleSet& s) const {
    MinHashSignature sig;
    sig.filter_seed = seed_;
    sig.minima.assign(k_, std::numeric_limits<uint64_t>::max());
    for (uint64_t h : s.hashes)
        kernels::minhash_fold(h, salts_.data(), sig.minima.data(), k_);
    return sig;
}

bool NoveltyFilter::admit(const Architecture& a) {
    ShingleSet s = shingle(a, window_);
    const uint64_t fp = fingerprint(s);
    if (fingerprints_.contains(fp)) return false; // identical set, similarity 1
    MinHashSignature sig = signature(s);
    for (const auto& stored : sigs_) {
        const uint32_t eq =
            kernels::equal_count_u64(sig.minima.data(), stored.minima.data(), k_);
        if (eq > reject_above_) return false;
    }
    fingerprints_.insert(fp);
    sigs_.push_back(std::move(sig));
    sets_.push_back(std::move(s));
    return true;
}

SeparationReport NoveltyFilter::separation(double slack) const {
    return separation_check(sets_, tau_nov_, slack, k_);
}

} // namespace cesim
