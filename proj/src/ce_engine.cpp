#include "cesim/ce_engine.hpp"

#include <algorithm>
#include <map>
#include <cmath>
#include <string>

namespace cesim {

namespace {

void check_shape(size_t length, uint32_t alphabet) {
    if (length == 0) throw ValidationError("genome length must be >= 1");
    if (alphabet < 2 || alphabet > 256) throw ValidationError("alphabet size must lie in [2,256]");
}

std::vector<double> softmax_rows(size_t length, uint32_t alphabet,
                                 const std::vector<double>& logits) {
    std::vector<double> probs(length * alphabet);
    for (size_t j = 0; j < length; ++j) {
        const double* z = logits.data() + j * alphabet;
        double zmax = z[0];
        for (uint32_t s = 1; s < alphabet; ++s) zmax = std::max(zmax, z[s]);
        double total = 0.0;
        for (uint32_t s = 0; s < alphabet; ++s) {
            probs[j * alphabet + s] = std::exp(z[s] - zmax);
            total += probs[j * alphabet + s];
        }
        for (uint32_t s = 0; s < alphabet; ++s) probs[j * alphabet + s] /= total;
    }
    return probs;
}

// Smoothed per-position relative frequencies of samples ++ statics.
std::vector<double> smoothed_frequencies(std::span<const Architecture> samples,
                                         std::span<const Architecture> statics, double lambda0,
                                         size_t length, uint32_t alphabet) {
    if (samples.empty() && statics.empty())
        throw ValidationError("cannot fit a distribution to an empty sample set");
    if (lambda0 < 0.0) throw ValidationError("smoothing mass must be >= 0");
    std::vector<double> freq(length * alphabet, 0.0);
    size_t n = 0;
    auto accumulate = [&](std::span<const Architecture> set) {
        for (const auto& a : set) {
            if (a.size() != length) throw ValidationError("fit sample length mismatch");
            for (size_t j = 0; j < length; ++j) {
                if (a[j] >= alphabet) throw ValidationError("fit sample token outside alphabet");
                freq[j * alphabet + a[j]] += 1.0;
            }
            ++n;
        }
    };
    accumulate(samples);
    accumulate(statics);
    const double denom = static_cast<double>(n) + lambda0;
    const double add = lambda0 / static_cast<double>(alphabet);
    for (auto& f : freq) f = (f + add) / denom;
    return freq;
}

} // namespace

void GenDistribution::normalise_rows() {
    for (size_t j = 0; j < length_; ++j) {
        double total = 0.0;
        for (uint32_t s = 0; s < alphabet_; ++s) {
            const double p = probs_[j * alphabet_ + s];
            if (!(p >= 0.0) || !std::isfinite(p))
                throw ValidationError("probabilities must be finite and >= 0");
            total += p;
        }
        if (std::abs(total - 1.0) > 1e-9)
            throw ValidationError("position " + std::to_string(j) + " probabilities sum to " +
                                  std::to_string(total));
        for (uint32_t s = 0; s < alphabet_; ++s) probs_[j * alphabet_ + s] /= total;
    }
}

GenDistribution GenDistribution::uniform(size_t length, uint32_t alphabet) {
    check_shape(length, alphabet);
    GenDistribution d;
    d.family_ = Family::full_categorical;
    d.length_ = length;
    d.alphabet_ = alphabet;
    d.probs_.assign(length * alphabet, 1.0 / alphabet);
    return d;
}

GenDistribution GenDistribution::from_logits(size_t length, uint32_t alphabet,
                                             const std::vector<double>& logits) {
    check_shape(length, alphabet);
    if (logits.size() != length * alphabet) throw ValidationError("logit matrix shape mismatch");
    GenDistribution d;
    d.family_ = Family::full_categorical;
    d.length_ = length;
    d.alphabet_ = alphabet;
    d.probs_ = softmax_rows(length, alphabet, logits);
    return d;
}

GenDistribution GenDistribution::from_probs(size_t length, uint32_t alphabet,
                                            const std::vector<double>& probs) {
    check_shape(length, alphabet);
    if (probs.size() != length * alphabet) throw ValidationError("probability matrix shape mismatch");
    GenDistribution d;
    d.family_ = Family::full_categorical;
    d.length_ = length;
    d.alphabet_ = alphabet;
    d.probs_ = probs;
    d.normalise_rows();
    return d;
}

GenDistribution GenDistribution::fit_full(std::span<const Architecture> samples,
                                          std::span<const Architecture> statics, double lambda0,
                                          size_t length, uint32_t alphabet) {
    check_shape(length, alphabet);
    GenDistribution d;
    d.family_ = Family::full_categorical;
    d.length_ = length;
    d.alphabet_ = alphabet;
    d.probs_ = smoothed_frequencies(samples, statics, lambda0, length, alphabet);
    return d;
}

GenDistribution GenDistribution::fit_rank(std::span<const Architecture> samples,
                                          std::span<const Architecture> statics, double lambda0,
                                          size_t length, uint32_t alphabet,
                                          const RankFitOptions& opts, rng::Stream rng) {
    check_shape(length, alphabet);
    if (opts.rank == 0) throw ValidationError("rank must be >= 1");
    const auto freq = smoothed_frequencies(samples, statics, lambda0, length, alphabet);
    const uint32_t r = opts.rank;
    std::vector<double> u(length * r), v(r * alphabet);
    for (auto& x : u) x = opts.init_noise * rng.next_normal();
    for (auto& x : v) x = opts.init_noise * rng.next_normal();

    std::vector<double> logits(length * alphabet), probs, gz(length * alphabet);
    std::vector<double> gu(length * r), gv(r * alphabet);
    for (uint32_t step = 0; step < opts.steps; ++step) {
        for (size_t j = 0; j < length; ++j)
            for (uint32_t s = 0; s < alphabet; ++s) {
                double z = 0.0;
                for (uint32_t t = 0; t < r; ++t) z += u[j * r + t] * v[t * alphabet + s];
                logits[j * alphabet + s] = z;
            }
        probs = softmax_rows(length, alphabet, logits);
        // dL/dZ = freq - probs (per position), ascent on the log-likelihood
        for (size_t i = 0; i < gz.size(); ++i) gz[i] = freq[i] - probs[i];
        std::fill(gu.begin(), gu.end(), 0.0);
        std::fill(gv.begin(), gv.end(), 0.0);
        for (size_t j = 0; j < length; ++j)
            for (uint32_t s = 0; s < alphabet; ++s) {
                const double g = gz[j * alphabet + s];
                for (uint32_t t = 0; t < r; ++t) {
                    gu[j * r + t] += g * v[t * alphabet + s];
                    gv[t * alphabet + s] += g * u[j * r + t];
                }
            }
        for (size_t i = 0; i < u.size(); ++i) u[i] += opts.step_size * gu[i];
        for (size_t i = 0; i < v.size(); ++i) v[i] += opts.step_size * gv[i];
    }
    for (size_t j = 0; j < length; ++j)
        for (uint32_t s = 0; s < alphabet; ++s) {
            double z = 0.0;
            for (uint32_t t = 0; t < r; ++t) z += u[j * r + t] * v[t * alphabet + s];
            logits[j * alphabet + s] = z;
        }
    GenDistribution d;
    d.family_ = Family::rank_restricted;
    d.length_ = length;
    d.alphabet_ = alphabet;
    d.rank_ = r;
    d.probs_ = softmax_rows(length, alphabet, logits);
    return d;
}

double GenDistribution::log_prob(const Architecture& a) const {
    if (a.size() != length_) throw ValidationError("genome length mismatch");
    double lp = 0.0;
    for (size_t j = 0; j < length_; ++j) {
        const double p = prob(j, a[j]);
        if (p <= 0.0) return -std::numeric_limits<double>::infinity();
        lp += std::log(p);
    }
    return lp;
}

Architecture GenDistribution::sample_one(rng::Stream& rng) const {
    Architecture a(length_);
    for (size_t j = 0; j < length_; ++j) {
        const double u = rng.next_double();
        double acc = 0.0;
        uint8_t tok = static_cast<uint8_t>(alphabet_ - 1);
        for (uint32_t s = 0; s < alphabet_; ++s) {
            acc += probs_[j * alphabet_ + s];
            if (u < acc) {
                tok = static_cast<uint8_t>(s);
                break;
            }
        }
        a[j] = tok;
    }
    return a;
}

std::vector<Architecture> GenDistribution::sample(const rng::Stream& rng, size_t n) const {
    std::vector<Architecture> out;
    out.reserve(n);
    for (size_t i = 0; i < n; ++i) {
        rng::Stream s = rng.split(i);
        out.push_back(sample_one(s));
    }
    return out;
}

double GenDistribution::max_genome_prob() const {
    double p = 1.0;
    for (size_t j = 0; j < length_; ++j) {
        double best = 0.0;
        for (uint32_t s = 0; s < alphabet_; ++s) best = std::max(best, prob(j, s));
        p *= best;
    }
    return p;
}

double GenDistribution::entropy() const {
    double h = 0.0;
    for (size_t j = 0; j < length_; ++j)
        for (uint32_t s = 0; s < alphabet_; ++s) {
            const double p = prob(j, s);
            if (p > 0.0) h -= p * std::log(p);
        }
    return h;
}

double elite_concentration_exact(const GenDistribution& d, const QualityFunction& q,
                                 const EliteSpec& spec, uint64_t cap) {
    const auto elites = enumerate_elite(q, spec, cap);
    double total = 0.0;
    for (const auto& a : elites) {
        double p = 1.0;
        for (size_t j = 0; j < a.size(); ++j) p *= d.prob(j, a[j]);
        total += p;
    }
    return total;
}

McEstimate elite_concentration_mc(const GenDistribution& d, const QualityFunction& q,
                                  const EliteSpec& spec, uint64_t n, rng::Stream rng) {
    if (n == 0) throw ValidationError("Monte-Carlo estimate needs n >= 1");
    uint64_t hits = 0;
    for (uint64_t i = 0; i < n; ++i) {
        rng::Stream s = rng.split(i);
        if (q.is_elite(spec, d.sample_one(s))) ++hits;
    }
    McEstimate e;
    e.n = n;
    e.value = static_cast<double>(hits) / static_cast<double>(n);
    e.se = std::sqrt(std::max(e.value * (1.0 - e.value), 0.0) / static_cast<double>(n));
    return e;
}

double cross_entropy_loss(const EmpiricalDist& emp, const GenDistribution& d) {
    double ce = 0.0;
    for (size_t i = 0; i < emp.support.size(); ++i)
        ce -= emp.weights[i] * d.log_prob(emp.support[i]);
    return ce;
}

double empirical_entropy(const EmpiricalDist& emp) {
    double h = 0.0;
    for (double w : emp.weights)
        if (w > 0.0) h -= w * std::log(w);
    return h;
}

double kl_divergence(const EmpiricalDist& emp, const GenDistribution& d) {
    double kl = 0.0;
    for (size_t i = 0; i < emp.support.size(); ++i) {
        const double w = emp.weights[i];
        if (w > 0.0) kl += w * (std::log(w) - d.log_prob(emp.support[i]));
    }
    return kl;
}

KlCeIdentityResult kl_ce_identity_check(const EmpiricalDist& emp,
                                        const std::vector<GenDistribution>& grid, double tol) {
    if (grid.empty()) throw ValidationError("theta grid must be nonempty");
    if (emp.support.size() != emp.weights.size() || emp.support.empty())
        throw ValidationError("empirical distribution malformed");
    const double h = empirical_entropy(emp);
    KlCeIdentityResult r;
    double best_ce = std::numeric_limits<double>::infinity();
    double best_kl = std::numeric_limits<double>::infinity();
    for (size_t i = 0; i < grid.size(); ++i) {
        const double ce = cross_entropy_loss(emp, grid[i]);
        const double kl = kl_divergence(emp, grid[i]);
        r.max_offset_error = std::max(r.max_offset_error, std::abs((kl - ce) + h));
        if (ce < best_ce) {
            best_ce = ce;
            r.argmin_ce = i;
        }
        if (kl < best_kl) {
            best_kl = kl;
            r.argmin_kl = i;
        }
    }
    r.argmins_equal = (r.argmin_ce == r.argmin_kl);
    r.offset_constant = (r.max_offset_error <= tol);
    return r;
}

CycleOutcome run_cycle(CorpusState& state, GenDistribution& dist, const QualityFunction& q,
                       const EliteSpec& spec, NoveltyFilter& filter,
                       const RunCycleParams& params, rng::Stream rng) {
    if (params.n == 0) throw ValidationError("cycle population must be >= 1");
    CycleOutcome out;
    out.sample_count = params.n;

    std::vector<Architecture> cycle_elite; // this cycle's elite valid samples, multiplicity kept
    double q_sum = 0.0, q_sq = 0.0;
    uint64_t elite_hits = 0;
    for (uint64_t i = 0; i < params.n; ++i) {
        rng::Stream cand = rng.split(i);
        Architecture a = dist.sample_one(cand);
        if (params.channel &&
            !corrupt_and_validate(*params.channel, params.channel_mode, cand))
            continue;
        ++out.valid;
        const double quality = q.evaluate(a);
        q_sum += quality;
        q_sq += quality * quality;
        if (quality >= spec.tau) {
            ++elite_hits;
            cycle_elite.push_back(a);
            if (filter.admit(a)) {
                state.elites.push_back(std::move(a));
                ++out.admitted;
            }
        }
    }

    if (out.valid > 0) {
        const double nv = static_cast<double>(out.valid);
        out.concentration = static_cast<double>(elite_hits) / nv;
        out.quality_mean = q_sum / nv;
        const double var = std::max(0.0, (q_sq - q_sum * q_sum / nv) / std::max(nv - 1.0, 1.0));
        out.quality_sd = std::sqrt(var);
    }

    const std::vector<Architecture>& fit_set =
        params.fit_source == FitSource::accumulated_corpus ? state.elites : cycle_elite;
    if (!fit_set.empty()) {
        if (params.family == Family::full_categorical) {
            dist = GenDistribution::fit_full(fit_set, state.statics, params.lambda0,
                                             dist.length(), dist.alphabet());
        } else {
            dist = GenDistribution::fit_rank(fit_set, state.statics, params.lambda0,
                                             dist.length(), dist.alphabet(), params.rank_fit,
                                             rng.split(params.n)); // one stream past candidates
        }
        // achieved projection KL, the measured K* of the collapse bound;
        // duplicate genomes merge into one support point
        std::map<Architecture, uint64_t> counts;
        for (const auto& a : fit_set) ++counts[a];
        for (const auto& a : state.statics) ++counts[a];
        const double total = static_cast<double>(fit_set.size() + state.statics.size());
        EmpiricalDist emp;
        for (const auto& [a, c] : counts) {
            emp.support.push_back(a);
            emp.weights.push_back(static_cast<double>(c) / total);
        }
        out.kl_achieved = std::max(0.0, kl_divergence(emp, dist));
        out.fine_tuned = true;
    }
    state.cycle += 1;
    return out;
}

GeometricRateReport geometric_rate_check(std::span<const double> concentration,
                                         std::span<const double> se, double rho0,
                                         double delta) {
    if (!(delta > 0.0 && delta < 1.0)) throw ValidationError("delta must lie in (0,1)");
    if (concentration.size() != se.size())
        throw ValidationError("trajectory and SE lengths differ");
    GeometricRateReport r;
    r.rho0 = rho0;
    r.delta = delta;
    if (!(rho0 > 0.0)) {
        r.applicable = false; // bound vacuous at rho0 = 0
        return r;
    }
    r.applicable = true;
    if (rho0 >= 1.0) {
        r.t_star = 1;
    } else {
        r.t_star = static_cast<uint64_t>(std::ceil(std::log(delta) / std::log(1.0 - rho0)));
    }
    r.all_ok = true;
    for (size_t t = 0; t < concentration.size(); ++t) {
        const double bound =
            rho0 >= 1.0 ? (t == 0 ? 0.0 : 1.0)
                        : 1.0 - std::pow(1.0 - rho0, static_cast<double>(t));
        r.bound.push_back(bound);
        const bool ok = concentration[t] >= bound - 3.0 * se[t];
        r.ok.push_back(ok);
        r.all_ok = r.all_ok && ok;
    }
    return r;
}

} // namespace cesim
