#include "cesim/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>

namespace cesim::harness {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

QualityFunction make_quality(const ExperimentConfig& cfg) {
    Architecture target(cfg.genome_length);
    for (size_t j = 0; j < cfg.genome_length; ++j)
        target[j] = static_cast<uint8_t>(j % cfg.alphabet); // token-diverse pattern
    if (cfg.landscape == QualityFunction::Kind::match_ratio)
        return QualityFunction::match_ratio(std::move(target), cfg.alphabet);
    return QualityFunction::deceptive_trap(std::move(target), cfg.alphabet, cfg.trap_width,
                                           cfg.trap_penalty);
}

// Closest achievable match count for a quality level on the landscape.
uint32_t matches_for_quality(const QualityFunction& q, double quality_target) {
    const auto len = static_cast<uint32_t>(q.length());
    uint32_t best_s = 0;
    double best_err = std::numeric_limits<double>::infinity();
    for (uint32_t s = 0; s <= len; ++s) {
        Architecture probe = q.target();
        uint32_t flipped = 0;
        for (uint32_t j = 0; j < len && flipped < len - s; ++j, ++flipped)
            probe[j] = static_cast<uint8_t>((probe[j] + 1) % q.alphabet());
        const double err = std::abs(q.evaluate(probe) - quality_target);
        if (err < best_err) {
            best_err = err;
            best_s = s;
        }
    }
    return best_s;
}

GenDistribution initial_distribution(const ExperimentConfig& cfg,
                                     const std::vector<Architecture>& statics) {
    // uniform rows are representable in both families (zero logit factors)
    if (cfg.theta0 == ExperimentConfig::Theta0::uniform || statics.empty())
        return GenDistribution::uniform(cfg.genome_length, cfg.alphabet);
    if (cfg.family == Family::rank_restricted) {
        rng::Stream s(cfg.seed, 0xF17);
        return GenDistribution::fit_rank({}, statics, cfg.lambda0, cfg.genome_length,
                                         cfg.alphabet, cfg.rank_fit, s);
    }
    return GenDistribution::fit_full({}, statics, cfg.lambda0, cfg.genome_length, cfg.alphabet);
}

SingleRunResult run_single(const ExperimentConfig& cfg, const QualityFunction& q,
                           std::optional<GenMode> channel_mode, const std::string& label) {
    const EliteSpec spec(cfg.tau);
    SingleRunResult run;
    run.label = label;
    run.mode = channel_mode.value_or(GenMode::full);

    CorpusState state;
    state.statics = make_static_corpus(q, cfg.static_count, cfg.static_quality);
    NoveltyFilter filter(cfg.tau_nov, cfg.shingle_window, cfg.minhash_k, cfg.seed);
    for (const auto& s : state.statics) filter.admit(s); // statics participate in novelty

    GenDistribution dist = initial_distribution(cfg, state.statics);

    RunCycleParams params;
    params.n = cfg.population;
    params.lambda0 = cfg.lambda0;
    params.fit_source = cfg.fit_source;
    params.family = cfg.family;
    params.rank_fit = cfg.rank_fit;
    if (channel_mode) {
        params.channel = cfg.channel_params;
        params.channel_mode = *channel_mode;
    }

    double last_kl = kNaN;
    double valid_rate_sum = 0.0;
    for (uint64_t t = 0; t < cfg.cycles; ++t) {
        // stream 1000+t for cycle t; identical across paired channel modes
        const CycleOutcome out =
            run_cycle(state, dist, q, spec, filter, params, rng::Stream(cfg.seed, 1000 + t));
        const double nv = static_cast<double>(out.valid);
        CycleRecord rec;
        rec.llm = label;
        rec.cycle = t;
        rec.valid_rate = static_cast<double>(out.valid) / static_cast<double>(out.sample_count);
        rec.elite_concentration = out.concentration;
        rec.mean_quality = out.quality_mean;
        rec.admissions = out.admitted;
        rec.extras.emplace_back("corpus_size", std::to_string(state.elites.size()));
        {
            char buf[40];
            std::snprintf(buf, sizeof(buf), "%.17g", out.quality_sd);
            rec.extras.emplace_back("quality_sd", buf);
        }
        run.records.push_back(std::move(rec));

        run.concentration.push_back(out.concentration.value_or(kNaN));
        run.concentration_se.push_back(
            out.concentration
                ? std::sqrt(std::max(*out.concentration * (1.0 - *out.concentration), 0.0) / nv)
                : kNaN);
        run.quality.push_back(out.quality_mean.value_or(kNaN));
        run.quality_se.push_back(out.quality_mean ? out.quality_sd / std::sqrt(nv) : kNaN);
        run.corpus_size.push_back(state.elites.size());
        valid_rate_sum += run.records.back().valid_rate;
        if (out.fine_tuned) last_kl = out.kl_achieved;
    }

    run.mean_valid_rate =
        cfg.cycles == 0 ? 0.0 : valid_rate_sum / static_cast<double>(cfg.cycles);
    run.final_corpus = state.elites.size();
    run.separation = filter.separation();
    if (state.elites.size() >= 2 && std::isfinite(last_kl))
        run.collapse = collapse_diagnostics(dist, state.elites.size(), last_kl);

    run.verdicts = verdicts_from_records(run.records, cfg.delta, cfg.population,
                                         cfg.smooth_window, cfg.plateau_window,
                                         cfg.plateau_band);
    return run;
}

} // namespace

std::vector<Architecture> make_static_corpus(const QualityFunction& q, uint32_t count,
                                             double quality_target) {
    const auto len = static_cast<uint32_t>(q.length());
    const uint32_t m = q.alphabet();
    const uint32_t s = matches_for_quality(q, quality_target);
    const uint32_t flips = len - s;
    std::vector<Architecture> statics;
    statics.reserve(count);
    uint64_t salt = 0;
    while (statics.size() < count) {
        const auto i = static_cast<uint32_t>(statics.size());
        Architecture g = q.target();
        if (flips > 0) {
            rng::Stream pick(0x57A71C5, i, salt); // fixed hand-pick seed
            std::vector<uint32_t> pos(len);
            for (uint32_t j = 0; j < len; ++j) pos[j] = j;
            for (uint32_t j = len; j > 1; --j)
                std::swap(pos[j - 1], pos[pick.next_below(j)]);
            for (uint32_t f = 0; f < flips; ++f) {
                const uint32_t p = pos[f];
                g[p] = static_cast<uint8_t>((g[p] + 1 + i % (m - 1)) % m);
            }
        }
        if (std::find(statics.begin(), statics.end(), g) != statics.end()) {
            ++salt; // re-draw flip positions on collision
            continue;
        }
        salt = 0;
        statics.push_back(std::move(g));
    }
    return statics;
}

std::vector<double> smoothed_quality(std::span<const double> q, int window) {
    if (q.empty()) throw ValidationError("cannot smooth an empty trajectory");
    if (window < 1 || window % 2 == 0)
        throw ValidationError("smoothing window must be odd and >= 1");
    const int half = window / 2;
    const int n = static_cast<int>(q.size());
    std::vector<double> out(q.size());
    for (int i = 0; i < n; ++i) {
        const int lo = std::max(0, i - half);
        const int hi = std::min(n - 1, i + half);
        double acc = 0.0;
        for (int j = lo; j <= hi; ++j) acc += q[j];
        out[i] = acc / static_cast<double>(hi - lo + 1);
    }
    return out;
}

std::optional<std::pair<double, uint64_t>> plateau_detect(std::span<const double> c, int window,
                                                          double band) {
    if (static_cast<int>(c.size()) < window) return std::nullopt;
    const size_t n = c.size();
    double lo = c[n - 1], hi = c[n - 1];
    size_t start = n - 1;
    // longest suffix staying within band
    for (size_t i = n - 1; i-- > 0;) {
        const double nlo = std::min(lo, c[i]);
        const double nhi = std::max(hi, c[i]);
        if (nhi - nlo > band + 1e-12) break;
        lo = nlo;
        hi = nhi;
        start = i;
    }
    if (n - start < static_cast<size_t>(window)) return std::nullopt;
    double level = 0.0;
    for (size_t i = n - static_cast<size_t>(window); i < n; ++i) level += c[i];
    level /= static_cast<double>(window);
    return std::make_pair(level, static_cast<uint64_t>(start));
}

TrajectoryVerdicts verdicts_from_records(std::span<const CycleRecord> records, double delta,
                                         uint64_t population, int smooth_window,
                                         int plateau_window, double plateau_band) {
    TrajectoryVerdicts v;
    if (records.empty()) {
        v.geometric.applicable = false;
        return v;
    }
    std::vector<double> c, cse, qvals, qse;
    bool any_missing = false;
    for (const auto& r : records) {
        const double nv = r.valid_rate * static_cast<double>(population);
        if (r.elite_concentration && nv > 0.0) {
            c.push_back(*r.elite_concentration);
            cse.push_back(std::sqrt(
                std::max(*r.elite_concentration * (1.0 - *r.elite_concentration), 0.0) / nv));
        } else {
            any_missing = true;
        }
        if (r.mean_quality && nv > 0.0) {
            qvals.push_back(*r.mean_quality);
            double sd = 0.5; // worst case for values in [0,1]
            for (const auto& [k, val] : r.extras)
                if (k == "quality_sd") sd = std::strtod(val.c_str(), nullptr);
            qse.push_back(sd / std::sqrt(nv));
        }
        if (r.admissions < 1) v.admissions_every_cycle = false;
    }
    (void)any_missing; // cycles without valid samples simply drop out of the checks
    if (!c.empty()) {
        v.geometric = geometric_rate_check(c, cse, c.front(), delta);
        v.plateau = plateau_detect(c, plateau_window, plateau_band);
    } else {
        v.geometric.applicable = false;
    }
    if (!qvals.empty()) {
        v.smoothed_q = smoothed_quality(qvals, smooth_window);
        for (size_t i = 0; i + 1 < v.smoothed_q.size(); ++i) {
            const double slack = 3.0 * std::max(qse[i], qse[i + 1]);
            if (v.smoothed_q[i + 1] < v.smoothed_q[i] - slack) {
                v.smoothed_q_ok = false;
                break;
            }
        }
    }
    return v;
}

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
    cfg.validate();
    const QualityFunction q = make_quality(cfg);
    ExperimentResult result;
    result.config = cfg;
    using CM = ExperimentConfig::ChannelMode;
    if (cfg.channel == CM::off) {
        result.runs.push_back(run_single(cfg, q, std::nullopt, cfg.label));
    } else if (cfg.channel == CM::full) {
        result.runs.push_back(run_single(cfg, q, GenMode::full, cfg.label));
    } else if (cfg.channel == CM::delta) {
        result.runs.push_back(run_single(cfg, q, GenMode::delta, cfg.label));
    } else {
        result.runs.push_back(run_single(cfg, q, GenMode::full, cfg.label + "_full"));
        result.runs.push_back(run_single(cfg, q, GenMode::delta, cfg.label + "_delta"));
        const double full_rate = result.runs[0].mean_valid_rate;
        if (full_rate > 0.0)
            result.paired_valid_rate_ratio = result.runs[1].mean_valid_rate / full_rate;
    }
    result.all_pass = true;
    for (const auto& r : result.runs) {
        result.all_pass = result.all_pass && r.verdicts.pass() &&
                          r.separation.violations == 0 &&
                          (!r.collapse || !r.collapse->max_prob_flagged);
    }
    if (result.paired_valid_rate_ratio)
        result.all_pass = result.all_pass && *result.paired_valid_rate_ratio > 1.0;
    return result;
}

ProxyAnalysis analyze_proxy_records(std::span<const ProxyPairRecord> records) {
    ProxyAnalysis analysis;
    std::vector<std::string> order; // group labels in first-seen order
    std::vector<PairedSample> groups;
    for (const auto& r : records) {
        auto it = std::find(order.begin(), order.end(), r.llm);
        size_t idx;
        if (it == order.end()) {
            order.push_back(r.llm);
            groups.emplace_back();
            groups.back().label = r.llm;
            idx = groups.size() - 1;
        } else {
            idx = static_cast<size_t>(it - order.begin());
        }
        groups[idx].full.push_back(r.full_acc);
        groups[idx].proxy.push_back(r.proxy_acc);
        groups[idx].datasets.push_back(r.dataset);
    }
    const size_t multiplier = groups.size();
    for (auto& g : groups) {
        ProxyGroupRow row;
        row.label = g.label;
        if (g.size() < 3) {
            row.skipped = true;
        } else {
            row.snr = snr(g);
            row.corr = correlation_report(g, multiplier);
        }
        analysis.rows.push_back(std::move(row));
    }
    auto sorted_labels = [&](auto key) {
        std::vector<const ProxyGroupRow*> rows;
        for (const auto& r : analysis.rows)
            if (!r.skipped) rows.push_back(&r);
        std::stable_sort(rows.begin(), rows.end(),
                         [&](const ProxyGroupRow* a, const ProxyGroupRow* b) {
                             return key(*a) > key(*b);
                         });
        std::vector<std::string> out;
        for (const auto* r : rows) out.push_back(r->label);
        return out;
    };
    analysis.snr_order = sorted_labels([](const ProxyGroupRow& r) { return r.snr.snr; });
    analysis.spearman_order =
        sorted_labels([](const ProxyGroupRow& r) { return r.corr.spearman_rho; });
    return analysis;
}

} // namespace cesim::harness
