#include "cesim/harness.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace cesim::harness {

namespace {

std::string num(double v, int prec = 6) {
    if (std::isnan(v)) return "-";
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.*g", prec, v);
    return buf;
}

const char* family_name(Family f) {
    return f == Family::full_categorical ? "full-categorical" : "rank-restricted";
}

const char* landscape_name(QualityFunction::Kind k) {
    return k == QualityFunction::Kind::match_ratio ? "match-ratio" : "deceptive-trap";
}

const char* channel_name(ExperimentConfig::ChannelMode m) {
    using CM = ExperimentConfig::ChannelMode;
    switch (m) {
        case CM::off: return "off";
        case CM::full: return "full";
        case CM::delta: return "delta";
        default: return "both";
    }
}

void render_run(std::ostringstream& os, const SingleRunResult& run) {
    os << "## run " << run.label << "\n\n";
    os << "cycle  valid_rate  C_t       Q_t       admissions  corpus\n";
    for (size_t t = 0; t < run.records.size(); ++t) {
        const auto& r = run.records[t];
        char line[160];
        std::snprintf(line, sizeof(line), "%5llu  %-10.4f  %-8s  %-8s  %-10llu  %llu\n",
                      static_cast<unsigned long long>(r.cycle), r.valid_rate,
                      r.elite_concentration ? num(*r.elite_concentration, 4).c_str() : "-",
                      r.mean_quality ? num(*r.mean_quality, 4).c_str() : "-",
                      static_cast<unsigned long long>(r.admissions),
                      static_cast<unsigned long long>(run.corpus_size[t]));
        os << line;
    }
    if (run.records.empty()) os << "(no cycles)\n";
    os << "\n";

    const auto& v = run.verdicts;
    os << "geometric rate: ";
    if (!v.geometric.applicable) {
        os << "inapplicable (rho0 = " << num(v.geometric.rho0) << ")\n";
    } else {
        size_t fails = 0;
        for (bool ok : v.geometric.ok)
            if (!ok) ++fails;
        os << (v.geometric.all_ok ? "PASS" : "FAIL") << "  rho0 = " << num(v.geometric.rho0, 4)
           << "  t* = " << v.geometric.t_star << "  cycles below bound-3SE: " << fails << "\n";
    }
    os << "smoothed quality monotone (3-cycle, 3SE slack): "
       << (v.smoothed_q_ok ? "PASS" : "FAIL") << "\n";
    if (v.plateau) {
        os << "plateau: level " << num(v.plateau->first, 4) << " from cycle "
           << v.plateau->second << "\n";
    } else {
        os << "plateau: none detected\n";
    }
    os << "admissions every cycle: " << (v.admissions_every_cycle ? "PASS" : "FAIL") << "\n";
    os << "corpus separation: " << run.separation.violations << " violations over "
       << run.separation.pairs << " pairs (min distance " << num(run.separation.min_distance, 4)
       << ", required " << num(run.separation.required, 4) << ") "
       << (run.separation.violations == 0 ? "PASS" : "FAIL") << "\n";
    if (run.collapse) {
        os << "collapse bound: delta_t = " << num(run.collapse->delta_t, 6)
           << ", entropy bound " << num(run.collapse->entropy_bound, 6)
           << " nats; measured max genome prob " << num(run.collapse->max_genome_prob, 6)
           << ", entropy " << num(run.collapse->entropy, 6) << " nats "
           << (run.collapse->max_prob_flagged ? "FAIL (mass above 1-delta_t)" : "PASS") << "\n";
    } else {
        os << "collapse bound: inapplicable (corpus < 2 or no fine-tune)\n";
    }
    os << "\n";
}

} // namespace

std::string render_report(const ExperimentResult& result) {
    const auto& cfg = result.config;
    std::ostringstream os;
    os << "# cesim experiment report\n\n";
    os << "label = " << cfg.label << "\n";
    os << "seed = " << cfg.seed << "\n";
    os << "cycles = " << cfg.cycles << "\n";
    os << "population = " << cfg.population << "\n";
    os << "tau = " << num(cfg.tau) << "\n";
    os << "tau_nov = " << num(cfg.tau_nov) << "\n";
    os << "lambda0 = " << num(cfg.lambda0) << "\n";
    os << "family = " << family_name(cfg.family);
    if (cfg.family == Family::rank_restricted) os << " (rank " << cfg.rank_fit.rank << ")";
    os << "\n";
    os << "fit = "
       << (cfg.fit_source == FitSource::accumulated_corpus ? "corpus" : "cycle") << "\n";
    os << "landscape = " << landscape_name(cfg.landscape) << " (L = " << cfg.genome_length
       << ", m = " << cfg.alphabet << ")\n";
    os << "channel = " << channel_name(cfg.channel) << "\n";
    if (cfg.channel != ExperimentConfig::ChannelMode::off) {
        os << "channel_params: eps = " << num(cfg.channel_params.eps)
           << ", gamma = " << num(cfg.channel_params.gamma)
           << ", alpha = " << num(cfg.channel_params.alpha)
           << ", l_full = " << cfg.channel_params.l_full
           << ", pi_full = " << num(cfg.channel_params.pi_full)
           << ", pi_delta = " << num(cfg.channel_params.pi_delta) << "\n";
        os << "closed-form valid rates: full = "
           << num(valid_rate(cfg.channel_params, GenMode::full), 6)
           << ", delta = " << num(valid_rate(cfg.channel_params, GenMode::delta), 6)
           << ", ratio = " << num(valid_rate_ratio(cfg.channel_params), 6) << "\n";
    }
    os << "\n";
    if (result.runs.empty() || result.runs.front().records.empty())
        os << "(no cycles executed)\n\n";
    for (const auto& run : result.runs) render_run(os, run);
    if (result.paired_valid_rate_ratio) {
        os << "paired delta/full mean valid-rate ratio: "
           << num(*result.paired_valid_rate_ratio, 6) << " (direction "
           << (*result.paired_valid_rate_ratio > 1.0 ? "PASS" : "FAIL") << ", > 1 expected)\n\n";
    }
    os << "overall: " << (result.all_pass ? "PASS" : "FAIL") << "\n";
    return os.str();
}

std::string render_proxy_report(const ProxyAnalysis& analysis) {
    std::ostringstream os;
    os << "# proxy reliability analysis\n\n";
    os << "group            n   snr        sigma2_arch  sigma2_noise  pearson   spearman  "
          "p(raw)      p(bonf)     kendall\n";
    for (const auto& r : analysis.rows) {
        if (r.skipped) {
            os << r.label << ": skipped (fewer than 3 pairs)\n";
            continue;
        }
        char line[220];
        std::snprintf(line, sizeof(line),
                      "%-15s %3llu  %-9s  %-11s  %-12s  %-8s  %-8s  %-10s  %-10s  %-8s\n",
                      r.label.c_str(), static_cast<unsigned long long>(r.corr.n),
                      r.snr.infinite ? "inf" : num(r.snr.snr, 4).c_str(),
                      num(r.snr.sigma2_arch, 4).c_str(), num(r.snr.sigma2_noise, 4).c_str(),
                      num(r.corr.pearson_r, 4).c_str(), num(r.corr.spearman_rho, 4).c_str(),
                      num(r.corr.spearman_p, 4).c_str(), num(r.corr.bonferroni_p, 4).c_str(),
                      num(r.corr.kendall_tau, 4).c_str());
        os << line;
    }
    os << "\nordering by snr:      ";
    for (const auto& l : analysis.snr_order) os << l << " ";
    os << "\nordering by spearman: ";
    for (const auto& l : analysis.spearman_order) os << l << " ";
    os << "\nsnr ordering preserved by spearman: "
       << (analysis.snr_order == analysis.spearman_order ? "yes" : "no") << "\n";
    return os.str();
}

void emit_report(const ExperimentResult& result, const std::string& out_dir) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);
    {
        std::ofstream csv(fs::path(out_dir) / "cycle_data.csv");
        if (!csv) throw IngestError("cannot write to " + out_dir);
        std::vector<CycleRecord> all;
        for (const auto& run : result.runs)
            all.insert(all.end(), run.records.begin(), run.records.end());
        write_cycle_csv(csv, all);
    }
    {
        std::ofstream rep(fs::path(out_dir) / "report.txt");
        rep << render_report(result);
    }
    {
        // per-figure data: concentration with geometric bound, quality with smoother
        std::ofstream fig(fs::path(out_dir) / "fig_concentration.csv");
        fig << "llm,cycle,elite_concentration,se,geometric_bound\n";
        for (const auto& run : result.runs) {
            const auto& g = run.verdicts.geometric;
            for (size_t t = 0; t < run.concentration.size(); ++t) {
                fig << run.label << ',' << t << ',' << num(run.concentration[t], 17) << ','
                    << num(run.concentration_se[t], 17) << ','
                    << (g.applicable && t < g.bound.size() ? num(g.bound[t], 17) : "-") << '\n';
            }
        }
    }
    {
        std::ofstream fig(fs::path(out_dir) / "fig_quality.csv");
        fig << "llm,cycle,mean_quality,smoothed_quality\n";
        for (const auto& run : result.runs) {
            const auto& sm = run.verdicts.smoothed_q;
            for (size_t t = 0; t < run.quality.size(); ++t) {
                fig << run.label << ',' << t << ',' << num(run.quality[t], 17) << ','
                    << (t < sm.size() ? num(sm[t], 17) : "-") << '\n';
            }
        }
    }
    {
        std::ofstream fig(fs::path(out_dir) / "fig_valid_rate.csv");
        fig << "llm,cycle,valid_rate\n";
        for (const auto& run : result.runs)
            for (const auto& r : run.records)
                fig << run.label << ',' << r.cycle << ',' << num(r.valid_rate, 17) << '\n';
    }
}

} // namespace cesim::harness
