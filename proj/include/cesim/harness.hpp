#pragma once

// Experiment orchestration, CSV ingestion/emission, trajectory diagnostics.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "cesim/ce_engine.hpp"
#include "cesim/proxy_stats.hpp"

namespace cesim::harness {

struct ExperimentConfig {
    std::string label = "sim";
    uint64_t seed = 0;
    bool seed_set = false;

    uint64_t cycles = 22;
    uint64_t population = 500;
    double tau = 0.5;
    double tau_nov = 0.90;
    double lambda0 = 1.0;
    double delta = 0.05; // target slack for t*

    Family family = Family::full_categorical;
    RankFitOptions rank_fit{};
    FitSource fit_source = FitSource::accumulated_corpus;

    QualityFunction::Kind landscape = QualityFunction::Kind::match_ratio;
    size_t genome_length = 20;
    uint32_t alphabet = 4;
    uint32_t trap_width = 4;
    double trap_penalty = 0.3;

    uint32_t minhash_k = 128;
    uint32_t shingle_window = 3;

    enum class ChannelMode { off, full, delta, both };
    ChannelMode channel = ChannelMode::off;
    MarkovErrorParams channel_params{};

    enum class Theta0 { uniform, warm_start };
    Theta0 theta0 = Theta0::uniform;
    uint32_t static_count = 8;
    double static_quality = 0.5;

    uint64_t enumeration_cap = 1000000;
    int smooth_window = 3;
    int plateau_window = 5;
    double plateau_band = 0.03;

    void validate() const;
};

ExperimentConfig parse_config(std::istream& in);
ExperimentConfig load_config(const std::string& path);

// cycle_data.csv row. Canonical columns:
//   llm,cycle,valid_rate,elite_concentration,mean_quality,admissions
// Unknown trailing columns are preserved verbatim in `extras`.
struct CycleRecord {
    std::string llm;
    uint64_t cycle = 0;
    double valid_rate = 0.0;
    std::optional<double> elite_concentration;
    std::optional<double> mean_quality;
    uint64_t admissions = 0;
    std::vector<std::pair<std::string, std::string>> extras;

    bool operator==(const CycleRecord&) const = default;
};

// proxy_full_pairs.csv row: llm,arch_id,dataset,proxy_acc,full_acc
struct ProxyPairRecord {
    std::string llm;
    std::string arch_id;
    std::string dataset;
    double proxy_acc = 0.0;
    double full_acc = 0.0;
    std::vector<std::pair<std::string, std::string>> extras;

    bool operator==(const ProxyPairRecord&) const = default;
};

std::vector<CycleRecord> ingest_cycle_csv(std::istream& in);
std::vector<CycleRecord> load_cycle_csv(const std::string& path);
void write_cycle_csv(std::ostream& out, std::span<const CycleRecord> records);

std::vector<ProxyPairRecord> ingest_proxy_csv(std::istream& in);
std::vector<ProxyPairRecord> load_proxy_csv(const std::string& path);
void write_proxy_csv(std::ostream& out, std::span<const ProxyPairRecord> records);

// Centered moving average, truncated windows at the edges; window odd, >= 1.
std::vector<double> smoothed_quality(std::span<const double> q, int window = 3);

// (level, start cycle) when the last `window` values lie within `band`; the
// start cycle is where the maximal in-band suffix begins, the level the mean
// of the last `window` values.
std::optional<std::pair<double, uint64_t>> plateau_detect(std::span<const double> c,
                                                          int window = 5, double band = 0.03);

struct TrajectoryVerdicts {
    GeometricRateReport geometric;
    std::vector<double> smoothed_q;
    bool smoothed_q_ok = true;
    std::optional<std::pair<double, uint64_t>> plateau;
    bool admissions_every_cycle = true;

    bool pass() const {
        return (!geometric.applicable || geometric.all_ok) && smoothed_q_ok &&
               admissions_every_cycle;
    }
};

struct SingleRunResult {
    std::string label;
    GenMode mode = GenMode::full;
    std::vector<CycleRecord> records;
    std::vector<double> concentration;    // NaN where the cycle had no valid sample
    std::vector<double> concentration_se;
    std::vector<double> quality;
    std::vector<double> quality_se;
    std::vector<uint64_t> corpus_size;
    TrajectoryVerdicts verdicts;
    SeparationReport separation;
    std::optional<CollapseDiagnostics> collapse;
    double mean_valid_rate = 0.0;
    uint64_t final_corpus = 0;
};

struct ExperimentResult {
    ExperimentConfig config;
    std::vector<SingleRunResult> runs;           // one, or full+delta when channel=both
    std::optional<double> paired_valid_rate_ratio; // mean delta rate / mean full rate
    bool all_pass = false;
};

ExperimentResult run_experiment(const ExperimentConfig& cfg);

// Deterministic static corpus near a target quality level on the landscape.
std::vector<Architecture> make_static_corpus(const QualityFunction& q, uint32_t count,
                                             double quality_target);

// Re-derive verdicts from ingested records (SE needs the population size).
TrajectoryVerdicts verdicts_from_records(std::span<const CycleRecord> records, double delta,
                                         uint64_t population, int smooth_window = 3,
                                         int plateau_window = 5, double plateau_band = 0.03);

struct ProxyGroupRow {
    std::string label;
    bool skipped = false; // group too small
    SnrReport snr;
    CorrelationReport corr;
};

struct ProxyAnalysis {
    std::vector<ProxyGroupRow> rows;
    std::vector<std::string> snr_order;      // labels, descending SNR
    std::vector<std::string> spearman_order; // labels, descending Spearman
};

ProxyAnalysis analyze_proxy_records(std::span<const ProxyPairRecord> records);

std::string render_report(const ExperimentResult& result);
std::string render_proxy_report(const ProxyAnalysis& analysis);

// Writes cycle_data.csv, report.txt and per-figure CSVs into out_dir.
void emit_report(const ExperimentResult& result, const std::string& out_dir);

} // namespace cesim::harness
