#include "cesim/harness.hpp"

#include <fstream>
#include <sstream>
#include <string>

namespace cesim::harness {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

uint64_t parse_u64(const std::string& v, const std::string& key) {
    try {
        size_t pos = 0;
        const uint64_t x = std::stoull(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (const std::exception&) {
        throw ValidationError("config key '" + key + "': expected integer, got '" + v + "'");
    }
}

double parse_f64(const std::string& v, const std::string& key) {
    try {
        size_t pos = 0;
        const double x = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (const std::exception&) {
        throw ValidationError("config key '" + key + "': expected number, got '" + v + "'");
    }
}

} // namespace

void ExperimentConfig::validate() const {
    if (!seed_set) throw ValidationError("config: seed is mandatory");
    if (population == 0) throw ValidationError("config: population must be >= 1");
    if (!(tau > 0.0 && tau < 1.0)) throw ValidationError("config: tau must lie in (0,1)");
    if (!(tau_nov > 0.0 && tau_nov < 1.0))
        throw ValidationError("config: tau_nov must lie in (0,1)");
    if (lambda0 < 0.0) throw ValidationError("config: lambda0 must be >= 0");
    if (!(delta > 0.0 && delta < 1.0)) throw ValidationError("config: delta must lie in (0,1)");
    if (genome_length == 0) throw ValidationError("config: genome_length must be >= 1");
    if (alphabet < 2 || alphabet > 256)
        throw ValidationError("config: alphabet must lie in [2,256]");
    if (shingle_window == 0 || shingle_window > genome_length)
        throw ValidationError("config: shingle_window must lie in [1, genome_length]");
    if (minhash_k == 0) throw ValidationError("config: minhash_k must be >= 1");
    if (rank_fit.rank == 0) throw ValidationError("config: rank must be >= 1");
    if (landscape == QualityFunction::Kind::deceptive_trap && trap_width >= genome_length)
        throw ValidationError("config: trap_width must be < genome_length");
    if (!(static_quality > 0.0 && static_quality < 1.0))
        throw ValidationError("config: static_quality must lie in (0,1)");
    if (smooth_window < 1 || smooth_window % 2 == 0)
        throw ValidationError("config: smooth_window must be odd and >= 1");
    if (plateau_window < 1) throw ValidationError("config: plateau_window must be >= 1");
    if (channel != ChannelMode::off) channel_params.validate();
}

ExperimentConfig parse_config(std::istream& in) {
    ExperimentConfig cfg;
    std::string line;
    size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ValidationError("config line " + std::to_string(lineno) +
                                  ": expected 'key = value'");
        const std::string key = trim(line.substr(0, eq));
        const std::string val = trim(line.substr(eq + 1));
        if (key == "label") {
            cfg.label = val;
        } else if (key == "seed") {
            cfg.seed = parse_u64(val, key);
            cfg.seed_set = true;
        } else if (key == "cycles") {
            cfg.cycles = parse_u64(val, key);
        } else if (key == "population") {
            cfg.population = parse_u64(val, key);
        } else if (key == "tau") {
            cfg.tau = parse_f64(val, key);
        } else if (key == "tau_nov") {
            cfg.tau_nov = parse_f64(val, key);
        } else if (key == "lambda0") {
            cfg.lambda0 = parse_f64(val, key);
        } else if (key == "delta") {
            cfg.delta = parse_f64(val, key);
        } else if (key == "family") {
            if (val == "full") cfg.family = Family::full_categorical;
            else if (val == "rank") cfg.family = Family::rank_restricted;
            else throw ValidationError("config: family must be full|rank");
        } else if (key == "rank") {
            cfg.rank_fit.rank = static_cast<uint32_t>(parse_u64(val, key));
        } else if (key == "rank_steps") {
            cfg.rank_fit.steps = static_cast<uint32_t>(parse_u64(val, key));
        } else if (key == "rank_step_size") {
            cfg.rank_fit.step_size = parse_f64(val, key);
        } else if (key == "rank_init_noise") {
            cfg.rank_fit.init_noise = parse_f64(val, key);
        } else if (key == "fit") {
            if (val == "corpus") cfg.fit_source = FitSource::accumulated_corpus;
            else if (val == "cycle") cfg.fit_source = FitSource::cycle_elites;
            else throw ValidationError("config: fit must be corpus|cycle");
        } else if (key == "landscape") {
            if (val == "match") cfg.landscape = QualityFunction::Kind::match_ratio;
            else if (val == "trap") cfg.landscape = QualityFunction::Kind::deceptive_trap;
            else throw ValidationError("config: landscape must be match|trap");
        } else if (key == "genome_length") {
            cfg.genome_length = parse_u64(val, key);
        } else if (key == "alphabet") {
            cfg.alphabet = static_cast<uint32_t>(parse_u64(val, key));
        } else if (key == "trap_width") {
            cfg.trap_width = static_cast<uint32_t>(parse_u64(val, key));
        } else if (key == "trap_penalty") {
            cfg.trap_penalty = parse_f64(val, key);
        } else if (key == "minhash_k") {
            cfg.minhash_k = static_cast<uint32_t>(parse_u64(val, key));
        } else if (key == "shingle_window") {
            cfg.shingle_window = static_cast<uint32_t>(parse_u64(val, key));
        } else if (key == "channel") {
            if (val == "off") cfg.channel = ExperimentConfig::ChannelMode::off;
            else if (val == "full") cfg.channel = ExperimentConfig::ChannelMode::full;
            else if (val == "delta") cfg.channel = ExperimentConfig::ChannelMode::delta;
            else if (val == "both") cfg.channel = ExperimentConfig::ChannelMode::both;
            else throw ValidationError("config: channel must be off|full|delta|both");
        } else if (key == "eps") {
            cfg.channel_params.eps = parse_f64(val, key);
        } else if (key == "gamma") {
            cfg.channel_params.gamma = parse_f64(val, key);
        } else if (key == "alpha") {
            cfg.channel_params.alpha = parse_f64(val, key);
        } else if (key == "l_full") {
            cfg.channel_params.l_full = static_cast<uint32_t>(parse_u64(val, key));
        } else if (key == "pi_full") {
            cfg.channel_params.pi_full = parse_f64(val, key);
        } else if (key == "pi_delta") {
            cfg.channel_params.pi_delta = parse_f64(val, key);
        } else if (key == "theta0") {
            if (val == "uniform") cfg.theta0 = ExperimentConfig::Theta0::uniform;
            else if (val == "warm") cfg.theta0 = ExperimentConfig::Theta0::warm_start;
            else throw ValidationError("config: theta0 must be uniform|warm");
        } else if (key == "static_count") {
            cfg.static_count = static_cast<uint32_t>(parse_u64(val, key));
        } else if (key == "static_quality") {
            cfg.static_quality = parse_f64(val, key);
        } else if (key == "enumeration_cap") {
            cfg.enumeration_cap = parse_u64(val, key);
        } else if (key == "smooth_window") {
            cfg.smooth_window = static_cast<int>(parse_u64(val, key));
        } else if (key == "plateau_window") {
            cfg.plateau_window = static_cast<int>(parse_u64(val, key));
        } else if (key == "plateau_band") {
            cfg.plateau_band = parse_f64(val, key);
        } else {
            throw ValidationError("config line " + std::to_string(lineno) + ": unknown key '" +
                                  key + "'");
        }
    }
    cfg.validate();
    return cfg;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IngestError("cannot open config file: " + path);
    return parse_config(in);
}

} // namespace cesim::harness
