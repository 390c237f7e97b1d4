// cesim: desk-scale cross-entropy architecture-search simulator and
// statistics toolkit.

#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cesim/error_channel.hpp"
#include "cesim/harness.hpp"
#include "cesim/kernels.hpp"
#include "cesim/novelty.hpp"

namespace {

using namespace cesim;

int cmd_simulate(const std::string& config_path, bool seed_given, uint64_t seed,
                 const std::string& out_dir) {
    harness::ExperimentConfig cfg = harness::load_config(config_path);
    if (seed_given) {
        cfg.seed = seed;
        cfg.seed_set = true;
    }
    cfg.validate();
    const harness::ExperimentResult result = harness::run_experiment(cfg);
    harness::emit_report(result, out_dir);
    std::cout << harness::render_report(result);
    std::cerr << "kernel backend: " << kernels::backend_name() << "\n";
    std::cerr << "wrote " << out_dir << "/cycle_data.csv, report.txt, fig_*.csv\n";
    return result.all_pass ? 0 : 1;
}

int cmd_markov(double eps, double gamma, double alpha, uint32_t lfull, double pi_full,
               double pi_delta, uint64_t trials, uint64_t seed) {
    MarkovErrorParams p;
    p.eps = eps;
    p.gamma = gamma;
    p.alpha = alpha;
    p.l_full = lfull;
    p.pi_full = pi_full;
    p.pi_delta = pi_delta;
    p.validate();
    const double pic = stationary_correct_prob(p);
    const double rf = valid_rate(p, GenMode::full);
    const double rd = valid_rate(p, GenMode::delta);
    std::cout << "stationary correct prob: " << pic << "\n";
    std::cout << "no-error prob (full length " << mode_length(p, GenMode::full)
              << "): " << no_error_probability(p, mode_length(p, GenMode::full)) << "\n";
    std::cout << "no-error prob (delta length " << mode_length(p, GenMode::delta)
              << "): " << no_error_probability(p, mode_length(p, GenMode::delta)) << "\n";
    std::cout << "valid rate full:  " << rf << "\n";
    std::cout << "valid rate delta: " << rd << "\n";
    std::cout << "valid rate ratio (closed form): " << valid_rate_ratio(p) << "\n";
    if (trials == 0) return 0;

    bool ok = true;
    for (auto mode : {GenMode::full, GenMode::delta}) {
        const uint64_t hits = simulate_valid_count(p, mode, trials, seed, 7);
        const double est = static_cast<double>(hits) / static_cast<double>(trials);
        const double expect = valid_rate(p, mode);
        const double se =
            std::sqrt(std::max(expect * (1.0 - expect), 1e-12) / static_cast<double>(trials));
        const double sigmas = std::abs(est - expect) / se;
        const bool pass = sigmas <= 4.0;
        ok = ok && pass;
        std::cout << (mode == GenMode::full ? "full " : "delta") << " monte-carlo: " << est
                  << " vs closed form " << expect << "  (" << sigmas << " sigma, "
                  << (pass ? "PASS" : "FAIL") << ")\n";
    }
    std::cout << "monte-carlo agreement: " << (ok ? "PASS" : "FAIL") << "\n";
    return ok ? 0 : 1;
}

int cmd_novelty(const std::string& input, double tau_nov, uint32_t k, uint32_t window,
                uint64_t seed) {
    std::ifstream in(input);
    if (!in) throw IngestError("cannot open tokens file: " + input);
    NoveltyFilter filter(tau_nov, window, k, seed);
    std::string line;
    size_t lineno = 0, admitted = 0, total = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::istringstream ls(line);
        Architecture a;
        long v;
        while (ls >> v) {
            if (v < 0 || v > 255)
                throw IngestError("line " + std::to_string(lineno) + ": token " +
                                  std::to_string(v) + " outside [0,255]");
            a.push_back(static_cast<uint8_t>(v));
        }
        if (!ls.eof())
            throw IngestError("line " + std::to_string(lineno) + ": non-integer token");
        if (a.empty()) continue;
        ++total;
        const bool adm = filter.admit(a);
        admitted += adm;
        std::cout << lineno << ": " << (adm ? "admit" : "reject") << "\n";
    }
    std::cout << "admitted " << admitted << " of " << total << " (stored " << filter.size()
              << ")\n";
    const auto sep = filter.separation();
    std::cout << "separation: " << sep.violations << " violations over " << sep.pairs
              << " pairs\n";
    return sep.violations == 0 ? 0 : 1;
}

int cmd_proxy(const std::string& csv) {
    const auto records = harness::load_proxy_csv(csv);
    const auto analysis = harness::analyze_proxy_records(records);
    std::cout << harness::render_proxy_report(analysis);
    return 0;
}

int cmd_check(const std::string& csv, uint64_t population, double delta) {
    const auto records = harness::load_cycle_csv(csv);
    if (records.empty()) throw IngestError("cycle csv has no data rows");
    // group by generator label, preserving first-seen order
    std::vector<std::string> labels;
    std::map<std::string, std::vector<harness::CycleRecord>> groups;
    for (const auto& r : records) {
        if (!groups.contains(r.llm)) labels.push_back(r.llm);
        groups[r.llm].push_back(r);
    }
    bool all_ok = true;
    for (const auto& label : labels) {
        const auto v = harness::verdicts_from_records(groups[label], delta, population);
        const bool ok = v.pass();
        all_ok = all_ok && ok;
        std::cout << label << ": geometric "
                  << (!v.geometric.applicable ? "inapplicable"
                                              : (v.geometric.all_ok ? "PASS" : "FAIL"))
                  << ", smoothed-quality " << (v.smoothed_q_ok ? "PASS" : "FAIL")
                  << ", admissions " << (v.admissions_every_cycle ? "PASS" : "FAIL");
        if (v.plateau)
            std::cout << ", plateau " << v.plateau->first << " from cycle "
                      << v.plateau->second;
        std::cout << " -> " << (ok ? "PASS" : "FAIL") << "\n";
    }
    std::cout << "overall: " << (all_ok ? "PASS" : "FAIL") << "\n";
    return all_ok ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"cesim: cross-entropy architecture-search simulator"};
    app.require_subcommand(1);

    auto* sim = app.add_subcommand("simulate", "run the full pipeline from a config file");
    std::string config_path, out_dir = "out";
    uint64_t seed = 0;
    bool seed_given = false;
    sim->add_option("--config", config_path, "flat key = value config file")->required();
    auto* seed_opt = sim->add_option("--seed", seed, "seed override");
    sim->add_option("--out", out_dir, "output directory")->required();

    auto* mk = app.add_subcommand("markov", "token-error channel closed forms + monte-carlo");
    double eps = 0.005, gamma = 0.3, alpha = 0.2, pi_full = 1.0, pi_delta = 1.0;
    uint32_t lfull = 200;
    uint64_t trials = 0, mseed = 1;
    mk->add_option("--eps", eps, "base error rate")->required();
    mk->add_option("--gamma", gamma, "error persistence")->required();
    mk->add_option("--alpha", alpha, "delta length fraction")->required();
    mk->add_option("--lfull", lfull, "full output length")->required();
    mk->add_option("--pi-full", pi_full, "format validity, full mode");
    mk->add_option("--pi-delta", pi_delta, "format validity, delta mode");
    mk->add_option("--trials", trials, "monte-carlo chains per mode");
    mk->add_option("--seed", mseed, "monte-carlo seed");

    auto* nov = app.add_subcommand("novelty", "filter a token stream");
    std::string input;
    double tau_nov = 0.90;
    uint32_t k = 128, window = 3;
    uint64_t nseed = 1;
    nov->add_option("--input", input, "file with one whitespace-separated genome per line")
        ->required();
    nov->add_option("--tau-nov", tau_nov, "similarity threshold")->required();
    nov->add_option("--k", k, "signature length")->required();
    nov->add_option("--window", window, "shingle window");
    nov->add_option("--seed", nseed, "permutation seed");

    auto* px = app.add_subcommand("proxy", "snr + correlation table from a pairs csv");
    std::string proxy_csv;
    px->add_option("--csv", proxy_csv, "proxy_full_pairs.csv-style file")->required();

    auto* ck = app.add_subcommand("check", "re-run verdicts on an emitted trajectory csv");
    std::string check_csv;
    uint64_t population = 500;
    double delta = 0.05;
    ck->add_option("--csv", check_csv, "cycle_data.csv-style file")->required();
    ck->add_option("--population", population, "per-cycle sample count used for SE");
    ck->add_option("--delta", delta, "geometric-rate target slack");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e); // prints help, exit 0
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        seed_given = seed_opt->count() > 0;
        if (sim->parsed()) return cmd_simulate(config_path, seed_given, seed, out_dir);
        if (mk->parsed())
            return cmd_markov(eps, gamma, alpha, lfull, pi_full, pi_delta, trials, mseed);
        if (nov->parsed()) return cmd_novelty(input, tau_nov, k, window, nseed);
        if (px->parsed()) return cmd_proxy(proxy_csv);
        if (ck->parsed()) return cmd_check(check_csv, population, delta);
    } catch (const IngestError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}
