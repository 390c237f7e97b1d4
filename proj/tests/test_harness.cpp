#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>

#include "cesim/harness.hpp"

using namespace cesim;
using namespace cesim::harness;

TEST_CASE("config parsing round trip") {
    std::istringstream in(R"(
# demo configuration
label = demo
seed = 7
cycles = 4
population = 100
tau = 0.5
tau_nov = 0.9
lambda0 = 1.0
family = full
fit = corpus
landscape = match
genome_length = 12
alphabet = 4
theta0 = uniform
channel = off
)");
    const auto cfg = parse_config(in);
    CHECK(cfg.label == "demo");
    CHECK(cfg.seed == 7);
    CHECK(cfg.cycles == 4);
    CHECK(cfg.population == 100);
    CHECK(cfg.genome_length == 12);
}

TEST_CASE("config validation") {
    std::istringstream no_seed("cycles = 3\n");
    CHECK_THROWS_AS(parse_config(no_seed), ValidationError);
    std::istringstream bad_key("seed = 1\nwhatever = 2\n");
    CHECK_THROWS_AS(parse_config(bad_key), ValidationError);
    std::istringstream bad_tau("seed = 1\ntau = 1.5\n");
    CHECK_THROWS_AS(parse_config(bad_tau), ValidationError);
    std::istringstream bad_val("seed = 1\npopulation = abc\n");
    CHECK_THROWS_AS(parse_config(bad_val), ValidationError);
}

TEST_CASE("cycle csv ingestion happy path and diagnostics") {
    std::istringstream good(
        "llm,cycle,valid_rate,elite_concentration,mean_quality,admissions\n"
        "a,0,0.5,0.25,0.4,3\n"
        "a,1,0.52,,0.45,0\n");
    const auto recs = ingest_cycle_csv(good);
    CHECK(recs.size() == 2);
    CHECK(recs[0].elite_concentration.has_value());
    CHECK_FALSE(recs[1].elite_concentration.has_value());
    CHECK(recs[1].admissions == 0);

    std::istringstream bad_header("llm,cycle,valid_rate\n");
    CHECK_THROWS_AS(ingest_cycle_csv(bad_header), IngestError);

    std::istringstream bad_range(
        "llm,cycle,valid_rate,elite_concentration,mean_quality,admissions\n"
        "a,0,1.2,0.25,0.4,3\n");
    CHECK_THROWS_WITH_AS(ingest_cycle_csv(bad_range),
                         doctest::Contains("line 2"), IngestError);

    std::istringstream not_num(
        "llm,cycle,valid_rate,elite_concentration,mean_quality,admissions\n"
        "a,0,x,0.25,0.4,3\n"
        "a,1,0.5,0.25,0.4,y\n");
    try {
        ingest_cycle_csv(not_num);
        CHECK(false);
    } catch (const IngestError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("line 2") != std::string::npos);
        CHECK(msg.find("line 3") != std::string::npos);
    }
}

TEST_CASE("unknown trailing columns are tolerated and preserved") {
    std::istringstream in(
        "llm,cycle,valid_rate,elite_concentration,mean_quality,admissions,corpus_size,extra\n"
        "a,0,0.5,0.25,0.4,3,17,zzz\n");
    const auto recs = ingest_cycle_csv(in);
    REQUIRE(recs.size() == 1);
    REQUIRE(recs[0].extras.size() == 2);
    CHECK(recs[0].extras[0].first == "corpus_size");
    CHECK(recs[0].extras[0].second == "17");
    CHECK(recs[0].extras[1].second == "zzz");

    std::ostringstream out;
    write_cycle_csv(out, recs);
    std::istringstream back(out.str());
    CHECK(ingest_cycle_csv(back) == recs);
}

TEST_CASE("proxy csv ingestion") {
    std::istringstream in(
        "llm,arch_id,dataset,proxy_acc,full_acc\n"
        "mistral,a1,mnist,0.91,0.95\n"
        "mistral,a2,celeba,0.72,0.88\n"
        "qwen,b1,mnist,0.93,0.97\n");
    const auto recs = ingest_proxy_csv(in);
    CHECK(recs.size() == 3);
    CHECK(recs[1].dataset == "celeba");

    std::ostringstream out;
    write_proxy_csv(out, recs);
    std::istringstream back(out.str());
    CHECK(ingest_proxy_csv(back) == recs);

    std::istringstream bad(
        "llm,arch_id,dataset,proxy_acc,full_acc\n"
        "m,a,d,1.2,0.5\n");
    CHECK_THROWS_AS(ingest_proxy_csv(bad), IngestError);
}

TEST_CASE("smoothed quality") {
    const std::vector<double> q = {0.60, 0.66, 0.63};
    const auto sm = smoothed_quality(q, 3);
    CHECK(sm[1] == doctest::Approx(0.63));
    CHECK(sm[0] == doctest::Approx((0.60 + 0.66) / 2)); // truncated edge window

    const std::vector<double> flat = {0.5, 0.5, 0.5, 0.5};
    CHECK(smoothed_quality(flat, 3) == flat);
    CHECK(smoothed_quality(q, 1) == q);
    CHECK_THROWS_AS(smoothed_quality(std::vector<double>{}, 3), ValidationError);
    CHECK_THROWS_AS(smoothed_quality(q, 2), ValidationError);
}

TEST_CASE("plateau detection") {
    // strictly increasing: no plateau
    std::vector<double> rising;
    for (int i = 0; i < 10; ++i) rising.push_back(0.1 + 0.05 * i);
    CHECK_FALSE(plateau_detect(rising, 5, 0.03).has_value());

    // constant trajectory plateaus from cycle 0
    const std::vector<double> flat(8, 0.42);
    auto p = plateau_detect(flat, 5, 0.03);
    REQUIRE(p.has_value());
    CHECK(p->first == doctest::Approx(0.42));
    CHECK(p->second == 0);

    const std::vector<double> traj = {0.5, 0.6, 0.7, 0.74, 0.73, 0.75, 0.74, 0.76};
    p = plateau_detect(traj, 5, 0.03);
    REQUIRE(p.has_value());
    CHECK(p->first == doctest::Approx(0.744));
    CHECK(p->second == 3);

    CHECK_FALSE(plateau_detect(std::vector<double>{0.1, 0.2}, 5, 0.03).has_value());
}

TEST_CASE("static corpus hits the requested quality level") {
    Architecture target(20);
    for (size_t j = 0; j < 20; ++j) target[j] = static_cast<uint8_t>(j % 4);

    const auto qm = QualityFunction::match_ratio(target, 4);
    for (const auto& g : make_static_corpus(qm, 8, 0.5))
        CHECK(qm.evaluate(g) == doctest::Approx(0.5).epsilon(0.01));

    const auto qt = QualityFunction::deceptive_trap(target, 4, 4, 0.3);
    for (const auto& g : make_static_corpus(qt, 8, 0.8))
        CHECK(qt.evaluate(g) == doctest::Approx(0.8).epsilon(0.01));
    // distinct genomes
    const auto statics = make_static_corpus(qm, 8, 0.5);
    for (size_t i = 0; i < statics.size(); ++i)
        for (size_t j = i + 1; j < statics.size(); ++j) CHECK(statics[i] != statics[j]);
}

TEST_CASE("zero-cycle experiment reports no cycles") {
    ExperimentConfig cfg;
    cfg.seed = 1;
    cfg.seed_set = true;
    cfg.cycles = 0;
    cfg.genome_length = 8;
    cfg.alphabet = 2;
    const auto result = run_experiment(cfg);
    CHECK(result.runs.size() == 1);
    CHECK(result.runs[0].records.empty());
    const auto text = render_report(result);
    CHECK(text.find("no cycles") != std::string::npos);
}

TEST_CASE("experiment is deterministic including report bytes") {
    ExperimentConfig cfg;
    cfg.seed = 11;
    cfg.seed_set = true;
    cfg.cycles = 5;
    cfg.population = 200;
    cfg.genome_length = 12;
    cfg.alphabet = 3;
    const auto r1 = run_experiment(cfg);
    const auto r2 = run_experiment(cfg);
    CHECK(render_report(r1) == render_report(r2));
    CHECK(r1.runs[0].records == r2.runs[0].records);
}

TEST_CASE("in-run verdicts equal verdicts recomputed from the emitted csv") {
    ExperimentConfig cfg;
    cfg.seed = 5;
    cfg.seed_set = true;
    cfg.cycles = 8;
    cfg.population = 300;
    cfg.genome_length = 12;
    cfg.alphabet = 3;
    const auto result = run_experiment(cfg);
    std::ostringstream out;
    write_cycle_csv(out, result.runs[0].records);
    std::istringstream back(out.str());
    const auto recs = ingest_cycle_csv(back);
    const auto v = verdicts_from_records(recs, cfg.delta, cfg.population);
    CHECK(v.geometric.applicable == result.runs[0].verdicts.geometric.applicable);
    CHECK(v.geometric.all_ok == result.runs[0].verdicts.geometric.all_ok);
    CHECK(v.geometric.ok == result.runs[0].verdicts.geometric.ok);
    CHECK(v.smoothed_q_ok == result.runs[0].verdicts.smoothed_q_ok);
    CHECK(v.admissions_every_cycle == result.runs[0].verdicts.admissions_every_cycle);
}

TEST_CASE("paired channel runs show the delta valid-rate advantage") {
    ExperimentConfig cfg;
    cfg.seed = 3;
    cfg.seed_set = true;
    cfg.cycles = 6;
    cfg.population = 400;
    cfg.genome_length = 12;
    cfg.alphabet = 3;
    cfg.channel = ExperimentConfig::ChannelMode::both;
    cfg.channel_params.eps = 0.005;
    cfg.channel_params.gamma = 0.3;
    cfg.channel_params.alpha = 0.2;
    cfg.channel_params.l_full = 200;
    const auto result = run_experiment(cfg);
    REQUIRE(result.runs.size() == 2);
    REQUIRE(result.paired_valid_rate_ratio.has_value());
    CHECK(*result.paired_valid_rate_ratio > 1.0);
    // ratio should land near the closed form (2.23 at these parameters)
    CHECK(*result.paired_valid_rate_ratio ==
          doctest::Approx(valid_rate_ratio(cfg.channel_params)).epsilon(0.15));
    // identical genomes across modes: same seeds, same sampler
    CHECK(result.runs[0].records[0].llm == "sim_full");
    CHECK(result.runs[1].records[0].llm == "sim_delta");
}

TEST_CASE("proxy analysis groups, orders and flags sentinels") {
    std::vector<ProxyPairRecord> recs;
    auto add = [&](const std::string& llm, double proxy, double full) {
        ProxyPairRecord r;
        r.llm = llm;
        r.arch_id = "a" + std::to_string(recs.size());
        r.dataset = "d";
        r.proxy_acc = proxy;
        r.full_acc = full;
        recs.push_back(r);
    };
    // strong group: proxy tracks full closely over a wide spread
    add("strong", 0.10, 0.12);
    add("strong", 0.30, 0.33);
    add("strong", 0.50, 0.52);
    add("strong", 0.70, 0.74);
    add("strong", 0.90, 0.91);
    // weak group: proxy unrelated to full, tiny full spread
    add("weak", 0.2, 0.500);
    add("weak", 0.8, 0.501);
    add("weak", 0.4, 0.499);
    add("weak", 0.6, 0.5005);
    // perfect group: proxy == full -> infinite snr sentinel
    add("perfect", 0.3, 0.3);
    add("perfect", 0.5, 0.5);
    add("perfect", 0.7, 0.7);
    // tiny group: skipped
    add("tiny", 0.5, 0.5);

    const auto analysis = analyze_proxy_records(recs);
    REQUIRE(analysis.rows.size() == 4);
    CHECK(analysis.rows[0].label == "strong");
    CHECK(analysis.rows[3].skipped);
    CHECK(analysis.rows[2].snr.infinite);
    CHECK(analysis.snr_order.front() == "perfect");
    // duplicate labels merge into one group
    std::vector<ProxyPairRecord> dup = {recs[0], recs[5], recs[1], recs[6], recs[2]};
    const auto merged = analyze_proxy_records(dup);
    CHECK(merged.rows.size() == 2);

    const auto text = render_proxy_report(analysis);
    CHECK(text.find("strong") != std::string::npos);
    CHECK(text.find("inf") != std::string::npos);
}
