#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "cesim/ce_engine.hpp"
#include "cesim/novelty.hpp"
#include "cesim/rng.hpp"

using namespace cesim;

namespace {
Architecture random_genome(rng::Stream& s, size_t len, uint32_t m) {
    Architecture a(len);
    for (auto& t : a) t = static_cast<uint8_t>(s.next_below(m));
    return a;
}
} // namespace

TEST_CASE("shingling") {
    // windows of 123123: (1,2,3),(2,3,1),(3,1,2),(1,2,3) -> 3 distinct
    CHECK(shingle(Architecture{1, 2, 3, 1, 2, 3}, 3).hashes.size() == 3);
    CHECK_THROWS_AS(shingle(Architecture{1, 2}, 3), ValidationError);
    CHECK(shingle(Architecture{1, 2, 3}, 3).hashes.size() == 1);
}

TEST_CASE("exact jaccard") {
    const auto a = shingle(Architecture{0, 1, 2, 3, 0, 1, 2, 3}, 3);
    CHECK(exact_jaccard(a, a) == 1.0);
    const auto b = shingle(Architecture{3, 2, 1, 0, 3, 2, 1, 0}, 3);
    CHECK(exact_jaccard(a, b) == 0.0);
    // {a,b,c} vs {b,c,d} -> 2 common / 4 union
    ShingleSet x{{10, 20, 30}, 3};
    ShingleSet y{{20, 30, 40}, 3};
    CHECK(exact_jaccard(x, y) == 0.5);
    CHECK_THROWS_AS(exact_jaccard(ShingleSet{{}, 3}, x), ValidationError);
}

TEST_CASE("identical sets give identical signatures") {
    NoveltyFilter f(0.9, 3, 128, 7);
    const auto s = shingle(Architecture{0, 1, 2, 3, 2, 1, 0, 2}, 3);
    const auto sig1 = f.signature(s);
    const auto sig2 = f.signature(s);
    CHECK(sig1.minima == sig2.minima);
    CHECK(estimate_jaccard(sig1, sig2) == 1.0);
}

TEST_CASE("estimate_jaccard rejects incompatible signatures") {
    NoveltyFilter f1(0.9, 3, 64, 7), f2(0.9, 3, 64, 8), f3(0.9, 3, 32, 7);
    const auto s = shingle(Architecture{0, 1, 2, 3, 2, 1, 0, 2}, 3);
    CHECK_THROWS_AS(estimate_jaccard(f1.signature(s), f2.signature(s)), ValidationError);
    CHECK_THROWS_AS(estimate_jaccard(f1.signature(s), f3.signature(s)), ValidationError);
}

TEST_CASE("minhash estimator is unbiased across permutation seeds") {
    // 50 random set pairs; estimate averaged over 200 filter seeds per pair
    rng::Stream s(101, 0);
    const int k = 128, seeds = 200;
    int checked = 0;
    for (int pair = 0; pair < 50; ++pair) {
        const auto a = random_genome(s, 40, 4);
        Architecture b = a;
        for (auto& t : b)
            if (s.next_double() < 0.25) t = static_cast<uint8_t>(s.next_below(4));
        const auto sa = shingle(a, 3);
        const auto sb = shingle(b, 3);
        const double j = exact_jaccard(sa, sb);
        if (j == 0.0 || j == 1.0) continue;
        ++checked;
        double acc = 0;
        for (int seed = 0; seed < seeds; ++seed) {
            NoveltyFilter f(0.9, 3, k, static_cast<uint64_t>(seed) + 1000);
            acc += estimate_jaccard(f.signature(sa), f.signature(sb));
        }
        const double mean = acc / seeds;
        const double se = std::sqrt(j * (1 - j) / k / seeds);
        CHECK(std::abs(mean - j) <= 3.5 * se + 1e-12);
    }
    CHECK(checked >= 40);
}

TEST_CASE("single-estimate spread at J=0.5 stays within the binomial bound") {
    // sd of the estimate is sqrt(J(1-J)/k) <= 0.045 at k=128
    ShingleSet x, y;
    x.window = y.window = 1;
    for (uint64_t i = 0; i < 60; ++i) x.hashes.push_back(i);
    for (uint64_t i = 20; i < 80; ++i) y.hashes.push_back(i); // J = 40/80 = 0.5
    CHECK(exact_jaccard(x, y) == 0.5);
    double acc = 0, sq = 0;
    const int seeds = 400;
    for (int seed = 0; seed < seeds; ++seed) {
        NoveltyFilter f(0.9, 1, 128, static_cast<uint64_t>(seed));
        const double e = estimate_jaccard(f.signature(x), f.signature(y));
        acc += e;
        sq += e * e;
    }
    const double mean = acc / seeds;
    const double sd = std::sqrt(sq / seeds - mean * mean);
    CHECK(sd <= 0.045 * 1.15); // binomial sd plus sampling slop
}

TEST_CASE("admission semantics") {
    NoveltyFilter f(0.9, 3, 128, 3);
    const Architecture a = {0, 1, 2, 3, 0, 1, 2, 3, 0, 1};
    CHECK(f.admit(a));        // empty corpus always admits
    CHECK_FALSE(f.admit(a));  // resubmission rejected
    CHECK(f.size() == 1);
    Architecture far = {3, 3, 3, 3, 3, 3, 3, 3, 3, 3};
    CHECK(f.admit(far));
    CHECK(f.size() == 2);
}

TEST_CASE("near-duplicate stream is rejected at high rate") {
    // long genomes so a single-token edit yields exact J ~ 0.95
    rng::Stream s(55, 0);
    const size_t len = 120;
    int rejected = 0, trials = 0;
    for (int rep = 0; rep < 1000; ++rep) {
        NoveltyFilter f(0.9, 3, 128, static_cast<uint64_t>(rep));
        const auto base = random_genome(s, len, 4);
        if (!f.admit(base)) continue;
        Architecture near = base;
        const size_t pos = 2 + s.next_below(len - 4); // interior token
        near[pos] = static_cast<uint8_t>((near[pos] + 1 + s.next_below(3)) % 4);
        const double j = exact_jaccard(shingle(base, 3), shingle(near, 3));
        if (j < 0.93) continue; // keep the controlled-J trials only
        ++trials;
        rejected += !f.admit(near);
    }
    CHECK(trials >= 500);
    CHECK(static_cast<double>(rejected) / trials >= 0.95);
}

TEST_CASE("separation check on controlled corpora") {
    // singleton corpus vacuously separated
    NoveltyFilter f(0.9, 3, 128, 1);
    CHECK(f.admit(Architecture{0, 1, 2, 3, 0, 1, 2, 3}));
    auto rep = f.separation();
    CHECK(rep.pairs == 0);
    CHECK(rep.violations == 0);

    // disjoint shingle sets separated at any threshold
    std::vector<ShingleSet> disjoint = {ShingleSet{{1, 2, 3}, 3}, ShingleSet{{4, 5, 6}, 3},
                                        ShingleSet{{7, 8}, 3}};
    CHECK(separation_check(disjoint, 0.99, -1.0, 128).violations == 0);

    // admitted members respect the threshold up to estimator slack
    rng::Stream s(66, 0);
    NoveltyFilter g(0.9, 3, 128, 9);
    for (int i = 0; i < 400; ++i) g.admit(random_genome(s, 24, 4));
    CHECK(g.size() >= 50);
    CHECK(g.separation().violations == 0);
}

TEST_CASE("collapse diagnostics closed forms") {
    const auto d = GenDistribution::uniform(4, 2);
    auto diag = collapse_diagnostics(d, 4, 0.5);
    CHECK(diag.delta_t == doctest::Approx(std::exp(-2.0)));
    CHECK(binary_entropy(0.5) == doctest::Approx(std::numbers::ln2));
    CHECK(diag.entropy == doctest::Approx(4 * std::numbers::ln2));
    CHECK(diag.max_genome_prob == doctest::Approx(1.0 / 16));
    CHECK_FALSE(diag.max_prob_flagged);
    CHECK_THROWS_AS(collapse_diagnostics(d, 1, 0.5), ValidationError);
    CHECK_THROWS_AS(collapse_diagnostics(d, 4, -0.1), ValidationError);
}

TEST_CASE("two-member unsmoothed fit cannot collapse") {
    const Architecture g1 = {0, 0, 0, 0, 0, 0};
    const Architecture g2 = {1, 1, 1, 0, 0, 0};
    const std::vector<Architecture> corpus = {g1, g2};
    const auto d = GenDistribution::fit_full(corpus, {}, 0.0, 6, 2);
    CHECK(d.max_genome_prob() <= 0.5 + 1e-9);
    CHECK(d.entropy() >= std::numbers::ln2 - 1e-9);
}

TEST_CASE("delta_t decays strictly with corpus size at fixed K*") {
    const auto d = GenDistribution::uniform(4, 2);
    double prev = 1.0;
    for (uint64_t size : {2ull, 4ull, 8ull, 32ull, 100ull}) {
        const auto diag = collapse_diagnostics(d, size, 0.37);
        CHECK(diag.delta_t < prev);
        prev = diag.delta_t;
    }
}

TEST_CASE("filter parameter validation") {
    CHECK_THROWS_AS(NoveltyFilter(0.0, 3, 128, 1), ValidationError);
    CHECK_THROWS_AS(NoveltyFilter(1.0, 3, 128, 1), ValidationError);
    CHECK_THROWS_AS(NoveltyFilter(0.9, 0, 128, 1), ValidationError);
    CHECK_THROWS_AS(NoveltyFilter(0.9, 3, 0, 1), ValidationError);
}
